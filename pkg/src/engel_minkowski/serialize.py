"""JSON envelope shared by the library and the command line."""

import json

SCHEMA_VERSION = 1


def dumps(payload) -> str:
    """Render ``payload`` (an object with ``to_json`` or a dict) as versioned JSON."""
    if hasattr(payload, "to_json"):
        payload = payload.to_json()
    return json.dumps({"schema": SCHEMA_VERSION, **payload}, indent=2)
