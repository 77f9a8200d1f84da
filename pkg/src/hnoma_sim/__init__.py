"""Link-level simulator for uplink hybrid power/code-domain NOMA."""
from . import _backend

__version__ = "0.1.0"
BACKEND = _backend.name
