"""Kernel backend selection.

The compiled ``_core`` extension is used when importable; ``_pycore`` is the
numpy fallback. ``HNOMA_SIM_BACKEND=python`` forces the fallback.
"""
import os

from . import _pycore

try:
    from . import _core
except ImportError:  # extension not built
    _core = None

if _core is not None and os.environ.get("HNOMA_SIM_BACKEND", "").lower() != "python":
    impl = _core
    name = "cython"
else:
    impl = _pycore
    name = "python"


def available():
    """Names of the backends that can be loaded in this install."""
    return ["cython", "python"] if _core is not None else ["python"]


def get(backend_name):
    if backend_name == "python":
        return _pycore
    if backend_name == "cython":
        if _core is None:
            raise ImportError("compiled kernels are not built")
        return _core
    raise ValueError(f"unknown backend {backend_name!r}")
