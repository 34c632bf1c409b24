"""Pick the compiled kernel module if it is importable, else the numpy one.

Set ``RABI_LAB_PURE=1`` to force the pure-Python kernels.
"""
import os

from . import _purepy

if os.environ.get("RABI_LAB_PURE", "") not in ("", "0"):
    kernels = _purepy
    BACKEND = "python"
else:
    try:
        from . import _core as kernels
        BACKEND = "cython"
    except ImportError:
        kernels = _purepy
        BACKEND = "python"


def available_backends():
    """Mapping of backend name to kernel module, for tests and benchmarks."""
    found = {"python": _purepy}
    try:
        from . import _core
        found["cython"] = _core
    except ImportError:
        pass
    return found
