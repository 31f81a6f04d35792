"""JIT selection for the numeric kernels.

Set ``SIPNS_PURE_NUMPY=1`` (or numba's own ``NUMBA_DISABLE_JIT=1``) to run
the kernels as plain Python/numpy. The flag is read once at import time.
"""

import os

_FALSY = ("", "0", "false", "no", "off")


def _flag(name):
    return os.environ.get(name, "").strip().lower() not in _FALSY


PURE_NUMPY = _flag("SIPNS_PURE_NUMPY") or _flag("NUMBA_DISABLE_JIT")

if not PURE_NUMPY:
    try:
        import numba
    except ImportError:  # pragma: no cover - numba is a declared dependency
        numba = None
        PURE_NUMPY = True
else:
    numba = None

BACKEND = "numpy" if PURE_NUMPY else "numba"

# nogil lets sweep/optimize fan out over threads.
NUMBA_OPTS = {"cache": True, "nogil": True}


def jit(fn):
    """Compile ``fn`` with numba unless the pure-numpy path is selected."""
    if PURE_NUMPY:
        return fn
    return numba.njit(**NUMBA_OPTS)(fn)
