"""Kernel backend selection.

Hot inner loops (the adaptive integrator march) are compiled with numba when
available. Setting HARDY_FUNDSOL_BACKEND=numpy forces the pure-Python/numpy
fallback; HARDY_FUNDSOL_BACKEND=numba requires numba and fails loudly if it
cannot be imported. The default ("auto") uses numba when importable.

Both paths execute the same source, so results agree to the last bit; only
speed differs. benchmarks/benchmark_kernels.py compares the two.
"""

import os

_VALID = ("auto", "numba", "numpy")


def _resolve():
    choice = os.environ.get("HARDY_FUNDSOL_BACKEND", "auto").strip().lower() or "auto"
    if choice not in _VALID:
        raise ValueError(
            f"HARDY_FUNDSOL_BACKEND must be one of {_VALID}, got {choice!r}"
        )
    if choice == "numpy":
        return "numpy", None
    try:
        import numba
    except ImportError:
        if choice == "numba":
            raise
        return "numpy", None
    return "numba", numba


BACKEND, _numba = _resolve()


def jit_if_enabled(fn):
    """Compile fn with numba in nopython mode, or return it unchanged."""
    if BACKEND == "numba":
        return _numba.njit(cache=True)(fn)
    return fn


def active_backend():
    return BACKEND
