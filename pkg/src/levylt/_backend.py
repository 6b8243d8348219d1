"""Numba/numpy backend selection.

Hot kernels are written once as plain Python over numpy arrays and compiled
with numba when available.  Set LEVYLT_BACKEND=numpy to force the uncompiled
fallback (bit-identical results, much slower); LEVYLT_BACKEND=numba demands
the compiled path and fails loudly if numba is missing.
"""

import os

try:
    from numba import njit, prange

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a hard dep, flag kept for portability
    HAVE_NUMBA = False
    prange = range

    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]

        def deco(fn):
            return fn

        return deco


_env = os.environ.get("LEVYLT_BACKEND", "").strip().lower()
if _env == "numba" and not HAVE_NUMBA:
    raise ImportError("LEVYLT_BACKEND=numba but numba is not importable")
_active = "numpy" if (_env == "numpy" or not HAVE_NUMBA) else "numba"


def backend() -> str:
    return _active


def set_backend(name: str) -> None:
    global _active
    if name not in ("numba", "numpy"):
        raise ValueError(f"unknown backend {name!r}")
    if name == "numba" and not HAVE_NUMBA:
        raise ValueError("numba backend requested but numba is not importable")
    _active = name


def using_numba() -> bool:
    return _active == "numba"


def jit_kernel(fn):
    """njit a kernel body, keeping the plain function reachable via .py_func."""
    if HAVE_NUMBA:
        return njit(cache=True)(fn)
    return fn


def jit_parallel(fn):
    if HAVE_NUMBA:
        return njit(cache=True, parallel=True)(fn)
    return fn


def py_func(fn):
    """Uncompiled version of a kernel produced by jit_kernel/jit_parallel."""
    return getattr(fn, "py_func", fn)
