"""Backend loader for the numeric kernels in _impl.

The pure module is used as-is for the numpy backend.  For numba, a second
copy of _impl is loaded and every kernel is compiled in place, so nested
kernel calls resolve to compiled functions (calling a jitted sibling from
uncompiled code would retype the big-int RNG state and corrupt streams).
"""

import importlib.util
import sys

import numpy as np

from . import _impl as _py
from ._backend import HAVE_NUMBA, using_numba

_KERNELS = [
    "next_u64", "next_uniform", "next_exponential", "next_normal",
    "next_poisson", "next_gamma", "draw_mixture", "bulk_mixture_draws",
    "march_second_kind", "march_scale_singular", "conv_simpson",
    "conv_trapezoid", "op_r_density_grid", "op_f_density_grid",
    "op_r_atomic_grid", "op_f_atomic_grid",
    "cir_paths", "euler_paths", "cmj_events", "cmj_paths", "coupled_paths",
    "events_to_grid",
]
_PARALLEL = {"cir_paths", "euler_paths", "cmj_paths", "coupled_paths"}

_nb = None


def _load_numba_clone():
    global _nb
    from numba import njit

    spec = importlib.util.spec_from_file_location("levylt._impl_nb", _py.__file__)
    mod = importlib.util.module_from_spec(spec)
    sys.modules["levylt._impl_nb"] = mod
    spec.loader.exec_module(mod)
    for name in _KERNELS:
        fn = getattr(mod, name, None)
        if fn is None:
            continue
        opts = {"cache": True}
        if name in _PARALLEL:
            opts["parallel"] = True
        setattr(mod, name, njit(**opts)(fn))
    _nb = mod
    return mod


def kernel(name: str):
    """Kernel implementation for the active backend."""
    if using_numba():
        return getattr(_nb if _nb is not None else _load_numba_clone(), name)
    return getattr(_py, name)


def state_arg(state):
    """RNG state in the representation the active backend expects."""
    return np.uint64(state) if using_numba() else int(state)


def seeds_arg(seeds):
    """Per-path seed collection for the active backend."""
    if using_numba():
        return np.asarray(seeds, dtype=np.uint64)
    return [int(s) for s in seeds]
