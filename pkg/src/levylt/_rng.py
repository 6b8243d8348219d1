"""Deterministic per-path random streams (SplitMix64 based).

Every simulated path owns one stream derived from (master seed, path index),
so ensembles are bit-reproducible regardless of worker count, scheduling or
backend.  Draw algorithms live in _impl; this module adds seed derivation
and a small object wrapper for single-stream use.
"""

import numpy as np

from ._kernels import kernel, state_arg

MASK = 0xFFFFFFFFFFFFFFFF
GOLDEN = 0x9E3779B97F4A7C15


def path_seed(master: int, index: int) -> int:
    """Initial SplitMix64 state for path `index` under `master`."""
    z = ((master & MASK) + ((index + 1) * GOLDEN & MASK)) & MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK
    return z ^ (z >> 31)


def path_seeds(master: int, n_paths: int) -> np.ndarray:
    return np.array([path_seed(master, j) for j in range(n_paths)],
                    dtype=np.uint64)


class Stream:
    """Single random stream with a Python-facing draw API."""

    def __init__(self, seed: int, index: int = 0):
        self.state = path_seed(seed, index)

    def _run(self, name, *args):
        state, val = kernel(name)(state_arg(self.state), *args)
        self.state = int(state)
        return val

    def uniform(self) -> float:
        return self._run("next_uniform")

    def exponential(self, mean: float = 1.0) -> float:
        return self._run("next_exponential", mean)

    def normal(self) -> float:
        return self._run("next_normal")

    def poisson(self, lam: float) -> int:
        return int(self._run("next_poisson", lam))

    def gamma(self, shape: float, scale: float = 1.0) -> float:
        return self._run("next_gamma", shape, scale)
