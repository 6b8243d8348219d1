"""The n-th compound-Poisson approximation of the local-time field.

The pre-limit object is a compound Poisson process with unit negative drift,
arrival rate gamma_n <= 1/c and jump law

    Pi_n = (1 - theta_n) * Exp(c) + theta_n * Exp(c) (+) Lambda_n,

where Lambda_n rescales the jump measure beyond a truncation level eta_n.
Rescaled by n (space) and n^2 (time), its local times converge to the target
field; the renewal resolvent R_Pi of gamma_n * Pi_bar_n approaches W' after
time rescaling, which is this module's own convergence diagnostic.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from ._kernels import kernel, state_arg
from ._rng import Stream
from .exceptions import GridError, ModelError
from .models import (AtomicJumps, ExponentialJumps, LevyModel,
                     TemperedPowerJumps, ZeroJumps)
from .volterra import linear_resolvent

__all__ = ["CpApprox", "build_approx", "resolvent_R2", "sample_jump",
           "sample_ancestor_lifetime", "sample_jumps",
           "sample_ancestor_lifetimes", "expected_population"]

_EMPTY = np.empty(0, dtype=float)


@dataclass(frozen=True)
class SamplerPack:
    """Family-specific overshoot mechanisms in kernel-friendly form."""

    jump_mech: int = 0          # 0 none, 1 exponential, 2 table, 3 categorical
    jump_p1: float = 0.0
    jump_tab_u: np.ndarray = field(default_factory=lambda: _EMPTY)
    jump_tab_y: np.ndarray = field(default_factory=lambda: _EMPTY)
    jump_cumw: np.ndarray = field(default_factory=lambda: _EMPTY)
    jump_vals: np.ndarray = field(default_factory=lambda: _EMPTY)
    anc_mech: int = 0
    anc_p1: float = 0.0
    anc_tab_u: np.ndarray = field(default_factory=lambda: _EMPTY)
    anc_tab_y: np.ndarray = field(default_factory=lambda: _EMPTY)


@dataclass(frozen=True)
class CpApprox:
    n: int
    eta: float
    theta: float
    gamma: float
    p: float
    pi_mean: float              # mean jump size ||Pi_bar||_L1
    lambda_mean: float          # ||Lambda_bar||_L1
    c: float
    b: float
    fast_step: float            # resolvent grid step on the pre-rescaled axis
    horizon_fast: float
    r_grid: np.ndarray          # R_Pi on the fast grid
    r_cum: np.ndarray           # int_0^t R_Pi
    pi_bar: np.ndarray          # Pi_bar_n on the fast grid
    pack: SamplerPack
    model_fingerprint: str

    def r_at_fast(self, t):
        return np.interp(t, np.arange(self.r_grid.shape[0]) * self.fast_step,
                         self.r_grid)

    def r_at_slow(self, t_slow):
        """R_Pi(n * t): the rescaled resolvent that approaches W'(t)."""
        return self.r_at_fast(np.asarray(t_slow) * self.n)


def _bisect_tail(jumps, target: float) -> float:
    """eta with nu_bar(eta) = target, to relative 1e-10."""
    lo, hi = 1e-300, 1.0
    for _ in range(2100):
        if jumps.tail(hi) < target:
            break
        hi *= 2.0
    else:
        raise ModelError("tail bisection bracket failure (upper)")
    while jumps.tail(lo) < target:
        if lo > 1e300:
            raise ModelError("tail bisection bracket failure (lower)")
        lo *= 2.0  # pragma: no cover - tail(0+)=inf for supported families
    for _ in range(200):
        mid = math.sqrt(lo * hi)
        if jumps.tail(mid) > target:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-10 * lo:
            break
    return 0.5 * (lo + hi)


def _tail_table(values_fn, eta: float, ref: float, n: int, n_nodes: int = 16384):
    """(u, y) nodes of the inverse CDF of the n(Y - eta) overshoot law.

    values_fn(z) must be a decreasing tail-type function with values_fn(eta)=ref;
    the CDF is 1 - values_fn(z)/ref.
    """
    span = np.geomspace(1e-9, 1.0, n_nodes // 2)
    zmax = eta if eta > 0 else 1.0
    # expand until the remaining tail mass is negligible
    while values_fn(eta + zmax) / ref > 1e-13:
        zmax *= 2.0
    z = eta + np.concatenate([span * min(1.0, zmax), np.geomspace(
        min(1.0, zmax), zmax, n_nodes - n_nodes // 2)])
    z = np.unique(z)
    u = 1.0 - values_fn(z) / ref
    u = np.concatenate([[0.0], u, [1.0]])
    y = np.concatenate([[eta], z, [z[-1]]])
    u, idx = np.unique(u, return_index=True)
    return u, (y[idx] - eta) * n


def _build_pack(model: LevyModel, n: int, eta: float) -> SamplerPack:
    jumps = model.jumps
    if isinstance(jumps, ZeroJumps):
        return SamplerPack()
    if isinstance(jumps, ExponentialJumps):
        # memoryless: both the conditional overshoot and its size-biased
        # version are Exp(mean n*m) on the fast axis
        return SamplerPack(jump_mech=1, jump_p1=n * jumps.mean,
                           anc_mech=1, anc_p1=n * jumps.mean)
    if isinstance(jumps, AtomicJumps):
        w = np.array([a[0] for a in jumps.atoms])
        locs = np.array([a[1] for a in jumps.atoms])
        cumw = np.cumsum(w) / w.sum()
        vals = locs * n
        # ancestor overshoot: exact piecewise-linear inverse of the
        # integrated tail
        knots = np.concatenate([[0.0], locs])
        iv = np.concatenate([[jumps.itail0()], np.asarray(jumps.itail(locs))])
        u = 1.0 - iv / iv[0]
        return SamplerPack(jump_mech=3, jump_cumw=cumw, jump_vals=vals,
                           anc_mech=2, anc_tab_u=u, anc_tab_y=knots * n)
    if isinstance(jumps, TemperedPowerJumps):
        ju, jy = _tail_table(lambda z: np.asarray(jumps.tail(z), dtype=float),
                             eta, float(jumps.tail(eta)), n)
        au, ay = _tail_table(lambda z: np.asarray(jumps.itail(z), dtype=float),
                             eta, float(jumps.itail(eta)), n)
        return SamplerPack(jump_mech=2, jump_tab_u=ju, jump_tab_y=jy,
                           anc_mech=2, anc_tab_u=au, anc_tab_y=ay)
    raise ModelError(f"unsupported jump family {jumps.family!r}")


def build_approx(model: LevyModel, n: int, delta: float | None = None,
                 horizon: float = 3.0) -> CpApprox:
    """Build the n-th approximation with resolvent horizon n*horizon.

    delta is the slow-axis resolvent step (default c/(50n)); the stored grid
    lives on the fast axis with spacing n*delta, i.e. 50 samples per unit of
    the exponential kernel's width c.
    """
    model.require_valid()
    if n < 1:
        raise ValueError("n must be >= 1")
    jumps = model.jumps
    c = model.c
    if delta is None:
        delta = c / (50.0 * n)
    if delta <= 0 or horizon <= 0:
        raise GridError("delta and horizon must be positive")

    tail0 = jumps.tail0()
    if math.isfinite(tail0):
        eta = 0.0
        theta = c * tail0 / n**2
        if theta >= 1.0:
            raise ModelError(
                f"n={n} too small: theta = c*nu_bar(0)/n^2 = {theta:.3g} >= 1")
        itail_eta = jumps.itail0()
    else:
        theta = n ** -1.5
        eta = _bisect_tail(jumps, n**2 * theta / c)
        itail_eta = float(jumps.itail(eta))
    gamma = max(0.0, 1.0 - model.b / n - itail_eta / n) / c
    p = 1.0 / (1.0 + itail_eta / n)
    if jumps.is_zero or tail0 == 0.0:
        lambda_mean = 0.0
    else:
        tail_eta = tail0 if eta == 0.0 else float(jumps.tail(eta))
        lambda_mean = n * itail_eta / tail_eta
    pi_mean = c + theta * lambda_mean

    fast_step = n * delta
    k = int(round(n * horizon / fast_step))
    x = np.arange(k + 1) * fast_step
    pi_bar = np.exp(-x / c)
    if theta > 0.0:
        lam_bar = np.asarray(jumps.tail(eta + x / n) /
                             (tail0 if eta == 0.0 else jumps.tail(eta)))
        # h = e_c * Lambda_bar via an exact exponential integrator with
        # Lambda_bar linear on each cell
        e_step = math.exp(-fast_step / c)
        a0 = c * (1.0 - e_step)
        a1 = c - c**2 * (1.0 - e_step) / fast_step
        h = np.empty(k + 1)
        h[0] = 0.0
        for j in range(k):
            h[j + 1] = e_step * h[j] + (lam_bar[j] * (a0 - a1)
                                        + lam_bar[j + 1] * a1) / c
        pi_bar = pi_bar + theta * h

    r_grid = linear_resolvent(gamma * pi_bar, fast_step)
    r_cum = np.concatenate([[0.0], integrate.cumulative_trapezoid(
        r_grid, dx=fast_step)])

    return CpApprox(n=n, eta=eta, theta=theta, gamma=gamma, p=p,
                    pi_mean=pi_mean, lambda_mean=lambda_mean, c=c, b=model.b,
                    fast_step=fast_step, horizon_fast=k * fast_step,
                    r_grid=r_grid, r_cum=r_cum, pi_bar=pi_bar,
                    pack=_build_pack(model, n, eta),
                    model_fingerprint=model.fingerprint())


def resolvent_R2(approx: CpApprox, t: float, y: float) -> float:
    """Two-parameter resolvent R(t, y) = 1{y>t} + int_{t-y}^t R_Pi(s) ds."""
    if t < 0 or t > approx.horizon_fast + 1e-9:
        raise GridError("t outside the resolvent horizon")
    if y <= 0:
        raise ValueError("y must be positive")
    grid = np.arange(approx.r_cum.shape[0]) * approx.fast_step
    upper = float(np.interp(t, grid, approx.r_cum))
    lower = float(np.interp(max(t - y, 0.0), grid, approx.r_cum))
    return (1.0 if y > t else 0.0) + upper - lower


def sample_jump(approx: CpApprox, rng: Stream) -> float:
    """One jump size from Pi_n (pre-rescaled axis)."""
    pk = approx.pack
    state, val = kernel('draw_mixture')(
        state_arg(rng.state), approx.theta, approx.c, pk.jump_mech,
        pk.jump_p1, pk.jump_tab_u, pk.jump_tab_y, pk.jump_cumw, pk.jump_vals)
    rng.state = int(state)
    return val


def sample_ancestor_lifetime(approx: CpApprox, rng: Stream) -> float:
    """One ancestor residual lifetime from the size-biased law Pi*_n."""
    pk = approx.pack
    state, val = kernel('draw_mixture')(
        state_arg(rng.state), 1.0 - approx.p, approx.c, pk.anc_mech,
        pk.anc_p1, pk.anc_tab_u, pk.anc_tab_y, _EMPTY, _EMPTY)
    rng.state = int(state)
    return val


def sample_jumps(approx: CpApprox, rng: Stream, size: int) -> np.ndarray:
    out = np.empty(size)
    pk = approx.pack
    rng.state = int(kernel('bulk_mixture_draws')(
        state_arg(rng.state), approx.theta, approx.c, pk.jump_mech, pk.jump_p1,
        pk.jump_tab_u, pk.jump_tab_y, pk.jump_cumw, pk.jump_vals, out))
    return out


def sample_ancestor_lifetimes(approx: CpApprox, rng: Stream, size: int) -> np.ndarray:
    out = np.empty(size)
    pk = approx.pack
    rng.state = int(kernel('bulk_mixture_draws')(
        state_arg(rng.state), 1.0 - approx.p, approx.c, pk.anc_mech, pk.anc_p1,
        pk.anc_tab_u, pk.anc_tab_y, _EMPTY, _EMPTY, out))
    return out


def expected_population(approx: CpApprox, t_fast: float) -> float:
    """E[Z_k(t)] / k via quadrature of R(t, y) against the ancestor law.

    The ancestor density is Pi_bar(y)/||Pi_bar||; the stochastic-integral
    term of the second Volterra representation is centered, so this is the
    exact pre-limit mean per ancestor (up to grid quadrature).
    """
    if t_fast < 0 or t_fast > approx.horizon_fast + 1e-9:
        raise GridError("t outside the resolvent horizon")
    step = approx.fast_step
    i = int(round(t_fast / step))
    grid = np.arange(approx.pi_bar.shape[0]) * step
    # int_0^t Pi_bar and int_0^t Icum(t-y) Pi_bar(y) dy on the grid
    c1 = integrate.trapezoid(approx.pi_bar[:i + 1], dx=step)
    rev = approx.r_cum[:i + 1][::-1].copy()
    c2 = integrate.trapezoid(rev * approx.pi_bar[:i + 1], dx=step)
    icum_t = float(np.interp(t_fast, grid, approx.r_cum))
    return (approx.pi_mean - c1 + icum_t * approx.pi_mean - c2) / approx.pi_mean
