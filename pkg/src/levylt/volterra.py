"""Linear resolvents, the nonlinear operators R and F, and the V_mu solver.

The Laplace functional of the local-time field is exp(-zeta * F(V_mu)(x)),
where V_mu solves

    V(t) = (W' * dmu)(t) - int_0^t R(V)(s) W'(t-s) ds,

R(f)(t) = c f(t)^2 + int (exp(-I) - 1 + I) nu(dy),  I = int_{(t-y)^+}^t f,
F(f)(t) = c f(t) + int (1 - exp(-I)) nu_bar(y) dy.

V_mu is found by Picard iteration over the whole window; the a-priori bound
0 <= V <= mu([0,t])/c is checked, never enforced by clamping.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from ._kernels import kernel
from .exceptions import ConvergenceError, GridError
from .models import (AtomicJumps, ExponentialJumps, LevyModel,
                     TemperedPowerJumps, ZeroJumps)
from .scale import ScaleTable

__all__ = ["BoundaryMeasure", "VolterraSolution", "linear_resolvent",
           "op_R", "op_F", "solve_V", "laplace_prediction"]

PICARD_TOL = 1e-10
PICARD_MAX_ITER = 200


@dataclass(frozen=True)
class BoundaryMeasure:
    """Finite measure on [0, T]: point masses plus a piecewise-constant density.

    atoms: ((location, mass), ...) with mass > 0, sorted by location.
    segments: ((start, stop, height), ...) for the density part.
    """

    atoms: tuple = ()
    segments: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "atoms", tuple(sorted(
            (float(s), float(m)) for s, m in self.atoms)))
        object.__setattr__(self, "segments", tuple(
            (float(a), float(b), float(h)) for a, b, h in self.segments))
        for s, m in self.atoms:
            if s < 0 or m <= 0:
                raise ValueError("atoms need location >= 0 and mass > 0")
        for a, b, h in self.segments:
            if a < 0 or b <= a or h < 0:
                raise ValueError("segments need 0 <= start < stop and height >= 0")

    def mass_up_to(self, t):
        t = np.asarray(t, dtype=float)
        out = np.zeros_like(t)
        for s, m in self.atoms:
            out = out + m * (t >= s)
        for a, b, h in self.segments:
            out = out + h * np.clip(t - a, 0.0, b - a)
        return out

    def total_mass(self) -> float:
        return float(sum(m for _, m in self.atoms)
                     + sum(h * (b - a) for a, b, h in self.segments))

    def density_on(self, grid):
        out = np.zeros_like(grid)
        for a, b, h in self.segments:
            out = out + h * ((grid >= a) & (grid < b))
        return out

    def support_end(self) -> float:
        ends = [s for s, _ in self.atoms] + [b for _, b, _ in self.segments]
        return max(ends) if ends else 0.0

    def is_zero(self) -> bool:
        return not self.atoms and all(h == 0 for _, _, h in self.segments)

    def scaled(self, factor: float) -> "BoundaryMeasure":
        return BoundaryMeasure(
            atoms=tuple((s, m * factor) for s, m in self.atoms),
            segments=tuple((a, b, h * factor) for a, b, h in self.segments))


@dataclass(frozen=True)
class VolterraSolution:
    dx: float
    horizon: float
    t: np.ndarray
    V: np.ndarray
    FV: np.ndarray
    iterations: int
    residuals: tuple
    mu: BoundaryMeasure
    model_fingerprint: str

    @property
    def final_residual(self) -> float:
        return self.residuals[-1] if self.residuals else 0.0


def linear_resolvent(g: np.ndarray, dx: float) -> np.ndarray:
    """Resolvent of the second kind: R = g + g * R, trapezoidal marching."""
    if dx <= 0:
        raise GridError("grid step must be positive")
    g = np.ascontiguousarray(g, dtype=float)
    if np.any(g < 0):
        raise ValueError("resolvent kernel must be non-negative")
    out = np.empty_like(g)
    status = kernel('march_second_kind')(g, g, dx, 1.0, 1.0, out)
    if status != 0:
        raise GridError("resolvent step too large: 1 - dx*g(0)/2 <= 0")
    return out


def _cumtrapz(f: np.ndarray, dx: float) -> np.ndarray:
    return np.concatenate([[0.0], integrate.cumulative_trapezoid(f, dx=dx)])


def op_R_grid(model: LevyModel, f: np.ndarray, dx: float) -> np.ndarray:
    """R(f) on the whole grid of f (step dx, starting at 0)."""
    f = np.ascontiguousarray(f, dtype=float)
    out = model.c * f**2
    jumps = model.jumps
    if isinstance(jumps, ZeroJumps):
        return out
    fcum = _cumtrapz(f, dx)
    grid = np.arange(f.shape[0]) * dx
    nu_part = np.empty_like(f)
    if isinstance(jumps, AtomicJumps):
        w = np.array([a[0] for a in jumps.atoms])
        locs = np.array([a[1] for a in jumps.atoms])
        kernel('op_r_atomic_grid')(fcum, locs, w, dx, nu_part)
    else:
        itail_t = np.empty_like(f)
        itail_t[0] = jumps.itail0()
        itail_t[1:] = jumps.itail(grid[1:])
        dens = np.zeros_like(f)
        skip = isinstance(jumps, TemperedPowerJumps)
        dens[1:] = jumps.density(grid[1:])
        s2 = 0.0
        if skip:
            # int_0^dx y^2 nu(dy) = 2*int_0^dx y nu_bar - dx^2 nu_bar(dx)
            t1 = float(jumps.itail_integral(dx)) - dx * float(jumps.itail(dx))
            s2 = 2.0 * t1 - dx**2 * float(jumps.tail(dx))
        else:
            dens[0] = jumps.density(0.0)
            itail_t[0] = jumps.itail0()
        kernel('op_r_density_grid')(f, fcum, dens, itail_t, dx, s2,
                                             skip, nu_part)
    return out + nu_part


def op_F_grid(model: LevyModel, f: np.ndarray, dx: float) -> np.ndarray:
    """F(f) on the whole grid of f."""
    f = np.ascontiguousarray(f, dtype=float)
    out = model.c * f
    jumps = model.jumps
    if isinstance(jumps, ZeroJumps):
        return out
    fcum = _cumtrapz(f, dx)
    grid = np.arange(f.shape[0]) * dx
    nu_part = np.empty_like(f)
    if isinstance(jumps, AtomicJumps):
        w = np.array([a[0] for a in jumps.atoms])
        locs = np.array([a[1] for a in jumps.atoms])
        scratch = np.empty_like(f)
        kernel('op_f_atomic_grid')(fcum, locs, w, dx, scratch, nu_part)
    else:
        itail_t = np.empty_like(f)
        itail_t[0] = jumps.itail0()
        itail_t[1:] = jumps.itail(grid[1:])
        tails = np.zeros_like(f)
        tails[1:] = jumps.tail(grid[1:])
        skip = isinstance(jumps, TemperedPowerJumps)
        t1 = 0.0
        if skip:
            t1 = float(jumps.itail_integral(dx)) - dx * float(jumps.itail(dx))
        else:
            tails[0] = jumps.tail0()
        kernel('op_f_density_grid')(f, fcum, tails, itail_t, dx, t1,
                                             skip, nu_part)
    return out + nu_part


def _at_grid_point(values: np.ndarray, dx: float, t: float):
    if t < -1e-12 or t > (values.shape[0] - 1) * dx + 1e-12:
        raise GridError("evaluation point outside the tabulated grid")
    return float(np.interp(t, np.arange(values.shape[0]) * dx, values))


def op_R(model: LevyModel, f: np.ndarray, dx: float, t: float) -> float:
    """R(f)(t) for f tabulated on [0, (len(f)-1)*dx]."""
    return _at_grid_point(op_R_grid(model, f, dx), dx, t)


def op_F(model: LevyModel, f: np.ndarray, dx: float, t: float) -> float:
    """F(f)(t)."""
    return _at_grid_point(op_F_grid(model, f, dx), dx, t)


def _wprime_conv_mu(table: ScaleTable, mu: BoundaryMeasure, n: int, dx: float):
    """(W' * dmu) on the grid; atoms by exact table shifts."""
    grid = np.arange(n + 1) * dx
    out = np.zeros(n + 1)
    for s, m in mu.atoms:
        k = int(round(s / dx))
        if abs(k * dx - s) < 1e-12 * max(1.0, s) and k <= n:
            if k == 0:
                out += m * table.Wp[:n + 1]
            else:
                out[k:] += m * table.Wp[:n + 1 - k]
        else:
            out += m * np.where(grid >= s, table.wp_at(grid - s), 0.0)
    dens = mu.density_on(grid)
    if np.any(dens > 0):
        conv = np.empty(n + 1)
        kernel('conv_trapezoid')(dens, table.Wp[:n + 1].copy(), dx, conv)
        out += conv
    return out


def solve_V(model: LevyModel, table: ScaleTable, mu: BoundaryMeasure,
            dx: float, horizon: float) -> VolterraSolution:
    """Solve the nonlinear Volterra equation for V_mu by Picard iteration."""
    model.require_valid()
    if table.model_fingerprint != model.fingerprint():
        raise GridError("scale table does not match the model")
    if abs(table.dx - dx) > 1e-15:
        raise GridError("solver grid step must match the scale table")
    n = int(round(horizon / dx))
    if n < 1:
        raise GridError("horizon must cover at least one step")
    if table.x.shape[0] < n + 1:
        raise GridError("scale table horizon is shorter than the solver window")
    if mu.support_end() > horizon + 1e-12:
        raise GridError("mu must be supported in [0, horizon]")

    grid = np.arange(n + 1) * dx
    drive = _wprime_conv_mu(table, mu, n, dx)
    wp = np.ascontiguousarray(table.Wp[:n + 1])

    v = drive.copy()
    residuals = []
    conv = np.empty(n + 1)
    converged = mu.is_zero()
    iterations = 0
    for k in range(PICARD_MAX_ITER):
        rv = op_R_grid(model, v, dx)
        kernel('conv_trapezoid')(rv, wp, dx, conv)
        v_next = drive - conv
        resid = float(np.max(np.abs(v_next - v)))
        residuals.append(resid)
        v = v_next
        iterations = k + 1
        if resid <= PICARD_TOL:
            converged = True
            break
    if not converged:
        raise ConvergenceError(
            f"Picard iteration did not reach {PICARD_TOL} within "
            f"{PICARD_MAX_ITER} iterations (last residual {residuals[-1]:.3e})")

    bound = mu.mass_up_to(grid) / model.c
    slack = 10.0 * dx
    if np.any(v < -slack) or np.any(v > bound + slack):
        worst = float(np.max(np.maximum(v - bound, -v)))
        raise ConvergenceError(
            f"solution violates 0 <= V <= mu([0,t])/c by {worst:.3e}")

    fv = op_F_grid(model, v, dx)
    return VolterraSolution(dx=dx, horizon=n * dx, t=grid, V=v, FV=fv,
                            iterations=iterations, residuals=tuple(residuals),
                            mu=mu, model_fingerprint=model.fingerprint())


def laplace_prediction(zeta: float, solution: VolterraSolution, x: float,
                       u0: float | None = None) -> float:
    """exp(-zeta*F(V)(x)), or (1 + u0*F(V)(x))^{-1} for the total-time law."""
    if x > solution.horizon + 1e-12 or x < 0:
        raise GridError("x outside the solved window")
    fvx = float(np.interp(x, solution.t, solution.FV))
    if u0 is None:
        return math.exp(-zeta * fvx)
    if u0 <= 0:
        raise ValueError("u0 must be positive")
    return 1.0 / (1.0 + u0 * fvx)
