"""Scale function W on a uniform grid via Volterra marching.

W' solves the second-kind equation  c W'(x) = 1 - int_0^x W'(s)(b + nu_ibar(x-s)) ds,
a rearrangement of the identity b W + c W' + W' * nu_ibar = 1.  The identity
itself (evaluated with an independent Simpson convolution) doubles as the
table's residual check, and the Laplace transform int e^{-lam x} W' = lam/phi(lam)
guards against systematic bias.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from ._kernels import kernel
from .exceptions import GridError
from .models import LevyModel

__all__ = ["ScaleTable", "scale_table", "check_identity_lemma21",
           "check_identity_lemma23", "laplace_crosscheck"]


@dataclass(frozen=True)
class ScaleTable:
    dx: float
    horizon: float
    x: np.ndarray
    W: np.ndarray
    Wp: np.ndarray
    Wpp: np.ndarray
    b: float
    c: float
    jumps_fingerprint: str
    model_fingerprint: str

    def w_at(self, x):
        return np.interp(x, self.x, self.W, left=0.0)

    def wp_at(self, x):
        return np.interp(x, self.x, self.Wp, left=0.0)

    def same_grid(self, other: "ScaleTable") -> bool:
        return (abs(self.dx - other.dx) < 1e-15
                and self.x.shape == other.x.shape)


def _grid(dx: float, horizon: float):
    if dx <= 0:
        raise GridError("grid step must be positive")
    if horizon < dx:
        raise GridError("horizon must be at least one grid step")
    n = int(round(horizon / dx))
    return n, np.arange(n + 1) * dx


def scale_table(model: LevyModel, dx: float, horizon: float) -> ScaleTable:
    """Tabulate W, W', W'' on [0, horizon] with step dx."""
    model.require_valid()
    n, x = _grid(dx, horizon)
    jumps = model.jumps
    itail0 = jumps.itail0()

    kvals = np.empty(n + 1)
    kvals[1:] = model.b + jumps.itail(x[1:])
    wp = np.empty(n + 1)
    if math.isfinite(itail0):
        kvals[0] = model.b + itail0
        ones = np.ones(n + 1)
        kernel('march_second_kind')(ones, kvals, dx, -1.0, model.c, wp)
    else:
        # singular diagonal: product-integrate the first convolution cell
        kvals[0] = 0.0
        m0 = model.b * dx + float(jumps.itail_integral(dx))
        m1 = 0.5 * model.b * dx**2 + float(jumps.int_u_itail(dx))
        kernel('march_scale_singular')(kvals, dx, model.c, m0, m1, wp)

    w = np.concatenate([[0.0], integrate.cumulative_trapezoid(wp, dx=dx)])

    wpp = np.empty(n + 1)
    wpp[1:-1] = (wp[2:] - wp[:-2]) / (2.0 * dx)
    wpp[-1] = (wp[-1] - wp[-2]) / dx
    if math.isfinite(itail0):
        wpp[0] = -(model.b + itail0) / model.c**2
    else:
        wpp[0] = (wp[1] - wp[0]) / dx

    return ScaleTable(dx=dx, horizon=n * dx, x=x, W=w, Wp=wp, Wpp=wpp,
                      b=model.b, c=model.c,
                      jumps_fingerprint=jumps.fingerprint(),
                      model_fingerprint=model.fingerprint())


def _require_match(table: ScaleTable, model: LevyModel):
    if table.model_fingerprint != model.fingerprint():
        raise GridError("table was built for a different model "
                        f"({table.model_fingerprint} != {model.fingerprint()})")


def check_identity_lemma21(table: ScaleTable, model: LevyModel) -> float:
    """max_i |b W + c W' + (W' * nu_ibar) - 1| with a Simpson convolution."""
    _require_match(table, model)
    n = table.x.shape[0] - 1
    jumps = model.jumps
    conv = np.zeros(n + 1)
    if math.isfinite(jumps.itail0()):
        ivals = np.empty(n + 1)
        ivals[0] = jumps.itail0()
        ivals[1:] = jumps.itail(table.x[1:])
        kernel('conv_simpson')(table.Wp, ivals, table.dx, conv)
    else:
        # Simpson up to x_{i-1}, product integration on the singular last cell
        shifted = jumps.itail(table.x + table.dx)
        inner = np.zeros(n + 1)
        kernel('conv_simpson')(table.Wp, shifted, table.dx, inner)
        p1 = float(jumps.itail_integral(table.dx))
        q1 = float(jumps.int_u_itail(table.dx))
        conv[1:] = (inner[:-1]
                    + table.Wp[1:] * (p1 - q1 / table.dx)
                    + table.Wp[:-1] * (q1 / table.dx))
    resid = table.b * table.W + table.c * table.Wp + conv - 1.0
    return float(np.max(np.abs(resid)))


def check_identity_lemma23(table_b: ScaleTable, table_beta: ScaleTable,
                           b: float, beta: float) -> float:
    """max residual of W' = W'_beta + (beta - b) * (W'_beta * W')."""
    if not table_b.same_grid(table_beta):
        raise GridError("tables must share the grid")
    if table_b.jumps_fingerprint != table_beta.jumps_fingerprint \
            or table_b.c != table_beta.c:
        raise GridError("tables must share (c, nu)")
    conv = np.empty_like(table_b.Wp)
    kernel('conv_simpson')(table_beta.Wp, table_b.Wp, table_b.dx, conv)
    resid = table_b.Wp - table_beta.Wp - (beta - b) * conv
    return float(np.max(np.abs(resid)))


def laplace_crosscheck(table: ScaleTable, model: LevyModel, lam: float) -> float:
    """|quadrature(e^{-lam x} W') - lam/phi(lam)| / (lam/phi(lam)).

    Requires lam * horizon >= 10 so that the truncated tail stays below the
    advertised tolerance.
    """
    _require_match(table, model)
    if lam <= 0:
        raise ValueError("lam must be positive")
    if lam * table.horizon < 10.0:
        raise GridError("lam * horizon < 10: truncation bias too large")
    integrand = np.exp(-lam * table.x) * table.Wp
    quad = integrate.simpson(integrand, dx=table.dx)
    target = lam / float(model.phi(lam))
    return abs(quad - target) / target
