"""Numeric kernel bodies: the single source for both backends.

This module stays pure Python (exact big-int RNG arithmetic, `prange` is
plain `range` outside numba).  `_kernels` loads a second copy of it and
compiles every listed function with numba, rebinding the clone's globals so
nested kernel calls resolve within the compiled namespace.

RNG state convention: Python ints in the pure module, uint64 scalars/arrays
in the compiled clone; all mixing is written with explicit 64-bit masks so
both agree bit for bit.
"""

import math

import numpy as np

from ._backend import prange

MASK = 0xFFFFFFFFFFFFFFFF
GOLDEN = 0x9E3779B97F4A7C15
_INV53 = 1.0 / 9007199254740992.0  # 2^-53
_TWO_PI = 6.283185307179586


# ---------------------------------------------------------------------------
# SplitMix64 streams
# ---------------------------------------------------------------------------

def next_u64(s):
    s = (s + GOLDEN) & MASK
    z = s
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK
    return s, z ^ (z >> 31)


def next_uniform(s):
    # in [0, 1)
    s, z = next_u64(s)
    return s, (z >> 11) * _INV53


def next_exponential(s, mean):
    s, u = next_uniform(s)
    return s, -mean * math.log(1.0 - u)


def next_normal(s):
    # Box-Muller, cosine branch only: fixed draw count keeps streams aligned
    s, u1 = next_uniform(s)
    s, u2 = next_uniform(s)
    r = math.sqrt(-2.0 * math.log(1.0 - u1))
    return s, r * math.cos(_TWO_PI * u2)


def next_poisson(s, lam):
    if lam <= 0.0:
        return s, 0
    if lam < 10.0:
        # Knuth product method
        thresh = math.exp(-lam)
        k = 0
        p = 1.0
        while True:
            s, u = next_uniform(s)
            p *= u
            if p <= thresh:
                return s, k
            k += 1
    # Hormann's PTRS transformed rejection, valid for lam >= 10
    b = 0.931 + 2.53 * math.sqrt(lam)
    a = -0.059 + 0.02483 * b
    inv_alpha = 1.1239 + 1.1328 / (b - 3.4)
    vr = 0.9277 - 3.6224 / (b - 2.0)
    log_lam = math.log(lam)
    while True:
        s, u = next_uniform(s)
        u -= 0.5
        s, v = next_uniform(s)
        us = 0.5 - abs(u)
        k = int(math.floor((2.0 * a / us + b) * u + lam + 0.43))
        if us >= 0.07 and v <= vr:
            return s, k
        if k < 0 or (us < 0.013 and v > us):
            continue
        if (math.log(v) + math.log(inv_alpha) - math.log(a / (us * us) + b)
                <= k * log_lam - lam - math.lgamma(k + 1.0)):
            return s, k


def next_gamma(s, shape, scale):
    # Marsaglia-Tsang; shape < 1 via the boost Gamma(a+1) * U^(1/a)
    if shape <= 0.0:
        return s, 0.0
    boost = 1.0
    if shape < 1.0:
        s, u = next_uniform(s)
        boost = math.exp(math.log(1.0 - u) / shape)
        shape += 1.0
    d = shape - 1.0 / 3.0
    cc = 1.0 / math.sqrt(9.0 * d)
    while True:
        s, x = next_normal(s)
        t = 1.0 + cc * x
        if t <= 0.0:
            continue
        v = t * t * t
        s, u = next_uniform(s)
        x2 = x * x
        if u < 1.0 - 0.0331 * x2 * x2:
            return s, boost * d * v * scale
        if math.log(u) < 0.5 * x2 + d * (1.0 - v + math.log(v)):
            return s, boost * d * v * scale


# ---------------------------------------------------------------------------
# compound-Poisson mixture draws
# ---------------------------------------------------------------------------
# Exp(mean c) plus, with probability p_extra, an overshoot by mechanism:
#   1 exponential with mean p1, 2 tabulated inverse CDF, 3 categorical.

def draw_mixture(s, p_extra, c, mech, p1, tab_u, tab_y, cumw, vals):
    s, e = next_exponential(s, c)
    if p_extra > 0.0:
        s, u = next_uniform(s)
        if u < p_extra:
            if mech == 1:
                s, j = next_exponential(s, p1)
                e += j
            elif mech == 2:
                s, u2 = next_uniform(s)
                e += np.interp(u2, tab_u, tab_y)
            else:
                s, u2 = next_uniform(s)
                idx = np.searchsorted(cumw, u2, side='right')
                if idx >= vals.shape[0]:
                    idx = vals.shape[0] - 1
                e += vals[idx]
    return s, e


def bulk_mixture_draws(seed, p_extra, c, mech, p1, tab_u, tab_y, cumw, vals, out):
    s = seed
    for i in range(out.shape[0]):
        s, v = draw_mixture(s, p_extra, c, mech, p1, tab_u, tab_y, cumw, vals)
        out[i] = v
    return s


# ---------------------------------------------------------------------------
# linear Volterra machinery
# ---------------------------------------------------------------------------

def march_second_kind(h, k, dx, sign, c0, out):
    """Trapezoidal marching for c0*f = h + sign * (k (*) f) on a uniform grid.

    Returns 0 on success, 1 if the implicit diagonal is not positive.
    """
    n = h.shape[0] - 1
    diag = c0 - sign * 0.5 * dx * k[0]
    if diag <= 0.0:
        return 1
    out[0] = h[0] / c0
    for i in range(1, n + 1):
        acc = 0.5 * k[i] * out[0]
        for j in range(1, i):
            acc += k[j] * out[i - j]
        out[i] = (h[i] + sign * dx * acc) / diag
    return 0


def march_scale_singular(k, dx, c, m0, m1, out):
    """Scale-function marching when the integrated tail blows up at 0+.

    First convolution cell product-integrated against the exact kernel
    moments m0 = int_0^dx K, m1 = int_0^dx u*K(u) du; k[0] is unused.
    """
    n = k.shape[0] - 1
    diag = c + m0 - m1 / dx
    out[0] = 1.0 / c
    for i in range(1, n + 1):
        acc = (m1 / dx) * out[i - 1]
        if i >= 2:
            tr = 0.5 * k[1] * out[i - 1] + 0.5 * k[i] * out[0]
            for j in range(2, i):
                tr += k[j] * out[i - j]
            acc += dx * tr
        out[i] = (1.0 - acc) / diag
    return 0


def conv_simpson(fa, gb, dx, out):
    """out[i] = int_0^{x_i} fa(s) gb(x_i - s) ds by composite Simpson.

    Odd interval counts use Simpson plus a 3/8 block on the last three
    cells; i = 1 falls back to a single trapezoid.
    """
    n = fa.shape[0] - 1
    out[0] = 0.0
    for i in range(1, n + 1):
        if i == 1:
            out[1] = 0.5 * dx * (fa[0] * gb[1] + fa[1] * gb[0])
            continue
        m = i if i % 2 == 0 else i - 3
        s = 0.0
        if m >= 2:
            s = fa[0] * gb[i] + fa[m] * gb[i - m]
            for j in range(1, m):
                if j % 2 == 1:
                    s += 4.0 * fa[j] * gb[i - j]
                else:
                    s += 2.0 * fa[j] * gb[i - j]
            s *= dx / 3.0
        if m < i:
            s += dx * 0.375 * (fa[m] * gb[i - m] + 3.0 * fa[m + 1] * gb[i - m - 1]
                               + 3.0 * fa[m + 2] * gb[i - m - 2] + fa[i] * gb[0])
        out[i] = s
    return 0


def conv_trapezoid(fa, gb, dx, out):
    """out[i] = trapezoidal int_0^{x_i} fa(s) gb(x_i - s) ds."""
    n = fa.shape[0] - 1
    out[0] = 0.0
    for i in range(1, n + 1):
        acc = 0.5 * (fa[0] * gb[i] + fa[i] * gb[0])
        for j in range(1, i):
            acc += fa[j] * gb[i - j]
        out[i] = dx * acc
    return 0


# ---------------------------------------------------------------------------
# nonlinear operators R and F on a uniform grid
# ---------------------------------------------------------------------------
# fcum is the cumulative integral of f; the inner integral int_{(t-y)^+}^t f
# equals fcum[i] - fcum[i-j] exactly on aligned nodes.  Density families get
# a trapezoid in y plus the closed-form tail beyond y > t; infinitely active
# densities replace the first (singular) y-cell with its leading moment.

def op_r_density_grid(f, fcum, dens, itail_t, dx, s2_first, skip_first, out):
    n = f.shape[0] - 1
    j0 = 1 if skip_first else 0
    for i in range(n + 1):
        ft = fcum[i]
        acc = 0.0
        if i > j0:
            z = ft - fcum[i - j0]
            hlo = math.expm1(-z) + z
            z = ft - fcum[0]
            hhi = math.expm1(-z) + z
            acc = 0.5 * (hlo * dens[j0] + hhi * dens[i])
            for j in range(j0 + 1, i):
                z = ft - fcum[i - j]
                acc += (math.expm1(-z) + z) * dens[j]
            acc *= dx
        if skip_first and i >= 1:
            acc += 0.5 * f[i] * f[i] * s2_first
        out[i] = acc + (math.expm1(-ft) + ft) * itail_t[i]
    return 0


def op_f_density_grid(f, fcum, tails, itail_t, dx, t1_first, skip_first, out):
    n = f.shape[0] - 1
    j0 = 1 if skip_first else 0
    for i in range(n + 1):
        ft = fcum[i]
        acc = 0.0
        if i > j0:
            z = ft - fcum[i - j0]
            glo = -math.expm1(-z)
            ghi = -math.expm1(-(ft - fcum[0]))
            acc = 0.5 * (glo * tails[j0] + ghi * tails[i])
            for j in range(j0 + 1, i):
                z = ft - fcum[i - j]
                acc += -math.expm1(-z) * tails[j]
            acc *= dx
        if skip_first and i >= 1:
            acc += f[i] * t1_first
        out[i] = acc + (-math.expm1(-ft)) * itail_t[i]
    return 0


def op_r_atomic_grid(fcum, locs, ws, dx, out):
    n = fcum.shape[0] - 1
    for i in range(n + 1):
        t = i * dx
        acc = 0.0
        for a in range(locs.shape[0]):
            r = t - locs[a]
            if r <= 0.0:
                flow = 0.0
            else:
                # linear interpolation of the cumulative integral
                pos = r / dx
                j = int(pos)
                if j >= n:
                    flow = fcum[n]
                else:
                    w = pos - j
                    flow = fcum[j] * (1.0 - w) + fcum[j + 1] * w
            z = fcum[i] - flow
            acc += ws[a] * (math.expm1(-z) + z)
        out[i] = acc
    return 0


def op_f_atomic_grid(fcum, locs, ws, dx, gy, out):
    # gy: scratch for the cumulative y-integral of 1 - exp(-inner)
    n = fcum.shape[0] - 1
    for i in range(n + 1):
        ft = fcum[i]
        gy[0] = 0.0
        prev = 0.0
        for j in range(1, i + 1):
            cur = -math.expm1(-(ft - fcum[i - j]))
            gy[j] = gy[j - 1] + 0.5 * dx * (prev + cur)
            prev = cur
        full = -math.expm1(-ft)
        acc = 0.0
        for a in range(locs.shape[0]):
            y = locs[a]
            if y >= i * dx:
                # integral over [0, t] plus the flat stretch up to y
                acc += ws[a] * (gy[i] + (y - i * dx) * full)
            else:
                pos = y / dx
                j = int(pos)
                w = pos - j
                acc += ws[a] * (gy[j] * (1.0 - w) + gy[j + 1] * w)
        out[i] = acc
    return 0
