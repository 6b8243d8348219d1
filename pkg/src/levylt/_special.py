"""Incomplete-gamma helpers for the tempered power-law jump family.

scipy's gammaincc only covers positive parameters; the tail functions of a
tempered power-law measure need Gamma(s, x) for s in (-2, 1].  The negative
range is reached by the downward recurrence

    Gamma(s, x) = (Gamma(s+1, x) - x^s e^{-x}) / s,

applied once or twice from a positive (or zero) starting parameter.
"""

import numpy as np
from scipy import special


def upper_gamma(s: float, x) -> np.ndarray:
    """Unregularized upper incomplete gamma Gamma(s, x), s in (-2, 2], x > 0."""
    x = np.asarray(x, dtype=float)
    if s > 0.0:
        return special.gammaincc(s, x) * special.gamma(s)
    if s == 0.0:
        return special.exp1(x)
    up = upper_gamma(s + 1.0, x)
    return (up - np.power(x, s) * np.exp(-x)) / s


def lower_gamma(s: float, x) -> np.ndarray:
    """Unregularized lower incomplete gamma for s > 0."""
    x = np.asarray(x, dtype=float)
    return special.gammainc(s, x) * special.gamma(s)
