"""Local-time fields of spectrally positive Levy processes with Gaussian part.

Numerics for the scale function, linear and nonlinear Volterra equations,
compound-Poisson / CMJ branching approximations, exact and Euler simulators,
and Monte-Carlo verification against the analytic predictions.
"""

from ._backend import backend, set_backend, using_numba
from .exceptions import (ConvergenceError, GridError, LevyltError, ModelError,
                         RunawayError, SchemeError)
from .models import (AtomicJumps, ExponentialJumps, LevyModel,
                     TemperedPowerJumps, ZeroJumps, laplace_exponent,
                     tail_functions, validate)

__version__ = "0.1.0"
