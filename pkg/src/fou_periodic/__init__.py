"""
fou-periodic - simulation and drift estimation for the non-ergodic
fractional Ornstein-Uhlenbeck process with periodic mean

    dX_t = (L(t) + alpha X_t) dt + dB^H_t,   L(t) = sum_i mu_i phi_i(t),

with alpha > 0 and 1/2 <= H < 1. The package provides exact-form path
simulation, the least-squares estimator of (mu, alpha), its limit laws and
a seeded Monte Carlo harness, plus an MCP server exposing the same tools.
"""

__version__ = "1.0.0"
__author__ = "fou-periodic contributors"

from fou_periodic.basis import BasisFunction, PeriodicDrift, drift_functionals
from fou_periodic.errors import FouError
from fou_periodic.estimator import EstimatorOutput, estimate
from fou_periodic.fbm import FbmPath, generate_fbm_path
from fou_periodic.process import ProcessPath, simulate_euler, simulate_exact

__all__ = [
    "BasisFunction",
    "EstimatorOutput",
    "FbmPath",
    "FouError",
    "PeriodicDrift",
    "ProcessPath",
    "__version__",
    "drift_functionals",
    "estimate",
    "generate_fbm_path",
    "simulate_euler",
    "simulate_exact",
]
