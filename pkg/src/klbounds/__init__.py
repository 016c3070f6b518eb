"""Concentration bounds for the deviation of empirical discrete distributions.

Given n iid samples from a distribution P on k symbols, the package
computes closed-form upper bounds on P(D(P_hat || P) >= eps) and
P(||P_hat - P||_1 >= eps), verifies them against an exact enumeration
oracle over multinomial types, and cross-checks them with seeded Monte
Carlo.  See the README for the bound catalogue and the CLI.
"""

from klbounds import bounds, constants, divergence, montecarlo, oracle
from klbounds._kernels import BACKEND as KERNEL_BACKEND
from klbounds.divergence import CountVector, Distribution

__version__ = "0.1.0"

__all__ = [
    "CountVector",
    "Distribution",
    "KERNEL_BACKEND",
    "bounds",
    "constants",
    "divergence",
    "montecarlo",
    "oracle",
    "__version__",
]
