"""Numerical laboratory for damped compressible Euler flow with a physical vacuum boundary.

Barenblatt profiles, affine ODE solutions, Lagrangian 1D and radial solvers,
and long-time diagnostics.  Set ``VACUUMFRONT_DISABLE_NUMBA=1`` to run the
pure-numpy kernels.
"""
from ._jit import backend
from .barenblatt import BarenblattProfile, solve_profile_constants
from .perturbation import PerturbationSpec

__version__ = "0.1.0"

__all__ = ["BarenblattProfile", "PerturbationSpec", "backend", "solve_profile_constants"]
