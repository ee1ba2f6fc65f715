"""Spectral computations for the anharmonic oscillator L = -d^2/dx^2 + |x|.

Airy functions and zeros, the eigenbasis of L, spectral multipliers F(L),
the Airy operator A = -d^2/dx^2 + x, and Bochner-Riesz profile scans.
"""

__version__ = "0.1.0"

from ._backend import BACKEND
from .airy_core import AiryError, ai, ai_prime_zeros, ai_zeros, airy, asymptotic_pieces, reconstruct
from .numerics import INF, Grid, GridFunction, NumericsError, QuadratureRule, lp_norm
from .spectrum import EigenMode, SpectralBasis, SpectrumError, basis_to_cutoff, build_basis, eigenfunction_eval
from .multipliers import (
    MultiplierError,
    MultiplierProfile,
    RieszParams,
    apply_multiplier,
    gh_split,
    riesz_profile,
    smooth_bump,
    sup_sum_norm,
)
from .airy_operator import (
    AiryOperatorError,
    airy_inverse_transform,
    airy_transform,
    make_plan,
    verify_finite_propagation,
    verify_kernel_bound,
)
from .profile_lab import NormEstimate, ProfilePoint, alpha_critical, profile_scan, rank_one_norm

__all__ = [
    "__version__", "BACKEND", "AiryError", "ai", "airy", "ai_zeros", "ai_prime_zeros",
    "asymptotic_pieces", "reconstruct", "INF", "Grid", "GridFunction", "NumericsError",
    "QuadratureRule", "lp_norm", "EigenMode", "SpectralBasis", "SpectrumError", "build_basis",
    "basis_to_cutoff", "eigenfunction_eval", "MultiplierError", "MultiplierProfile", "RieszParams",
    "apply_multiplier", "gh_split", "riesz_profile", "smooth_bump", "sup_sum_norm",
    "AiryOperatorError", "airy_transform", "airy_inverse_transform", "make_plan",
    "verify_finite_propagation", "verify_kernel_bound", "NormEstimate", "ProfilePoint",
    "alpha_critical", "profile_scan", "rank_one_norm",
]
