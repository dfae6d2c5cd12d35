"""Reduced energies and ring-shaped multi-bubble configurations for the Hardy-Sobolev
critical problem in the unit ball."""
from .constants import (
    BubbleConstants, Dimension, HardyParams, bubble_amplitudes, bubble_constants,
    bubble_integrals, critical_exponent, hardy_exponents,
)
from .energy import (
    EnergyEvaluation, LambdaState, f_k_eval, lambda_profile_f3, lambda_profile_f5, psi,
    psi_tilde,
)
from .errors import (
    BracketError, ConvergenceError, DomainError, HardyRingError, NumericalOverflowError,
    ProfileUndefinedError, QuadratureError,
)
from .green import InteractionCoefficients, green, interaction_coeffs, regular_part, ring_points
from .solver import CriticalPointRecord, classify, find_critical_points, find_tstars

__version__ = "0.1.0"

__all__ = [
    "BubbleConstants", "Dimension", "HardyParams", "bubble_amplitudes", "bubble_constants",
    "bubble_integrals", "critical_exponent", "hardy_exponents",
    "EnergyEvaluation", "LambdaState", "f_k_eval", "lambda_profile_f3", "lambda_profile_f5",
    "psi", "psi_tilde",
    "BracketError", "ConvergenceError", "DomainError", "HardyRingError", "NumericalOverflowError",
    "ProfileUndefinedError", "QuadratureError",
    "InteractionCoefficients", "green", "interaction_coeffs", "regular_part", "ring_points",
    "CriticalPointRecord", "classify", "find_critical_points", "find_tstars",
]
