"""MILP representation, LP relaxation and integrality helpers."""

from .brute import BruteForceResult, brute_force_solve
from .candidates import fractional_candidates, is_integral
from .normalize import normalize_instance
from .simplex import lp_relax_solve

__all__ = [
    "BruteForceResult",
    "brute_force_solve",
    "fractional_candidates",
    "is_integral",
    "lp_relax_solve",
    "normalize_instance",
]
