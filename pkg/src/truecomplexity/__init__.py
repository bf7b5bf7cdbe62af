"""Desk-scale computations for the true complexity of linear systems over F_p^n."""

from __future__ import annotations

__version__ = "0.1.0"

from .errors import (BudgetError, ConstructionError, ContractError, DomainError, PolynomialSyntaxError,
                     ShapeError, TrueComplexityError, UnsupportedCharacteristicError)
from .field import ResidueCounter, TableFunction, budget_limit, settings, thread_count
from .poly import PhaseFunction, Polynomial, parse_polynomial, phase_table, random_polynomial
from .multilinear import (MultilinearForm, RankValue, analytic_rank, derive_multilinear, dual_operator,
                          polynomial_rank, restricted_rank_profile)
from .uniformity import correlation, gowers_inner_product, gowers_norm, inverse_search
from .linsys import LinearSystem, analyze_system, degree_independence, parse_system, progression_system
from .counting import set_solution_density, system_average
from .decomposition import (Decomposition, PhaseCombination, load_decomposition, rank_gap_filter,
                            save_decomposition, verify_decomposition)
from .constructions import dependent_counterexample, offdiagonal_example, power_polynomial
from .verification import REGISTRY, run_check, run_suite

__all__ = [
    "__version__",
    "BudgetError", "ConstructionError", "ContractError", "DomainError", "PolynomialSyntaxError", "ShapeError",
    "TrueComplexityError", "UnsupportedCharacteristicError",
    "ResidueCounter", "TableFunction", "budget_limit", "settings", "thread_count",
    "PhaseFunction", "Polynomial", "parse_polynomial", "phase_table", "random_polynomial",
    "MultilinearForm", "RankValue", "analytic_rank", "derive_multilinear", "dual_operator", "polynomial_rank",
    "restricted_rank_profile",
    "correlation", "gowers_inner_product", "gowers_norm", "inverse_search",
    "LinearSystem", "analyze_system", "degree_independence", "parse_system", "progression_system",
    "set_solution_density", "system_average",
    "Decomposition", "PhaseCombination", "load_decomposition", "rank_gap_filter", "save_decomposition",
    "verify_decomposition",
    "dependent_counterexample", "offdiagonal_example", "power_polynomial",
    "REGISTRY", "run_check", "run_suite",
]
