from .ista import IstaState, fit_locals, fit_single, soft_threshold
from .moo import SimplexWeights, SubproblemSolution, fit_fair, pareto_residual, solve_subproblem
from .simplex import project_simplex

__all__ = [
    "IstaState",
    "soft_threshold",
    "fit_single",
    "fit_locals",
    "SimplexWeights",
    "SubproblemSolution",
    "solve_subproblem",
    "pareto_residual",
    "fit_fair",
    "project_simplex",
]
