"""Rigorous validation of steady states of reaction-diffusion problems with nonlinear diffusion."""

from .coseq import CosSeq, Weight
from .galerkin import GuessRecipe, NewtonConfig, NonConvergence, solve_newton, solve_recipe
from .nkcore import ApproxInverse, Certificate, ConditionsFailed, certify, certify_solution
from .problems import RationalDiffusionProblem, ScalarQuadraticProblem, SKTProblem, skt_row
from .rint import Interval, IntervalArray

__version__ = "0.1.0"

__all__ = [
    "ApproxInverse", "Certificate", "ConditionsFailed", "CosSeq", "GuessRecipe", "Interval",
    "IntervalArray", "NewtonConfig", "NonConvergence", "RationalDiffusionProblem", "SKTProblem",
    "ScalarQuadraticProblem", "Weight", "certify", "certify_solution", "skt_row", "solve_newton",
    "solve_recipe",
]
