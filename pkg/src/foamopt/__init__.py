"""Optimal first-order methods for strongly-convex-strongly-concave minimax problems."""

from .oracle import (ContractError, SaddleOracle, SaddlePoint, accuracy,
                     grad_hat, prox_box, prox_l1, prox_zero)
from .inclusion import (InclusionProblem, InnerBudgetExceeded, eag_solve,
                        eag_lambda, eag_beta)
from .appa import AppaParams, appa_solve
from .foam import FoamSchedule, build_schedule, foam_inner, foam_solve
from .baselines import EgConfig, extragradient_solve
from .problems import make_quadratic, reference_solution

__version__ = "0.1.0"
