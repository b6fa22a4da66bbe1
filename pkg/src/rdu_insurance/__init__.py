"""Optimal insurance indemnity under rank-dependent utility with monotone
indemnity and retention: closed-form solvers, a brute-force oracle and a CLI."""

__version__ = "0.1.0"

from .errors import *  # noqa: E402,F401,F403
from .landmarks import LandmarkCertificate, compute_landmarks, f_curve  # noqa: E402
from .loss_model import (Contract, LossModel, QuantileSolution, Shape, k_of,  # noqa: E402
                         make_atom_exponential, make_truncated_exponential)
from .numerics import DEFAULT_TOL, Tolerance  # noqa: E402
from .oracle import check_optimality, oracle_solve  # noqa: E402
from .preferences import UtilitySpec, WeightingSpec  # noqa: E402
from .problem import ProblemSpec  # noqa: E402
from .rdu import contract_objective, solve, solve_rdu  # noqa: E402
from .solution import Solution  # noqa: E402
from .yaari import pi_c, solve_yaari  # noqa: E402
