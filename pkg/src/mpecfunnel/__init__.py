"""Penalized trust-funnel SQP method for MPECs with S-stationarity checks."""

from .config import PenaltyLoopConfig, SolverConfig, load_config
from .errors import (ConfigError, DimensionMismatch, Infeasible, MpecError, NonFiniteValue, ParseError,
                     QpError, RestorationFailure, UnknownProblem)
from .funnel import SolveResult, Status, StepKind, TraceRecord, solve
from .measures import active_sets, infeasibility, theta_parts
from .model import Evaluation, MpecProblem, check_gradients, evaluate
from .problems import dump_quadratic_mpec, load_quadratic_mpec, registry_get, registry_names
from .qp import ActiveSetSolver, QpProblem, QpSolution, solve_qp
from .restoration import restore
from .stationarity import (MpecMultipliers, StationarityLevel, Tolerances, classify, estimate_multipliers,
                           mfcq_diagnostic)

__version__ = "0.1.0"
