"""Outer iteration: line searches, funnel bound updates and termination."""

from __future__ import annotations

import enum
import logging
import math
import time
from dataclasses import dataclass, field

import numpy as np

from .config import SolverConfig
from .errors import NonFiniteValue, NumericalBreakdown, RestorationFailure
from .measures import ThetaBreakdown, infeasibility
from .model import Evaluation, MpecProblem, evaluate
from .qp import ActiveSetSolver
from .restoration import restore
from .stationarity import (MpecMultipliers, StationarityClass, StationarityLevel, Tolerances, classify,
                           lagrangian_gradient, recover_multipliers)
from .steps import Branch, NeedsRestoration, StepOutcome, complementarity_step, penalty_loop

log = logging.getLogger(__name__)


class Status(str, enum.Enum):
    SStationaryPoint = "SStationaryPoint"
    WeakerStationaryPoint = "WeakerStationaryPoint"
    MaxIterations = "MaxIterations"
    RestorationFailure = "RestorationFailure"
    Degenerate = "Degenerate"


class StepKind(str, enum.Enum):
    F = "F"
    H = "H"
    Restoration = "Restoration"


TRACE_FIELDS = ("k", "kind", "theta_f", "theta_c", "theta", "theta_max", "f", "alpha", "u",
                "norm_s", "norm_t", "gamma", "qp_iters", "stat_res")


@dataclass
class TraceRecord:
    """One outer iteration, measured at the iterate it starts from.

    The fields after ``stat_res`` are kept for post-hoc checks and are not
    written to trace files: ``slope`` is ``grad_f'd`` and ``f_next`` /
    ``theta_next`` describe the accepted point.
    """

    k: int
    kind: StepKind
    theta_f: float
    theta_c: float
    theta: float
    theta_max: float
    f: float
    alpha: float
    u: float
    norm_s: float
    norm_t: float
    gamma: float
    qp_iters: int
    stat_res: float
    slope: float = math.nan
    f_next: float = math.nan
    theta_next: float = math.nan
    theta_max_next: float = math.nan

    def row(self):
        return tuple(getattr(self, name) for name in TRACE_FIELDS)


@dataclass
class FunnelState:
    x: np.ndarray
    eval: Evaluation
    theta: ThetaBreakdown
    theta_max: float
    u_current: float
    B: np.ndarray
    k: int = 0


@dataclass
class SolveResult:
    status: Status
    x_final: np.ndarray
    multipliers: MpecMultipliers | None
    stationarity: StationarityClass | None
    trace: list
    iterations: int
    f_final: float
    theta_final: float
    wall_time: float = 0.0
    message: str = ""
    final_step: StepOutcome | None = field(default=None, repr=False)

    @property
    def success(self):
        return self.status is Status.SStationaryPoint


@dataclass
class LineSearchResult:
    accepted: bool
    alpha: float
    eval: Evaluation | None = None
    theta: ThetaBreakdown | None = None
    backtracks: int = 0


def alpha_min(theta, cfg: SolverConfig):
    return min(cfg.kappa4, cfg.kappa5 * theta ** cfg.sigma3)


def _trial(problem, x, d, alpha):
    try:
        ev = evaluate(problem, x + alpha * d)
    except NonFiniteValue:
        return None
    return ev


def _stalled(x, d, alpha):
    # step below rounding level of x: the tests would only compare roundoff
    return bool(np.all(np.abs(alpha * d) <= np.finfo(float).eps * np.maximum(np.abs(x), 1.0)))


def f_line_search(problem: MpecProblem, ev: Evaluation, theta, theta_max, d, cfg: SolverConfig) -> LineSearchResult:
    """Backtracking Armijo search on ``f`` inside the funnel.

    Accepts the first ``alpha`` in ``1, 1/2, ...`` with
    ``f(x) - f(x + alpha d) >= -alpha rho grad_f'd`` and
    ``theta(x + alpha d) <= theta_max``. Gives up (restoration needed) once
    a rejected ``alpha`` is below ``alpha_min(theta)`` or after
    ``max_backtracks`` halvings. A zero direction is rejected outright.
    """
    d = np.asarray(d, dtype=float)
    if not np.any(d):
        return LineSearchResult(False, 0.0)
    slope = float(ev.grad_f @ d)
    amin = alpha_min(theta, cfg)
    alpha = 1.0
    for backtracks in range(cfg.max_backtracks + 1):
        if _stalled(ev.x, d, alpha):
            break
        trial = _trial(problem, ev.x, d, alpha)
        if trial is not None:
            th = infeasibility(trial)
            if ev.f - trial.f >= -alpha * cfg.rho * slope and th.theta <= theta_max:
                return LineSearchResult(True, alpha, trial, th, backtracks)
        if alpha < amin:
            break
        alpha *= 0.5
    return LineSearchResult(False, alpha)


def h_line_search(problem: MpecProblem, ev: Evaluation, theta, d, cfg: SolverConfig) -> LineSearchResult:
    """Backtracking search for ``theta(x + alpha d) <= (1 - alpha rho) theta``.

    Gives up after ``max_backtracks`` halvings, or earlier once ``alpha d``
    falls below the rounding level of ``x``.
    """
    d = np.asarray(d, dtype=float)
    alpha = 1.0
    for backtracks in range(cfg.max_backtracks + 1):
        if _stalled(ev.x, d, alpha):
            break
        trial = _trial(problem, ev.x, d, alpha)
        if trial is not None:
            th = infeasibility(trial)
            if th.theta <= (1.0 - alpha * cfg.rho) * theta:
                return LineSearchResult(True, alpha, trial, th, backtracks)
        alpha *= 0.5
    return LineSearchResult(False, alpha)


def update_theta_max(kind, theta_k, theta_next, theta_max, cfg: SolverConfig):
    kind = StepKind(kind)
    if kind is StepKind.F:
        return theta_max
    if kind is StepKind.Restoration:
        return cfg.kappa7 * theta_max
    return max(cfg.kappa8 * theta_max, cfg.kappa9 * theta_k + (1.0 - cfg.kappa9) * theta_next)


def update_B(B, step, grad_change, mode="identity"):
    """Next quadratic model matrix.

    ``damped_bfgs`` applies Powell's damping so that the modified curvature
    pair satisfies ``s'r >= 0.2 s'Bs``, then floors the eigenvalues at 1e-6.
    A zero step or zero gradient change leaves ``B`` unchanged.
    """
    B = np.asarray(B, dtype=float)
    n = B.shape[0]
    if mode == "identity":
        return np.eye(n)
    if mode != "damped_bfgs":
        raise ValueError(f"unknown B update mode {mode!r}")
    s = np.asarray(step, dtype=float)
    y = np.asarray(grad_change, dtype=float)
    if not np.any(s) or not np.any(y):
        return B.copy()
    Bs = B @ s
    sBs = float(s @ Bs)
    sy = float(s @ y)
    if sBs <= 0.0:
        return B.copy()
    if sy >= 0.2 * sBs:
        r = y
    else:
        phi = 0.8 * sBs / (sBs - sy)
        r = phi * y + (1.0 - phi) * Bs
    B_new = B - np.outer(Bs, Bs) / sBs + np.outer(r, r) / float(s @ r)
    B_new = 0.5 * (B_new + B_new.T)
    w, V = np.linalg.eigh(B_new)
    if w[0] < 1e-6:
        B_new = (V * np.maximum(w, 1e-6)) @ V.T
        B_new = 0.5 * (B_new + B_new.T)
    return B_new


def _tolerances(cfg):
    return Tolerances(feasibility=cfg.feasibility_tol, stationarity=cfg.stationarity_tol,
                      complementarity=cfg.feasibility_tol, multiplier=cfg.multiplier_tol,
                      activity=cfg.activity_tol)


def solve(problem: MpecProblem, x0=None, cfg: SolverConfig | None = None) -> SolveResult:
    """Run the penalized trust-funnel SQP method from ``x0``.

    Terminates when ``theta + ||t|| <= epsilon`` for the unscaled tangential
    step ``t``; multipliers are then recovered from the last tangential QP
    and the point is classified.
    """
    cfg = cfg or SolverConfig()
    start = time.perf_counter()
    if x0 is None:
        x0 = problem.info.get("x0")
        if x0 is None:
            raise ValueError("no starting point given and the problem has no default x0")
    ev = evaluate(problem, x0)
    theta = infeasibility(ev)
    state = FunnelState(x=ev.x, eval=ev, theta=theta,
                        theta_max=max(1.0, cfg.theta_max_init_factor * theta.theta),
                        u_current=cfg.u_init, B=np.eye(problem.n))
    solver = ActiveSetSolver()
    trace = []
    status = Status.MaxIterations
    message = f"iteration limit {cfg.max_iter} reached"
    final_outcome = None

    while state.k < cfg.max_iter:
        ev, theta = state.eval, state.theta
        th = theta.theta
        s, degenerate = complementarity_step(ev)
        if cfg.strict_u_carry:
            u_start = state.u_current
        else:
            u_start = min(cfg.u_init, cfg.u_warm_factor * state.u_current)

        outcome = None
        reason = ""
        try:
            outcome = penalty_loop(ev, s, state.B, th, state.theta_max, cfg, u_start=u_start, solver=solver)
        except NeedsRestoration as exc:
            reason = str(exc)
        except NumericalBreakdown as exc:
            reason = f"QP breakdown: {exc}"

        rec = TraceRecord(k=state.k, kind=StepKind.Restoration, theta_f=theta.theta_f, theta_c=theta.theta_c,
                          theta=th, theta_max=state.theta_max, f=ev.f, alpha=math.nan, u=math.nan,
                          norm_s=float(np.linalg.norm(s)), norm_t=math.nan, gamma=math.nan,
                          qp_iters=0, stat_res=math.nan)

        if outcome is not None:
            state.u_current = outcome.u
            rec.u = outcome.u
            rec.norm_t = float(np.linalg.norm(outcome.t_raw))
            rec.gamma = outcome.gamma
            rec.qp_iters = outcome.qp.iterations
            mult = recover_multipliers(outcome.qp, outcome.u, outcome.t_raw, ev)
            rec.stat_res = float(np.linalg.norm(lagrangian_gradient(ev, mult)))
            if th + rec.norm_t <= cfg.epsilon:
                final_outcome = outcome
                status = None
                break

            if outcome.branch is Branch.F:
                ls = f_line_search(problem, ev, th, state.theta_max, outcome.d, cfg)
                kind = StepKind.F
            else:
                ls = h_line_search(problem, ev, th, outcome.d, cfg)
                kind = StepKind.H
            if ls.accepted:
                rec.kind = kind
                rec.alpha = ls.alpha
                rec.slope = float(ev.grad_f @ outcome.d)
                new_max = update_theta_max(kind, th, ls.theta.theta, state.theta_max, cfg)
                state.B = update_B(state.B, ls.eval.x - ev.x, ls.eval.grad_f - ev.grad_f, cfg.B_update)
                state.eval, state.theta, state.x = ls.eval, ls.theta, ls.eval.x
                state.theta_max = new_max
            else:
                reason = f"{kind.value}-line search failed"

        if rec.kind is StepKind.Restoration:
            log.debug("k=%d restoration (%s)", state.k, reason)
            target = cfg.kappa7 * state.theta_max
            try:
                rep = restore(problem, ev.x, target, max_iter=cfg.restoration_max_iter,
                              rho=cfg.restoration_rho, max_backtracks=cfg.max_backtracks)
            except RestorationFailure as exc:
                trace.append(rec)
                if degenerate and theta.theta_c > 0:
                    status, message = Status.Degenerate, f"degenerate complementarity gradient: {exc}"
                else:
                    status, message = Status.RestorationFailure, str(exc)
                state.k += 1
                break
            state.eval = evaluate(problem, rep.x_r)
            state.theta = infeasibility(state.eval)
            state.x = state.eval.x
            state.theta_max = update_theta_max(StepKind.Restoration, th, state.theta.theta, state.theta_max, cfg)

        rec.f_next = state.eval.f
        rec.theta_next = state.theta.theta
        rec.theta_max_next = state.theta_max
        trace.append(rec)
        log.debug("k=%d %s theta=%.3e theta_max=%.3e f=%.10g", rec.k, rec.kind.value, th, rec.theta_max, rec.f)
        state.k += 1

    ev = state.eval
    mult = None
    cls = None
    if final_outcome is not None:
        mult = recover_multipliers(final_outcome.qp, final_outcome.u, final_outcome.t_raw, ev)
        cls = classify(ev, mult, _tolerances(cfg))
        if cls.level is StationarityLevel.SStationary:
            status, message = Status.SStationaryPoint, "S-stationary point found"
        else:
            status = Status.WeakerStationaryPoint
            message = f"termination test met but point classified {cls.level.name}"
    return SolveResult(status=status, x_final=ev.x.copy(), multipliers=mult, stationarity=cls,
                       trace=trace, iterations=state.k, f_final=ev.f, theta_final=state.theta.theta,
                       wall_time=time.perf_counter() - start, message=message, final_step=final_outcome)
