"""Trial-step computation: complementarity step and penalized tangential step.

The tangential QP in ``t`` is::

    min  (grad_f + B s)'t + 0.5 t'(B + (1/u) dQ dQ')t
    s.t. g + jac_g'(s + t) >= 0
         h + jac_h'(s + t)  = 0
         G + jac_G'(s + t) >= 0
         H + jac_H'(s + t) >= 0

Its inequality rows are stacked in the order g, G, H; multiplier recovery
relies on this layout.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .config import PenaltyLoopConfig
from .errors import Infeasible, MpecError, NumericalBreakdown
from .measures import infeasibility
from .model import Evaluation
from .qp import ActiveSetSolver, QpProblem, QpSolution


class Branch(str, enum.Enum):
    F = "F"
    H = "H"


class NeedsRestoration(MpecError):
    """The penalty loop could not produce a usable direction."""


class Inconsistent(NeedsRestoration):
    """The linearized constraints of the tangential QP have no solution."""


class TooLarge(NeedsRestoration):
    """The trial step exceeds the size safeguard."""


def complementarity_step(ev: Evaluation):
    """Least-squares step zeroing the linearized complementarity product.

    Returns ``(s, degenerate)``. ``degenerate`` is True when the gradient
    of ``Q`` is numerically zero, in which case ``s = 0``.
    """
    gq = ev.grad_Q
    Q = ev.Q
    nrm2 = float(gq @ gq)
    if math.sqrt(nrm2) <= 1e-12 * max(1.0, abs(Q)):
        return np.zeros(ev.n), True
    return -(Q / nrm2) * gq, False


def u_min(delta, cfg: PenaltyLoopConfig):
    return min(cfg.u_hat, cfg.kappa_u * delta ** cfg.sigma1)


def delta(branch, theta, theta_max, cfg: PenaltyLoopConfig):
    """Admissible size of ``|dQ't|`` for the given branch."""
    if Branch(branch) is Branch.F:
        return cfg.kappa1 * min(theta_max, cfg.kappa2)
    if theta <= 0.0:
        return 0.0
    return cfg.kappa3 * min(theta ** (cfg.sigma2 - 1.0), cfg.kappa2) * theta


def classify_switch(ev: Evaluation, s, t, cfg: PenaltyLoopConfig, theta=None) -> Branch:
    """F when the linearized objective decrease along ``s + t`` is at least
    ``kappa_theta * theta``; H otherwise."""
    if theta is None:
        theta = infeasibility(ev).theta
    decrease = -float(ev.grad_f @ (np.asarray(s) + np.asarray(t)))
    return Branch.F if decrease >= cfg.kappa_theta * theta else Branch.H


def tangential_qp(ev: Evaluation, s, B, u) -> QpProblem:
    gq = ev.grad_Q
    Hmat = B + np.outer(gq, gq) / u
    Hmat = 0.5 * (Hmat + Hmat.T)
    cvec = ev.grad_f + B @ s
    Ain = np.vstack([ev.jac_g.T, ev.jac_G.T, ev.jac_H.T])
    vals = np.concatenate([ev.g, ev.G, ev.H])
    bin = -(vals + Ain @ s)
    Aeq = ev.jac_h.T
    beq = -(ev.h + Aeq @ s)
    return QpProblem(Hmat, cvec, Aeq, beq, Ain, bin)


@dataclass
class StepOutcome:
    """Accepted search direction ``d = s + gamma * t_raw``.

    ``loop_branch`` is the branch whose tests selected ``delta``; ``branch``
    is re-evaluated on the (possibly scaled) direction ``d``.
    """

    s: np.ndarray
    t_raw: np.ndarray
    u: float
    gamma: float
    d: np.ndarray
    delta: float
    branch: Branch
    loop_branch: Branch
    qp: QpSolution
    grad_Qt: float
    u_min: float
    solves: int
    attempts: list = field(default_factory=list, repr=False)

    @property
    def scaled(self):
        return self.gamma < 1.0


def penalty_loop(ev: Evaluation, s, B, theta, theta_max, cfg: PenaltyLoopConfig,
                 u_start=None, solver: ActiveSetSolver | None = None) -> StepOutcome:
    """Search the penalty parameter ``u`` for an acceptable tangential step.

    ``u`` starts at ``u_start`` (default ``cfg.u_init``) and is halved until
    the step passes the branch tests or ``u`` drops below ``u_min``, in
    which case ``t`` is scaled so that ``|dQ't| = delta``.

    Raises
    ------
    Inconsistent
        The QP has no feasible point.
    TooLarge
        ``max(||s||, ||t||) >= max(M_theta, kappa6 / theta**sigma4)``.
    NumericalBreakdown
        From the QP solver, or when ``max_penalty_solves`` is exhausted.
    """
    solver = solver or ActiveSetSolver()
    s = np.asarray(s, dtype=float)
    B = np.asarray(B, dtype=float)
    u = float(cfg.u_init if u_start is None else u_start)
    gq = ev.grad_Q
    norm_s = float(np.linalg.norm(s))
    size_cap = max(cfg.M_theta, cfg.kappa6 / theta ** cfg.sigma4) if theta > 0 else math.inf
    warm = None
    attempts = []
    for solves in range(1, cfg.max_penalty_solves + 1):
        qp = tangential_qp(ev, s, B, u)
        try:
            sol = solver.solve(qp, start=warm)
        except Infeasible as exc:
            raise Inconsistent(str(exc)) from exc
        t = sol.t
        warm = t
        if max(norm_s, float(np.linalg.norm(t))) >= size_cap:
            raise TooLarge(f"step size {max(norm_s, np.linalg.norm(t)):.3e} exceeds {size_cap:.3e}")
        branch = classify_switch(ev, s, t, cfg, theta=theta)
        dlt = delta(branch, theta, theta_max, cfg)
        umin = u_min(dlt, cfg)
        gqt = float(gq @ t)
        attempts.append((u, gqt, branch, dlt))
        if abs(gqt) <= dlt:
            gamma = 1.0
        elif u < umin:
            gamma = min(1.0, dlt / abs(gqt))
        else:
            u *= 0.5
            continue
        d = s + gamma * t
        final_branch = branch if gamma == 1.0 else classify_switch(ev, s, gamma * t, cfg, theta=theta)
        return StepOutcome(s=s, t_raw=t, u=u, gamma=gamma, d=d, delta=dlt, branch=final_branch,
                           loop_branch=branch, qp=sol, grad_Qt=gqt, u_min=umin, solves=solves,
                           attempts=attempts)
    raise NumericalBreakdown(f"penalty loop exhausted {cfg.max_penalty_solves} QP solves")
