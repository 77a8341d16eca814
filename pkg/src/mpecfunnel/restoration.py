"""Elastic-mode feasibility restoration.

At optimal slack values the elastic problem reduces to minimizing the
constraint violation alone. ``restore`` minimizes its smooth squared
surrogate

    phi(x) = ||g^-||^2 + ||h||^2 + ||G^-||^2 + ||H^-||^2 + Q^2

by Gauss-Newton steps with Armijo backtracking, and only accepts steps
that also do not increase ``theta``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .errors import NonFiniteValue, RestorationFailure
from .measures import infeasibility, negative_part
from .model import Evaluation, MpecProblem, evaluate

log = logging.getLogger(__name__)


@dataclass
class ElasticProblem:
    """Elastic reformulation at a point, with slacks at their optimal values.

    Constraints: ``g >= -r``, ``h = v - w``, ``G >= -y``, ``H >= -z``,
    ``Q <= zeta`` and all slacks nonnegative. The objective is
    ``weight * (sum(r) + sum(v + w) + sum(y + z) + zeta)``.
    """

    x: np.ndarray
    r: np.ndarray
    v: np.ndarray
    w: np.ndarray
    y: np.ndarray
    z: np.ndarray
    zeta: float
    weight: float = 1.0
    base: MpecProblem | None = None

    def objective(self):
        return self.weight * float(np.sum(self.r) + np.sum(self.v + self.w)
                                   + np.sum(self.y + self.z) + self.zeta)

    def constraint_violation(self, ev: Evaluation):
        """Largest violation of the elastic constraints at ``ev``."""
        parts = [
            negative_part(ev.g + self.r), np.abs(ev.h - (self.v - self.w)),
            negative_part(ev.G + self.y), negative_part(ev.H + self.z),
            [max(0.0, ev.Q - self.zeta)],
            negative_part(np.concatenate([self.r, self.v, self.w, self.y, self.z, [self.zeta]])),
        ]
        return max(float(np.max(p, initial=0.0)) for p in parts)


def build_elastic(ev: Evaluation, weight=1.0, base=None) -> ElasticProblem:
    return ElasticProblem(
        x=ev.x.copy(), r=negative_part(ev.g), v=np.maximum(ev.h, 0.0), w=np.maximum(-ev.h, 0.0),
        y=negative_part(ev.G), z=negative_part(ev.H), zeta=max(ev.Q, 0.0), weight=weight, base=base,
    )


@dataclass
class RestorationReport:
    x_r: np.ndarray
    theta_before: float
    theta_after: float
    inner_iterations: int
    converged: bool
    target: float
    theta_history: list = field(default_factory=list)
    phi_history: list = field(default_factory=list)


def _residual(ev: Evaluation):
    """Violation vector and its Jacobian (rows are gradients)."""
    blocks, rows = [], []
    for vals, jac in ((ev.g, ev.jac_g), (ev.G, ev.jac_G), (ev.H, ev.jac_H)):
        neg = vals < 0.0
        blocks.append(negative_part(vals))
        rows.append(-(jac.T) * neg[:, None])
    blocks.append(ev.h)
    rows.append(ev.jac_h.T)
    blocks.append(np.array([ev.Q]))
    rows.append(ev.grad_Q[None, :])
    return np.concatenate(blocks), np.vstack(rows)


def _phi(ev):
    r, _ = _residual(ev)
    return float(r @ r)


def _try_point(problem, x):
    try:
        return evaluate(problem, x)
    except NonFiniteValue:
        return None


def restore(problem: MpecProblem, x, target, max_iter=200, rho=1e-4, max_backtracks=60) -> RestorationReport:
    """Drive ``theta`` below ``target`` starting from ``x``.

    Raises
    ------
    RestorationFailure
        If the target is not reached within ``max_iter`` inner iterations
        or no decrease is possible; the partial report is attached.
    """
    if target <= 0:
        raise ValueError("target must be positive")
    ev = evaluate(problem, x)
    theta = infeasibility(ev).theta
    theta0 = theta
    phi = _phi(ev)
    report = RestorationReport(x_r=ev.x.copy(), theta_before=theta0, theta_after=theta,
                               inner_iterations=0, converged=theta <= target, target=target,
                               theta_history=[theta], phi_history=[phi])
    it = 0
    while theta > target and it < max_iter:
        r, J = _residual(ev)
        grad = 2.0 * J.T @ r
        d_gn = np.linalg.lstsq(J, -r, rcond=None)[0]
        directions = []
        if np.all(np.isfinite(d_gn)) and grad @ d_gn < -1e-14 * np.linalg.norm(grad) * np.linalg.norm(d_gn):
            directions.append(d_gn)
        directions.append(-grad)
        accepted = None
        for d in directions:
            slope = float(grad @ d)
            alpha = 1.0
            for _ in range(max_backtracks):
                trial = _try_point(problem, ev.x + alpha * d)
                if trial is not None:
                    phi_t = _phi(trial)
                    theta_t = infeasibility(trial).theta
                    if phi_t <= phi + rho * alpha * slope and theta_t <= theta:
                        accepted = (trial, phi_t, theta_t)
                        break
                alpha *= 0.5
            if accepted is not None:
                break
        it += 1
        if accepted is None:
            log.debug("restoration stalled at theta=%.3e after %d iterations", theta, it)
            break
        ev, phi, theta = accepted
        report.theta_history.append(theta)
        report.phi_history.append(phi)
    report.x_r = ev.x.copy()
    report.theta_after = theta
    report.inner_iterations = it
    report.converged = theta <= target
    if not report.converged:
        raise RestorationFailure(
            f"restoration reached theta={theta:.3e} > target {target:.3e} after {it} iterations", report=report)
    return report
