"""MPEC multipliers, stationarity classification and an MPEC-MFCQ check.

Lagrangian convention::

    L = f - lambda'g + mu'h - nu'G - xi'H

so a weakly stationary point satisfies
``grad_f - jac_g lambda + jac_h mu - jac_G nu - jac_H xi = 0``.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field

import numpy as np

from .errors import Infeasible, ParseError, QpError
from .measures import active_sets, infeasibility
from .model import Evaluation
from .qp import QpProblem, QpSolution, solve_qp


class StationarityLevel(enum.IntEnum):
    """Ordered so that a higher level implies every lower one."""

    NotWeaklyStationary = 0
    Weak = 1
    CStationary = 2
    MStationary = 3
    SStationary = 4


@dataclass
class MpecMultipliers:
    lam: np.ndarray
    mu: np.ndarray
    nu_hat: np.ndarray
    xi_hat: np.ndarray
    eta: float = 0.0
    nu: np.ndarray | None = None
    xi: np.ndarray | None = None

    def to_dict(self):
        return {"lambda": self.lam.tolist(), "mu": self.mu.tolist(),
                "nu_hat": self.nu_hat.tolist(), "xi_hat": self.xi_hat.tolist(),
                "eta": float(self.eta)}

    @classmethod
    def from_dict(cls, data, m, p, q):
        def vec(key, size):
            try:
                arr = np.asarray(data.get(key, np.zeros(size)), dtype=float).reshape(-1)
            except (TypeError, ValueError):
                raise ParseError("not a numeric list", locus=key) from None
            if arr.shape[0] != size:
                raise ParseError(f"expected length {size}, got {arr.shape[0]}", locus=key)
            return arr

        return cls(lam=vec("lambda", m), mu=vec("mu", p), nu_hat=vec("nu_hat", q),
                   xi_hat=vec("xi_hat", q), eta=float(data.get("eta", 0.0)))

    @classmethod
    def from_json(cls, text, m, p, q):
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ParseError(exc.msg, locus=f"line {exc.lineno} col {exc.colno}") from None
        if not isinstance(data, dict):
            raise ParseError("multipliers must be a JSON object", locus="line 1")
        return cls.from_dict(data, m, p, q)


def recover_multipliers(qp_sol: QpSolution, u, t, ev: Evaluation) -> MpecMultipliers:
    """Map tangential-QP multipliers to MPEC multipliers.

    With ``eta = dQ't / u`` the penalty gradient ``eta * dQ`` splits over
    ``jac_G H + jac_H G``, giving ``nu_hat = nu - eta H`` and
    ``xi_hat = xi - eta G``.
    """
    if u <= 0:
        raise ValueError("u must be positive")
    m, q = ev.g.shape[0], ev.G.shape[0]
    eta = float(ev.grad_Q @ np.asarray(t, dtype=float)) / u
    lam_in = np.asarray(qp_sol.lam_in, dtype=float)
    lam = lam_in[:m].copy()
    nu = lam_in[m:m + q].copy()
    xi = lam_in[m + q:m + 2 * q].copy()
    # equality multipliers enter the Lagrangian with a plus sign
    mu = -np.asarray(qp_sol.lam_eq, dtype=float)
    return MpecMultipliers(lam=lam, mu=mu, nu_hat=nu - eta * ev.H, xi_hat=xi - eta * ev.G,
                           eta=eta, nu=nu, xi=xi)


def lagrangian_gradient(ev: Evaluation, mult: MpecMultipliers):
    return (ev.grad_f - ev.jac_g @ mult.lam + ev.jac_h @ mult.mu
            - ev.jac_G @ mult.nu_hat - ev.jac_H @ mult.xi_hat)


def estimate_multipliers(ev: Evaluation, activity_tol=1e-6) -> MpecMultipliers:
    """Least-squares multipliers supported on the active constraints."""
    act = active_sets(ev, activity_tol)
    m, p, q = ev.g.shape[0], ev.h.shape[0], ev.G.shape[0]
    cols = [ev.jac_g[:, list(act.I_g)], -ev.jac_h, ev.jac_G[:, list(act.I_G)], ev.jac_H[:, list(act.I_H)]]
    A = np.hstack(cols)
    lam = np.zeros(m)
    mu = np.zeros(p)
    nu = np.zeros(q)
    xi = np.zeros(q)
    if A.shape[1]:
        y = np.linalg.lstsq(A, ev.grad_f, rcond=None)[0]
        k = 0
        for target, idx in ((lam, act.I_g), (mu, range(p)), (nu, act.I_G), (xi, act.I_H)):
            idx = list(idx)
            target[idx] = y[k:k + len(idx)]
            k += len(idx)
    return MpecMultipliers(lam=lam, mu=mu, nu_hat=nu, xi_hat=xi)


@dataclass(frozen=True)
class Tolerances:
    feasibility: float = 1e-6
    stationarity: float = 1e-5
    complementarity: float = 1e-6
    multiplier: float = 1e-8
    activity: float = 1e-6


@dataclass
class StationarityClass:
    level: StationarityLevel
    kkt_residual: float
    biactive_pairs: list = field(default_factory=list)
    reason: str = ""

    @property
    def name(self):
        return self.level.name

    @property
    def is_s_stationary(self):
        return self.level is StationarityLevel.SStationary

    def __str__(self):
        text = f"class {self.level.name} (stationarity residual {self.kkt_residual:.3e})"
        for i, nu, xi in self.biactive_pairs:
            text += f"\n  biactive pair {i}: nu_hat={nu:.6g} xi_hat={xi:.6g}"
        if self.reason:
            text += f"\n  {self.reason}"
        return text


def classify(ev: Evaluation, mult: MpecMultipliers, tol: Tolerances = Tolerances()) -> StationarityClass:
    """Classify ``ev.x`` as weakly, C-, M- or S-stationary.

    Multipliers within ``tol.multiplier`` of zero count as zero, which keeps
    the classes nested at inexact points.
    """
    residual = float(np.linalg.norm(lagrangian_gradient(ev, mult)))
    theta = infeasibility(ev).theta
    if theta > tol.feasibility:
        return StationarityClass(StationarityLevel.NotWeaklyStationary, residual,
                                 reason=f"infeasible point (theta={theta:.3e})")
    act = active_sets(ev, tol.activity)
    pairs = [(i, float(mult.nu_hat[i]), float(mult.xi_hat[i])) for i in act.biactive]

    failures = []
    if residual > tol.stationarity:
        failures.append(f"stationarity residual {residual:.3e} > {tol.stationarity:.1e}")
    if mult.lam.size and np.min(mult.lam) < -tol.multiplier:
        failures.append("negative inequality multiplier")
    for label, mvec, vals in (("lambda'g", mult.lam, ev.g), ("nu'G", mult.nu_hat, ev.G),
                              ("xi'H", mult.xi_hat, ev.H)):
        if mvec.size and np.max(np.abs(mvec * vals)) > tol.complementarity:
            failures.append(f"complementarity {label} violated")
    if failures:
        return StationarityClass(StationarityLevel.NotWeaklyStationary, residual, pairs, "; ".join(failures))

    eps = tol.multiplier

    def zero(v):
        return abs(v) <= eps

    level = StationarityLevel.Weak
    if all(zero(a) or zero(b) or (a > 0) == (b > 0) for _, a, b in pairs):
        level = StationarityLevel.CStationary
        if all(zero(a) or zero(b) or (a > eps and b > eps) for _, a, b in pairs):
            level = StationarityLevel.MStationary
            if all(a >= -eps and b >= -eps for _, a, b in pairs):
                level = StationarityLevel.SStationary
    return StationarityClass(level, residual, pairs)


@dataclass
class MfcqReport:
    rank_ok: bool
    min_singular_value: float
    margin: float
    direction: np.ndarray
    tol: float

    @property
    def holds(self):
        return self.rank_ok and self.margin > self.tol

    def __str__(self):
        return (f"MPEC-MFCQ {'holds' if self.holds else 'FAILS'}: rank test "
                f"{'ok' if self.rank_ok else 'failed'} (min singular value {self.min_singular_value:.3e}), "
                f"margin {self.margin:.3e}")


def mfcq_diagnostic(ev: Evaluation, tol=1e-6, activity_tol=1e-6) -> MfcqReport:
    """Check MPEC-MFCQ at an (approximately) feasible point.

    The rank test covers the gradients that must be linearly independent;
    the direction test maximizes a margin ``tau`` with
    equality rows ``= 0``, strict rows ``>= tau`` and ``||d||_inf <= 1``,
    solved as a lightly regularized QP.
    """
    act = active_sets(ev, activity_tol)
    n = ev.n
    eq_cols = [ev.jac_G[:, list(act.G_only)], ev.jac_H[:, list(act.H_only)], ev.jac_h]
    E = np.hstack(eq_cols).T
    bi = list(act.biactive)
    S = np.hstack([ev.jac_g[:, list(act.I_g)], ev.jac_G[:, bi], ev.jac_H[:, bi]]).T

    if E.shape[0]:
        sv = np.linalg.svd(E, compute_uv=False)
        smin = float(sv[-1]) if E.shape[0] <= n else 0.0
    else:
        smin = float("inf")
    rank_ok = smin > tol

    if S.shape[0] == 0:
        return MfcqReport(rank_ok, smin, float("inf"), np.zeros(n), tol)

    # variables (d, tau): maximize tau
    N = n + 1
    Hmat = 1e-8 * np.eye(N)
    cvec = np.zeros(N)
    cvec[-1] = -1.0
    Aeq = np.hstack([E, np.zeros((E.shape[0], 1))])
    beq = np.zeros(E.shape[0])
    rows = [np.hstack([S, -np.ones((S.shape[0], 1))]),
            np.hstack([np.eye(n), np.zeros((n, 1))]),
            np.hstack([-np.eye(n), np.zeros((n, 1))]),
            np.concatenate([np.zeros(n), [-1.0]])[None, :]]
    Ain = np.vstack(rows)
    bin = np.concatenate([np.zeros(S.shape[0]), -np.ones(2 * n), [-1.0]])
    try:
        sol = solve_qp(QpProblem(Hmat, cvec, Aeq, beq, Ain, bin))
    except (Infeasible, QpError):
        return MfcqReport(rank_ok, smin, float("-inf"), np.zeros(n), tol)
    d = sol.t[:n]
    margin = float(np.min(S @ d))
    return MfcqReport(rank_ok, smin, margin, d, tol)
