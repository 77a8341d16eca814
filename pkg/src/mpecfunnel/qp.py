"""Dense strictly convex quadratic programming by a primal active-set method.

Solves::

    min  0.5 t'Ht + c't
    s.t. Aeq t  = beq
         Ain t >= bin

Lagrange multipliers follow the sign convention

    H t + c - Aeq' lam_eq - Ain' lam_in = 0,   lam_in >= 0.

Phase 1 minimizes the total constraint violation with the same active-set
core applied to an elastic reformulation, which has an obvious feasible
starting point. A tiny proximal term keeps that problem strictly convex;
the l1 violation is an exact penalty for it, so a consistent system yields
an exactly feasible point.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import Infeasible, MaxIterations, NumericalBreakdown

PHASE1_REG = 1e-10
INFEASIBILITY_TOL = 1e-8
DUAL_TOL = 1e-10


def _as2d(A, n):
    A = np.asarray(A if A is not None else np.zeros((0, n)), dtype=float)
    if A.size == 0:
        return np.zeros((0, n))
    return np.atleast_2d(A)


@dataclass
class QpProblem:
    Hmat: np.ndarray
    cvec: np.ndarray
    Aeq: np.ndarray = None
    beq: np.ndarray = None
    Ain: np.ndarray = None
    bin: np.ndarray = None

    def __post_init__(self):
        self.Hmat = np.atleast_2d(np.asarray(self.Hmat, dtype=float))
        self.cvec = np.asarray(self.cvec, dtype=float).reshape(-1)
        n = self.cvec.shape[0]
        if self.Hmat.shape != (n, n):
            raise ValueError(f"Hmat has shape {self.Hmat.shape}, expected ({n}, {n})")
        self.Aeq = _as2d(self.Aeq, n)
        self.Ain = _as2d(self.Ain, n)
        self.beq = np.asarray(self.beq if self.beq is not None else [], dtype=float).reshape(-1)
        self.bin = np.asarray(self.bin if self.bin is not None else [], dtype=float).reshape(-1)
        if self.Aeq.shape[1] != n or self.Ain.shape[1] != n:
            raise ValueError("constraint matrices must have n columns")
        if self.beq.shape[0] != self.Aeq.shape[0] or self.bin.shape[0] != self.Ain.shape[0]:
            raise ValueError("constraint right-hand sides do not match matrix rows")
        asym = np.max(np.abs(self.Hmat - self.Hmat.T)) if n else 0.0
        if asym > 1e-12 * max(1.0, np.max(np.abs(self.Hmat))):
            raise ValueError(f"Hmat is not symmetric (max asymmetry {asym:.2e})")

    @property
    def n(self):
        return self.cvec.shape[0]

    def objective(self, t):
        return float(0.5 * t @ self.Hmat @ t + self.cvec @ t)

    def scale(self):
        """Magnitude of the data, used to scale tolerances."""
        vals = [1.0]
        for arr in (self.Hmat, self.cvec, self.Aeq, self.beq, self.Ain, self.bin):
            if arr.size:
                vals.append(float(np.max(np.abs(arr))))
        return max(vals)


@dataclass
class QpSolution:
    t: np.ndarray
    lam_eq: np.ndarray
    lam_in: np.ndarray
    active: tuple
    kkt_residual: float
    iterations: int
    objective: float
    history: list = field(default_factory=list, repr=False)


def kkt_residual(qp: QpProblem, sol: QpSolution) -> float:
    """Largest violation among the KKT conditions of ``qp`` at ``sol``.

    Combines the stationarity norm, primal infeasibility, negativity of
    inequality multipliers and the complementarity products.
    """
    t = np.asarray(sol.t, dtype=float)
    grad = qp.Hmat @ t + qp.cvec - qp.Aeq.T @ sol.lam_eq - qp.Ain.T @ sol.lam_in
    parts = [float(np.linalg.norm(grad))]
    if qp.Aeq.shape[0]:
        parts.append(float(np.max(np.abs(qp.Aeq @ t - qp.beq))))
    if qp.Ain.shape[0]:
        slack = qp.Ain @ t - qp.bin
        parts.append(float(np.max(np.maximum(0.0, -slack))))
        parts.append(float(np.max(np.maximum(0.0, -sol.lam_in))))
        parts.append(float(np.max(np.abs(sol.lam_in * slack))))
    return max(parts)


def _independent_rows(A, tol=1e-10):
    """Greedy selection of linearly independent rows of ``A``."""
    keep = []
    basis = np.zeros((0, A.shape[1]))
    for i, row in enumerate(A):
        cand = np.vstack([basis, row])
        s = np.linalg.svd(cand, compute_uv=False)
        if s[-1] > tol * max(1.0, s[0]):
            keep.append(i)
            basis = cand
    return keep


class ActiveSetSolver:
    """Primal active-set solver for strictly convex QPs.

    Parameters
    ----------
    max_iter : int, optional
        Iteration cap; defaults to ``50 * (n + m' + p') + 100``.
    feas_tol : float
        Tolerance for treating an inequality as binding at the start.
    """

    def __init__(self, max_iter=None, feas_tol=1e-10):
        self.max_iter = max_iter
        self.feas_tol = feas_tol

    # -- public API -------------------------------------------------------
    def solve(self, qp: QpProblem, start=None) -> QpSolution:
        n = qp.n
        eq_rows = _independent_rows(qp.Aeq) if qp.Aeq.shape[0] else []
        scale_b = max([1.0] + [float(np.max(np.abs(b))) for b in (qp.beq, qp.bin) if b.size])

        t0 = None
        if start is not None:
            start = np.asarray(start, dtype=float).reshape(-1)
            if start.shape != (n,):
                raise ValueError("start has the wrong length")
            if self._violation(qp, start) <= self.feas_tol * scale_b:
                t0 = start.copy()
        if t0 is None:
            t0 = self.phase1(qp.Aeq, qp.beq, qp.Ain, qp.bin, start=start)
        slack = qp.Ain @ t0 - qp.bin
        tol_act = self.feas_tol * scale_b
        cand = [i for i in range(qp.Ain.shape[0]) if slack[i] <= tol_act]
        W = self._initial_working_set(qp.Aeq[eq_rows], qp.Ain, cand)

        t, W, lam_w, iters, hist = self._iterate(qp.Hmat, qp.cvec, qp.Aeq[eq_rows], qp.beq[eq_rows],
                                                 qp.Ain, qp.bin, t0, W)
        lam_eq = np.zeros(qp.Aeq.shape[0])
        lam_eq[eq_rows] = lam_w[:len(eq_rows)]
        lam_in = np.zeros(qp.Ain.shape[0])
        lam_in[W] = lam_w[len(eq_rows):]
        sol = QpSolution(t=t, lam_eq=lam_eq, lam_in=lam_in, active=tuple(sorted(W)),
                         kkt_residual=0.0, iterations=iters, objective=qp.objective(t), history=hist)
        sol.kkt_residual = kkt_residual(qp, sol)
        return sol

    def phase1(self, Aeq, beq, Ain, bin, start=None):
        """Return a point satisfying the linear constraints.

        Raises
        ------
        Infeasible
            If the minimum total violation exceeds
            ``1e-8 * max(1, ||b||_inf)``.
        """
        if Ain is None and Aeq is None:
            raise ValueError("phase1 needs at least one constraint block")
        n = np.atleast_2d(np.asarray(Ain if Ain is not None else Aeq, dtype=float)).shape[1]
        Ain, Aeq = _as2d(Ain, n), _as2d(Aeq, n)
        bin = np.asarray(bin if bin is not None else [], dtype=float).reshape(-1)
        beq = np.asarray(beq if beq is not None else [], dtype=float).reshape(-1)
        mi, me = Ain.shape[0], Aeq.shape[0]
        t = np.zeros(n) if start is None else np.asarray(start, dtype=float).reshape(-1).copy()
        scale_b = max([1.0] + [float(np.max(np.abs(b))) for b in (beq, bin) if b.size])
        if mi + me == 0:
            return t

        # variables z = (t, v, e+, e-), all slacks nonnegative
        N = n + mi + 2 * me
        In_rows = []
        In_rhs = []
        if mi:
            In_rows.append(np.hstack([Ain, np.eye(mi), np.zeros((mi, 2 * me))]))
            In_rhs.append(bin)
        In_rows.append(np.hstack([np.zeros((N - n, n)), np.eye(N - n)]))
        In_rhs.append(np.zeros(N - n))
        A_in = np.vstack(In_rows)
        b_in = np.concatenate(In_rhs)
        A_eq = np.hstack([Aeq, np.zeros((me, mi)), np.eye(me), -np.eye(me)])
        b_eq = beq

        resid_eq = beq - Aeq @ t
        z0 = np.concatenate([t, np.maximum(0.0, bin - Ain @ t),
                             np.maximum(0.0, resid_eq), np.maximum(0.0, -resid_eq)])
        cost = np.concatenate([np.zeros(n), np.ones(N - n)])
        Hreg = PHASE1_REG * np.eye(N)

        slack = A_in @ z0 - b_in
        cand = [i for i in range(A_in.shape[0]) if slack[i] <= 1e-14 * scale_b]
        W = self._initial_working_set(A_eq, A_in, cand)
        z, _, _, _, _ = self._iterate(Hreg, cost, A_eq, b_eq, A_in, b_in, z0, W)
        violation = float(np.sum(np.maximum(z[n:], 0.0)))
        t = z[:n]
        true_violation = self._violation_parts(Aeq, beq, Ain, bin, t)
        if max(violation, true_violation) > INFEASIBILITY_TOL * scale_b:
            raise Infeasible(f"linear constraints are inconsistent (minimum total violation {violation:.3e})",
                             violation=violation)
        return t

    # -- internals --------------------------------------------------------
    @staticmethod
    def _violation_parts(Aeq, beq, Ain, bin, t):
        v = 0.0
        if Aeq.shape[0]:
            v += float(np.sum(np.abs(Aeq @ t - beq)))
        if Ain.shape[0]:
            v += float(np.sum(np.maximum(0.0, bin - Ain @ t)))
        return v

    def _violation(self, qp, t):
        return self._violation_parts(qp.Aeq, qp.beq, qp.Ain, qp.bin, t)

    @staticmethod
    def _initial_working_set(Aeq, Ain, candidates):
        W = []
        basis = Aeq.copy()
        for i in candidates:
            cand = np.vstack([basis, Ain[i]])
            s = np.linalg.svd(cand, compute_uv=False)
            if s[-1] > 1e-10 * max(1.0, s[0]):
                W.append(i)
                basis = cand
        return W

    def _iterate(self, H, c, Aeq, beq, Ain, bin, x, W):
        """Active-set loop from a feasible ``x`` with working set ``W``.

        Returns ``(x, W, lam_working, iterations, objective_history)``; the
        multipliers are ordered as equality rows then ``W``.
        """
        n = x.shape[0]
        me, mi = Aeq.shape[0], Ain.shape[0]
        max_iter = self.max_iter or 50 * (n + mi + me) + 100
        bland_after = 3 * (mi + me)
        W = list(W)
        x = x.copy()

        def obj(z):
            return float(0.5 * z @ H @ z + c @ z)

        hist = [obj(x)]
        stalled = 0
        at_subspace_min = False
        for it in range(1, max_iter + 1):
            A_W = np.vstack([Aeq, Ain[W]]) if W else Aeq
            b_W = np.concatenate([beq, bin[W]]) if W else beq
            k = A_W.shape[0]
            if k:
                Qf, R = np.linalg.qr(A_W.T, mode="complete")
                Y, Z, R = Qf[:, :k], Qf[:, k:], R[:k, :]
                if np.min(np.abs(np.diag(R))) <= 1e-13 * max(1.0, np.max(np.abs(np.diag(R)))):
                    raise NumericalBreakdown("working-set constraints became linearly dependent")
            else:
                Y, Z, R = np.zeros((n, 0)), np.eye(n), np.zeros((0, 0))

            grad = H @ x + c
            if at_subspace_min:
                p = np.zeros(n)
            else:
                # particular part restores A_W x = b_W, null-space part minimizes
                p = Y @ np.linalg.solve(R.T, b_W - A_W @ x) if k else np.zeros(n)
                if Z.shape[1]:
                    red = Z.T @ H @ Z
                    try:
                        L = np.linalg.cholesky(red)
                    except np.linalg.LinAlgError:
                        raise NumericalBreakdown("reduced Hessian is not positive definite") from None
                    rg = Z.T @ (grad + H @ p)
                    p = p - Z @ np.linalg.solve(L.T, np.linalg.solve(L, rg))

            if at_subspace_min or np.linalg.norm(p) <= 1e-14 * (1.0 + np.linalg.norm(x)):
                x = x + p
                grad = H @ x + c
                lam = np.linalg.solve(R, Y.T @ grad) if k else np.zeros(0)
                lam_in = lam[me:]
                negative = [j for j in range(len(W)) if lam_in[j] < -DUAL_TOL]
                if not negative:
                    return x, W, lam, it, hist
                if stalled > bland_after:
                    drop = min(negative, key=lambda j: W[j])
                else:
                    # most negative, ties to the lowest constraint index
                    drop = min(negative, key=lambda j: (lam_in[j], W[j]))
                W.pop(drop)
                at_subspace_min = False
                continue

            alpha = 1.0
            block = None
            for i in range(mi):
                if i in W:
                    continue
                ap = Ain[i] @ p
                if ap < -1e-14 * max(1.0, np.linalg.norm(p)):
                    ratio = max(0.0, (bin[i] - Ain[i] @ x) / ap)
                    if ratio < alpha:
                        alpha, block = ratio, i
            x = x + alpha * p
            f_new = obj(x)
            if f_new < hist[-1] - 1e-14 * (1.0 + abs(hist[-1])):
                stalled = 0
            else:
                stalled += 1
            hist.append(f_new)
            if block is not None:
                W.append(block)
                at_subspace_min = False
            else:
                at_subspace_min = True
        raise MaxIterations(f"active-set method did not converge in {max_iter} iterations")


def solve_qp(qp: QpProblem, start=None, **options) -> QpSolution:
    """Solve ``qp`` with a fresh :class:`ActiveSetSolver`."""
    return ActiveSetSolver(**options).solve(qp, start=start)


def phase1(Aeq, beq, Ain, bin, start=None):
    """Find a point satisfying ``Aeq t = beq`` and ``Ain t >= bin``."""
    return ActiveSetSolver().phase1(Aeq, beq, Ain, bin, start=start)
