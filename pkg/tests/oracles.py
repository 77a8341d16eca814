"""Reference computations used by the tests, independent of the solver code."""

from __future__ import annotations

import itertools
import json

import numpy as np


def enumerate_qp(H, c, Aeq, beq, Ain, bin, tol=1e-9):
    """Brute-force minimizer of ``0.5 t'Ht + c't`` s.t. ``Aeq t = beq``, ``Ain t >= bin``.

    Every subset of inequalities is tried as an equality set; the feasible
    candidate with the lowest objective wins. Returns ``(t, objective)`` or
    ``None`` when no candidate is feasible.
    """
    n = H.shape[0]
    Aeq = np.asarray(Aeq, dtype=float).reshape(-1, n)
    Ain = np.asarray(Ain, dtype=float).reshape(-1, n)
    beq = np.asarray(beq, dtype=float).reshape(-1)
    bin = np.asarray(bin, dtype=float).reshape(-1)
    scale = max(1.0, float(np.max(np.abs(np.concatenate([beq, bin])), initial=0.0)))
    best = None
    for k in range(Ain.shape[0] + 1):
        for subset in itertools.combinations(range(Ain.shape[0]), k):
            A = np.vstack([Aeq, Ain[list(subset)]])
            b = np.concatenate([beq, bin[list(subset)]])
            r = A.shape[0]
            K = np.block([[H, A.T], [A, np.zeros((r, r))]])
            rhs = np.concatenate([-c, b])
            try:
                sol = np.linalg.solve(K, rhs)
            except np.linalg.LinAlgError:
                continue
            if np.linalg.norm(K @ sol - rhs) > 1e-9 * max(1.0, np.linalg.norm(rhs)):
                continue
            t = sol[:n]
            if np.any(np.abs(Aeq @ t - beq) > tol * scale) or np.any(Ain @ t - bin < -tol * scale):
                continue
            obj = 0.5 * t @ H @ t + c @ t
            if best is None or obj < best[1]:
                best = (t, obj)
    return best


def random_qp(rng, n=None, m_in=None, p_eq=None):
    n = n or int(rng.integers(1, 5))
    m_in = int(rng.integers(0, 7)) if m_in is None else m_in
    p_eq = int(rng.integers(0, min(n, 2) + 1)) if p_eq is None else p_eq
    R = rng.uniform(-1, 1, (n, n))
    H = R.T @ R + np.eye(n)
    c = rng.uniform(-1, 1, n)
    Aeq = rng.uniform(-1, 1, (p_eq, n))
    beq = rng.uniform(-1, 1, p_eq)
    Ain = rng.uniform(-1, 1, (m_in, n))
    bin = rng.uniform(-1, 1, m_in)
    return H, c, Aeq, beq, Ain, bin


# quadratic-document encodings of the affine/quadratic registry problems
QUAD_DOCS = {
    "lin_biactive": {
        "n": 2, "objective": {"P": [[0, 0], [0, 0]], "c": [1, 1]},
        "G": {"A": [[1, 0]], "b": [0]}, "H": {"A": [[0, 1]], "b": [0]}, "x0": [1, 1],
    },
    "quad_branch": {
        # (x1-1)^2 + (x2-1)^2 = 0.5 x'(2I)x - 2x1 - 2x2 + 2
        "n": 2, "objective": {"P": [[2, 0], [0, 2]], "c": [-2, -2]},
        "G": {"A": [[1, 0]], "b": [0]}, "H": {"A": [[0, 1]], "b": [0]}, "x0": [2, 0.1],
    },
    "mixed_eq": {
        # (x1-2)^2 + (x2-1)^2 = 0.5 x'(2I)x - 4x1 - 2x2 + 5
        "n": 2, "objective": {"P": [[2, 0], [0, 2]], "c": [-4, -2]},
        "h": {"A": [[1, 1]], "b": [-1]},
        "G": {"A": [[1, 0]], "b": [0]}, "H": {"A": [[0, 1]], "b": [0]}, "x0": [1.5, 0.5],
    },
}

# constant terms dropped by the quadratic encodings
QUAD_OFFSETS = {"lin_biactive": 0.0, "quad_branch": 2.0, "mixed_eq": 5.0}


def quad_doc_text(name):
    return json.dumps(QUAD_DOCS[name])


def _affine(doc, key, n):
    blk = doc.get(key)
    if blk is None:
        return np.zeros((0, n)), np.zeros(0)
    return np.asarray(blk["A"], dtype=float).reshape(-1, n), np.asarray(blk["b"], dtype=float)


def branch_oracle(name):
    """Solve the NLP on every complementarity branch of a quadratic fixture.

    On each branch one member of every pair is fixed at zero and the other
    kept nonnegative, which leaves a convex QP. Returns ``(x, f)`` for each
    feasible branch, sorted by ``f`` (constant offset included).
    """
    doc = QUAD_DOCS[name]
    n = doc["n"]
    P = np.asarray(doc["objective"]["P"], dtype=float)
    c = np.asarray(doc["objective"]["c"], dtype=float)
    Ag, bg = _affine(doc, "g", n)
    Ah, bh = _affine(doc, "h", n)
    AG, bG = _affine(doc, "G", n)
    AH, bH = _affine(doc, "H", n)
    q = AG.shape[0]
    # tiny proximal term keeps linear objectives bounded on the box-free branches
    Hq = P + 1e-12 * np.eye(n) if np.allclose(P, 0) else P
    out = []
    for choice in itertools.product((0, 1), repeat=q):
        eq_rows, eq_rhs, in_rows, in_rhs = [Ah], [-bh], [Ag], [-bg]
        for i, zero_G in enumerate(choice):
            zA, zb, pA, pb = (AG[i], bG[i], AH[i], bH[i]) if zero_G == 0 else (AH[i], bH[i], AG[i], bG[i])
            eq_rows.append(zA[None, :])
            eq_rhs.append([-zb])
            in_rows.append(pA[None, :])
            in_rhs.append([-pb])
        best = enumerate_qp(Hq, c, np.vstack(eq_rows), np.concatenate(eq_rhs),
                            np.vstack(in_rows), np.concatenate(in_rhs))
        if best is not None:
            x = best[0]
            f = 0.5 * x @ P @ x + c @ x + QUAD_OFFSETS[name]
            out.append((x, float(f)))
    return sorted(out, key=lambda item: item[1])
