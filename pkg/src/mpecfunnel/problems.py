"""Built-in test problems and the quadratic-MPEC document loader.

Document format (JSON, one object)::

    {
      "name": "optional identifier",
      "n": 2,
      "objective": {"P": [[...], ...], "c": [...]},   # 0.5 x'Px + c'x
      "g": {"A": [[...]], "b": [...]},                 # A x + b >= 0
      "h": {"A": [[...]], "b": [...]},                 # A x + b  = 0
      "G": {"A": [[...]], "b": [...]},                 # A x + b >= 0
      "H": {"A": [[...]], "b": [...]},                 # A x + b >= 0
      "x0": [...]                                      # optional
    }

``g`` and ``h`` are optional; ``G`` and ``H`` are required and must have
at least one row.
"""

from __future__ import annotations

import json
import warnings

import numpy as np

from .errors import DimensionMismatch, ParseError, UnknownProblem
from .model import MpecProblem


def _lin_biactive():
    # min x1 + x2  s.t.  0 <= x1 _|_ x2 >= 0
    return MpecProblem(
        n=2, m=0, p=0, q=1,
        f_eval=lambda x: x[0] + x[1],
        grad_f=lambda x: np.array([1.0, 1.0]),
        G_eval=lambda x: np.array([x[0]]),
        jac_G=lambda x: np.array([[1.0], [0.0]]),
        H_eval=lambda x: np.array([x[1]]),
        jac_H=lambda x: np.array([[0.0], [1.0]]),
        name="lin_biactive",
        info={
            "x0": [1.0, 1.0],
            "solutions": [[0.0, 0.0]],
            "f_star": 0.0,
            "multipliers": {"nu_hat": [1.0], "xi_hat": [1.0]},
            "note": "biactive S-stationary minimizer at the origin",
        },
    )


def _quad_branch():
    # min (x1-1)^2 + (x2-1)^2  s.t.  0 <= x1 _|_ x2 >= 0
    return MpecProblem(
        n=2, m=0, p=0, q=1,
        f_eval=lambda x: (x[0] - 1.0) ** 2 + (x[1] - 1.0) ** 2,
        grad_f=lambda x: np.array([2.0 * (x[0] - 1.0), 2.0 * (x[1] - 1.0)]),
        G_eval=lambda x: np.array([x[0]]),
        jac_G=lambda x: np.array([[1.0], [0.0]]),
        H_eval=lambda x: np.array([x[1]]),
        jac_H=lambda x: np.array([[0.0], [1.0]]),
        name="quad_branch",
        info={
            "x0": [2.0, 0.1],
            "solutions": [[1.0, 0.0], [0.0, 1.0]],
            "f_star": 1.0,
            "c_stationary": [0.0, 0.0],
            "note": "two S-stationary minima; the origin is C-stationary with multipliers (-2, -2)",
        },
    )


def _mixed_eq():
    # min (x1-2)^2 + (x2-1)^2  s.t.  x1 + x2 - 1 = 0,  0 <= x1 _|_ x2 >= 0
    return MpecProblem(
        n=2, m=0, p=1, q=1,
        f_eval=lambda x: (x[0] - 2.0) ** 2 + (x[1] - 1.0) ** 2,
        grad_f=lambda x: np.array([2.0 * (x[0] - 2.0), 2.0 * (x[1] - 1.0)]),
        h_eval=lambda x: np.array([x[0] + x[1] - 1.0]),
        jac_h=lambda x: np.array([[1.0], [1.0]]),
        G_eval=lambda x: np.array([x[0]]),
        jac_G=lambda x: np.array([[1.0], [0.0]]),
        H_eval=lambda x: np.array([x[1]]),
        jac_H=lambda x: np.array([[0.0], [1.0]]),
        name="mixed_eq",
        info={
            "x0": [1.5, 0.5],
            "solutions": [[1.0, 0.0]],
            "f_star": 2.0,
            "note": "feasible set is {(1,0), (0,1)}; (1,0) has f=2, (0,1) has f=4",
        },
    )


def _cstat_fixture():
    # Nonlinear lift of quad_branch: G and H bend with x3, a ball constraint
    # stays inactive at the minima. Origin is C- but not M-stationary.
    def f(x):
        return (x[0] - 1.0) ** 2 + (x[1] - 1.0) ** 2 + x[2] ** 2

    def grad_f(x):
        return np.array([2.0 * (x[0] - 1.0), 2.0 * (x[1] - 1.0), 2.0 * x[2]])

    return MpecProblem(
        n=3, m=1, p=0, q=1,
        f_eval=f,
        grad_f=grad_f,
        g_eval=lambda x: np.array([4.0 - x[0] ** 2 - x[1] ** 2 - x[2] ** 2]),
        jac_g=lambda x: np.array([[-2.0 * x[0]], [-2.0 * x[1]], [-2.0 * x[2]]]),
        G_eval=lambda x: np.array([x[0] + x[2] ** 2]),
        jac_G=lambda x: np.array([[1.0], [0.0], [2.0 * x[2]]]),
        H_eval=lambda x: np.array([x[1] + x[2] ** 3]),
        jac_H=lambda x: np.array([[0.0], [1.0], [3.0 * x[2] ** 2]]),
        name="cstat_fixture",
        info={
            "x0": [1.5, 0.4, 0.3],
            "solutions": [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]],
            "f_star": 1.0,
            "c_stationary": [0.0, 0.0, 0.0],
            "note": "origin is C-stationary with multipliers (-2, -2); minima at (1,0,0) and (0,1,0)",
        },
    )


_REGISTRY = {
    "lin_biactive": _lin_biactive,
    "quad_branch": _quad_branch,
    "mixed_eq": _mixed_eq,
    "cstat_fixture": _cstat_fixture,
}


def registry_names():
    return sorted(_REGISTRY)


def registry_get(name: str) -> MpecProblem:
    """Return a fresh instance of the built-in problem ``name``."""
    try:
        factory = _REGISTRY[name]
    except KeyError:
        raise UnknownProblem(f"unknown problem {name!r}; available: {', '.join(registry_names())}") from None
    return factory()


# --- quadratic-MPEC documents -------------------------------------------------

def _matrix(obj, field, rows, cols):
    try:
        arr = np.array(obj, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ParseError(f"not a numeric array ({exc})", locus=field) from None
    if rows == 0 and arr.size == 0:
        return np.zeros((0, cols))
    if arr.ndim != 2:
        raise ParseError(f"expected a nested list (matrix), got {arr.ndim}-d data", locus=field)
    if rows is not None and arr.shape[0] != rows:
        raise DimensionMismatch(f"{field}: expected {rows} rows, got {arr.shape[0]}")
    if arr.shape[1] != cols:
        raise DimensionMismatch(f"{field}: expected {cols} columns, got {arr.shape[1]}")
    if not np.all(np.isfinite(arr)):
        raise ParseError("non-finite entry", locus=field)
    return arr


def _vector(obj, field, size):
    try:
        arr = np.array(obj, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ParseError(f"not a numeric array ({exc})", locus=field) from None
    if arr.ndim != 1 and not (arr.size == 0 and size == 0):
        raise ParseError(f"expected a flat list, got {arr.ndim}-d data", locus=field)
    arr = arr.reshape(-1)
    if arr.shape[0] != size:
        raise DimensionMismatch(f"{field}: expected length {size}, got {arr.shape[0]}")
    if not np.all(np.isfinite(arr)):
        raise ParseError("non-finite entry", locus=field)
    return arr


def _affine_block(doc, key, n, required):
    if key not in doc:
        if required:
            raise ParseError("missing required block", locus=key)
        return np.zeros((0, n)), np.zeros(0)
    blk = doc[key]
    if not isinstance(blk, dict) or "A" not in blk or "b" not in blk:
        raise ParseError("expected an object with fields A and b", locus=key)
    A = _matrix(blk["A"], f"{key}.A", None, n)
    b = _vector(blk["b"], f"{key}.b", A.shape[0])
    return A, b


def _affine_pair(A, b):
    At = A.T.copy()
    return (lambda x: A @ x + b), (lambda x: At)


def load_quadratic_mpec(document: str, name: str | None = None) -> MpecProblem:
    """Build a problem from a quadratic-MPEC JSON document.

    A non-symmetric ``P`` is replaced by ``(P + P^T) / 2``; this emits a
    ``UserWarning`` and sets ``info["symmetrized"]``.

    Raises
    ------
    ParseError
        Malformed JSON (locus is ``line L col C``), a missing or malformed
        field (locus is the field path) or an empty complementarity block.
    DimensionMismatch
        Array sizes inconsistent with ``n``.
    """
    try:
        doc = json.loads(document)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, locus=f"line {exc.lineno} col {exc.colno}") from None
    if not isinstance(doc, dict):
        raise ParseError("document must be a JSON object", locus="line 1")
    if "n" not in doc:
        raise ParseError("missing required field", locus="n")
    n = doc["n"]
    if isinstance(n, bool) or not isinstance(n, int) or n < 1:
        raise ParseError(f"must be a positive integer, got {n!r}", locus="n")
    if "objective" not in doc or not isinstance(doc["objective"], dict):
        raise ParseError("missing objective object", locus="objective")
    obj = doc["objective"]
    P = _matrix(obj.get("P", np.zeros((n, n))), "objective.P", n, n)
    c = _vector(obj.get("c", np.zeros(n)), "objective.c", n)

    symmetrized = False
    if not np.allclose(P, P.T, rtol=0.0, atol=0.0):
        P = 0.5 * (P + P.T)
        symmetrized = True
        warnings.warn("objective.P is not symmetric; replaced by (P + P^T)/2", UserWarning, stacklevel=2)

    Ag, bg = _affine_block(doc, "g", n, required=False)
    Ah, bh = _affine_block(doc, "h", n, required=False)
    AG, bG = _affine_block(doc, "G", n, required=True)
    AH, bH = _affine_block(doc, "H", n, required=True)
    if AG.shape[0] == 0:
        raise ParseError("an MPEC needs at least one complementarity pair", locus="G")
    if AH.shape[0] != AG.shape[0]:
        raise DimensionMismatch(f"G has {AG.shape[0]} rows but H has {AH.shape[0]}")

    info = {"symmetrized": symmetrized, "source": "quadratic-mpec document"}
    if "x0" in doc:
        info["x0"] = _vector(doc["x0"], "x0", n).tolist()

    kwargs = {}
    if Ag.shape[0]:
        kwargs["g_eval"], kwargs["jac_g"] = _affine_pair(Ag, bg)
    if Ah.shape[0]:
        kwargs["h_eval"], kwargs["jac_h"] = _affine_pair(Ah, bh)
    G_eval, jac_G = _affine_pair(AG, bG)
    H_eval, jac_H = _affine_pair(AH, bH)

    return MpecProblem(
        n=n, m=Ag.shape[0], p=Ah.shape[0], q=AG.shape[0],
        f_eval=lambda x: float(0.5 * x @ P @ x + c @ x),
        grad_f=lambda x: P @ x + c,
        G_eval=G_eval, jac_G=jac_G, H_eval=H_eval, jac_H=jac_H,
        name=name or str(doc.get("name", "quadratic_mpec")),
        info=info,
        **kwargs,
    )


def dump_quadratic_mpec(P, c, G, H, g=None, h=None, x0=None, name=None) -> str:
    """Serialize affine data to a quadratic-MPEC document.

    ``G``, ``H``, ``g`` and ``h`` are ``(A, b)`` pairs.
    """
    def blk(pair):
        A, b = pair
        return {"A": np.asarray(A, float).tolist(), "b": np.asarray(b, float).reshape(-1).tolist()}

    P = np.asarray(P, float)
    doc = {"n": int(P.shape[0]),
           "objective": {"P": P.tolist(), "c": np.asarray(c, float).tolist()}}
    if name is not None:
        doc["name"] = name
    if g is not None:
        doc["g"] = blk(g)
    if h is not None:
        doc["h"] = blk(h)
    doc["G"] = blk(G)
    doc["H"] = blk(H)
    if x0 is not None:
        doc["x0"] = np.asarray(x0, float).tolist()
    return json.dumps(doc, indent=2)
