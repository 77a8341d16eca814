"""MPEC problem abstraction, cached evaluation and gradient checking.

A problem has the form::

    min  f(x)
    s.t. g(x) >= 0,  h(x) = 0,
         G(x) >= 0,  H(x) >= 0,  G(x)^T H(x) = 0

Jacobians follow the column convention: ``jac_g(x)`` has shape ``(n, m)``
and its i-th column is the gradient of ``g_i``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable

import numpy as np

from .errors import DimensionMismatch, NonFiniteValue

Vector = np.ndarray
Matrix = np.ndarray


@dataclass(frozen=True)
class MpecProblem:
    """Evaluator bundle for an MPEC.

    Evaluators for empty blocks (``m == 0`` or ``p == 0``) may be left as
    None; they then return arrays of the right (empty) shape.

    ``info`` holds optional metadata such as a default starting point
    (``"x0"``) or known solutions (``"solutions"``).
    """

    n: int
    m: int
    p: int
    q: int
    f_eval: Callable[[Vector], float]
    grad_f: Callable[[Vector], Vector]
    G_eval: Callable[[Vector], Vector]
    jac_G: Callable[[Vector], Matrix]
    H_eval: Callable[[Vector], Vector]
    jac_H: Callable[[Vector], Matrix]
    g_eval: Callable[[Vector], Vector] | None = None
    jac_g: Callable[[Vector], Matrix] | None = None
    h_eval: Callable[[Vector], Vector] | None = None
    jac_h: Callable[[Vector], Matrix] | None = None
    name: str = "mpec"
    info: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.n < 1 or min(self.m, self.p, self.q) < 0:
            raise DimensionMismatch(f"invalid dimensions n={self.n}, m={self.m}, p={self.p}, q={self.q}")
        for blk, count in (("g", self.m), ("h", self.p)):
            if count > 0 and (getattr(self, f"{blk}_eval") is None or getattr(self, f"jac_{blk}") is None):
                raise DimensionMismatch(f"{blk} has {count} components but no evaluator")

    @property
    def dims(self):
        return self.n, self.m, self.p, self.q


@dataclass(frozen=True)
class Evaluation:
    """All function and Jacobian values of a problem at one point."""

    x: Vector
    f: float
    g: Vector
    h: Vector
    G: Vector
    H: Vector
    grad_f: Vector
    jac_g: Matrix
    jac_h: Matrix
    jac_G: Matrix
    jac_H: Matrix

    @cached_property
    def Q(self) -> float:
        """Complementarity product ``G^T H``."""
        return float(self.G @ self.H)

    @cached_property
    def grad_Q(self) -> Vector:
        return self.jac_G @ self.H + self.jac_H @ self.G

    @property
    def n(self):
        return self.x.shape[0]


def _as_vector(value, size, label):
    arr = np.atleast_1d(np.asarray(value, dtype=float))
    if arr.shape != (size,):
        raise DimensionMismatch(f"{label} returned shape {arr.shape}, expected ({size},)")
    if not np.all(np.isfinite(arr)):
        raise NonFiniteValue(f"{label} returned a non-finite value")
    return arr


def _as_matrix(value, n, cols, label):
    arr = np.asarray(value, dtype=float)
    if cols == 0 and arr.size == 0:
        return np.zeros((n, 0))
    if arr.ndim == 1 and cols == 1:
        arr = arr.reshape(n, 1)
    if arr.shape != (n, cols):
        raise DimensionMismatch(f"{label} returned shape {arr.shape}, expected ({n}, {cols})")
    if not np.all(np.isfinite(arr)):
        raise NonFiniteValue(f"{label} returned a non-finite value")
    return arr


def _block(problem, name, x):
    """Value and Jacobian of block ``name`` (one of g, h, G, H)."""
    count = {"g": problem.m, "h": problem.p, "G": problem.q, "H": problem.q}[name]
    n = problem.n
    if count == 0:
        return np.zeros(0), np.zeros((n, 0))
    val = _as_vector(getattr(problem, f"{name}_eval")(x), count, name)
    jac = _as_matrix(getattr(problem, f"jac_{name}")(x), n, count, f"jac_{name}")
    return val, jac


def evaluate(problem: MpecProblem, x) -> Evaluation:
    """Evaluate every function and Jacobian of ``problem`` at ``x``.

    Raises
    ------
    DimensionMismatch
        If ``x`` or any returned array has the wrong shape.
    NonFiniteValue
        If any evaluator returns NaN or inf.
    """
    x = np.array(x, dtype=float).reshape(-1)
    if x.shape[0] != problem.n:
        raise DimensionMismatch(f"x has length {x.shape[0]}, problem expects {problem.n}")
    if not np.all(np.isfinite(x)):
        raise NonFiniteValue("x contains a non-finite entry")
    x.setflags(write=False)
    f = float(problem.f_eval(x))
    if not np.isfinite(f):
        raise NonFiniteValue("f returned a non-finite value")
    grad_f = _as_vector(problem.grad_f(x), problem.n, "grad_f")
    g, jac_g = _block(problem, "g", x)
    h, jac_h = _block(problem, "h", x)
    G, jac_G = _block(problem, "G", x)
    H, jac_H = _block(problem, "H", x)
    return Evaluation(x=x, f=f, g=g, h=h, G=G, H=H, grad_f=grad_f,
                      jac_g=jac_g, jac_h=jac_h, jac_G=jac_G, jac_H=jac_H)


@dataclass
class GradientReport:
    """Worst relative analytic-vs-finite-difference error per function."""

    errors: dict
    step: float
    tol: float

    @property
    def passed(self) -> bool:
        return all(err <= self.tol for err in self.errors.values())

    @property
    def worst(self) -> float:
        return max(self.errors.values(), default=0.0)

    def __str__(self):
        lines = [f"gradient check (step={self.step:g}, tol={self.tol:g}): "
                 + ("pass" if self.passed else "FAIL")]
        for name, err in self.errors.items():
            lines.append(f"  {name:<6s} {err:.3e}")
        return "\n".join(lines)


def _fd_jacobian(fun, x, step):
    """Central-difference Jacobian of ``fun`` in column convention."""
    n = x.shape[0]
    cols = []
    for j in range(n):
        xp = x.copy()
        xm = x.copy()
        xp[j] += step
        xm[j] -= step
        cols.append((np.atleast_1d(fun(xp)) - np.atleast_1d(fun(xm))) / (2.0 * step))
    # rows indexed by variable
    return np.array(cols, dtype=float)


def _rel_error(analytic, approx):
    if analytic.size == 0:
        return 0.0
    return float(np.max(np.abs(analytic - approx) / np.maximum(1.0, np.abs(analytic))))


def check_gradients(problem: MpecProblem, x, step=1e-6, tol=1e-6) -> GradientReport:
    """Compare analytic derivatives against central finite differences.

    The relative error of each entry uses ``max(1, |analytic|)`` as the
    denominator.
    """
    if step <= 0:
        raise ValueError("step must be positive")
    ev = evaluate(problem, x)
    x = ev.x.copy()
    errors = {"grad_f": _rel_error(ev.grad_f, _fd_jacobian(problem.f_eval, x, step).reshape(-1))}
    for name, count in (("g", problem.m), ("h", problem.p), ("G", problem.q), ("H", problem.q)):
        if count == 0:
            continue
        fun = getattr(problem, f"{name}_eval")
        approx = _fd_jacobian(fun, x, step)
        if not np.all(np.isfinite(approx)):
            raise NonFiniteValue(f"finite differences of {name} are not finite")
        errors[f"jac_{name}"] = _rel_error(getattr(ev, f"jac_{name}"), approx)
    return GradientReport(errors=errors, step=step, tol=tol)
