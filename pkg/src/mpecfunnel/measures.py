"""Infeasibility measures and active index sets."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import Evaluation

DEFAULT_ACTIVITY_TOL = 1e-6


def negative_part(v):
    """Componentwise ``max(0, -v)``."""
    return np.maximum(0.0, -np.asarray(v, dtype=float))


@dataclass(frozen=True)
class ThetaBreakdown:
    """Split of the infeasibility measure.

    ``theta_f`` is the violation of the general constraints
    ``||g^-|| + ||h|| + ||G^-|| + ||H^-||`` and ``theta_c = |G^T H|``.
    """

    theta_f: float
    theta_c: float

    @property
    def theta(self) -> float:
        return self.theta_f + self.theta_c


def theta_parts(g, h, G, H):
    norm = np.linalg.norm
    theta_f = (norm(negative_part(g)) + norm(np.asarray(h, dtype=float))
               + norm(negative_part(G)) + norm(negative_part(H)))
    theta_c = abs(float(np.dot(G, H)))
    return ThetaBreakdown(float(theta_f), theta_c)


def infeasibility(ev: Evaluation) -> ThetaBreakdown:
    return theta_parts(ev.g, ev.h, ev.G, ev.H)


@dataclass(frozen=True)
class ActiveSets:
    """Zero-based index sets of (nearly) active constraints."""

    I_g: tuple
    I_G: tuple
    I_H: tuple
    tol: float

    @property
    def biactive(self):
        return tuple(sorted(set(self.I_G) & set(self.I_H)))

    @property
    def G_only(self):
        return tuple(i for i in self.I_G if i not in self.I_H)

    @property
    def H_only(self):
        return tuple(i for i in self.I_H if i not in self.I_G)


def _active(v, tol):
    v = np.asarray(v, dtype=float)
    if v.size == 0:
        return ()
    cutoff = tol * max(1.0, float(np.max(np.abs(v))))
    return tuple(int(i) for i in np.flatnonzero(np.abs(v) <= cutoff))


def active_sets(ev: Evaluation, tol=DEFAULT_ACTIVITY_TOL) -> ActiveSets:
    """Indices with ``|v_i| <= tol * max(1, ||v||_inf)`` per block."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    return ActiveSets(I_g=_active(ev.g, tol), I_G=_active(ev.G, tol), I_H=_active(ev.H, tol), tol=tol)
