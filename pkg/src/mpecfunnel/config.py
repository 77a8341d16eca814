"""Algorithm parameters with range validation.

Defaults are chosen inside the admissible ranges; the algorithm itself only
prescribes the ranges.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, fields

from .errors import ConfigError, ParseError

B_MODES = ("identity", "damped_bfgs")


def _check(name, value, lo=None, hi=None, lo_open=True, hi_open=True):
    if lo is not None and (value <= lo if lo_open else value < lo):
        op = ">" if lo_open else ">="
        raise ConfigError(f"{name}={value!r} out of range: must be {op} {lo}")
    if hi is not None and (value >= hi if hi_open else value > hi):
        op = "<" if hi_open else "<="
        raise ConfigError(f"{name}={value!r} out of range: must be {op} {hi}")


@dataclass(frozen=True)
class PenaltyLoopConfig:
    """Parameters of the tangential-step penalty loop.

    ``u_warm_factor`` controls how the penalty parameter carries over
    between outer iterations: each iteration starts from
    ``min(u_init, u_warm_factor * u_prev)``. Setting ``strict_u_carry``
    reuses ``u_prev`` unchanged instead.
    """

    u_init: float = 1.0
    u_hat: float = 1e-2
    kappa_u: float = 0.1
    sigma1: float = 2.0
    sigma2: float = 1.5
    kappa1: float = 0.1
    kappa2: float = 1.0
    kappa3: float = 0.1
    kappa_theta: float = 0.1
    M_theta: float = 1e4
    kappa6: float = 1.0
    sigma4: float = 1.0
    u_warm_factor: float = 4.0
    strict_u_carry: bool = False
    max_penalty_solves: int = 200

    def __post_init__(self):
        self.validate()

    def validate(self):
        _check("u_init", self.u_init, lo=0.0)
        _check("u_hat", self.u_hat, lo=0.0, hi=1.0)
        _check("kappa_u", self.kappa_u, lo=0.0, hi=1.0)
        _check("sigma1", self.sigma1, lo=1.0)
        _check("sigma2", self.sigma2, lo=1.0, hi=self.sigma1)
        _check("kappa1", self.kappa1, lo=0.0, hi=0.2)
        _check("kappa3", self.kappa3, lo=0.0, hi=0.2)
        _check("kappa2", self.kappa2, lo=0.0)
        _check("kappa_theta", self.kappa_theta, lo=0.0)
        _check("M_theta", self.M_theta, lo=0.0)
        _check("kappa6", self.kappa6, lo=0.0)
        _check("sigma4", self.sigma4, lo=0.0)
        _check("u_warm_factor", self.u_warm_factor, lo=1.0, lo_open=False)
        if int(self.max_penalty_solves) < 1:
            raise ConfigError("max_penalty_solves must be at least 1")


@dataclass(frozen=True)
class SolverConfig(PenaltyLoopConfig):
    rho: float = 0.25
    kappa4: float = 0.1
    kappa5: float = 0.1
    sigma3: float = 2.0
    kappa7: float = 0.5
    kappa8: float = 0.9
    kappa9: float = 0.5
    epsilon: float = 1e-6
    max_iter: int = 500
    max_backtracks: int = 60
    theta_max_init_factor: float = 10.0
    activity_tol: float = 1e-6
    B_update: str = "identity"
    restoration_max_iter: int = 200
    restoration_rho: float = 1e-4
    feasibility_tol: float = 1e-6
    stationarity_tol: float = 1e-5
    multiplier_tol: float = 1e-8

    def validate(self):
        super().validate()
        _check("rho", self.rho, lo=0.0, hi=min(1.0 - 5.0 * self.kappa1, 1.0 - 5.0 * self.kappa3))
        for name in ("kappa4", "kappa5", "kappa7", "kappa8", "kappa9", "restoration_rho"):
            _check(name, getattr(self, name), lo=0.0, hi=1.0)
        _check("sigma3", self.sigma3, lo=1.0)
        for name in ("epsilon", "theta_max_init_factor", "activity_tol",
                     "feasibility_tol", "stationarity_tol", "multiplier_tol"):
            _check(name, getattr(self, name), lo=0.0)
        for name in ("max_iter", "max_backtracks", "restoration_max_iter"):
            value = getattr(self, name)
            if isinstance(value, bool) or int(value) != value or value < 1:
                raise ConfigError(f"{name}={value!r} out of range: must be a positive integer")
        if self.B_update not in B_MODES:
            raise ConfigError(f"B_update={self.B_update!r}: must be one of {', '.join(B_MODES)}")

    @classmethod
    def from_dict(cls, data: dict) -> "SolverConfig":
        known = {f.name: f for f in fields(cls)}
        unknown = sorted(set(data) - set(known))
        if unknown:
            raise ConfigError(f"unknown configuration field(s): {', '.join(unknown)}")
        clean = {}
        for key, value in data.items():
            kind = known[key].type
            if kind in ("float", float) and isinstance(value, (int, float)) and not isinstance(value, bool):
                value = float(value)
            elif kind in ("float", float) or (kind in ("int", int) and not isinstance(value, int)):
                raise ConfigError(f"{key}={value!r}: expected a number")
            clean[key] = value
        return cls(**clean)

    def to_dict(self) -> dict:
        return asdict(self)


def load_config(text: str) -> SolverConfig:
    """Parse a JSON object of SolverConfig fields; absent fields keep defaults."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, locus=f"line {exc.lineno} col {exc.colno}") from None
    if not isinstance(data, dict):
        raise ParseError("configuration must be a JSON object", locus="line 1")
    return SolverConfig.from_dict(data)
