"""Inverse demand with network effects.

Every family here has the additively separable form

    P(Q, S) = (q_max + N(S) - Q) / beta

with an increasing network term N. Downstream solvers only touch
``price``, ``dprice_dq`` and ``dprice_ds``; the two integral helpers are
closed forms that welfare code prefers over quadrature when available.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import AssumptionViolation, InvalidParameter


def _check_finite(name: str, value: float) -> None:
    if not isinstance(value, (int, float)) or isinstance(value, bool) or not math.isfinite(value):
        raise InvalidParameter(name, f"must be a finite number, got {value!r}")


@dataclass(frozen=True)
class DemandParams:
    q_max: float
    beta: float
    gamma: float
    alpha: float

    def __post_init__(self) -> None:
        for name in ("q_max", "beta", "gamma", "alpha"):
            _check_finite(name, getattr(self, name))
        if self.q_max <= 0:
            raise InvalidParameter("q_max", "must be > 0")
        if self.beta <= 0:
            raise InvalidParameter("beta", "must be > 0")
        if self.gamma <= 0:
            raise InvalidParameter("gamma", "must be > 0")
        if self.alpha < 1:
            raise InvalidParameter("alpha", "must be >= 1")


class DemandModel:
    """Base for separable linear-in-quantity demand with network term N(S)."""

    q_max: float
    beta: float
    kind: str = "abstract"
    has_closed_forms: bool = True

    def network(self, s):
        raise NotImplementedError

    def network_slope(self, s):
        raise NotImplementedError

    def price(self, q, s):
        return (self.q_max + self.network(s) - q) / self.beta

    def dprice_dq(self, q, s):
        if np.ndim(q) or np.ndim(s):
            return np.full(np.broadcast(q, s).shape, -1.0 / self.beta)
        return -1.0 / self.beta

    def dprice_ds(self, q, s):
        out = self.network_slope(s) / self.beta
        if np.ndim(q) or np.ndim(s):
            return np.broadcast_to(out, np.broadcast(q, s).shape).astype(float)
        return float(out)

    def total_slope(self, s):
        """d/dS P(S, S): demand slope plus network effect along the diagonal."""
        return self.dprice_dq(s, s) + self.dprice_ds(s, s)

    def price_integral(self, q0: float, q1: float, s: float) -> float:
        """Closed form of the integral of P(q, s) over q in [q0, q1]."""
        return ((self.q_max + self.network(s)) * (q1 - q0) - 0.5 * (q1 * q1 - q0 * q0)) / self.beta

    def externality_integral(self, s: float) -> float:
        """Closed form of the integral of dP/dS(q, s) over q in [0, s].

        dP/dS does not depend on q for this family, so the integral is s times it.
        """
        return s * self.network_slope(s) / self.beta

    def params(self) -> dict:
        raise NotImplementedError

    def replace(self, **changes) -> "DemandModel":
        raise NotImplementedError


@dataclass(frozen=True)
class SpecifiedLinearNetwork(DemandModel):
    """P(Q, S) = (q_max + gamma S^alpha - Q) / beta."""

    p: DemandParams
    kind: str = field(default="specified", init=False)

    @property
    def q_max(self) -> float:
        return self.p.q_max

    @property
    def beta(self) -> float:
        return self.p.beta

    @property
    def gamma(self) -> float:
        return self.p.gamma

    @property
    def alpha(self) -> float:
        return self.p.alpha

    def network(self, s):
        return self.p.gamma * np.power(s, self.p.alpha)

    def network_slope(self, s):
        # 0**0 == 1 keeps alpha = 1 at s = 0 equal to gamma
        return self.p.gamma * self.p.alpha * np.power(s, self.p.alpha - 1.0)

    def expansion_index(self, s_high: float) -> float:
        """gamma * alpha * s_high^(alpha - 1); exceeds 1 exactly when the
        diagonal price slope at s_high is positive."""
        return self.p.gamma * self.p.alpha * s_high ** (self.p.alpha - 1.0)

    def params(self) -> dict:
        return {"kind": self.kind, "q_max": self.q_max, "beta": self.beta, "gamma": self.gamma, "alpha": self.alpha}

    def replace(self, **changes) -> "SpecifiedLinearNetwork":
        d = {"q_max": self.q_max, "beta": self.beta, "gamma": self.gamma, "alpha": self.alpha}
        d.update(changes)
        return SpecifiedLinearNetwork(DemandParams(**d))


@dataclass(frozen=True)
class LogisticNetwork(DemandModel):
    """Saturating network effect: N(S) = gamma / (1 + exp(-steepness (S - midpoint))).

    The marginal network benefit is bell-shaped, so the diagonal price slope
    can be positive around the midpoint and negative at a high equilibrium.
    That is the weak-network case, which the power-law family cannot reach
    while keeping three crossings.
    """

    q_max: float
    beta: float
    gamma: float
    midpoint: float
    steepness: float
    kind: str = field(default="logistic", init=False)

    def __post_init__(self) -> None:
        for name in ("q_max", "beta", "gamma", "midpoint", "steepness"):
            _check_finite(name, getattr(self, name))
        if self.q_max <= 0:
            raise InvalidParameter("q_max", "must be > 0")
        if self.beta <= 0:
            raise InvalidParameter("beta", "must be > 0")
        if self.gamma <= 0:
            raise InvalidParameter("gamma", "must be > 0")
        if self.steepness <= 0:
            raise InvalidParameter("steepness", "must be > 0")

    def _sigma(self, s):
        return 1.0 / (1.0 + np.exp(-self.steepness * (np.asarray(s, dtype=float) - self.midpoint)))

    def network(self, s):
        return (self.gamma * self._sigma(s))[()]

    def network_slope(self, s):
        sig = self._sigma(s)
        return (self.gamma * self.steepness * sig * (1.0 - sig))[()]

    def params(self) -> dict:
        return {
            "kind": self.kind,
            "q_max": self.q_max,
            "beta": self.beta,
            "gamma": self.gamma,
            "midpoint": self.midpoint,
            "steepness": self.steepness,
        }

    def replace(self, **changes) -> "LogisticNetwork":
        d = {k: v for k, v in self.params().items() if k != "kind"}
        d.update(changes)
        return LogisticNetwork(**d)


@dataclass(frozen=True)
class ValidationReport:
    passed: bool
    grid_n: int
    max_dprice_dq: float
    min_dprice_ds: float


def validate(model: DemandModel, grid_n: int = 100) -> ValidationReport:
    """Check the sign conditions on a grid_n x grid_n lattice over [0, 1]^2.

    dP/dQ must be negative everywhere, dP/dS non-negative everywhere and
    strictly positive for s > 0. Raises AssumptionViolation at the first
    offending point (row-major in q, then s).
    """
    if grid_n < 2:
        raise ValueError("grid_n must be >= 2")
    axis = np.linspace(0.0, 1.0, grid_n)
    q, s = np.meshgrid(axis, axis, indexing="ij")
    dq = model.dprice_dq(q, s)
    ds = model.dprice_ds(q, s)

    bad_q = np.argwhere(~(dq < 0))
    if bad_q.size:
        i, j = bad_q[0]
        raise AssumptionViolation(float(q[i, j]), float(s[i, j]), "dprice_dq", float(dq[i, j]))
    bad_s = np.argwhere(~((ds > 0) | ((s == 0) & (ds >= 0))))
    if bad_s.size:
        i, j = bad_s[0]
        raise AssumptionViolation(float(q[i, j]), float(s[i, j]), "dprice_ds", float(ds[i, j]))
    return ValidationReport(True, grid_n, float(dq.max()), float(ds.min()))
