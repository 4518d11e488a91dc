"""Heterogeneous site-cost stock: CDF, density, quantile and cumulative cost.

Total site mass is normalised to one. ``cumulative_cost(s)`` is the cost of
building the ``s`` cheapest sites, i.e. the integral of c g(c) from 0 to
``quantile(s)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DomainError, InvalidParameter
from .numerics import adaptive_simpson

KNOT_TOL = 1e-9


def _check_mass(s: float) -> None:
    if not (0.0 <= s <= 1.0):
        raise DomainError(f"mass {s!r} outside [0, 1]")


class CostDistribution:
    c_bar: float
    kind: str = "abstract"

    def cdf(self, c):
        raise NotImplementedError

    def density(self, c: float) -> float:
        raise NotImplementedError

    def quantile(self, s):
        raise NotImplementedError

    def cumulative_cost(self, s: float) -> float:
        raise NotImplementedError

    def near_knot(self, c: float, tol: float = KNOT_TOL) -> bool:
        """True when ``c`` sits on a density discontinuity."""
        return False

    def _check_density_arg(self, c: float) -> None:
        if not (0.0 < c < self.c_bar):
            raise DomainError(f"density needs 0 < c < c_bar, got {c!r}")

    def to_dict(self) -> dict:
        raise NotImplementedError


def _check_c_bar(c_bar: float) -> None:
    if not isinstance(c_bar, (int, float)) or isinstance(c_bar, bool) or not math.isfinite(c_bar):
        raise InvalidParameter("c_bar", f"must be a finite number, got {c_bar!r}")
    if c_bar <= 0:
        raise InvalidParameter("c_bar", "must be > 0")


@dataclass(frozen=True)
class Uniform(CostDistribution):
    c_bar: float
    kind = "uniform"

    def __post_init__(self) -> None:
        _check_c_bar(self.c_bar)

    def cdf(self, c):
        return np.clip(np.asarray(c, dtype=float) / self.c_bar, 0.0, 1.0)[()]

    def density(self, c: float) -> float:
        self._check_density_arg(c)
        return 1.0 / self.c_bar

    def quantile(self, s):
        s_arr = np.asarray(s, dtype=float)
        if np.any((s_arr < 0) | (s_arr > 1)):
            raise DomainError(f"mass {s!r} outside [0, 1]")
        return (s_arr * self.c_bar)[()]

    def cumulative_cost(self, s: float) -> float:
        _check_mass(s)
        return 0.5 * s * s * self.c_bar

    def to_dict(self) -> dict:
        return {"kind": "uniform", "c_bar": self.c_bar}


@dataclass(frozen=True)
class Smoothstep(CostDistribution):
    """G(c) = 3t^2 - 2t^3 with t = c / c_bar."""

    c_bar: float
    kind = "smoothstep"

    def __post_init__(self) -> None:
        _check_c_bar(self.c_bar)

    def cdf(self, c):
        t = np.clip(np.asarray(c, dtype=float) / self.c_bar, 0.0, 1.0)
        return (t * t * (3.0 - 2.0 * t))[()]

    def _density(self, c: float) -> float:
        t = c / self.c_bar
        return 6.0 * t * (1.0 - t) / self.c_bar

    def density(self, c: float) -> float:
        self._check_density_arg(c)
        return self._density(c)

    def quantile(self, s):
        s_arr = np.asarray(s, dtype=float)
        if np.any((s_arr < 0) | (s_arr > 1)):
            raise DomainError(f"mass {s!r} outside [0, 1]")
        if s_arr.ndim == 0:
            return self._quantile_scalar(float(s_arr))
        lo = np.zeros_like(s_arr)
        hi = np.full_like(s_arr, self.c_bar)
        # bisection to floating-point resolution; 80 halvings of c_bar is plenty
        for _ in range(80):
            mid = 0.5 * (lo + hi)
            below = self.cdf(mid) < s_arr
            lo = np.where(below, mid, lo)
            hi = np.where(below, hi, mid)
        out = 0.5 * (lo + hi)
        out = np.where(s_arr == 0.0, 0.0, np.where(s_arr == 1.0, self.c_bar, out))
        return out[()]

    def _quantile_scalar(self, s: float) -> float:
        if s == 0.0 or s == 1.0:
            return s * self.c_bar
        lo, hi = 0.0, self.c_bar
        for _ in range(80):
            mid = 0.5 * (lo + hi)
            t = mid / self.c_bar
            if t * t * (3.0 - 2.0 * t) < s:
                lo = mid
            else:
                hi = mid
        return 0.5 * (lo + hi)

    def cumulative_cost(self, s: float) -> float:
        _check_mass(s)
        upper = float(self.quantile(s))
        return adaptive_simpson(lambda c: c * self._density(c), 0.0, upper)

    def to_dict(self) -> dict:
        return {"kind": "smoothstep", "c_bar": self.c_bar}


class PiecewiseLinear(CostDistribution):
    """CDF interpolating ordered (cost, mass) knots from (0, 0) to (c_bar, 1).

    The density is piecewise constant and jumps at interior knots.
    """

    kind = "piecewise"

    def __init__(self, knots: Sequence[Sequence[float]]):
        pts = [tuple(k) for k in knots]
        if len(pts) < 2:
            raise InvalidParameter("knots", "need at least two knots")
        for i, k in enumerate(pts):
            if len(k) != 2 or not all(
                isinstance(v, (int, float)) and not isinstance(v, bool) and math.isfinite(v) for v in k
            ):
                raise InvalidParameter(f"knots[{i}]", "must be a [cost, mass] pair of finite numbers")
        if pts[0] != (0, 0):
            raise InvalidParameter("knots[0]", "first knot must be (0, 0)")
        if pts[-1][1] != 1:
            raise InvalidParameter(f"knots[{len(pts) - 1}]", "last knot mass must be 1")
        for i in range(1, len(pts)):
            if not pts[i][0] > pts[i - 1][0]:
                raise InvalidParameter(f"knots[{i}]", "costs must be strictly increasing")
            if not pts[i][1] > pts[i - 1][1]:
                raise InvalidParameter(f"knots[{i}]", "masses must be strictly increasing")
        self.costs = np.array([float(k[0]) for k in pts])
        self.masses = np.array([float(k[1]) for k in pts])
        self.c_bar = float(self.costs[-1])
        self.slopes = np.diff(self.masses) / np.diff(self.costs)
        # exact integral of c g(c) over each whole segment
        self._seg_cost = 0.5 * self.slopes * (self.costs[1:] ** 2 - self.costs[:-1] ** 2)
        self._cum_seg_cost = np.concatenate([[0.0], np.cumsum(self._seg_cost)])

    def __repr__(self) -> str:
        return f"PiecewiseLinear(knots={self.knots!r})"

    def __eq__(self, other: object) -> bool:
        return isinstance(other, PiecewiseLinear) and self.knots == other.knots

    def __hash__(self) -> int:
        return hash(tuple(self.knots))

    @property
    def knots(self) -> list[tuple[float, float]]:
        return [(float(c), float(m)) for c, m in zip(self.costs, self.masses)]

    def cdf(self, c):
        return np.interp(c, self.costs, self.masses)[()]

    def density(self, c: float) -> float:
        """Segment slope; at an interior knot the right-hand segment's slope."""
        self._check_density_arg(c)
        i = int(np.searchsorted(self.costs, c, side="right")) - 1
        return float(self.slopes[i])

    def quantile(self, s):
        s_arr = np.asarray(s, dtype=float)
        if np.any((s_arr < 0) | (s_arr > 1)):
            raise DomainError(f"mass {s!r} outside [0, 1]")
        return np.interp(s_arr, self.masses, self.costs)[()]

    def cumulative_cost(self, s: float) -> float:
        _check_mass(s)
        c = float(self.quantile(s))
        i = min(int(np.searchsorted(self.costs, c, side="right")) - 1, len(self.slopes) - 1)
        c0 = self.costs[i]
        return float(self._cum_seg_cost[i] + 0.5 * self.slopes[i] * (c * c - c0 * c0))

    def near_knot(self, c: float, tol: float = KNOT_TOL) -> bool:
        interior = self.costs[1:-1]
        return bool(interior.size and np.min(np.abs(interior - c)) <= tol)

    def to_dict(self) -> dict:
        return {"kind": "piecewise", "knots": [[c, m] for c, m in self.knots]}


CANONICAL_KNOTS = [(0.0, 0.0), (0.19, 0.02), (0.25, 0.05), (0.35, 0.35), (0.45, 0.75), (0.6, 0.88), (1.0, 1.0)]
