"""Scalar numerical kernels: adaptive Simpson quadrature, bisection, golden-section search."""

from __future__ import annotations

import math
from typing import Callable

from .errors import NonConvergence

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0

QUAD_TOL = 1e-10
QUAD_MAX_INTERVALS = 2**20


def adaptive_simpson(
    f: Callable[[float], float],
    a: float,
    b: float,
    tol: float = QUAD_TOL,
    max_intervals: int = QUAD_MAX_INTERVALS,
) -> float:
    """Integrate ``f`` over [a, b] to absolute tolerance ``tol``.

    Iterative adaptive Simpson with Richardson correction. Raises
    NonConvergence if more than ``max_intervals`` accepted pieces would be
    needed.
    """
    if a == b:
        return 0.0
    sign = 1.0
    if b < a:
        a, b = b, a
        sign = -1.0

    fa, fm, fb = f(a), f(0.5 * (a + b)), f(b)
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    # (a, b, fa, fm, fb, whole, tol, depth)
    stack = [(a, b, fa, fm, fb, whole, tol, 0)]
    total = 0.0
    accepted = 0
    while stack:
        a0, b0, fa0, fm0, fb0, s0, eps, depth = stack.pop()
        m = 0.5 * (a0 + b0)
        lm, rm = 0.5 * (a0 + m), 0.5 * (m + b0)
        flm, frm = f(lm), f(rm)
        left = (m - a0) / 6.0 * (fa0 + 4.0 * flm + fm0)
        right = (b0 - m) / 6.0 * (fm0 + 4.0 * frm + fb0)
        delta = left + right - s0
        if abs(delta) <= 15.0 * eps or depth >= 50:
            total += left + right + delta / 15.0
            accepted += 1
            if accepted > max_intervals:
                raise NonConvergence(f"adaptive Simpson exceeded {max_intervals} intervals on [{a}, {b}]")
            continue
        stack.append((m, b0, fm0, frm, fb0, right, 0.5 * eps, depth + 1))
        stack.append((a0, m, fa0, flm, fm0, left, 0.5 * eps, depth + 1))
    return sign * total


def bisect(f: Callable[[float], float], a: float, b: float, tol: float, max_iter: int = 400) -> float:
    """Root of ``f`` in a sign-changing bracket [a, b].

    Halves the bracket until its width is at most ``tol``, then keeps
    halving while the residual exceeds ``tol`` and the bracket can still
    shrink in floating point. Returns whichever of the bracket ends and
    midpoint has the smallest residual.
    """
    fa = f(a)
    fb = f(b)
    if fa == 0.0:
        return a
    if fb == 0.0:
        return b
    if fa * fb > 0:
        raise ValueError(f"bracket [{a}, {b}] does not change sign")
    for _ in range(max_iter):
        m = 0.5 * (a + b)
        if m <= a or m >= b:
            break
        fm = f(m)
        if fm == 0.0:
            return m
        if (fm > 0) == (fa > 0):
            a, fa = m, fm
        else:
            b, fb = m, fm
        if b - a <= tol and min(abs(fa), abs(fb)) <= tol:
            break
    m = 0.5 * (a + b)
    candidates = [(abs(fa), a), (abs(fb), b), (abs(f(m)), m)]
    return min(candidates)[1]


def golden_section_max(
    f: Callable[[float], float], a: float, b: float, tol: float = 1e-10, max_iter: int = 500
) -> tuple[float, float]:
    """Maximise a unimodal ``f`` on [a, b]. Returns ``(x, f(x))``."""
    if b < a:
        raise ValueError("golden_section_max needs a <= b")
    if b - a <= tol:
        x = 0.5 * (a + b)
        return x, f(x)
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(max_iter):
        if b - a <= tol:
            break
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = f(d)
    best = max([(fc, -c), (fd, -d)])
    return -best[1], best[0]


def grid_then_golden(
    f: Callable[[float], float], lo: float, hi: float, n_grid: int, tol: float = 1e-10
) -> tuple[float, float]:
    """Global maximum on [lo, hi]: uniform grid scan, then golden refinement
    of the best grid cell's neighbourhood.

    Ties on the grid go to the smallest abscissa. The refined point is only
    accepted when it strictly beats the grid winner.
    """
    if hi <= lo:
        return lo, f(lo)
    xs = [lo + (hi - lo) * i / (n_grid - 1) for i in range(n_grid)]
    xs[-1] = hi
    vals = [f(x) for x in xs]
    best_i = 0
    for i, v in enumerate(vals):
        if v > vals[best_i]:
            best_i = i
    left = xs[max(best_i - 1, 0)]
    right = xs[min(best_i + 1, n_grid - 1)]
    x_ref, f_ref = golden_section_max(f, left, right, tol=tol)
    if f_ref > vals[best_i]:
        return x_ref, f_ref
    return xs[best_i], vals[best_i]
