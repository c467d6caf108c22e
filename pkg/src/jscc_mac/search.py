"""One-dimensional searches: golden-section maximization and sign bisection."""

from __future__ import annotations

import math
from typing import Callable, Optional

import numpy as np

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0
INV_PHI2 = (3.0 - math.sqrt(5.0)) / 2.0


def golden_max(f: Callable[[float], float], a: float, b: float, tol: float = 1e-10):
    """Golden-section search for the maximum of a unimodal ``f`` on [a, b].

    Returns ``(x, f(x))`` for the best point evaluated; the final bracket is
    shorter than ``tol``.
    """
    h = b - a
    if h <= tol:
        x = 0.5 * (a + b)
        return x, f(x)
    c = a + INV_PHI2 * h
    d = a + INV_PHI * h
    fc, fd = f(c), f(d)
    while h > tol:
        h *= INV_PHI
        if fc >= fd:
            b, d, fd = d, c, fc
            c = a + INV_PHI2 * h
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * h
            fd = f(d)
    return (c, fc) if fc >= fd else (d, fd)


def maximize_concave(
    f: Callable[[float], float],
    grid: np.ndarray,
    grid_values: Optional[np.ndarray] = None,
    tol: float = 1e-10,
):
    """Maximize a concave ``f`` on [grid[0], grid[-1]].

    Golden-section over the whole interval, then a pass over ``grid`` guards
    against flat or kinked stretches that fool the bracketing; if a grid point
    wins, the search is repeated around it.
    """
    if grid_values is None:
        grid_values = np.array([f(x) for x in grid])
    x, fx = golden_max(f, float(grid[0]), float(grid[-1]), tol)
    j = int(np.argmax(grid_values))
    if grid_values[j] > fx + 1e-12:
        lo, hi = grid[max(j - 1, 0)], grid[min(j + 1, len(grid) - 1)]
        x2, f2 = golden_max(f, float(lo), float(hi), tol)
        x, fx = (x2, f2) if f2 >= grid_values[j] else (float(grid[j]), float(grid_values[j]))
    for end in (0, len(grid) - 1):
        # the golden search never lands exactly on an endpoint
        if grid_values[end] > fx:
            x, fx = float(grid[end]), float(grid_values[end])
    return x, float(fx)


def bisect_sign(sign: Callable[[float], int], lo: float, hi: float, tol: float, trace=None):
    """Shrink [lo, hi] around a sign change of a nondecreasing ``sign`` (values -1, 0, 1).

    ``sign(lo) < 0 < sign(hi)`` is assumed. Stops at a zero or once the bracket
    is narrower than ``tol``; returns the final bracket.
    """
    while hi - lo >= tol:
        mid = 0.5 * (lo + hi)
        s = sign(mid)
        if trace is not None:
            trace.append((mid, s))
        if s == 0:
            return mid, mid
        if s < 0:
            lo = mid
        else:
            hi = mid
    return lo, hi
