"""Threshold-free bounds on the achievable exponent.

The lower bound restricts each user to one input distribution (the best of
the four assignments). The upper bound replaces E_0 by the concave hull, over
rho, of the pointwise maximum of the E_0 curves of the candidate inputs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .engine import CLASS_PAIRS, RHO_GRID, RHO_TOL, ObjectiveCell, cell_setups
from .gallager import (
    ERROR_TYPES,
    ErrorType,
    e_0,
    e_s,
    induced_channel,
    mac_as_ptp,
    product_distribution,
)
from .model import SystemModel
from .search import golden_max, maximize_concave

HULL_POINTS = 1025
_TANGENT_TOL = 1e-13


def upper_hull(x: np.ndarray, y: np.ndarray) -> list[int]:
    """Indices of the upper convex hull of points sorted by ``x`` (monotone chain)."""
    hull: list[int] = []
    for k in range(len(x)):
        while len(hull) >= 2:
            i, j = hull[-2], hull[-1]
            # drop j unless it lies strictly above the chord i -> k
            cross = (x[j] - x[i]) * (y[k] - y[i]) - (y[j] - y[i]) * (x[k] - x[i])
            if cross >= 0:
                hull.pop()
            else:
                break
        hull.append(k)
    return hull


@dataclass(frozen=True, eq=False)
class Envelope:
    """Upper concave envelope of ``max(fns)`` on [0, 1].

    ``knots`` are the breakpoints. Between two knots the envelope either
    follows the curve maximum (``on_curve[j]`` true) or is the straight
    bitangent joining them.
    """

    knots: tuple
    on_curve: tuple
    fns: tuple

    def top(self, rho):
        return np.max([np.asarray(f(rho), dtype=float) for f in self.fns], axis=0)

    def __call__(self, rho):
        rho = np.asarray(rho, dtype=float)
        xs = np.array([k[0] for k in self.knots])
        ys = np.array([k[1] for k in self.knots])
        out = np.interp(rho, xs, ys)
        seg = np.clip(np.searchsorted(xs, rho, side="right") - 1, 0, len(xs) - 2)
        curved = np.asarray(self.on_curve)[seg]
        if np.any(curved):
            out = np.where(curved, self.top(rho), out)
        return float(out) if out.ndim == 0 else out


def _bitangent(top: Callable, ia: tuple, ib: tuple, ta: float, tb: float):
    """Refine a bridge so the line touches the curve near both ends."""
    for _ in range(60):
        yb = top(tb)
        ta_new, _ = golden_max(lambda t: -(yb - top(t)) / (tb - t), *ia, _TANGENT_TOL)
        ya = top(ta_new)
        tb_new, _ = golden_max(lambda t: (top(t) - ya) / (t - ta_new), *ib, _TANGENT_TOL)
        done = abs(ta_new - ta) < _TANGENT_TOL and abs(tb_new - tb) < _TANGENT_TOL
        ta, tb = ta_new, tb_new
        if done:
            break
    return ta, tb


def concave_hull(fns: Sequence[Callable], n: int = HULL_POINTS) -> Envelope:
    """Upper concave envelope over rho in [0, 1] of the pointwise max of ``fns``.

    Each function must accept an array of rho values.
    """
    fns = tuple(fns)
    if not fns:
        raise ValueError("need at least one curve")

    def top(rho):
        return np.max([np.asarray(f(rho), dtype=float) for f in fns], axis=0)

    x = np.linspace(0.0, 1.0, n)
    y = top(x)
    hull = upper_hull(x, y)
    # one midpoint pass over the hull segments
    mids = np.array([0.5 * (x[a] + x[b]) for a, b in zip(hull, hull[1:]) if b - a > 1])
    if mids.size:
        x = np.concatenate([x, mids])
        order = np.argsort(x, kind="stable")
        x = x[order]
        y = np.concatenate([y, top(mids)])[order]
        hull = upper_hull(x, y)

    def scalar_top(t):
        return float(top(t))

    knots: list[tuple[float, float]] = [(float(x[hull[0]]), float(y[hull[0]]))]
    on_curve: list[bool] = []
    for a, b in zip(hull, hull[1:]):
        if b == a + 1:
            knots.append((float(x[b]), float(y[b])))
            on_curve.append(True)
            continue
        ia = (float(x[max(a - 1, 0)]), float(x[a + 1]))
        ib = (float(x[b - 1]), float(x[min(b + 1, len(x) - 1)]))
        ta, tb = _bitangent(scalar_top, ia, ib, float(x[a]), float(x[b]))
        # the tangent point may slide onto either side of the old vertex
        prev_x = knots[-1][0]
        if ta > prev_x + 1e-15:
            if len(knots) >= 2 and on_curve[-1]:
                knots[-1] = (ta, scalar_top(ta))
            else:
                knots.append((ta, scalar_top(ta)))
                on_curve.append(True)
        elif ta < prev_x:
            if on_curve and on_curve[-1]:
                knots[-1] = (ta, scalar_top(ta))
                if len(knots) >= 2 and knots[-2][0] >= ta:
                    knots.pop()
                    on_curve.pop()
            else:
                ta = prev_x
        knots.append((tb, scalar_top(tb)))
        on_curve.append(False)
        if tb < x[b]:
            knots.append((float(x[b]), float(y[b])))
            on_curve.append(True)
    return Envelope(tuple(knots), tuple(on_curve), fns)


@dataclass(frozen=True)
class UpperCell:
    tau: ErrorType
    value: float
    rho_star: float
    i_other: int = 0  # best class of the correctly decoded user; 0 for tau = {1,2}


def lower_bound(model: SystemModel):
    """Best single-distribution exponent.

    Returns ``(value, (i1, i2), cells)`` with the 12 cells in table order.
    """
    setups = cell_setups(model)
    es1 = e_s(RHO_GRID, model.source1)
    es2 = e_s(RHO_GRID, model.source2)
    cells = []
    for tau in ERROR_TYPES:
        for i1, i2 in CLASS_PAIRS:
            setup = setups[(tau, i1, i2)]
            if tau is ErrorType.USER1:
                srcs = (model.source1,)
                grid = setup.e0_grid - es1
            elif tau is ErrorType.USER2:
                srcs = (model.source2,)
                grid = setup.e0_grid - es2
            else:
                srcs = (model.source1, model.source2)
                grid = setup.e0_grid - es1 - es2

            def objective(rho, setup=setup, srcs=srcs):
                return float(setup.e0(rho)) - sum(e_s(rho, s) for s in srcs)

            rho, val = maximize_concave(objective, RHO_GRID, grid, RHO_TOL)
            cells.append(ObjectiveCell(tau, i1, i2, val, rho))
    best, best_pair = -math.inf, None
    for i1, i2 in sorted(CLASS_PAIRS):
        col = CLASS_PAIRS.index((i1, i2))
        value = min(cells[r * 4 + col].value for r in range(3))
        if value > best:
            best, best_pair = value, (i1, i2)
    return best, best_pair, tuple(cells)


def _e0_curve(q, ch):
    return lambda rho: e_0(rho, q, ch)


def hull_curves(model: SystemModel, tau: ErrorType, i_other: int = 1) -> list:
    """E_0 curves whose hull enters the upper bound for ``tau``."""
    if tau is ErrorType.BOTH:
        ch = mac_as_ptp(model.channel)
        return [
            _e0_curve(product_distribution(model.q(1, i1), model.q(2, i2)), ch)
            for i1, i2 in CLASS_PAIRS
        ]
    nu = tau.user
    ch = induced_channel(model.channel, tau, model.q(3 - nu, i_other))
    return [_e0_curve(model.q(nu, i), ch) for i in (1, 2)]


def _max_over_hull(env: Envelope, srcs) -> tuple[float, float]:
    def objective(rho):
        return float(env(rho)) - sum(e_s(rho, s) for s in srcs)

    grid = env(RHO_GRID) - sum(e_s(RHO_GRID, s) for s in srcs)
    return maximize_concave(objective, RHO_GRID, grid, RHO_TOL)


def upper_bound(model: SystemModel, hull_points: int = HULL_POINTS):
    """Concave-hull bound. Returns ``(value, cells)`` with one cell per error type."""
    cells = []
    for tau in ERROR_TYPES:
        if tau is ErrorType.BOTH:
            env = concave_hull(hull_curves(model, tau), hull_points)
            rho, val = _max_over_hull(env, (model.source1, model.source2))
            cells.append(UpperCell(tau, val, rho))
            continue
        best = None
        for i_other in (1, 2):
            env = concave_hull(hull_curves(model, tau, i_other), hull_points)
            rho, val = _max_over_hull(env, (model.source(tau.user),))
            if best is None or val > best.value:
                best = UpperCell(tau, val, rho, i_other)
        cells.append(best)
    return min(c.value for c in cells), tuple(cells)
