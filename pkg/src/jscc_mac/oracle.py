"""Brute-force reference evaluators.

Nothing here calls into the Gallager kernels, the threshold root finder or the
golden-section search: power sums are formed directly, class exponents come
from minimizing a convex function of the tilt with scipy's bounded Brent
method, and maxima are taken over dense grids. Slow by design.
"""

from __future__ import annotations

import math
from typing import Callable

import numpy as np
from scipy.optimize import minimize_scalar

from .gallager import ErrorType
from .model import SystemModel

_S_WINDOW = 60.0


def grid_max_rho(objective: Callable[[float], float], n: int = 10_000):
    """Exhaustive maximum over the uniform n-point grid on [0, 1].

    Returns ``(rho, value)``; ties go to the first grid point.
    """
    if n < 2:
        raise ValueError("grid needs at least two points")
    xs = np.linspace(0.0, 1.0, n)
    best_x, best = float(xs[0]), objective(float(xs[0]))
    for x in xs[1:]:
        v = objective(float(x))
        if v > best:
            best_x, best = float(x), v
    return best_x, float(best)


def fd_derivative(f: Callable[[float], float], x: float, h: float = 1e-5) -> float:
    return (f(x + h) - f(x - h)) / (2.0 * h)


def e_s_ref(rho, probs) -> np.ndarray | float:
    p = np.asarray([v for v in probs if v > 0], dtype=float)
    rho = np.asarray(rho, dtype=float)
    s = np.power.outer(p, 1.0 / (1.0 + rho)).sum(axis=0)
    out = (1.0 + rho) * np.log(s)
    return float(out) if out.ndim == 0 else out


def e0_ref(rho, q, w) -> np.ndarray | float:
    """-log sum_y (sum_x q(x) w(y|x)^(1/(1+rho)))^(1+rho) for a row-stochastic ``w``."""
    q = np.asarray(q, dtype=float)
    w = np.asarray(w, dtype=float)
    rho = np.asarray(rho, dtype=float)
    r = rho.reshape(-1)
    inner = np.einsum("x,rxy->ry", q, np.power(w[None], 1.0 / (1.0 + r)[:, None, None]))
    out = -np.log(np.power(inner, (1.0 + r)[:, None]).sum(axis=1))
    return float(out[0]) if rho.ndim == 0 else out.reshape(rho.shape)


def _g(s: float, p: np.ndarray, log_gamma: float) -> float:
    return math.log(math.fsum(p**s)) - s * log_gamma


def tilt_minimizer(gamma: float, probs) -> float:
    """Unconstrained minimizer over s of log sum P^s - s log gamma.

    Returns -inf / +inf when gamma lies at or outside the support range, in
    which case the function is monotone.
    """
    p = np.asarray([v for v in probs if v > 0], dtype=float)
    if gamma <= p.min():
        return -math.inf
    if gamma >= p.max():
        return math.inf
    lg = math.log(gamma)
    res = minimize_scalar(
        _g, bounds=(-_S_WINDOW, _S_WINDOW), args=(p, lg), method="bounded",
        options={"xatol": 1e-13, "maxiter": 2000},
    )
    return float(res.x)


def es_class_ref(i: int, rho, gamma: float, probs, s_star: float | None = None):
    """Class exponent as min over s >= beta (class 1) or s <= beta (class 2) of
    (1+rho) [log sum P^s + (beta - s) log gamma], with beta = 1/(1+rho).

    ``s_star`` may be passed in to skip the tilt minimization.
    """
    p = np.asarray([v for v in probs if v > 0], dtype=float)
    rho_arr = np.asarray(rho, dtype=float)
    beta = 1.0 / (1.0 + rho_arr)
    if s_star is None:
        s_star = tilt_minimizer(gamma, p) if gamma > 0 else -math.inf
    full = (1.0 + rho_arr) * np.log(np.power.outer(p, beta).sum(axis=0))
    if i == 1:
        on_curve = beta >= s_star
    else:
        on_curve = beta <= s_star
    if math.isinf(s_star):
        line = np.full_like(beta, -math.inf)
    else:
        lg = math.log(gamma)
        line = (1.0 + rho_arr) * (_g(s_star, p, lg) + beta * lg)
    out = np.where(on_curve, full, line)
    return float(out) if out.ndim == 0 else out


def _cell_curves(model: SystemModel, tau: ErrorType, i1: int, i2: int):
    """(q, w) for the cell's E_0 term, built by explicit loops over the channel."""
    ch = model.channel
    t = ch.array.reshape(ch.n2, ch.n1, ch.ny)  # t[x2, x1, y]
    q1, q2 = model.q(1, i1).array, model.q(2, i2).array
    if tau is ErrorType.USER1:
        w = np.zeros((ch.n1, ch.n2 * ch.ny))
        for x1 in range(ch.n1):
            for x2 in range(ch.n2):
                w[x1, x2 * ch.ny:(x2 + 1) * ch.ny] = q2[x2] * t[x2, x1]
        return q1, w
    if tau is ErrorType.USER2:
        w = np.zeros((ch.n2, ch.n1 * ch.ny))
        for x2 in range(ch.n2):
            for x1 in range(ch.n1):
                w[x2, x1 * ch.ny:(x1 + 1) * ch.ny] = q1[x1] * t[x2, x1]
        return q2, w
    q = np.array([q1[x1] * q2[x2] for x2 in range(ch.n2) for x1 in range(ch.n1)])
    return q, ch.array


def _split(tau: ErrorType, i1: int, i2: int):
    """Which (user, class) is tilted by rho and which by zero."""
    if tau is ErrorType.USER1:
        return [(1, i1)], [(2, i2)]
    if tau is ErrorType.USER2:
        return [(2, i2)], [(1, i1)]
    return [(1, i1), (2, i2)], []


def cell_objective_ref(model: SystemModel, tau: ErrorType, i1: int, i2: int, gamma):
    """Objective over rho whose max is the cell value, plus the rho-free term."""
    q, w = _cell_curves(model, tau, i1, i2)
    tilted, fixed = _split(tau, i1, i2)
    const = 0.0
    for nu, i in fixed:
        const += es_class_ref(i, 0.0, gamma[nu - 1], model.source(nu).probs)

    terms = []
    for nu, i in tilted:
        g, p = gamma[nu - 1], model.source(nu).probs
        terms.append((i, g, p, tilt_minimizer(g, p) if g > 0 else -math.inf))

    def objective(rho):
        v = e0_ref(rho, q, w)
        for i, g, p, s_star in terms:
            v -= es_class_ref(i, rho, g, p, s_star)
        return v

    return objective, const


def big_f_ref(model, tau, i1, i2, gamma, n: int = 10_000):
    objective, const = cell_objective_ref(model, tau, i1, i2, gamma)
    if const == -math.inf or objective(0.5) == math.inf:
        return math.inf
    probe = objective(0.0)
    if probe == math.inf:
        return math.inf
    _, v = grid_max_rho(objective, n)
    return v - const


def d_ref(model, gamma, n: int = 2001) -> float:
    out = math.inf
    for i1 in (1, 2):
        for i2 in (1, 2):
            f = min(big_f_ref(model, tau, i1, i2, gamma, n) for tau in ErrorType)
            out = min(out, f)
    return out


def gamma_sweep(model: SystemModel, n: int = 128, n_rho: int = 513):
    """d on the uniform n x n grid of (gamma1, gamma2) in [0, 1]^2.

    Returns ``(d, (g1, g2))``: ``d[j, k]`` is d at gamma1 = j/(n-1),
    gamma2 = k/(n-1), and ``(g1, g2)`` the first grid argmax. The inner
    rho-maxima are taken over ``n_rho`` grid points.
    """
    if n < 2:
        raise ValueError("grid needs at least two points")
    gs = np.linspace(0.0, 1.0, n)
    rho = np.linspace(0.0, 1.0, n_rho)

    # class exponents: es[nu][i] has shape (n, n_rho); index 0 on rho is rho = 0
    es = {}
    for nu in (1, 2):
        p = model.source(nu).probs
        for i in (1, 2):
            es[nu, i] = np.array([es_class_ref(i, rho, g, p) for g in gs])

    d = np.full((n, n), np.inf)
    with np.errstate(invalid="ignore"):
        for tau in ErrorType:
            for i1 in (1, 2):
                for i2 in (1, 2):
                    q, w = _cell_curves(model, tau, i1, i2)
                    e0 = e0_ref(rho, q, w)
                    if tau is ErrorType.USER1:
                        m = np.max(e0[None] - es[1, i1], axis=1)  # over rho, per gamma1
                        cell = m[:, None] - es[2, i2][None, :, 0]
                    elif tau is ErrorType.USER2:
                        m = np.max(e0[None] - es[2, i2], axis=1)
                        cell = m[None, :] - es[1, i1][:, None, 0]
                    else:
                        cell = np.empty((n, n))
                        for j in range(n):
                            obj = e0[None] - es[1, i1][j][None] - es[2, i2]
                            cell[j] = np.max(obj, axis=1)
                    cell = np.where(np.isnan(cell), np.inf, cell)
                    d = np.minimum(d, cell)
    j, k = np.unravel_index(int(np.argmax(d)), d.shape)
    return d, (float(gs[j]), float(gs[k]))
