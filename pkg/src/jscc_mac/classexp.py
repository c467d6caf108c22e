"""Class-dependent source exponents E_s1, E_s2 and the threshold tilt rho_gamma.

The tilt is solved in beta = 1/(1+rho). The tilted mean of log P is increasing
in beta and sweeps (log min P, log max P) as beta runs over the whole real
line, so thresholds below the geometric mean of P give beta_gamma <= 0
(rho_gamma <= -1). The tangent branch is kept in the form

    E(rho) = (1+rho) * (log S(beta_g) - beta_g * T(beta_g)) + T(beta_g)

which equals E_s(rho_g) + E_s'(rho_g) * (rho - rho_g) whenever beta_g > 0 and
stays finite for beta_g <= 0.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from .gallager import _check_rho, es_kernel, logsumexp
from .model import ExtReal, SourceSpec

RESIDUAL_TOL = 1e-10
MAX_ITER = 200
_BRACKET_LIMIT = 1e12


class Tag(enum.Enum):
    BELOW_SUPPORT = "below"
    ABOVE_SUPPORT = "above"
    INTERIOR = "interior"


@dataclass(frozen=True)
class RhoGamma:
    tag: Tag
    beta: float = math.nan
    log_s: float = math.nan  # log sum P**beta
    tilt: float = math.nan  # tilted mean of log P at beta, equals log(gamma)

    @property
    def rho(self) -> float:
        """rho_gamma = 1/beta - 1; infinite for beta = 0, below -1 for beta < 0."""
        if self.tag is not Tag.INTERIOR:
            return -1.0
        return math.inf if self.beta == 0 else 1.0 / self.beta - 1.0

    def line(self, rho):
        """The linear branch of the class exponents."""
        return (1.0 + rho) * (self.log_s - self.beta * self.tilt) + self.tilt


def _tilted(beta: float, logp: np.ndarray) -> tuple[float, float]:
    a = beta * logp
    log_s = logsumexp(a)
    w = np.exp(a - log_s)
    return float(log_s), float(w @ logp)


def tilted_log_mean(rho, src: SourceSpec) -> float:
    """sum P**b log P / sum P**b with b = 1/(1+rho)."""
    _check_rho(rho)
    return _tilted(1.0 / (1.0 + rho), src.log_support)[1]


class RhoGammaError(RuntimeError):
    pass


def _solve(gamma: float, src: SourceSpec) -> RhoGamma:
    logp = src.log_support
    if gamma <= 0.0 or math.log(gamma) < logp.min():
        return RhoGamma(Tag.BELOW_SUPPORT)
    if gamma >= 1.0 or math.log(gamma) > logp.max():
        return RhoGamma(Tag.ABOVE_SUPPORT)
    target = math.log(gamma)

    def interior(beta):
        log_s, t = _tilted(beta, logp)
        return RhoGamma(Tag.INTERIOR, beta, log_s, t)

    if logp.max() == logp.min():
        # Uniform source: every beta solves the equation.
        return interior(1.0)

    def resid(beta):
        return _tilted(beta, logp)[1] - target

    r0 = resid(0.0)
    if abs(r0) < RESIDUAL_TOL:
        return interior(0.0)
    # The root lies on the side of 0 where the residual changes sign.
    direction = -1.0 if r0 > 0 else 1.0
    lo, hi, width = 0.0, direction, 1.0
    while True:
        r = resid(hi)
        if abs(r) < RESIDUAL_TOL and width >= _BRACKET_LIMIT / 2:
            return interior(hi)
        if (r > 0) != (r0 > 0):
            break
        lo = hi
        width *= 2.0
        hi = direction * width
        if width > _BRACKET_LIMIT:
            # gamma sits on min P or max P within rounding; fall back to the degenerate tag
            return RhoGamma(Tag.BELOW_SUPPORT if direction < 0 else Tag.ABOVE_SUPPORT)

    a, b = min(lo, hi), max(lo, hi)
    for _ in range(MAX_ITER):
        mid = 0.5 * (a + b)
        r = resid(mid)
        if r == 0.0 or b - a <= 4e-16 * max(1.0, abs(mid)):
            break
        if r < 0:
            a = mid
        else:
            b = mid
    if abs(r) >= RESIDUAL_TOL:
        raise RhoGammaError(
            f"rho_gamma did not converge for gamma={gamma!r}: bracket [{a!r}, {b!r}], residual {r:.3e}"
        )
    return interior(mid)


_solve_cached = lru_cache(maxsize=8192)(_solve)


def solve_rho_gamma(gamma: float, src: SourceSpec, cache: bool = True) -> RhoGamma:
    """Solve tilted_log_mean = log(gamma) for the tilt, or tag gamma as off-support."""
    if not 0.0 <= gamma <= 1.0:
        raise ValueError(f"gamma must lie in [0, 1], got {gamma!r}")
    return _solve_cached(float(gamma), src) if cache else _solve(float(gamma), src)


def class_exponent_fn(i: int, src: SourceSpec, gamma: float):
    """Return ``rho -> E_si(rho)`` (vectorized), or ``None`` when E_si is identically -inf."""
    if i not in (1, 2):
        raise ValueError(f"class index must be 1 or 2, got {i!r}")
    rg = solve_rho_gamma(gamma, src)
    logp = src.log_support
    if rg.tag is Tag.BELOW_SUPPORT:
        return (lambda rho: es_kernel(rho, logp)) if i == 1 else None
    if rg.tag is Tag.ABOVE_SUPPORT:
        return (lambda rho: es_kernel(rho, logp)) if i == 2 else None

    def fn(rho):
        rho = np.asarray(rho, dtype=float)
        on_curve = rg.beta * (1.0 + rho) <= 1.0
        if i == 2:
            on_curve = ~on_curve
        if on_curve.ndim == 0:
            return es_kernel(rho, logp) if on_curve else rg.line(rho)
        return np.where(on_curve, es_kernel(rho, logp), rg.line(rho))

    return fn


def es_class(i: int, rho, src: SourceSpec, gamma: float) -> ExtReal:
    """Class-``i`` source exponent; ``-inf`` when the class is empty in exponent.

    Class 1 follows E_s while 1/(1+rho) >= beta_gamma and the tangent line beyond;
    class 2 is the complement.
    """
    _check_rho(rho)
    fn = class_exponent_fn(i, src, gamma)
    out = np.full(np.shape(rho), -math.inf) if fn is None else np.asarray(fn(rho), dtype=float)
    return float(out) if out.ndim == 0 else out
