"""Gallager's source and channel functions and the point-to-point channels seen per error type.

All exponents are in nats. Power sums are evaluated in the log domain; zero
probabilities are dropped from the sums (0**beta is taken as 0).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
from .model import InputDistribution, MacChannel, SourceSpec


class ErrorType(enum.Enum):
    """Which users are decoded in error."""

    USER1 = "{1}"
    USER2 = "{2}"
    BOTH = "{1,2}"

    @property
    def complement(self):
        """The correctly decoded users; ``None`` stands for the empty set."""
        return {ErrorType.USER1: ErrorType.USER2, ErrorType.USER2: ErrorType.USER1}.get(self)

    @property
    def user(self) -> int:
        return {ErrorType.USER1: 1, ErrorType.USER2: 2}[self]


ERROR_TYPES = (ErrorType.USER1, ErrorType.USER2, ErrorType.BOTH)


@dataclass(frozen=True, eq=False)
class PtpChannel:
    """Point-to-point channel, ``w[x, y]``."""

    w: np.ndarray

    def __post_init__(self):
        w = np.array(self.w, dtype=float)
        w.setflags(write=False)
        object.__setattr__(self, "w", w)

    @property
    def nin(self) -> int:
        return self.w.shape[0]

    @property
    def nout(self) -> int:
        return self.w.shape[1]


def logsumexp(a: np.ndarray, axis: int = -1) -> np.ndarray:
    """Max-shifted log-sum-exp; all -inf slices give -inf.

    scipy.special.logsumexp carries ~100us of overhead per call, which dominates
    the scalar rho searches.
    """
    m = np.max(a, axis=axis, keepdims=True)
    m = np.where(np.isfinite(m), m, 0.0)
    with np.errstate(divide="ignore"):
        out = np.log(np.sum(np.exp(a - m), axis=axis, keepdims=True)) + m
    return np.squeeze(out, axis=axis)


def _check_rho(rho) -> None:
    if np.any(np.asarray(rho) <= -1):
        raise ValueError(f"rho must exceed -1, got {rho}")


def es_kernel(rho, logp: np.ndarray):
    """e_s on log-probabilities of the support; ``rho`` scalar or array."""
    beta = 1.0 / (1.0 + rho)
    return (1.0 + rho) * logsumexp(np.multiply.outer(beta, logp), axis=-1)


def e0_kernel(rho, logq: np.ndarray, logw: np.ndarray):
    """e_0 on restricted log-tables; ``rho`` scalar or array."""
    rho = np.asarray(rho, dtype=float)
    beta = (1.0 / (1.0 + rho))[..., None, None]
    inner = logsumexp(logq[:, None] + beta * logw, axis=-2)
    return -logsumexp((1.0 + rho)[..., None] * inner, axis=-1)


def _scalar(val):
    val = np.asarray(val)
    return float(val) if val.ndim == 0 else val


def e_s(rho, src: SourceSpec):
    """Gallager source function (1+rho) * log sum_u P(u)**(1/(1+rho))."""
    _check_rho(rho)
    return _scalar(es_kernel(np.asarray(rho, dtype=float), src.log_support))


def e_s_prime(rho, src: SourceSpec):
    """d e_s / d rho = log S(beta) - beta * (sum P**beta log P) / S(beta)."""
    _check_rho(rho)
    rho = np.asarray(rho, dtype=float)
    logp = src.log_support
    beta = 1.0 / (1.0 + rho)
    a = np.multiply.outer(beta, logp)
    log_s = logsumexp(a, axis=-1)
    weights = np.exp(a - log_s[..., None])
    return _scalar(log_s - beta * (weights @ logp))


def restrict(q, w: np.ndarray):
    """Log-tables with zero-mass inputs and unreachable outputs removed."""
    q = q.array if isinstance(q, InputDistribution) else np.asarray(q, dtype=float)
    rows = q > 0
    w = w[rows]
    w = w[:, (w > 0).any(axis=0)]
    with np.errstate(divide="ignore"):
        return np.log(q[rows]), np.log(w)


def e_0(rho, q: InputDistribution, ch: PtpChannel):
    """Gallager channel function -log sum_y (sum_x Q(x) W(y|x)**(1/(1+rho)))**(1+rho).

    ``rho`` may be a scalar or an array; the result has the same shape.
    """
    nq = len(q) if isinstance(q, InputDistribution) else np.shape(q)[0]
    if nq != ch.nin:
        raise ValueError(f"input distribution has {nq} entries, channel has {ch.nin} inputs")
    _check_rho(rho)
    return _scalar(e0_kernel(rho, *restrict(q, ch.w)))


def induced_channel(ch: MacChannel, tau: ErrorType, q_other: InputDistribution) -> PtpChannel:
    """Channel from user tau's input to (other input, y), the other input drawn from ``q_other``.

    Output index is ``x_other * ny + y``.
    """
    if tau is ErrorType.BOTH:
        raise ValueError("the joint error type uses mac_as_ptp, not an induced channel")
    t = ch.tensor  # [x2, x1, y]
    q = q_other.array
    if tau is ErrorType.USER1:
        if q.shape[0] != ch.n2:
            raise ValueError(f"q_other has {q.shape[0]} entries, user 2 alphabet has {ch.n2}")
        w = (t * q[:, None, None]).transpose(1, 0, 2).reshape(ch.n1, ch.n2 * ch.ny)
    else:
        if q.shape[0] != ch.n1:
            raise ValueError(f"q_other has {q.shape[0]} entries, user 1 alphabet has {ch.n1}")
        w = (t * q[None, :, None]).reshape(ch.n2, ch.n1 * ch.ny)
    return PtpChannel(w)


def product_distribution(q1: InputDistribution, q2: InputDistribution) -> InputDistribution:
    """Joint distribution over X1 x X2 with index x1 + n1*x2."""
    return InputDistribution(np.outer(q2.array, q1.array).ravel())


def mac_as_ptp(ch: MacChannel) -> PtpChannel:
    return PtpChannel(ch.array)
