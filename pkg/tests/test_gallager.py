import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.special import logsumexp as scipy_logsumexp

from jscc_mac.gallager import (
    ERROR_TYPES,
    ErrorType,
    PtpChannel,
    e_0,
    e_s,
    e_s_prime,
    induced_channel,
    logsumexp,
    mac_as_ptp,
    product_distribution,
)
from jscc_mac.model import InputDistribution, MacChannel, SourceSpec
from jscc_mac.paperex import Q_HALF_SPLIT, Q_UNIFORM4, build_paper_channel

# mpmath evaluations at 40 digits, frozen
ES_1_PAPER_P1 = 0.285137926382614465
E0_1_UNIFORM4_ON_HALF_SPLIT = 0.418888244376440023
E0_1_UNIFORM4_ON_UNIFORM4 = 0.187669209122017399


def probs(n_max=5):
    return st.lists(st.floats(0.01, 1.0), min_size=2, max_size=n_max).map(
        lambda v: tuple(np.asarray(v) / np.sum(v))
    )


def mp_e_s(rho, p):
    mp.mp.dps = 40
    rho = mp.mpf(rho)
    return float((1 + rho) * mp.log(mp.fsum(mp.mpf(x) ** (1 / (1 + rho)) for x in p if x > 0)))


def mp_e_0(rho, q, w):
    mp.mp.dps = 40
    rho = mp.mpf(rho)
    total = mp.mpf(0)
    for y in range(w.shape[1]):
        inner = mp.fsum(mp.mpf(q[x]) * mp.mpf(w[x, y]) ** (1 / (1 + rho)) for x in range(w.shape[0]) if w[x, y] > 0)
        total += inner ** (1 + rho)
    return float(-mp.log(total))


def test_error_type_complement():
    assert ErrorType.USER1.complement is ErrorType.USER2
    assert ErrorType.USER2.complement is ErrorType.USER1
    assert ErrorType.BOTH.complement is None
    for tau in (ErrorType.USER1, ErrorType.USER2):
        assert tau.complement.complement is tau
    assert [t.value for t in ERROR_TYPES] == ["{1}", "{2}", "{1,2}"]


def test_logsumexp_matches_scipy():
    rng = np.random.default_rng(3)
    a = rng.normal(size=(7, 5)) * 50
    a[2, 3] = -np.inf
    assert np.allclose(logsumexp(a, axis=1), scipy_logsumexp(a, axis=1), rtol=0, atol=1e-12)
    assert logsumexp(np.full(3, -np.inf)) == -np.inf


def test_e_s_basic():
    assert e_s(0.0, SourceSpec((0.3, 0.7))) == pytest.approx(0.0, abs=1e-15)
    assert e_s(1.0, SourceSpec((0.5, 0.5))) == pytest.approx(math.log(2), abs=1e-15)


def test_e_s_high_precision():
    src = SourceSpec((0.028, 0.972))
    assert e_s(1.0, src) == pytest.approx(ES_1_PAPER_P1, abs=1e-12)
    assert ES_1_PAPER_P1 == pytest.approx(mp_e_s(1.0, src.probs), abs=1e-15)


def test_e_s_rejects_rho_at_minus_one():
    with pytest.raises(ValueError):
        e_s(-1.0, SourceSpec((0.5, 0.5)))
    with pytest.raises(ValueError):
        e_s_prime(-1.5, SourceSpec((0.5, 0.5)))


def test_e_s_prime_entropy_at_zero():
    assert e_s_prime(0.0, SourceSpec((0.5, 0.5))) == pytest.approx(math.log(2), abs=1e-14)
    p = (0.2, 0.3, 0.5)
    h = -sum(x * math.log(x) for x in p)
    assert e_s_prime(0.0, SourceSpec(p)) == pytest.approx(h, abs=1e-14)


@pytest.mark.parametrize("rho", [0.1, 0.5, 0.9])
def test_e_s_prime_finite_difference(rho):
    src = SourceSpec((0.25, 0.75))
    h = 1e-5
    fd = (e_s(rho + h, src) - e_s(rho - h, src)) / (2 * h)
    assert e_s_prime(rho, src) == pytest.approx(fd, abs=1e-6)


@pytest.mark.parametrize("k", [2, 3, 7])
def test_e_s_prime_uniform(k):
    src = SourceSpec((1 / k,) * k)
    for rho in (0.0, 0.3, 1.0, 4.0):
        assert e_s_prime(rho, src) == pytest.approx(math.log(k), abs=1e-12)
        assert e_s(rho, src) == pytest.approx(rho * math.log(k), abs=1e-12)


def test_e_0_at_zero_and_noiseless():
    ch = PtpChannel(np.eye(4))
    q = InputDistribution((0.25,) * 4)
    assert e_0(0.0, q, ch) == pytest.approx(0.0, abs=1e-15)
    for rho in (0.2, 0.7, 1.0):
        assert e_0(rho, q, ch) == pytest.approx(rho * math.log(4), abs=1e-13)


def test_e_0_dimension_mismatch():
    with pytest.raises(ValueError):
        e_0(0.5, InputDistribution((0.5, 0.5)), PtpChannel(np.eye(3)))


@pytest.mark.parametrize(
    "q_other, frozen",
    [(Q_HALF_SPLIT, E0_1_UNIFORM4_ON_HALF_SPLIT), (Q_UNIFORM4, E0_1_UNIFORM4_ON_UNIFORM4)],
)
def test_e_0_paper_induced_channel(q_other, frozen):
    ch = induced_channel(build_paper_channel(), ErrorType.USER1, q_other)
    assert e_0(1.0, Q_UNIFORM4, ch) == pytest.approx(frozen, abs=1e-12)
    # independent double loop over the raw tensor at 40 digits
    t = build_paper_channel().tensor
    w = np.zeros((6, 24))
    for x1 in range(6):
        for x2 in range(6):
            w[x1, 4 * x2:4 * x2 + 4] = q_other.probs[x2] * t[x2, x1]
    assert frozen == pytest.approx(mp_e_0(1.0, Q_UNIFORM4.probs, w), abs=1e-15)


def test_induced_channel_rows_and_blocks():
    mac = build_paper_channel()
    for tau in (ErrorType.USER1, ErrorType.USER2):
        ch = induced_channel(mac, tau, Q_HALF_SPLIT)
        assert ch.nin == 6 and ch.nout == 24
        assert np.allclose(ch.w.sum(axis=1), 1.0, atol=1e-12)
    ch = induced_channel(mac, ErrorType.USER1, Q_HALF_SPLIT)
    nonzero_blocks = {c // 4 for c in np.nonzero(ch.w.sum(axis=0))[0]}
    assert nonzero_blocks == {4, 5}  # x2 in {5, 6}
    with pytest.raises(ValueError):
        induced_channel(mac, ErrorType.BOTH, Q_HALF_SPLIT)


def test_induced_channel_point_mass():
    rng = np.random.default_rng(0)
    w = rng.dirichlet(np.ones(3), size=6)
    mac = MacChannel.from_array(w, 2, 3)
    point = InputDistribution((0.0, 1.0, 0.0))
    ch = induced_channel(mac, ErrorType.USER1, point)
    for x1 in range(2):
        assert np.allclose(ch.w[x1, 3:6], mac.tensor[1, x1])
        assert np.all(ch.w[x1, :3] == 0) and np.all(ch.w[x1, 6:] == 0)
    point1 = InputDistribution((1.0, 0.0))
    ch2 = induced_channel(mac, ErrorType.USER2, point1)
    for x2 in range(3):
        assert np.allclose(ch2.w[x2, :3], mac.tensor[x2, 0])
        assert np.all(ch2.w[x2, 3:] == 0)


def test_product_distribution():
    a = InputDistribution((0, 1, 0))
    b = InputDistribution((0, 0, 1, 0))
    pd = product_distribution(a, b).array
    assert pd[1 + 3 * 2] == 1.0 and pd.sum() == 1.0
    u = InputDistribution((1 / 6,) * 6)
    assert np.allclose(product_distribution(u, u).array, 1 / 36)
    pq = product_distribution(Q_HALF_SPLIT, Q_UNIFORM4).array
    assert np.count_nonzero(pq) == 8
    assert np.all(pq[pq > 0] == 0.125)


def test_mac_as_ptp():
    ch = mac_as_ptp(build_paper_channel())
    assert (ch.nin, ch.nout) == (36, 4)
    assert np.allclose(ch.w.sum(axis=1), 1.0, atol=1e-12)
    q = product_distribution(Q_HALF_SPLIT, Q_UNIFORM4)
    assert e_0(0.0, q, ch) == pytest.approx(0.0, abs=1e-14)


@settings(max_examples=100, deadline=None)
@given(probs(), st.floats(0.0, 3.0), st.floats(0.0, 3.0), st.floats(0.0, 1.0))
def test_e_s_convex(p, r1, r2, theta):
    src = SourceSpec(p)
    mid = theta * r1 + (1 - theta) * r2
    assert e_s(mid, src) <= theta * e_s(r1, src) + (1 - theta) * e_s(r2, src) + 1e-12


@settings(max_examples=100, deadline=None)
@given(probs(), st.floats(-0.9, 3.0))
def test_e_s_prime_fd_random(p, rho):
    src = SourceSpec(p)
    h = 1e-5
    fd = (e_s(rho + h, src) - e_s(rho - h, src)) / (2 * h)
    assert e_s_prime(rho, src) == pytest.approx(fd, abs=1e-6)
    assert e_s(0.0, src) == pytest.approx(0.0, abs=1e-14)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_e_0_concave_monotone(seed):
    rng = np.random.default_rng(seed)
    nin, nout = rng.integers(2, 6, size=2)
    w = rng.dirichlet(np.full(nout, 0.5), size=nin)
    w[rng.random(w.shape) < 0.2] = 0.0
    w[:, 0] += 1.0 - w.sum(axis=1)
    q = InputDistribution(rng.dirichlet(np.ones(nin)))
    ch = PtpChannel(w)
    rho = np.linspace(0.0, 1.0, 101)
    v = e_0(rho, q, ch)
    assert abs(v[0]) <= 1e-14
    assert np.all(np.diff(v) >= -1e-12)
    assert np.all(v[:-2] - 2 * v[1:-1] + v[2:] <= 1e-12)
    assert v[57] == pytest.approx(mp_e_0(rho[57], q.probs, w), abs=1e-12)
