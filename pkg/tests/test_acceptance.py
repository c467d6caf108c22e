"""Acceptance criteria, one test each. Every test prints a single PASS/FAIL line
with the measured numbers before asserting."""

import math
import time

import numpy as np
import pytest

from conftest import random_model
from jscc_mac import oracle
from jscc_mac.bounds import concave_hull, lower_bound, upper_bound
from jscc_mac.classexp import solve_rho_gamma, Tag
from jscc_mac.engine import (
    CLASS_PAIRS,
    achievable_exponent,
    all_cells,
    big_f,
    equalization_residuals,
    solve_thresholds,
)
from jscc_mac.gallager import ERROR_TYPES, PtpChannel, e_0, e_s, e_s_prime
from jscc_mac.model import InputDistribution, SourceSpec

TOL = 5e-4
GAMMA_REPORTED = (0.8159, 0.7057)
TABLE1 = [
    [0.2566, 0.1721, 0.1057, 0.1103],
    [0.2597, 0.1057, 0.2526, 0.2087],
    [0.1057, 0.1073, 0.1127, 0.1180],
]
TABLE2 = [
    [0.1723, 0.1721, 0.0251, 0.0342],
    [0.2526, 0.0989, 0.2526, 0.2019],
    [0.0900, 0.1073, 0.0900, 0.0984],
]
TABLE3 = [0.1734, 0.2526, 0.1073]
E_PAPER, EL_PAPER, EU_PAPER = 0.1057, 0.0989, 0.1073
GAIN_PAPER = 6.875  # percent


def report(n, ok, detail):
    print(f"\ncriterion {n}: {'PASS' if ok else 'FAIL'} - {detail}")


@pytest.fixture(scope="module")
def paper_report(paper_model):
    return achievable_exponent(paper_model)


def test_criterion_1_table1_at_reported_thresholds(paper_model):
    t0 = time.perf_counter()
    cells = all_cells(GAMMA_REPORTED, paper_model)
    elapsed = time.perf_counter() - t0
    got = np.array([c.value for c in cells]).reshape(3, 4)
    err = np.abs(got - TABLE1)
    bad = [f"{ERROR_TYPES[r].value}{CLASS_PAIRS[c]}: {got[r, c]:.4f} vs {TABLE1[r][c]:.4f}"
           for r, c in zip(*np.nonzero(err > TOL))]
    ok = not bad and elapsed < 5.0
    report(1, ok, f"max |dF| = {err.max():.2e}, {elapsed:.2f} s; off: {bad}")
    assert elapsed < 5.0
    assert not bad


def test_criterion_2_table2_and_lower_bound(paper_model):
    value, pair, cells = lower_bound(paper_model)
    got = np.array([c.value for c in cells]).reshape(3, 4)
    err = np.abs(got - TABLE2).max()
    ok = err <= TOL and abs(value - EL_PAPER) <= TOL and pair == (2, 1)
    report(2, ok, f"max |dF^L| = {err:.2e}, E_L = {value:.6f} at {pair}")
    assert err <= TOL
    assert value == pytest.approx(EL_PAPER, abs=TOL)
    assert pair == (2, 1)


def test_criterion_3_table3_and_upper_bound(paper_model):
    value, cells = upper_bound(paper_model)
    got = np.array([c.value for c in cells])
    err = np.abs(got - TABLE3).max()
    ok = err <= TOL and abs(value - EU_PAPER) <= TOL
    report(3, ok, f"F^U = {np.round(got, 6).tolist()}, E_U = {value:.6f}")
    assert err <= TOL
    assert value == pytest.approx(EU_PAPER, abs=TOL)


def test_criterion_4_threshold_solver(paper_model):
    gamma, _ = solve_thresholds(paper_model)
    r1, r2 = equalization_residuals(gamma, paper_model)
    dg = [abs(g - t) for g, t in zip(gamma, GAMMA_REPORTED)]
    ok = max(dg) <= 0.005 and abs(r1) < 1e-4 and abs(r2) < 1e-4
    report(4, ok, f"gamma* = ({gamma[0]:.6f}, {gamma[1]:.6f}), |dgamma| = ({dg[0]:.4f}, {dg[1]:.4f}), "
                  f"residuals = ({r1:.2e}, {r2:.2e})")
    assert abs(r1) < 1e-4 and abs(r2) < 1e-4
    assert dg[0] <= 0.005
    assert dg[1] <= 0.005


def test_criterion_5_headline_exponent(paper_report):
    e, gain = paper_report.exponent, 100 * paper_report.gain_over_lower
    ok = abs(e - E_PAPER) <= TOL and abs(gain - GAIN_PAPER) <= 0.5
    report(5, ok, f"E = {e:.6f}, gain over E_L = {gain:.3f}%")
    assert e == pytest.approx(E_PAPER, abs=TOL)
    assert gain == pytest.approx(GAIN_PAPER, abs=0.5)


def test_criterion_6_sandwich(paper_report):
    rng = np.random.default_rng(20240601)
    rows = [(paper_report.lower, paper_report.exponent, paper_report.upper)]
    for _ in range(100):
        m = random_model(rng, n_in=(2, 3), ny=2, p_range=(0.01, 0.5))
        r = achievable_exponent(m)
        rows.append((r.lower, r.exponent, r.upper))
    rows = np.array(rows)
    low_gap = (rows[:, 0] - rows[:, 1]).max()
    up_gap = (rows[:, 1] - rows[:, 2]).max()
    ok = low_gap <= 0 and up_gap <= 1e-6
    report(6, ok, f"{len(rows)} models, max(E_L - E) = {low_gap:.2e}, max(E - E_U) = {up_gap:.2e}")
    assert low_gap <= 0
    assert up_gap <= 1e-6


def test_criterion_7_degeneration():
    rng = np.random.default_rng(7)
    worst = 0.0
    for _ in range(20):
        m = random_model(rng, n_in=(2, 3), ny=3, identical=True, p_range=(0.005, 0.1))
        r = achievable_exponent(m)
        worst = max(worst, abs(r.exponent - r.lower), abs(r.exponent - r.upper), abs(r.upper - r.lower))
    report(7, worst <= 1e-6, f"20 models, max spread = {worst:.2e}")
    assert worst <= 1e-6


def test_criterion_8_numerical_hygiene():
    rng = np.random.default_rng(8)
    t0 = time.perf_counter()
    cases = fails = 0
    rho = np.linspace(0.0, 1.0, 65)
    for _ in range(200):  # E_s convexity
        p = rng.dirichlet(np.ones(rng.integers(2, 6)))
        src = SourceSpec(p)
        r1, r2, th = rng.uniform(0, 3), rng.uniform(0, 3), rng.uniform()
        mid = e_s(th * r1 + (1 - th) * r2, src)
        fails += not mid <= th * e_s(r1, src) + (1 - th) * e_s(r2, src) + 1e-12
        cases += 1
    for _ in range(200):  # E_0 concavity and monotonicity
        nin, nout = rng.integers(2, 6, size=2)
        ch = PtpChannel(rng.dirichlet(np.full(nout, 0.5), size=nin))
        v = e_0(rho, InputDistribution(rng.dirichlet(np.ones(nin))), ch)
        fails += not (np.all(np.diff(v) >= -1e-12) and np.all(v[:-2] - 2 * v[1:-1] + v[2:] <= 1e-12))
        cases += 1
    for _ in range(200):  # analytic derivative vs finite differences
        src = SourceSpec(rng.dirichlet(np.ones(rng.integers(2, 6))))
        r = rng.uniform(0, 1)
        fd = oracle.fd_derivative(lambda x: e_s(x, src), r, 1e-5)
        fails += not abs(e_s_prime(r, src) - fd) <= 1e-6
        cases += 1
    for _ in range(200):  # rho_gamma back-substitution
        p = rng.dirichlet(np.ones(rng.integers(2, 6)))
        g = rng.uniform(p.min(), p.max())
        rg = solve_rho_gamma(g, SourceSpec(p))
        fails += not (rg.tag is Tag.INTERIOR and abs(rg.tilt - math.log(g)) < 1e-10)
        cases += 1
    for _ in range(200):  # envelope concavity and dominance
        nin, nout = rng.integers(2, 5, size=2)
        ch = PtpChannel(rng.dirichlet(np.full(nout, 0.4), size=nin))
        fns = [(lambda r, q=InputDistribution(rng.dirichlet(np.ones(nin))): e_0(r, q, ch))
               for _ in range(rng.integers(1, 5))]
        env = concave_hull(fns, 257)
        x = rng.uniform(0, 1, 500)
        a, b = rng.uniform(0, 1, (2, 200))
        top = np.max([f(x) for f in fns], axis=0)
        fails += not (np.all(env(x) >= top - 1e-14)
                      and np.all(env(0.5 * (a + b)) >= 0.5 * (env(a) + env(b)) - 1e-10))
        cases += 1
    elapsed = time.perf_counter() - t0
    ok = cases == 1000 and fails == 0 and elapsed < 30
    report(8, ok, f"{cases} cases, {fails} failures, {elapsed:.1f} s")
    assert cases == 1000 and fails == 0
    assert elapsed < 30


def test_criterion_9_oracle_agreement(paper_model, paper_report):
    gamma = paper_report.gamma_star
    worst = 0.0
    for tau in ERROR_TYPES:
        for i1, i2 in CLASS_PAIRS:
            a = big_f(tau, i1, i2, gamma, paper_model).value
            b = oracle.big_f_ref(paper_model, tau, i1, i2, gamma, 10_000)
            worst = max(worst, 0.0 if a == b == math.inf else abs(a - b))
    d, arg = oracle.gamma_sweep(paper_model, 128)
    slack = paper_report.exponent - d.max()
    ok = worst <= 1e-6 and slack >= -1e-6
    report(9, ok, f"max |golden - grid| = {worst:.2e}, E - sweep max = {slack:.2e} (sweep argmax {arg})")
    assert worst <= 1e-6
    assert slack >= -1e-6
