"""Acceptance checks, one test per criterion, each at its stated tolerance.

The terminal summary (see ``conftest.py``) prints one PASS/FAIL line per
criterion. Criteria are implemented as stated; none is relaxed to pass.
"""

import csv
import io
import itertools
import math
import time
from dataclasses import replace
from pathlib import Path

import mpmath
import numpy as np
import pytest
from scipy import integrate

from nads.channel import (A, B, NccParameters, bound_concentration, pulse_response,
                          steady_state_reception, transition_matrices)
from nads.detector import (AbnormalityModel, DetectorSpec, acceptance_window,
                           achieved_false_alarm, ncc_detection_probability,
                           ncc_misdetection_probability)
from nads.errors import SingularChannelError
from nads.fusion import MccParameters, mcc_error_probabilities
from nads.oracle import TrialConfig, simulate_end_to_end, simulate_snm_tier
from nads.statmath import gaussian_q, poisson_cdf
from nads.sweep import Grid, load_config, parse_config, run_optimize, run_sweep
from nads.system import DesignConstraints, optimize_concentration, system_performance

CONFIGS = Path(__file__).resolve().parents[1] / "configs"
DESIGN = dict(np_h=1.0, sigma=0.1, eta1=1e-6, n=9, k=2.0, xi=1 - 1e-6, gamma=1e-5)
K_GRID = [1.2, 2.0, 2.8, 3.6, 4.4, 5.2, 6.0]
# Frozen from 50-digit mpmath quadrature of the standard normal density.
Q5 = 2.866515718791939116737e-07


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def design_result(m_max=1000):
    spec = DetectorSpec.calibrate(DESIGN["np_h"], DESIGN["n"], DESIGN["eta1"])
    p_m = ncc_misdetection_probability(spec, AbnormalityModel(DESIGN["k"]))
    return optimize_concentration((p_m, DESIGN["eta1"]), MccParameters(1.0, DESIGN["sigma"]),
                                  DesignConstraints(DESIGN["xi"], DESIGN["gamma"], m_max))


@pytest.mark.criterion(1, "design problem: optimize returns M* in {7, 8, 9} (8 preferred), < 1 s")
def test_criterion_1_design_reproduction():
    start = time.perf_counter()
    report = run_optimize(load_config(CONFIGS / "design_n9.ini"))
    elapsed = time.perf_counter() - start
    row = rows(report.text)[0]
    result = design_result()
    assert row["M_opt"] == ("" if result.m_opt is None else str(result.m_opt))
    assert elapsed < 1.0
    assert result.m_opt in (7, 8, 9), result.diagnosis


C2 = "P_F <= 1e-5 for all M <= 10 and bit-equal across n and k, < 1 s"


def criterion_2_table():
    text = ("[sweep]\nmode = analytic\nm_range = 1:10\n[fixed]\nG = 1\nV = 1000\nNP_H = 1\n"
            "sigma_MCC = 0.1\neta1 = 1e-6\n[swept]\nn = 1:2:9\nk = 1.2:0.8:6\n")
    start = time.perf_counter()
    out = rows(run_sweep(parse_config(text)))
    elapsed = time.perf_counter() - start
    assert len(out) == 5 * 7 * 10
    by_m = {}
    for r in out:
        by_m.setdefault(int(r["M"]), set()).add(r["P_F"])
    return by_m, elapsed


@pytest.mark.criterion(2, C2)
def test_criterion_2_independent_of_n_and_k():
    by_m, elapsed = criterion_2_table()
    # Identical repr text means identical doubles.
    assert all(len(v) == 1 for v in by_m.values())
    assert elapsed < 1.0


@pytest.mark.criterion(2, C2)
def test_criterion_2_budget_up_to_ten_sensors():
    by_m, _ = criterion_2_table()
    p_f = {m: float(next(iter(v))) for m, v in by_m.items()}
    over = {m: v for m, v in p_f.items() if v > 1e-5}
    assert not over, f"P_F exceeds 1e-5 at {over}"


C3 = "error floor: P_M(40) within 1e-6 rel. of Q(5); P_M non-increasing in M, n"


def by_n_table():
    config = replace(load_config(CONFIGS / "by_n.ini"), m_range=Grid(1, 1, 40))
    out = rows(run_sweep(config))
    return {(int(r["n"]), int(r["M"])): float(r["P_M"]) for r in out}


@pytest.mark.criterion(3, C3)
def test_criterion_3_non_increasing_in_m_and_n():
    table = by_n_table()
    ns = sorted({n for n, _ in table})
    for n in ns:
        curve = [table[n, m] for m in range(1, 41)]
        assert all(b <= a for a, b in zip(curve, curve[1:]))
    for m in range(1, 41):
        col = [table[n, m] for n in ns]
        assert all(b <= a for a, b in zip(col, col[1:]))


@pytest.mark.criterion(3, C3)
def test_criterion_3_floor_reached_by_forty_sensors():
    assert gaussian_q(5.0) == pytest.approx(Q5, rel=1e-12)
    table = by_n_table()
    n_best = max(n for n, _ in table)
    best = table[n_best, 40]
    assert abs(best - Q5) / Q5 <= 1e-6, f"P_M(M=40, n={n_best}) = {best!r}"


# 30 points with n * NP_H <= 50.
CALIBRATION_GRID = [
    (np_h, n, eta1)
    for (np_h, n), eta1 in itertools.product(
        [(0.5, 1), (1.0, 1), (1.0, 9), (2.0, 5), (3.7, 7), (5.0, 10), (10.0, 3), (25.0, 2),
         (0.2, 40), (50.0, 1)],
        [1e-6, 1e-3, 0.05])
]


def _exact_rejection(lam, lo, hi):
    lam = mpmath.mpf(lam)
    inside = mpmath.fsum(mpmath.exp(-lam) * lam**j / mpmath.factorial(j) for j in range(lo, hi + 1))
    return 1 - inside


@pytest.mark.criterion(4, "tau'' calibration: rejection mass <= eta1 and minimal on the j/n grid, < 5 s")
def test_criterion_4_detector_calibration():
    assert len(CALIBRATION_GRID) == 30
    mpmath.mp.dps = 40
    start = time.perf_counter()
    specs = [DetectorSpec.calibrate(*pt) for pt in CALIBRATION_GRID]
    elapsed = time.perf_counter() - start
    for (np_h, n, eta1), spec in zip(CALIBRATION_GRID, specs):
        assert n * np_h <= 50
        lam = n * np_h
        lo, hi = spec.window
        assert _exact_rejection(lam, lo, hi) <= eta1
        j = round(spec.tau_pp * n)
        assert math.isclose(spec.tau_pp, j / n)
        if j > 0:
            lo2, hi2 = acceptance_window(np_h, n, (j - 1) / n)
            assert _exact_rejection(lam, lo2, hi2) > eta1
    assert elapsed < 5.0


@pytest.mark.criterion(5, "P_M^NCC strictly decreasing in k at n=1, NP_H=1, eta1=1e-6")
def test_criterion_5_monotone_in_k():
    spec = DetectorSpec.calibrate(1.0, 1, 1e-6)
    p_m = [ncc_misdetection_probability(spec, AbnormalityModel(k)) for k in K_GRID]
    assert all(b < a for a, b in zip(p_m, p_m[1:])), p_m


def _in_range(p):
    return 1e-3 <= p <= 1 - 1e-3


# (np_h, n, eta1, k, sigma, M); high enough SNR that the single-message
# fusion law is tight.
ORACLE_GRID = [
    (1.0, 1, 0.1, 2.0, 0.2, 1), (1.0, 3, 0.05, 2.0, 0.15, 2), (1.0, 3, 0.2, 1.5, 0.15, 3),
    (2.0, 2, 0.01, 2.5, 0.15, 2), (0.5, 5, 0.1, 3.0, 0.12, 4), (1.0, 9, 0.01, 2.0, 0.15, 3),
    (1.0, 9, 1e-3, 2.0, 0.1, 5), (3.0, 4, 0.02, 1.8, 0.15, 2),
]


@pytest.mark.criterion(6, "Monte Carlo (1e5 trials, fixed seed) within 4 SE of the closed forms, < 60 s")
def test_criterion_6_oracle_agreement():
    start = time.perf_counter()
    checked, failures, seed = 0, [], 2012
    for np_h, n, eta1, k, sigma, m in ORACLE_GRID:
        spec = DetectorSpec.calibrate(np_h, n, eta1)
        mcc = MccParameters(1.0, sigma, m)
        q = mcc_error_probabilities(mcc).p_m
        p_d_ncc = ncc_detection_probability(spec, AbnormalityModel(k))
        p_f_ncc = achieved_false_alarm(spec)
        perf = system_performance(1 - p_d_ncc, p_f_ncc, q, q, m)
        cases = [
            ("P_F_NCC", p_f_ncc, simulate_snm_tier, False),
            ("P_D_NCC", p_d_ncc, simulate_snm_tier, True),
            ("P_D", perf.p_d, simulate_end_to_end, True),
            ("P_F", perf.p_f, simulate_end_to_end, False),
        ]
        for name, target, sim, abnormal in cases:
            seed += 1
            if not _in_range(target):
                continue
            rates = sim(TrialConfig(100_000, seed, spec, mcc=mcc, abnormal=abnormal, k=k))
            z = (rates.rate - target) / math.sqrt(target * (1 - target) / rates.trials)
            checked += 1
            if abs(z) > 4:
                failures.append((np_h, n, eta1, k, sigma, m, name, target, rates.rate, z))
    elapsed = time.perf_counter() - start
    assert checked >= 24
    assert not failures, failures
    assert elapsed < 60.0


@pytest.mark.criterion(7, "poisson_cdf to 1e-12 abs (m <= 200, lam <= 100); Q(5) to 1e-12 rel")
def test_criterion_7_special_functions():
    mpmath.mp.dps = 40
    worst = 0.0
    for lam in [1e-3, 0.1, 0.5, 1.0, 2.0, 7.3, 10.0, 25.0, 50.0, 77.7, 100.0]:
        lam_mp = mpmath.mpf(lam)
        term, total = mpmath.exp(-lam_mp), mpmath.mpf(0)
        for m in range(0, 201):
            if m:
                term *= lam_mp / m
            total += term
            worst = max(worst, abs(poisson_cdf(m, lam) - float(total)))
    assert worst <= 1e-12
    tail, _ = integrate.quad(lambda x: math.exp(-0.5 * x * x) / math.sqrt(2 * math.pi), 5, np.inf,
                             epsabs=0, epsrel=1e-13)
    assert abs(gaussian_q(5.0) - tail) / tail <= 1e-12
    assert abs(gaussian_q(5.0) - Q5) / Q5 <= 1e-12


def _random_channels(rng, count):
    for _ in range(count):
        yield NccParameters(
            receptors=10 ** rng.uniform(-1, 1), pulse_duration=10 ** rng.uniform(-2, 1),
            concentration=10 ** rng.uniform(-2, 1), binding_rate=10 ** rng.uniform(-1, 1),
            release_rate=10 ** rng.uniform(-1, 1), threshold=10 ** rng.uniform(-2, 1),
            prob_transmit_a=rng.uniform(0.05, 0.95))


@pytest.mark.criterion(8, "binding closed forms vs quadrature (1e-9 rel), row-stochastic, fixed point 1e-10")
def test_criterion_8_channel_model():
    rng = np.random.default_rng(2012)
    worst = 0.0
    for p in _random_channels(rng, 1000):
        r = p.binding_speed
        t = p.pulse_duration
        # Bound concentration via variation of constants.
        c_t, _ = integrate.quad(lambda s: p.binding_rate * p.concentration * p.receptors
                                * math.exp(-r * (t - s)), 0, t, epsabs=0, epsrel=1e-12)
        n_a, _ = integrate.quad(lambda s: bound_concentration(p, s), 0, t,
                                epsabs=0, epsrel=1e-12, limit=200)
        resp = pulse_response(p)
        worst = max(worst, abs(bound_concentration(p, t) - c_t) / c_t,
                    abs(resp.n_a - n_a) / n_a)

        mats = transition_matrices(p)
        for mat in (mats.given_prev_a, mats.given_prev_b):
            assert np.all((mat >= 0) & (mat <= 1))
            assert np.all(np.abs(mat.sum(axis=1) - 1) <= 1e-12)

        pa = p.prob_transmit_a
        try:
            x, _ = steady_state_reception(mats, pa)
        except SingularChannelError:
            continue
        rhs = (mats.p(A, A, A) * pa * x + mats.p(B, A, A) * (1 - pa) * x
               + mats.p(A, A, B) * pa * (1 - x) + mats.p(B, A, B) * (1 - pa) * (1 - x))
        assert abs(x - rhs) <= 1e-10
    assert worst <= 1e-9
