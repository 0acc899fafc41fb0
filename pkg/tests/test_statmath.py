import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from nads.errors import DomainError
from nads.statmath import (check_probability, gaussian_q, log_factorial, poisson_cdf,
                           poisson_pmf, poisson_sf, poisson_window)

# Frozen from 40-digit mpmath summation / quadrature.
PMF_10_18 = 0.01498515860357247409
CDF_9_1 = 0.99999988857452166128
CDF_8_1 = 0.99999887479740203098
Q5 = 2.866515718791939116737e-07


def _mp_cdf(m, lam):
    with mp.workdps(40):
        return mp.fsum(mp.e ** -mp.mpf(lam) * mp.mpf(lam) ** i / mp.factorial(i)
                       for i in range(m + 1))


def test_pmf_trivial_examples():
    assert poisson_pmf(0, 1.0) == pytest.approx(math.exp(-1), rel=1e-15)
    assert poisson_pmf(1, 1.0) == pytest.approx(math.exp(-1), rel=1e-15)


def test_pmf_against_extended_precision():
    assert poisson_pmf(10, 18.0) == pytest.approx(PMF_10_18, rel=1e-13)
    assert poisson_pmf(10, 18.0) == pytest.approx(0.01498, abs=1e-5)


def test_pmf_large_count_does_not_overflow():
    p = poisson_pmf(2000, 1900.0)
    with mp.workdps(30):
        ref = float(mp.e ** -1900 * mp.mpf(1900) ** 2000 / mp.factorial(2000))
    assert p == pytest.approx(ref, rel=1e-10)


@pytest.mark.parametrize("lam", [0.0, -1.0, math.inf, math.nan])
def test_pmf_rejects_bad_rate(lam):
    with pytest.raises(DomainError):
        poisson_pmf(1, lam)


def test_cdf_examples():
    assert poisson_cdf(-1, 5.0) == 0.0
    assert poisson_cdf(1, 1.0) == pytest.approx(2 * math.exp(-1), rel=1e-14)
    assert poisson_cdf(9, 1.0) == pytest.approx(CDF_9_1, abs=1e-15)
    # The boundary that makes tau'' = 8 for a 1e-6 budget at n = NP_H = 1.
    assert poisson_cdf(9, 1.0) > 1 - 1e-6 > poisson_cdf(8, 1.0)
    assert poisson_cdf(8, 1.0) == pytest.approx(CDF_8_1, abs=1e-15)


def test_cdf_rejects_nonfinite_rate():
    with pytest.raises(DomainError):
        poisson_cdf(3, math.inf)


@pytest.mark.parametrize("lam", [0.3, 1.0, 7.5, 18.0, 42.0, 100.0])
def test_cdf_matches_extended_precision_grid(lam):
    for m in range(0, 201, 7):
        assert abs(poisson_cdf(m, lam) - float(_mp_cdf(m, lam))) <= 1e-12


@settings(max_examples=60, deadline=None)
@given(st.floats(0.01, 100.0), st.integers(0, 200))
def test_cdf_monotone_and_tail_complement(lam, m):
    assert poisson_cdf(m, lam) <= poisson_cdf(m + 1, lam) + 1e-16
    assert poisson_cdf(m, lam) + poisson_sf(m, lam) == pytest.approx(1.0, abs=1e-13)


@settings(max_examples=60, deadline=None)
@given(st.floats(0.01, 100.0), st.integers(0, 150), st.integers(0, 150))
def test_window_is_cdf_difference(lam, lo, width):
    hi = lo + width
    diff = poisson_cdf(hi, lam) - poisson_cdf(lo - 1, lam)
    assert poisson_window(lo, hi, lam) == pytest.approx(diff, abs=1e-13)


@pytest.mark.parametrize("lam", [0.5, 3.0, 25.0, 90.0])
def test_pmf_sums_to_one_with_tail_bound(lam):
    # Chernoff-style cut: beyond lam + 12 sqrt(lam) + 30 the mass is < 1e-15.
    top = int(lam + 12 * math.sqrt(lam) + 30)
    total = math.fsum(poisson_pmf(q, lam) for q in range(top + 1))
    assert abs(total - 1.0) < 1e-12


def test_sf_keeps_relative_precision_in_far_tail():
    with mp.workdps(40):
        ref = 1 - _mp_cdf(30, 2.0)
    assert poisson_sf(30, 2.0) == pytest.approx(float(ref), rel=1e-12)


def test_gaussian_q_examples():
    assert gaussian_q(0.0) == 0.5
    assert gaussian_q(5.0) == pytest.approx(Q5, rel=1e-12)
    assert gaussian_q(-5.0) == pytest.approx(1 - Q5, rel=1e-15)


def test_gaussian_q_against_scipy_quadrature():
    val, _ = integrate.quad(lambda x: math.exp(-x * x / 2) / math.sqrt(2 * math.pi), 5, np.inf,
                            epsabs=0, epsrel=1e-13)
    assert gaussian_q(5.0) == pytest.approx(val, rel=1e-11)


@pytest.mark.parametrize("x", [6.0, 9.0, 11.0])
def test_gaussian_q_tiny_tails(x):
    with mp.workdps(40):
        ref = float(mp.erfc(x / mp.sqrt(2)) / 2)
    assert gaussian_q(x) == pytest.approx(ref, rel=1e-12)


@settings(max_examples=100, deadline=None)
@given(st.floats(-8.0, 8.0))
def test_gaussian_q_symmetry(x):
    assert abs(gaussian_q(x) + gaussian_q(-x) - 1.0) <= 1e-12


def test_gaussian_q_nan():
    with pytest.raises(DomainError):
        gaussian_q(math.nan)


def test_log_factorial_and_probability_check():
    assert log_factorial(5) == pytest.approx(math.log(120))
    with pytest.raises(DomainError):
        log_factorial(-1)
    assert check_probability(0.25) == 0.25
    with pytest.raises(DomainError):
        check_probability(1.5)
