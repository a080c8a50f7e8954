import math

import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy import special as sp_special

from spacinglab import special_fns as sf
from spacinglab.errors import DomainError, RangeOverflowError

EULER_GAMMA = 0.5772156649015328606


class TestLnGamma:
    def test_gamma_of_one(self):
        assert abs(sf.ln_gamma(1.0)) < 1e-14

    def test_half(self):
        # Gamma(1/2) = sqrt(pi)
        assert_allclose(sf.ln_gamma(0.5), 0.5 * math.log(math.pi), rtol=1e-13)

    def test_factorial(self):
        assert_allclose(sf.ln_gamma(5.0), math.log(24.0), rtol=1e-13)

    def test_recurrence(self):
        # ln Gamma(x+1) = ln Gamma(x) + ln x
        rng = np.random.default_rng(11)
        for x in rng.uniform(0.01, 100.0, 10_000):
            lhs = sf.ln_gamma(x + 1.0)
            rhs = sf.ln_gamma(x) + math.log(x)
            assert abs(lhs - rhs) <= 1e-12 * max(1.0, abs(lhs))

    def test_against_scipy(self):
        rng = np.random.default_rng(3)
        for x in rng.uniform(1e-3, 170.0, 5000):
            ref = sp_special.gammaln(x)
            assert abs(sf.ln_gamma(x) - ref) <= 1e-12 * max(1.0, abs(ref))

    def test_domain(self):
        with pytest.raises(DomainError):
            sf.ln_gamma(0.0)
        with pytest.raises(DomainError):
            sf.ln_gamma(-3.2)


class TestDigamma:
    def test_one(self):
        assert_allclose(sf.digamma(1.0), -EULER_GAMMA, rtol=1e-12)

    def test_integers_are_harmonic_numbers(self):
        # psi(n) = H_{n-1} - gamma
        for n in range(1, 30):
            assert_allclose(
                sf.digamma(float(n)),
                sf.harmonic_number(n - 1) - EULER_GAMMA,
                rtol=1e-11, atol=1e-13,
            )

    def test_harmonic_first_values(self):
        assert sf.harmonic_number(0) == 0.0
        assert_allclose(
            [sf.harmonic_number(n) for n in (1, 2, 3)],
            [1.0, 1.5, 11.0 / 6.0], rtol=1e-15,
        )

    def test_half_integer(self):
        # psi(n + 1/2) = -gamma - 2 ln 2 + sum_{k=1}^n 2/(2k-1)
        for n in range(0, 12):
            ref = -EULER_GAMMA - 2.0 * math.log(2.0) + sum(
                2.0 / (2 * k - 1) for k in range(1, n + 1)
            )
            assert_allclose(sf.digamma(n + 0.5), ref, rtol=1e-11, atol=1e-13)

    def test_recurrence(self):
        rng = np.random.default_rng(7)
        for x in rng.uniform(1e-3, 100.0, 10_000):
            lhs = sf.digamma(x + 1.0)
            rhs = sf.digamma(x) + 1.0 / x
            assert abs(lhs - rhs) <= 1e-10 * max(1.0, abs(lhs))

    def test_against_scipy(self):
        rng = np.random.default_rng(5)
        for x in rng.uniform(1e-3, 200.0, 5000):
            ref = sp_special.digamma(x)
            assert abs(sf.digamma(x) - ref) <= 1e-10 * max(1.0, abs(ref))

    def test_domain(self):
        with pytest.raises(DomainError):
            sf.digamma(-1.0)


def _bessel_series_direct(alpha, z, terms):
    # the defining power series, summed term by term in log space
    total = 0.0
    for k in range(terms):
        lg = (2 * k + alpha) * math.log(z / 2.0) - sf.ln_gamma(k + 1.0) - sf.ln_gamma(k + alpha + 1.0)
        total += math.exp(lg)
    return total


class TestBesselI:
    def test_at_zero(self):
        assert sf.bessel_i(0.0, 0.0) == 1.0
        assert sf.bessel_i(2.0, 0.0) == 0.0

    def test_half_order_closed_form(self):
        # I_{1/2}(z) = sqrt(2/(pi z)) sinh z
        for z in (0.3, 1.0, 2.5, 10.0, 20.0):
            ref = math.sqrt(2.0 / (math.pi * z)) * math.sinh(z)
            assert_allclose(sf.bessel_i(0.5, z), ref, rtol=1e-11)

    def test_frozen_values(self):
        assert_allclose(sf.bessel_i(0.5, 1.0), 0.9376748882454876, rtol=1e-11)
        assert_allclose(sf.bessel_i(1.0, 2.0), 1.590636854637329, rtol=1e-11)

    def test_against_direct_summation(self):
        # 40 terms suffice for z <= 10
        for alpha in (0.0, 0.5, 1.0, 1.5, 2.0):
            for z in (0.1, 0.7, 2.0, 5.0, 10.0):
                ref = _bessel_series_direct(alpha, z, 40)
                assert_allclose(sf.bessel_i(alpha, z), ref, rtol=1e-10)

    def test_partial_sums_monotone_for_small_z(self):
        # all series terms are positive, so the partial sums climb
        # monotonically toward the limit and the residual shrinks at every step
        for alpha in (0.5, 1.0, 2.0):
            z = 2.0 * alpha + 2.0 - 0.5
            terms = [math.exp((2 * k + alpha) * math.log(z / 2.0)
                              - sf.ln_gamma(k + 1.0) - sf.ln_gamma(k + alpha + 1.0))
                     for k in range(40)]
            partial = np.cumsum(terms)
            limit = sf.bessel_i(alpha, z)
            live = np.asarray(terms)[1:] > 1e-15 * limit  # before float saturation
            assert np.all(np.diff(partial)[live] > 0.0)
            residual = limit - partial
            assert np.all(np.diff(residual)[live] < 0.0)
            assert np.all(residual > -1e-12 * limit)

    def test_switchover_overlap(self):
        # series and asymptotic branch agree around the split point
        for alpha in (0.0, 0.5, 1.0, 1.5, 2.0):
            for z in (14.0, 14.5, 15.5, 16.0):
                series = sf._bessel_i_series(alpha, z)
                asym = math.exp(sf._bessel_i_asymptotic_log(alpha, z))
                assert_allclose(series, asym, rtol=1e-9)

    def test_against_scipy_wide_range(self):
        for alpha in (0.0, 0.5, 1.0, 1.5, 2.0):
            for z in np.linspace(0.01, 50.0, 200):
                assert_allclose(sf.bessel_i(alpha, z), sp_special.iv(alpha, z), rtol=1e-10)

    def test_log_version_matches_and_extends(self):
        assert_allclose(sf.bessel_i_log(1.0, 10.0), math.log(sf.bessel_i(1.0, 10.0)), rtol=1e-12)
        # beyond double range for I itself
        got = sf.bessel_i_log(0.5, 800.0)
        ref = 800.0 + 0.5 * math.log(2.0 / (math.pi * 800.0))  # ln sinh(z) -> z - ln 2
        assert_allclose(got, ref + math.log(0.5), rtol=1e-12)

    def test_overflow_reported(self):
        with pytest.raises(RangeOverflowError):
            sf.bessel_i(0.0, 1000.0)

    def test_domain(self):
        with pytest.raises(DomainError):
            sf.bessel_i(-0.6, 1.0)
        with pytest.raises(DomainError):
            sf.bessel_i(0.0, -1.0)


def _laguerre_direct(n, alpha, u):
    total = 0.0
    for v in range(n + 1):
        lg = (sf.ln_gamma(n + alpha + 1.0) - sf.ln_gamma(n - v + 1.0)
              - sf.ln_gamma(alpha + v + 1.0) - sf.ln_gamma(v + 1.0))
        total += math.exp(lg) * (-u) ** v
    return total


class TestLaguerre:
    def test_degree_zero(self):
        assert sf.laguerre(0, 0.7, 3.0) == 1.0

    def test_degree_one(self):
        for u in (0.0, 0.5, 2.0):
            assert_allclose(sf.laguerre(1, 0.0, u), 1.0 - u, rtol=1e-15, atol=1e-15)

    def test_frozen_value(self):
        # direct evaluation of the defining finite sum at (2, 1/2, 1)
        assert_allclose(sf.laguerre(2, 0.5, 1.0), -0.125, rtol=1e-12)
        assert_allclose(_laguerre_direct(2, 0.5, 1.0), -0.125, rtol=1e-12)

    @pytest.mark.parametrize("alpha", [0.0, 0.5, 1.5])
    def test_recurrence_vs_direct_sum(self, alpha):
        for n in range(11):
            for u in (0.0, 0.2, 1.0, 3.3, 7.0):
                assert_allclose(
                    sf.laguerre(n, alpha, u),
                    _laguerre_direct(n, alpha, u),
                    rtol=1e-9, atol=1e-9,
                )

    def test_against_scipy(self):
        for n in range(0, 20, 3):
            for u in (0.1, 1.0, 5.0):
                assert_allclose(
                    sf.laguerre(n, 0.5, u),
                    sp_special.eval_genlaguerre(n, 0.5, u),
                    rtol=1e-9, atol=1e-12,
                )

    def test_domain(self):
        with pytest.raises(DomainError):
            sf.laguerre(-1, 0.0, 1.0)
        with pytest.raises(DomainError):
            sf.laguerre(2, -1.5, 1.0)
        with pytest.raises(DomainError):
            sf.laguerre(60, 0.0, 1.0)
