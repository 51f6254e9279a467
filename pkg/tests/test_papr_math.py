import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate as sp_integrate

from wgnpapr import papr_math as pm
from wgnpapr.papr_math import DomainError, KeysightInput, NumericallyUnstableError, PaprModel

GAMMA = 0.5772156649015329

# Mean CF from the survival-function integral  int_0^inf 1 - (1 - e^{-x^2})^n dx,
# evaluated with mpmath at 40 digits (independent of the quantile-integral route).
MEAN_CF_ORACLE = {
    1: 0.88622692545275801365,
    2: 1.1457967822477659017,
    10: 1.6757239275625611285,
    25: 1.9285677616290208598,
    50: 2.1014218283695634312,
    100: 2.2615148109588641436,
    1000: 2.7265352556594905552,
    10**4: 3.1221490024623553257,
    10**5: 3.4724175556458355102,
    10**6: 3.7901579847201031293,
}


def exact_harmonic(n: int) -> Fraction:
    return sum((Fraction(1, k) for k in range(1, n + 1)), Fraction(0))


# -- CDFs and quantiles ------------------------------------------------------


class TestPaprCdf:
    def test_zero_at_origin(self):
        assert pm.papr_cdf(0.0, 5) == 0.0

    def test_exponential_median(self):
        assert pm.papr_cdf(math.log(2), 1) == pytest.approx(0.5, abs=1e-15)

    def test_at_mean_for_n_100(self):
        # mpmath: (1 - exp(-H_100))^100 at 40 digits
        value = pm.papr_cdf(pm.mean_papr(100), 100)
        assert value == pytest.approx(0.57107758027175370385, rel=1e-12)
        assert 0.5 < value < 0.7

    def test_at_mean_matches_empirical(self, rng):
        # 1e5 PAPR draws (max of 100 unit exponentials); KS band at alpha = 0.01
        draws = rng.standard_exponential((100_000, 100)).max(axis=1)
        h = pm.mean_papr(100)
        empirical = np.mean(draws <= h)
        assert abs(empirical - pm.papr_cdf(h, 100)) < 1.63 / math.sqrt(100_000)

    def test_monotone_and_limits(self):
        x = np.linspace(0, 40, 2001)
        f = pm.papr_cdf(x, 1000)
        assert np.all(np.diff(f) >= 0)
        assert f[-1] == pytest.approx(1.0, abs=1e-12)

    def test_negative_rejected(self):
        with pytest.raises(DomainError):
            pm.papr_cdf(-0.1, 3)

    def test_array_shape_preserved(self):
        assert pm.papr_cdf(np.ones((2, 3)), 4).shape == (2, 3)
        assert isinstance(pm.papr_cdf(1.0, 4), float)


class TestCfCdf:
    def test_zero_at_origin(self):
        assert pm.cf_cdf(0.0, 3) == 0.0

    def test_rayleigh_median(self):
        assert pm.cf_cdf(math.sqrt(math.log(2)), 1) == pytest.approx(0.5, abs=1e-15)

    def test_equals_papr_cdf_of_square(self):
        assert pm.cf_cdf(2.0, 1000) == pm.papr_cdf(4.0, 1000)

    @given(st.floats(0, 8), st.integers(1, 10**6))
    def test_functional_link(self, x, n):
        assert pm.cf_cdf(x, n) == pm.papr_cdf(x * x, n)

    def test_negative_rejected(self):
        with pytest.raises(DomainError):
            pm.cf_cdf(-1.0, 3)


class TestQuantiles:
    def test_zero(self):
        assert pm.papr_quantile(0.0, 7) == 0.0
        assert pm.cf_quantile(0.0, 2) == 0.0

    def test_median_n1(self):
        assert pm.papr_quantile(0.5, 1) == pytest.approx(math.log(2), rel=1e-15)
        assert pm.cf_quantile(0.5, 1) == pytest.approx(math.sqrt(math.log(2)), rel=1e-15)

    def test_roundtrip_high_quantile(self):
        x = pm.papr_quantile(0.99, 10**4)
        assert pm.papr_cdf(x, 10**4) == pytest.approx(0.99, abs=1e-12)

    @given(st.floats(0, 0.999999), st.integers(1, 10**6))
    def test_cf_is_sqrt_of_papr(self, p, n):
        assert pm.cf_quantile(p, n) == math.sqrt(pm.papr_quantile(p, n))

    @given(st.floats(0, 0.999999), st.sampled_from([1, 10, 1000, 10**5]))
    def test_cdf_of_quantile(self, p, n):
        assert pm.papr_cdf(pm.papr_quantile(p, n), n) == pytest.approx(p, abs=1e-12)

    @pytest.mark.parametrize("p", [-0.1, 1.0, 1.5, float("nan")])
    def test_domain(self, p):
        with pytest.raises(DomainError):
            pm.papr_quantile(p, 5)
        with pytest.raises(DomainError):
            pm.cf_quantile(p, 5)

    @pytest.mark.parametrize("n", [1, 10, 1000, 10**5])
    def test_roundtrip_well_conditioned_range(self, n):
        # x -> p -> x, restricted to where the CDF is neither 0 nor within
        # ~1e-6 of 1 in double precision
        x = np.linspace(0.01, 30, 3000)
        p = pm.papr_cdf(x, n)
        keep = (p > 1e-300) & (p < 1 - 1e-6)
        assert keep.sum() > 100
        back = pm.papr_quantile(p[keep], n)
        assert np.max(np.abs(back - x[keep])) < 1e-10


# -- densities ---------------------------------------------------------------


class TestPaprPdf:
    def test_origin(self):
        assert pm.papr_pdf(0.0, 1) == 1.0
        assert pm.papr_pdf(0.0, 2) == 0.0
        assert pm.papr_pdf(0.0, 1000) == 0.0

    def test_normalized(self):
        value, _ = sp_integrate.quad(lambda x: pm.papr_pdf(x, 100), 0, 50,
                                     epsabs=1e-13, epsrel=1e-12, limit=200)
        assert value == pytest.approx(1.0, abs=1e-8)

    @pytest.mark.parametrize("n", [1, 10, 100])
    def test_mean_is_harmonic_number(self, n):
        value, _ = sp_integrate.quad(lambda x: x * pm.papr_pdf(x, n), 0, np.inf,
                                     epsabs=1e-12, epsrel=1e-12, limit=200)
        assert value == pytest.approx(float(exact_harmonic(n)), abs=1e-6)

    @pytest.mark.parametrize("n", [1, 5, 100, 10**4])
    def test_derivative_of_cdf(self, n):
        h = 1e-5
        x = np.linspace(0.05, 20, 400)
        numeric = (pm.papr_cdf(x + h, n) - pm.papr_cdf(x - h, n)) / (2 * h)
        assert np.max(np.abs(numeric - pm.papr_pdf(x, n))) < 1e-6

    def test_negative_rejected(self):
        with pytest.raises(DomainError):
            pm.papr_pdf(-1e-9, 4)


class TestPaprPdfDb:
    def test_vanishes_in_tails(self):
        assert pm.papr_pdf_db(-400.0, 10**4) == 0.0
        assert pm.papr_pdf_db(-np.inf, 10**4) == 0.0
        assert pm.papr_pdf_db(40.0, 10**4) == 0.0
        assert pm.papr_pdf_db(5000.0, 10**4) == 0.0

    def test_value_at_mean(self):
        # mpmath evaluation of the dB density at 10 log10(H_n), n = 1e4
        y = 10 * math.log10(pm.mean_papr(10**4))
        assert pm.papr_pdf_db(y, 10**4) == pytest.approx(0.72173846350284106846, rel=1e-12)

    def test_change_of_variables(self):
        y = 9.0
        t = 10 ** (y / 10)
        expected = pm.papr_pdf(t, 10**4) * math.log(10) / 10 * t
        assert pm.papr_pdf_db(y, 10**4) == pytest.approx(expected, abs=1e-12)

    @pytest.mark.parametrize("n", [1, 100, 10**4])
    def test_normalized(self, n):
        value, _ = sp_integrate.quad(lambda y: pm.papr_pdf_db(y, n), -200, 25,
                                     points=[10 * math.log10(pm.mean_papr(n))],
                                     epsabs=1e-13, epsrel=1e-12, limit=400)
        assert value == pytest.approx(1.0, abs=1e-8)

    def test_agrees_with_histogram_of_draws(self, rng):
        n = 10**4
        draws = 10 * np.log10(rng.standard_exponential((4000, n)).max(axis=1))
        y0 = 10 * math.log10(pm.mean_papr(n))
        window = 0.2
        frac = np.mean(np.abs(draws - y0) < window / 2) / window
        assert frac == pytest.approx(pm.papr_pdf_db(y0, n), abs=0.08)


# -- Gumbel limits -------------------------------------------------------------


class TestAsymptoticCdfs:
    @pytest.mark.parametrize("n", [2, 10, 12345, 10**9])
    def test_at_location(self, n):
        assert pm.papr_cdf_asymptotic(math.log(n), n) == pytest.approx(math.exp(-1), rel=1e-15)
        assert pm.cf_cdf_asymptotic(math.sqrt(math.log(n)), n) == pytest.approx(
            math.exp(-1), rel=1e-15)

    def test_papr_close_to_exact(self):
        n = 10**5
        x = math.log(n) + GAMMA
        assert abs(pm.papr_cdf_asymptotic(x, n) - pm.papr_cdf(x, n)) < 0.01

    def test_cf_close_to_exact(self):
        assert abs(pm.cf_cdf_asymptotic(3.2, 10**4) - pm.cf_cdf(3.2, 10**4)) < 0.01

    def test_sup_norm_shrinks_with_n(self):
        x = np.linspace(0, 30, 6001)
        dist = [np.max(np.abs(pm.papr_cdf_asymptotic(x, n) - pm.papr_cdf(x, n)))
                for n in (10**2, 10**3, 10**4)]
        assert dist[0] > dist[1] > dist[2]

    def test_cf_scale_halves_when_log_n_quadruples(self):
        # scale 1/(2 sqrt(ln n)): compare slopes of the Gumbel CDF at its location
        def slope(n):
            loc = math.sqrt(math.log(n))
            h = 1e-6
            return (pm.cf_cdf_asymptotic(loc + h, n) - pm.cf_cdf_asymptotic(loc - h, n)) / (2 * h)

        # ln(10^4) = 4 ln(10); slope = e^{-1} / scale, so doubling it means the scale halved
        assert slope(10**4) / slope(10) == pytest.approx(2.0, rel=1e-6)

    def test_need_two_samples(self):
        with pytest.raises(DomainError):
            pm.papr_cdf_asymptotic(1.0, 1)
        with pytest.raises(DomainError):
            pm.cf_cdf_asymptotic(1.0, 1)


# -- means -----------------------------------------------------------------------


class TestMeanOrderStatistic:
    def test_minimum(self):
        assert pm.mean_order_statistic_power(1, 4) == 0.25

    def test_maximum_is_harmonic(self):
        assert pm.mean_order_statistic_power(4, 4) == pytest.approx(25 / 12, rel=1e-15)
        assert pm.mean_order_statistic_power(4, 4) == pm.mean_papr(4)

    def test_second_of_three(self):
        assert pm.mean_order_statistic_power(2, 3) == pytest.approx(5 / 6, rel=1e-15)

    def test_strictly_increasing(self):
        values = [pm.mean_order_statistic_power(r, 50) for r in range(1, 51)]
        assert np.all(np.diff(values) > 0)

    def test_matches_simulated_order_statistics(self, rng):
        draws = np.sort(rng.standard_exponential((200_000, 6)), axis=1)
        for r in range(1, 7):
            se = draws[:, r - 1].std() / math.sqrt(draws.shape[0])
            assert abs(draws[:, r - 1].mean() - pm.mean_order_statistic_power(r, 6)) < 4 * se

    @pytest.mark.parametrize("r", [0, 5, 2.5])
    def test_domain(self, r):
        with pytest.raises(DomainError):
            pm.mean_order_statistic_power(r, 4)


class TestMeanPapr:
    def test_small(self):
        assert pm.mean_papr(1) == 1.0
        assert pm.mean_papr(4) == pytest.approx(25 / 12, rel=1e-15)

    @pytest.mark.parametrize("n", [1, 2, 7, 50, 333])
    def test_matches_exact_fraction(self, n):
        assert pm.mean_papr(n) == pytest.approx(float(exact_harmonic(n)), rel=1e-15)

    @pytest.mark.parametrize("n", [3517, 10**5, 10**6, 10**6 + 1, 10**7, 10**9])
    def test_matches_mpmath(self, n):
        assert pm.mean_papr(n) == pytest.approx(float(mpmath.harmonic(n)), rel=1e-14)

    def test_3517_in_db(self):
        assert pm.to_db(pm.mean_papr(3517)) == pytest.approx(9.42, abs=0.005)

    def test_strictly_increasing_across_switchover(self):
        ns = np.arange(pm.HARMONIC_DIRECT_MAX - 3, pm.HARMONIC_DIRECT_MAX + 4)
        values = [pm.mean_papr(int(n)) for n in ns]
        assert np.all(np.diff(values) > 0)

    def test_model_wrapper(self):
        m = PaprModel(100)
        assert m.mean() == pm.mean_papr(100)
        assert m.cdf(3.0) == pm.papr_cdf(3.0, 100)
        with pytest.raises(DomainError):
            PaprModel(0)


class TestMeanPaprGumbel:
    def test_within_tenth_percent_at_100(self):
        h = pm.mean_papr(100)
        assert abs(pm.mean_papr_gumbel(100) - h) / h < 1e-3

    def test_million(self):
        h = pm.mean_papr(10**6)
        assert abs(pm.mean_papr_gumbel(10**6) - h) / h < 5e-7

    def test_gap_decreases_to_gamma(self):
        ns = np.unique(np.rint(np.geomspace(10, 10**6, 60)).astype(int))
        gaps = np.array([pm.mean_papr(int(n)) - math.log(n) for n in ns])
        assert np.all(gaps > GAMMA)
        assert np.all(np.diff(gaps) < 0)
        assert gaps[-1] - GAMMA < 1e-6


class TestMeanCf:
    def test_gumbel_n2(self):
        expected = math.sqrt(math.log(2)) + GAMMA / (2 * math.sqrt(math.log(2)))
        assert pm.mean_cf_gumbel(2) == pytest.approx(expected, rel=1e-15)
        assert pm.mean_cf_gumbel(2) == pytest.approx(1.1792, abs=1e-4)
        assert pm.mean_cf_gumbel(2) > pm.mean_cf_integral(2)

    def test_gumbel_needs_two(self):
        with pytest.raises(DomainError):
            pm.mean_cf_gumbel(1)

    def test_gumbel_relative_error_under_one_percent(self):
        for n in (100, 1000, 10**4, 10**5, 10**6):
            exact = pm.mean_cf_integral(n)
            assert abs(pm.mean_cf_gumbel(n) - exact) / exact < 0.01

    def test_gumbel_error_positive_and_shrinking(self):
        rel = [(pm.mean_cf_gumbel(n) - pm.mean_cf_integral(n)) / pm.mean_cf_integral(n)
               for n in (10**2, 10**3, 10**4, 10**5)]
        assert all(r > 0 for r in rel)
        assert all(a > b for a, b in zip(rel, rel[1:]))

    def test_bound_n1(self):
        assert pm.mean_cf_bound(1) == 1.0
        assert pm.mean_cf_integral(1) < 1.0

    @pytest.mark.parametrize("n", sorted(MEAN_CF_ORACLE))
    def test_bound_holds(self, n):
        assert pm.mean_cf_integral(n) <= pm.mean_cf_bound(n)

    def test_bound_gap(self):
        # the bound tightens with n; the gap is 0.016 at n=100 and below 0.01 from n=1000
        gaps = {n: pm.mean_cf_bound(n) - MEAN_CF_ORACLE[n] for n in (100, 1000, 10**4, 10**6)}
        assert gaps[100] == pytest.approx(0.01607, abs=1e-4)
        assert all(gaps[n] < 0.01 for n in (1000, 10**4, 10**6))
        assert gaps[100] > gaps[1000] > gaps[10**4] > gaps[10**6]

    def test_bound_beats_gumbel(self):
        for n in (100, 1000, 10**4, 10**5, 10**6):
            exact = MEAN_CF_ORACLE[n]
            assert abs(pm.mean_cf_bound(n) - exact) < abs(pm.mean_cf_gumbel(n) - exact)

    def test_sum_small(self):
        assert pm.mean_cf_sum(1) == pytest.approx(math.sqrt(math.pi) / 2, rel=1e-15)
        assert pm.mean_cf_sum(2) == pytest.approx(math.sqrt(math.pi) / 2 * (2 - 1 / math.sqrt(2)),
                                                  rel=1e-15)

    @pytest.mark.parametrize("n", [1, 2, 10, 25, 50])
    def test_sum_matches_oracle(self, n):
        assert pm.mean_cf_sum(n) == pytest.approx(MEAN_CF_ORACLE[n], rel=1e-15)

    def test_sum_refuses_large_n(self):
        with pytest.raises(NumericallyUnstableError, match="unstable"):
            pm.mean_cf_sum(51)

    def test_double_precision_sum_really_is_unstable(self):
        # the naive float evaluation the refusal guards against
        n = 60
        naive = math.sqrt(math.pi) / 2 * sum(
            math.comb(n, k) * (-1) ** (k - 1) / math.sqrt(k) for k in range(1, n + 1))
        assert abs(naive - pm.mean_cf_integral(n)) > 1e-4

    @pytest.mark.parametrize("n", sorted(MEAN_CF_ORACLE))
    def test_integral_matches_oracle(self, n):
        assert pm.mean_cf_integral(n) == pytest.approx(MEAN_CF_ORACLE[n], rel=1e-10)

    def test_integral_bracketed(self):
        n = 10**4
        value = pm.mean_cf_integral(n)
        assert pm.mean_cf_gumbel(n) - 0.01 < value < pm.mean_cf_bound(n)

    def test_integral_reports_nonconvergence(self):
        spec = pm.QuadratureSpec(relative_tolerance=1e-15, absolute_tolerance=1e-300,
                                 max_subdivisions=2)
        with pytest.raises(pm.QuadratureError):
            pm.mean_cf_integral(1000, spec)


class TestPriorFormulas:
    def test_dunsmore_n1000(self):
        assert pm.prior_mean_papr_dunsmore(1000) == pytest.approx(6.9078, abs=1e-4)
        err_db = pm.to_db(pm.prior_mean_papr_dunsmore(1000) / pm.mean_papr(1000))
        assert err_db == pytest.approx(-0.3, abs=0.06)

    def test_dunsmore_gap_bounds(self):
        for n in (10, 100, 1000, 10**4, 10**6):
            gap = pm.mean_papr(n) - pm.prior_mean_papr_dunsmore(n)
            assert GAMMA < gap <= GAMMA + 1 / (2 * n)

    def test_dunsmore_over_ten_percent_at_100(self):
        h = pm.mean_papr(100)
        assert abs(pm.prior_mean_papr_dunsmore(100) - h) / h > 0.10

    def test_keysight_n1000(self):
        assert pm.prior_mean_papr_keysight(1000) == pytest.approx(
            math.log(1000 * math.pi + math.e), rel=1e-15)
        assert pm.prior_mean_papr_keysight(1000) == pytest.approx(8.0534, abs=1e-4)
        err_db = pm.to_db(pm.prior_mean_papr_keysight(1000) / pm.mean_papr(1000))
        assert err_db == pytest.approx(0.3, abs=0.06)

    def test_keysight_gap_limit(self):
        gap = pm.prior_mean_papr_keysight(10**6) - pm.mean_papr(10**6)
        assert gap == pytest.approx(math.log(math.pi) - GAMMA, abs=1e-3)

    def test_keysight_always_above(self):
        ns = np.unique(np.rint(np.geomspace(1, 10**6, 400)).astype(int))
        assert all(pm.prior_mean_papr_keysight(int(n)) > pm.mean_papr(int(n)) for n in ns)

    def test_bandwidth_form_reduces_to_sample_form(self):
        for n in (10, 1000, 31415):
            k = KeysightInput(tau=1.0, bw_i=n / 2)
            assert pm.prior_mean_papr_keysight_bw(k) == pytest.approx(
                pm.prior_mean_papr_keysight(n), rel=1e-15)

    def test_bandwidth_form_one_millisecond(self):
        k = KeysightInput(tau=1e-3, bw_i=500e3)
        assert pm.prior_mean_papr_keysight_bw(k) == pytest.approx(
            math.log(math.pi * 1000 + math.e), rel=1e-15)

    def test_bandwidth_form_short_observation_limit(self):
        assert pm.prior_mean_papr_keysight_bw(KeysightInput(1e-18, 1.0)) == pytest.approx(1.0)

    @pytest.mark.parametrize("tau, bw", [(0, 1), (1, 0), (-1, 1)])
    def test_bandwidth_form_domain(self, tau, bw):
        with pytest.raises(DomainError):
            KeysightInput(tau, bw)


@settings(max_examples=50)
@given(st.integers(1, 10**7))
def test_every_distribution_is_free_of_sigma(n):
    # nothing in the API takes a noise power; the only parameter is n
    m = PaprModel(n)
    assert m.mean() == pm.mean_papr(n)
