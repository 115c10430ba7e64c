import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from copulasurv import margins
from copulasurv.margins import MarginFamily

EXP = MarginFamily.EXPONENTIAL
WEI = MarginFamily.WEIBULL
GOM = MarginFamily.GOMPERTZ

ALL_CASES = [
    (EXP, None, 0.5),
    (EXP, None, 0.03688),
    (WEI, 2.0, 1.0),
    (WEI, 0.7, 0.08),
    (GOM, 0.06, 0.01),
    (GOM, -0.02, 0.4),
    (GOM, 1e-10, 0.05),
]


class TestLinearPredictor:
    def test_reference_row(self):
        eta = margins.linear_predictor([-3.30, 0.11, 0.02, -0.51], [0, 0, 0])
        assert eta == pytest.approx(-3.30)

    def test_zero_coefficients(self):
        assert margins.linear_predictor([0.0, 0.0], [1.0]) == 0.0

    def test_hand_sum(self):
        eta = margins.linear_predictor([-3.28, 0.32, 0.00, -0.53], [1, 0, 1])
        assert eta == pytest.approx(-3.49)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            margins.linear_predictor([0.0, 1.0], [1.0, 0.0])

    def test_matrix_rows(self):
        eta = margins.linear_predictor([1.0, 2.0], np.array([[0.0], [1.0]]))
        assert np.allclose(eta, [1.0, 3.0])


class TestRateParam:
    def test_exp_link(self):
        assert margins.rate_param(EXP, [-3.30], np.empty((0,))) == pytest.approx(
            np.exp(-3.30))

    def test_unit(self):
        assert margins.rate_param(EXP, [0.0], np.empty((0,))) == 1.0

    def test_sum_then_exp(self):
        rate = margins.rate_param(EXP, [-4.15, 1.32], [1.0])
        assert rate == pytest.approx(np.exp(-2.83))

    def test_cap_keeps_rate_finite(self):
        rate = margins.rate_param(EXP, [1000.0], np.empty((0,)))
        assert rate == pytest.approx(np.exp(margins.PREDICTOR_CAP))


class TestSurvival:
    def test_at_zero(self):
        assert margins.survival(EXP, None, 0.5, 0.0) == 1.0

    def test_exponential_closed_form(self):
        assert margins.survival(EXP, None, 0.5, 2.0) == pytest.approx(
            np.exp(-1.0), rel=1e-14)

    def test_weibull_closed_form(self):
        assert margins.survival(WEI, 2.0, 1.0, 1.0) == pytest.approx(
            np.exp(-1.0), rel=1e-14)

    def test_negative_time_rejected(self):
        with pytest.raises(ValueError):
            margins.survival(EXP, None, 1.0, -0.1)


class TestDensity:
    def test_exponential_at_zero(self):
        assert margins.density(EXP, None, 0.7, 0.0) == pytest.approx(0.7)

    def test_gompertz_closed_form(self):
        lam, gam, t = 0.01, 0.06, 10.0
        want = lam * np.exp(gam * t - lam / gam * (np.exp(gam * t) - 1.0))
        assert margins.density(GOM, gam, lam, t) == pytest.approx(want, rel=1e-13)

    def test_gompertz_matches_numeric_cdf_slope(self):
        lam, gam, t, h = 0.01, 0.06, 10.0, 1e-6
        slope = (margins.survival(GOM, gam, lam, t - h)
                 - margins.survival(GOM, gam, lam, t + h)) / (2.0 * h)
        assert margins.density(GOM, gam, lam, t) == pytest.approx(slope, rel=1e-8)

    def test_weibull_shape_one_is_exponential(self):
        t = np.linspace(0.01, 30.0, 50)
        assert np.allclose(margins.density(WEI, 1.0, 0.3, t),
                           margins.density(EXP, None, 0.3, t), rtol=1e-12)


class TestHazard:
    def test_exponential_constant(self):
        t = np.array([0.0, 1.0, 17.3])
        assert np.allclose(margins.hazard(EXP, None, 0.2, t), 0.2)

    def test_weibull_closed_form(self):
        assert margins.hazard(WEI, 2.0, 1.0, 3.0) == pytest.approx(6.0)

    def test_gompertz_zero_shape_limit(self):
        assert margins.hazard(GOM, 0.0, 0.37, 5.0) == pytest.approx(0.37)


class TestInverseSurvival:
    def test_exponential_closed_form(self):
        lam, u = 0.25, 0.3
        assert margins.inverse_survival(EXP, None, lam, u) == pytest.approx(
            -np.log(u) / lam)

    def test_u_one_maps_to_zero(self):
        for fam, shape, rate in ALL_CASES:
            assert margins.inverse_survival(fam, shape, rate, 1.0) == 0.0

    def test_weibull_closed_form(self):
        assert margins.inverse_survival(WEI, 2.0, 1.0, np.exp(-4.0)) == \
            pytest.approx(2.0)

    def test_rejects_nonpositive_u(self):
        with pytest.raises(ValueError):
            margins.inverse_survival(EXP, None, 1.0, 0.0)

    def test_gompertz_negative_shape_floor(self):
        # S(inf) = exp(rate/shape) = exp(-0.5); u below it has no finite time
        u_floor = np.exp(0.05 / -0.1)
        with pytest.raises(ValueError):
            margins.inverse_survival(GOM, -0.1, 0.05, 0.9 * u_floor)
        t = margins.inverse_survival(GOM, -0.1, 0.05, 0.9 * u_floor,
                                     on_no_event="inf")
        assert np.isinf(t)
        assert np.isfinite(
            margins.inverse_survival(GOM, -0.1, 0.05, 1.1 * u_floor))


class TestProperties:
    @pytest.mark.parametrize("family,shape,rate", ALL_CASES)
    def test_density_equals_hazard_times_survival(self, family, shape, rate):
        t = np.linspace(0.0, 40.0, 200)
        f = margins.density(family, shape, rate, t)
        h = margins.hazard(family, shape, rate, t)
        s = margins.survival(family, shape, rate, t)
        keep = s > 1e-300
        np.testing.assert_allclose(f[keep], (h * s)[keep], rtol=1e-12)

    @pytest.mark.parametrize("family,shape,rate", ALL_CASES)
    def test_survival_monotone_from_one(self, family, shape, rate):
        t = np.linspace(0.0, 40.0, 200)
        s = margins.survival(family, shape, rate, t)
        assert s[0] == 1.0
        above_underflow = s > 1e-300  # strict decrease holds on the support
        assert np.all(np.diff(s[above_underflow]) < 0)
        assert np.all((s >= 0) & (s <= 1))

    @pytest.mark.parametrize("family,shape,rate", ALL_CASES)
    def test_inverse_round_trip(self, family, shape, rate):
        u = np.concatenate([[1e-6], np.linspace(0.01, 0.99, 25), [1 - 1e-6]])
        if family is GOM and shape < 0:
            u = u[u > np.exp(rate / shape)]
        t = margins.inverse_survival(family, shape, rate, u)
        np.testing.assert_allclose(
            margins.survival(family, shape, rate, t), u, rtol=1e-10)

    @pytest.mark.parametrize("family,shape,rate", ALL_CASES)
    def test_density_matches_numeric_survival_slope(self, family, shape, rate):
        t = np.array([0.5, 2.0, 8.0])
        h = 1e-6 * np.maximum(t, 1.0)
        slope = (margins.survival(family, shape, rate, t - h)
                 - margins.survival(family, shape, rate, t + h)) / (2.0 * h)
        np.testing.assert_allclose(
            margins.density(family, shape, rate, t), slope, rtol=1e-6)

    def test_gompertz_small_shape_matches_exponential(self):
        t = np.linspace(0.0, 30.0, 100)
        for gam in (1e-12, -1e-12, 0.0):
            np.testing.assert_allclose(
                margins.survival(GOM, gam, 0.2, t),
                margins.survival(EXP, None, 0.2, t), rtol=1e-8)
            np.testing.assert_allclose(
                margins.density(GOM, gam, 0.2, t),
                margins.density(EXP, None, 0.2, t), rtol=1e-8)

    def test_gompertz_series_continuous_at_switchover(self):
        t = np.linspace(0.1, 30.0, 50)
        np.testing.assert_allclose(
            margins.survival(GOM, 0.99e-8, 0.2, t),
            margins.survival(GOM, 1.01e-8, 0.2, t), rtol=1e-7)

    @pytest.mark.parametrize("family,shape", [(WEI, 0.7), (WEI, 2.0),
                                              (GOM, 0.05), (EXP, None)])
    def test_hazard_ratio_constant_in_time(self, family, shape):
        coeffs = np.array([-3.3, 0.4])
        t = np.linspace(0.1, 25.0, 60)
        r0 = margins.rate_param(family, coeffs, [0.0])
        r1 = margins.rate_param(family, coeffs, [1.0])
        ratio = (margins.hazard(family, shape, r1, t)
                 / margins.hazard(family, shape, r0, t))
        np.testing.assert_allclose(ratio, np.exp(0.4), rtol=1e-12)

    @given(
        rate=st.floats(0.01, 2.0),
        shape=st.floats(0.2, 2.0),
        t=st.floats(0.0, 10.0),
    )
    @settings(max_examples=200, deadline=None)
    def test_weibull_bounds_hypothesis(self, rate, shape, t):
        s = margins.survival(WEI, shape, rate, t)
        f = margins.density(WEI, shape, rate, t)
        assert 0.0 < s <= 1.0
        assert f >= 0.0


class TestHazardRatio:
    def test_null_effect(self):
        est = margins.hazard_ratio(0.0, 0.01)
        assert est.hr == 1.0
        assert est.variance == pytest.approx(0.01)

    def test_published_donor_anchor(self):
        # fitted donor coefficient -0.58 corresponds to HR 0.560
        assert round(margins.hazard_ratio(-0.58, 0.0).hr, 3) == 0.560

    def test_exp_of_age_coefficient(self):
        assert margins.hazard_ratio(1.32, 0.0).hr == pytest.approx(
            np.exp(1.32))

    def test_interval_formula(self):
        est = margins.hazard_ratio(0.5, 0.04)
        var_hr = np.exp(1.0) * 0.04
        assert est.variance == pytest.approx(var_hr)
        assert est.ci_low == pytest.approx(est.hr - 1.959964 * np.sqrt(var_hr))
        assert est.ci_high == pytest.approx(est.hr + 1.959964 * np.sqrt(var_hr))
        assert est.ci_low <= est.hr <= est.ci_high

    def test_rejects_negative_variance(self):
        with pytest.raises(ValueError):
            margins.hazard_ratio(0.1, -1e-3)
