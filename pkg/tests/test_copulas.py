import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import kendalltau, kstest

from copulasurv import copulas as cp
from copulasurv.copulas import CopulaFamily

NORMAL = CopulaFamily.NORMAL
CLAYTON = CopulaFamily.CLAYTON
FRANK = CopulaFamily.FRANK
GUMBEL = CopulaFamily.GUMBEL

# representative (family, theta) pairs spanning weak to strong dependence
FAMILY_THETAS = [
    (NORMAL, -0.7), (NORMAL, 0.2), (NORMAL, 0.85),
    (CLAYTON, 0.3), (CLAYTON, 2.0), (CLAYTON, 8.0),
    (FRANK, -6.0), (FRANK, 0.5), (FRANK, 12.0),
    (GUMBEL, 1.1), (GUMBEL, 2.0), (GUMBEL, 5.0),
]

# where double-precision finite differences of C are a trustworthy
# oracle; stronger dependence is checked against mpmath derivatives
FD_THETAS = [(f, t) for f, t in FAMILY_THETAS if (f, t) != (CLAYTON, 8.0)]

GRID = np.linspace(0.05, 0.95, 20)


def fd_mixed_partial(family, theta, u, v, h=1e-4):
    c = cp.cdf
    return (c(family, theta, u + h, v + h) - c(family, theta, u + h, v - h)
            - c(family, theta, u - h, v + h)
            + c(family, theta, u - h, v - h)) / (4.0 * h * h)


def fd_partial_u(family, theta, u, v, h=1e-5):
    return (cp.cdf(family, theta, u + h, v)
            - cp.cdf(family, theta, u - h, v)) / (2.0 * h)


class TestLinks:
    def test_normal_zero(self):
        assert cp.link_theta(NORMAL, np.zeros(4), np.zeros(3)) == 0.0

    def test_clayton_intercept(self):
        theta = cp.link_theta(CLAYTON, [0.39, 1.09, 0.14, 0.53], [0, 0, 0])
        assert theta == pytest.approx(np.exp(0.39))

    def test_gumbel_sum(self):
        theta = cp.link_theta(GUMBEL, [-2.30, 1.35, 0.0, 0.0], [1, 0, 0])
        assert theta == pytest.approx(np.exp(-0.95) + 1.0)

    def test_frank_identity(self):
        assert cp.link_theta(FRANK, [3.06, 5.07], [1.0]) == pytest.approx(8.13)

    def test_normal_tanh_shape(self):
        theta = cp.link_theta(NORMAL, [0.35, 0.28], [1.0])
        assert theta == pytest.approx(np.tanh(0.63))

    def test_ranges(self):
        w = np.array([[0.0], [1.0]])
        for b0 in (-40.0, -2.0, 0.0, 2.0, 40.0):
            b = [b0, 1.0]
            assert np.all(np.abs(cp.link_theta(NORMAL, b, w)) < 1.0)
            assert np.all(cp.link_theta(CLAYTON, b, w) > 0.0)
            assert np.all(cp.link_theta(GUMBEL, b, w) >= 1.0)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            cp.link_theta(NORMAL, [0.0, 1.0], [1.0, 0.0])


class TestThetaValidation:
    def test_out_of_range_rejected(self):
        with pytest.raises(ValueError):
            cp.cdf(NORMAL, 1.5, 0.5, 0.5)
        with pytest.raises(ValueError):
            cp.cdf(CLAYTON, -0.2, 0.5, 0.5)
        with pytest.raises(ValueError):
            cp.density(GUMBEL, 0.9, 0.5, 0.5)
        with pytest.raises(ValueError):
            cp.partial_u(FRANK, np.inf, 0.5, 0.5)


class TestCdf:
    def test_gumbel_independence_member(self):
        assert cp.cdf(GUMBEL, 1.0, 0.3, 0.7) == pytest.approx(0.21)

    def test_clayton_closed_form(self):
        # (u^-t + v^-t - 1)^(-1/t) at u=v=0.5, t=2: 7^(-1/2)
        assert cp.cdf(CLAYTON, 2.0, 0.5, 0.5) == pytest.approx(7.0 ** -0.5)

    def test_normal_zero_correlation(self):
        assert cp.cdf(NORMAL, 0.0, 0.3, 0.7) == pytest.approx(0.21)

    @pytest.mark.parametrize("family,theta", FAMILY_THETAS)
    def test_frechet_bounds(self, family, theta):
        u, v = np.meshgrid(GRID, GRID)
        c = cp.cdf(family, theta, u, v)
        lower = np.maximum(u + v - 1.0, 0.0)
        upper = np.minimum(u, v)
        assert np.all(c >= lower - 1e-12)
        assert np.all(c <= upper + 1e-12)

    @pytest.mark.parametrize("family,theta", FAMILY_THETAS)
    def test_uniform_margins_in_the_limit(self, family, theta):
        u = np.linspace(0.05, 0.95, 10)
        np.testing.assert_allclose(
            cp.cdf(family, theta, u, 1.0 - 1e-12), u, atol=1e-9)
        np.testing.assert_allclose(
            cp.cdf(family, theta, 1.0 - 1e-12, u), u, atol=1e-9)

    @pytest.mark.parametrize("family,theta", FAMILY_THETAS)
    def test_two_increasing(self, family, theta):
        rng = np.random.default_rng(42)
        u1 = rng.uniform(0.02, 0.9, 200)
        v1 = rng.uniform(0.02, 0.9, 200)
        u2 = u1 + rng.uniform(0.01, 0.09, 200)
        v2 = v1 + rng.uniform(0.01, 0.09, 200)
        mass = (cp.cdf(family, theta, u2, v2) - cp.cdf(family, theta, u1, v2)
                - cp.cdf(family, theta, u2, v1)
                + cp.cdf(family, theta, u1, v1))
        assert np.all(mass >= -1e-12)

    def test_extreme_arguments_clamped(self):
        for family, theta in FAMILY_THETAS:
            out = cp.cdf(family, theta, np.array([0.0, 1.0]),
                         np.array([0.5, 0.5]))
            assert np.all(np.isfinite(out))


class TestDensity:
    def test_independence_is_flat(self):
        u, v = np.meshgrid(GRID, GRID)
        np.testing.assert_allclose(cp.density(FRANK, 0.0, u, v), 1.0,
                                   atol=1e-12)

    @pytest.mark.parametrize("family,theta", FD_THETAS)
    def test_matches_numeric_mixed_partial(self, family, theta):
        for u in (0.15, 0.4, 0.6, 0.85):
            for v in (0.2, 0.5, 0.8):
                want = fd_mixed_partial(family, theta, u, v)
                assert cp.density(family, theta, u, v) == pytest.approx(
                    want, rel=1e-5)

    def test_strong_dependence_against_mpmath(self):
        # double-precision FD is ill-conditioned here; differentiate the
        # closed-form CDFs in high precision instead
        mp = pytest.importorskip("mpmath")
        mp.mp.dps = 40

        def clayton_cdf(th):
            return lambda a, b: (a**-th + b**-th - 1) ** (-1 / th)

        def gumbel_cdf(th):
            return lambda a, b: mp.exp(
                -((-mp.log(a)) ** th + (-mp.log(b)) ** th) ** (1 / th))

        def frank_cdf(th):
            return lambda a, b: -mp.log(
                1 + mp.expm1(-th * a) * mp.expm1(-th * b)
                / mp.expm1(-th)) / th

        cases = [(CLAYTON, 8.0, clayton_cdf(mp.mpf(8))),
                 (GUMBEL, 5.0, gumbel_cdf(mp.mpf(5))),
                 (FRANK, 12.0, frank_cdf(mp.mpf(12)))]
        for family, theta, cdf_mp in cases:
            for u in (0.15, 0.5, 0.85):
                for v in (0.2, 0.8):
                    want = float(mp.diff(cdf_mp, (mp.mpf(u), mp.mpf(v)),
                                         (1, 1)))
                    assert cp.density(family, theta, u, v) == pytest.approx(
                        want, rel=1e-10)
                    want_p = float(mp.diff(cdf_mp, (mp.mpf(u), mp.mpf(v)),
                                           (1, 0)))
                    assert cp.partial_u(family, theta, u, v) == pytest.approx(
                        want_p, rel=1e-10)

    @pytest.mark.parametrize("family,theta", FAMILY_THETAS)
    def test_integrates_to_one(self, family, theta):
        # midpoint rule on a fine grid; the corners carry little mass
        # for these moderate thetas
        k = 400
        g = (np.arange(k) + 0.5) / k
        u, v = np.meshgrid(g, g)
        total = np.sum(cp.density(family, theta, u, v)) / k**2
        assert total == pytest.approx(1.0, abs=0.02)

    def test_clayton_reference_point(self):
        want = fd_mixed_partial(CLAYTON, 2.0, 0.5, 0.5)
        assert cp.density(CLAYTON, 2.0, 0.5, 0.5) == pytest.approx(
            want, rel=1e-6)

    def test_normal_reference_point(self):
        want = fd_mixed_partial(NORMAL, 0.5, 0.5, 0.5)
        assert cp.density(NORMAL, 0.5, 0.5, 0.5) == pytest.approx(
            want, rel=1e-6)


class TestPartials:
    def test_independence_member(self):
        u, v = np.meshgrid(GRID, GRID)
        np.testing.assert_allclose(cp.partial_u(GUMBEL, 1.0, u, v), v,
                                   atol=1e-12)

    def test_clayton_closed_form(self):
        assert cp.partial_u(CLAYTON, 1.0, 0.5, 0.5) == pytest.approx(4.0 / 9.0)

    @pytest.mark.parametrize("family,theta", FD_THETAS)
    def test_matches_finite_difference(self, family, theta):
        for u in (0.15, 0.5, 0.85):
            for v in (0.25, 0.5, 0.75):
                want = fd_partial_u(family, theta, u, v)
                assert cp.partial_u(family, theta, u, v) == pytest.approx(
                    want, rel=1e-5)
                want_v = fd_partial_u(family, theta, v, u)
                assert cp.partial_v(family, theta, u, v) == pytest.approx(
                    want_v, rel=1e-5)

    @pytest.mark.parametrize("family,theta", FAMILY_THETAS)
    def test_in_unit_interval_and_monotone(self, family, theta):
        v = np.linspace(0.01, 0.99, 60)
        for u in (0.2, 0.5, 0.8):
            h = cp.partial_u(family, theta, u, v)
            assert np.all((h >= 0.0) & (h <= 1.0))
            assert np.all(np.diff(h) > -1e-12)


class TestConditionalInverse:
    def test_independence_member(self):
        q = np.linspace(0.05, 0.95, 10)
        np.testing.assert_allclose(
            cp.conditional_inverse(FRANK, 0.0, 0.4, q), q, atol=1e-12)

    @pytest.mark.parametrize("family,theta", FAMILY_THETAS)
    def test_round_trip(self, family, theta):
        for u in (0.1, 0.5, 0.9):
            for v in (0.05, 0.3, 0.7, 0.95):
                q = cp.partial_u(family, theta, u, v)
                if not 1e-6 < q < 1.0 - 1e-6:
                    # q this degenerate cannot encode v to 1e-8 in a double
                    continue
                back = cp.conditional_inverse(family, theta, u, q)
                assert back == pytest.approx(v, abs=1e-8)

    @pytest.mark.parametrize("family,theta", FAMILY_THETAS)
    def test_residual(self, family, theta):
        for u in (0.08, 0.42, 0.93):
            for q in (0.03, 0.5, 0.97):
                v = cp.conditional_inverse(family, theta, u, q)
                assert cp.partial_u(family, theta, u, v) == pytest.approx(
                    q, abs=1e-9)

    def test_clayton_substitution(self):
        theta, u, q = 2.0, 0.5, 0.5
        v = cp.conditional_inverse(CLAYTON, theta, u, q)
        lhs = ((u**-theta + v**-theta - 1.0) / u**-theta) ** (
            -(theta + 1.0) / theta)
        assert lhs == pytest.approx(q, abs=1e-12)


class TestLimits:
    def test_independence_limits(self):
        u = np.linspace(0.05, 0.95, 15)
        v = u[::-1]
        for family, theta in [(FRANK, 1e-10), (CLAYTON, 1e-10),
                              (GUMBEL, 1.0), (NORMAL, 0.0)]:
            np.testing.assert_allclose(cp.cdf(family, theta, u, v), u * v,
                                       atol=1e-8)

    def test_clayton_exp_link_underflow_is_exact_independence(self):
        theta = cp.link_theta(CLAYTON, [-60.0], np.empty((0,)))
        u, v = 0.37, 0.82
        assert cp.cdf(CLAYTON, theta, u, v) == pytest.approx(u * v, abs=1e-15)


class TestSampling:
    def test_clayton_kendall_tau(self):
        rng = np.random.default_rng(7)
        n, theta = 4000, 2.0
        u = rng.random(n)
        v = cp.conditional_inverse(CLAYTON, theta, u, rng.random(n))
        tau = kendalltau(u, v).statistic
        assert tau == pytest.approx(theta / (theta + 2.0), abs=0.04)

    def test_marginal_uniformity(self):
        rng = np.random.default_rng(8)
        u = rng.random(3000)
        v = cp.conditional_inverse(GUMBEL, 2.0, u, rng.random(3000))
        assert kstest(v, "uniform").pvalue > 0.01


class TestHypothesisProperties:
    @given(
        theta=st.floats(1.05, 8.0),
        u=st.floats(0.02, 0.98),
        v=st.floats(0.02, 0.98),
    )
    @settings(max_examples=150, deadline=None)
    def test_gumbel_partial_in_unit_interval(self, theta, u, v):
        h = cp.partial_u(GUMBEL, theta, u, v)
        assert 0.0 <= h <= 1.0

    @given(
        theta=st.floats(-15.0, 15.0),
        u=st.floats(0.02, 0.98),
        q=st.floats(0.02, 0.98),
    )
    @settings(max_examples=150, deadline=None)
    def test_frank_inverse_round_trip(self, theta, u, q):
        v = cp.conditional_inverse(FRANK, theta, u, q)
        assert cp.partial_u(FRANK, theta, u, v) == pytest.approx(q, abs=1e-8)
