"""Tests for the model catalog, closed forms, classifier and supersolutions."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from bubblepde.core import (
    Call,
    CappedCall,
    Constant,
    Identity,
    MarketSpec,
    PiecewiseLinear,
    Power,
    PowerLog,
    Put,
    SupersolutionParams,
    Tabulated,
    alpha_eval,
    classify_martingale,
    closed_form_density_x2,
    closed_form_gamma_x2,
    closed_form_price_x2,
    default_supersolution_params,
    normal_cdf,
    normal_pdf,
    payoff_eval,
    payoff_flags,
    supersolution_h,
    verify_supersolution,
)

# frozen reference values, computed independently:
#   PRICE_111   = 2*Phi(1) - 1 = erf(1/sqrt(2))
#   PRICE_1Q1   = 1 - 2*Phi(-2)
#   GAMMA_111   = -2*phi(1)
#   DENS_1111   = (1 - exp(-2)) / sqrt(2*pi)
#   LARGE_LIMIT = sqrt(2/pi)
PRICE_111 = 0.6826894921370859
PRICE_1Q1 = 0.9544997361036416
GAMMA_111 = -0.4839414490382867
DENS_1111 = 0.3449513138882446
LARGE_LIMIT = 0.7978845608028654
DEFECT_111 = 0.3173105078629141  # 2*Phi(-1)


class TestNormalHelpers:
    def test_cdf_reference_points(self):
        # values from a 30-digit erfc evaluation
        refs = {
            0.0: 0.5,
            1.0: 0.841344746068542948585232545632,
            -1.0: 0.158655253931457051414767454368,
            2.0: 0.977249868051820792799024387952,
            -8.0: 6.22096057427178412351599517362e-16,
            5.5: 0.999999981010437859610621783577,
        }
        for x, ref in refs.items():
            assert abs(normal_cdf(x) - ref) < 1e-12

    def test_pdf_matches_formula(self):
        for x in (-3.0, -0.5, 0.0, 1.0, 4.2):
            assert abs(normal_pdf(x) - math.exp(-x * x / 2) / math.sqrt(2 * math.pi)) < 1e-15

    def test_vectorized(self):
        xs = np.array([-1.0, 0.0, 2.0])
        assert np.allclose(normal_cdf(xs), [normal_cdf(x) for x in xs])


class TestVolModels:
    def test_power_examples(self):
        assert alpha_eval(Power(sigma=1, p=2), 2.0) == 4.0
        assert alpha_eval(Power(sigma=0.2, p=1), 100.0) == pytest.approx(20.0)
        assert alpha_eval(Power(sigma=3, p=1.5), 0.0) == 0.0

    def test_powerlog(self):
        assert alpha_eval(PowerLog(sigma=2.0), 1.0) == pytest.approx(
            2.0 * math.sqrt(math.log(math.e + 1.0))
        )
        assert alpha_eval(PowerLog(sigma=1.0), 0.0) == 0.0

    def test_tabulated_interpolation(self):
        model = Tabulated(knots=((1.0, 1.0), (3.0, 9.0)), extrapolation_exponent=2.0)
        assert alpha_eval(model, 2.0) == pytest.approx(5.0)  # midpoint of 1 and 9
        assert alpha_eval(model, 0.5) == pytest.approx(0.5)  # linear from (0, 0)
        assert alpha_eval(model, 6.0) == pytest.approx(9.0 * 4.0)  # 9*(6/3)^2
        assert alpha_eval(model, 0.0) == 0.0

    def test_validation(self):
        with pytest.raises(ValueError):
            Power(sigma=0.0, p=2)
        with pytest.raises(ValueError):
            Power(sigma=1.0, p=0.5)
        with pytest.raises(ValueError):
            PowerLog(sigma=-1.0)
        with pytest.raises(ValueError):
            Tabulated(knots=((2.0, 1.0), (1.0, 1.0)))
        with pytest.raises(ValueError):
            Tabulated(knots=((1.0, 0.0),))
        with pytest.raises(ValueError):
            alpha_eval(Power(1, 2), -0.5)

    def test_array_input(self):
        xs = np.array([0.0, 1.0, 2.0])
        np.testing.assert_allclose(alpha_eval(Power(1, 2), xs), [0.0, 1.0, 4.0])


class TestPayoffs:
    def test_eval_examples(self):
        assert payoff_eval(Call(strike=1.0), 1.5) == pytest.approx(0.5)
        assert payoff_eval(CappedCall(strike=1.0, cap=2.0), 10.0) == 2.0
        assert payoff_eval(Identity(), 0.0) == 0.0
        assert payoff_eval(Put(strike=1.0), 0.25) == pytest.approx(0.75)
        assert payoff_eval(Constant(3.0), 7.0) == 3.0

    def test_piecewise_linear_eval(self):
        g = PiecewiseLinear(knots=((0.0, 1.0), (2.0, 0.0)), terminal_slope=0.5)
        assert payoff_eval(g, 1.0) == pytest.approx(0.5)
        assert payoff_eval(g, 4.0) == pytest.approx(1.0)  # 0 + 0.5*(4-2)

    def test_flags(self):
        assert payoff_flags(Identity()) == pytest.approx(
            payoff_flags(Identity())
        )  # deterministic
        f = payoff_flags(Identity())
        assert (f.is_convex, f.is_concave, f.is_bounded, f.is_strictly_sublinear) == (
            True,
            True,
            False,
            False,
        )
        f = payoff_flags(CappedCall(1.0, 2.0))
        assert (f.is_convex, f.is_concave, f.is_bounded, f.is_strictly_sublinear) == (
            False,
            False,
            True,
            True,
        )
        f = payoff_flags(Put(1.0))
        assert (f.is_convex, f.is_concave, f.is_bounded, f.is_strictly_sublinear) == (
            True,
            False,
            True,
            True,
        )
        assert payoff_flags(Call(0.0)).is_concave  # strike 0 is the identity
        assert not payoff_flags(Call(1.0)).is_concave
        assert payoff_flags(Constant(2.0)) == payoff_flags(Constant(5.0))

    def test_piecewise_flags(self):
        concave = PiecewiseLinear(knots=((0.0, 0.0), (1.0, 1.0)), terminal_slope=0.0)
        f = payoff_flags(concave)
        assert f.is_concave and not f.is_convex and f.is_bounded and f.is_strictly_sublinear
        convex = PiecewiseLinear(knots=((0.0, 1.0), (1.0, 0.5)), terminal_slope=1.0)
        f = payoff_flags(convex)
        assert f.is_convex and not f.is_concave and not f.is_bounded

    def test_validation(self):
        with pytest.raises(ValueError):
            Put(strike=0.0)
        with pytest.raises(ValueError):
            Call(strike=-1.0)
        with pytest.raises(ValueError):
            CappedCall(strike=1.0, cap=0.0)
        with pytest.raises(ValueError):
            Constant(-0.1)
        with pytest.raises(ValueError):
            PiecewiseLinear(knots=((1.0, 1.0),))  # first knot must sit at 0
        with pytest.raises(ValueError):
            PiecewiseLinear(knots=((0.0, 1.0), (1.0, -0.5)))
        with pytest.raises(ValueError):
            payoff_eval(Identity(), -1.0)

    def test_market_spec_validation(self):
        MarketSpec(vol=Power(1, 2), rate=0.0, horizon=1.0)
        with pytest.raises(ValueError):
            MarketSpec(vol=Power(1, 2), rate=-0.1, horizon=1.0)
        with pytest.raises(ValueError):
            MarketSpec(vol=Power(1, 2), rate=0.0, horizon=0.0)


class TestClosedFormPrice:
    def test_reference_values(self):
        assert closed_form_price_x2(1.0, 1.0, 1.0) == pytest.approx(PRICE_111, abs=1e-12)
        assert closed_form_price_x2(1.0, 0.25, 1.0) == pytest.approx(PRICE_1Q1, abs=1e-12)
        assert closed_form_price_x2(5.0, 0.0, 1.0) == 5.0
        assert closed_form_price_x2(0.0, 1.0, 1.0) == 0.0

    def test_large_x_limit(self):
        assert abs(closed_form_price_x2(1.0e4, 1.0, 1.0) - LARGE_LIMIT) < 1e-3

    def test_below_x(self):
        xs = np.geomspace(0.01, 100.0, 50)
        us = closed_form_price_x2(xs, 0.5, 1.0)
        assert np.all(us <= xs)
        assert np.all(us >= 0.0)
        # the defect is representable in doubles once 1/(x sigma sqrt(tau)) < 8
        visible = 1.0 / (xs * math.sqrt(0.5)) < 8.0
        assert np.all(us[visible] < xs[visible])

    def test_increasing_in_x(self):
        xs = np.linspace(0.01, 20.0, 400)
        us = closed_form_price_x2(xs, 1.0, 1.0)
        assert np.all(np.diff(us) >= -1e-10)

    def test_decreasing_in_sigma(self):
        sigmas = [0.25, 0.5, 1.0, 2.0, 4.0]
        vals = [closed_form_price_x2(1.0, 1.0, s) for s in sigmas]
        assert all(b < a for a, b in zip(vals, vals[1:]))

    def test_second_difference_matches_gamma(self):
        # Richardson: the h -> h/2 second differences converge at 2nd order
        x, tau, sigma = 1.0, 1.0, 1.0
        gam = closed_form_gamma_x2(x, tau, sigma)

        def second_diff(h):
            u = closed_form_price_x2
            return (u(x + h, tau, sigma) - 2 * u(x, tau, sigma) + u(x - h, tau, sigma)) / h**2

        err1 = abs(second_diff(1e-2) - gam)
        err2 = abs(second_diff(5e-3) - gam)
        assert err1 < 1e-4
        assert err2 < err1 / 3.0

    @given(
        x=st.floats(0.01, 50.0),
        tau=st.floats(0.01, 5.0),
        sigma=st.floats(0.1, 5.0),
    )
    @settings(max_examples=200)
    def test_price_strictly_below_x_property(self, x, tau, sigma):
        u = closed_form_price_x2(x, tau, sigma)
        assert 0.0 < u <= x
        if 1.0 / (x * sigma * math.sqrt(tau)) < 8.0:
            assert u < x


class TestClosedFormDensity:
    def test_reference_value(self):
        assert closed_form_density_x2(1.0, 1.0, 1.0, 1.0) == pytest.approx(DENS_1111, abs=1e-12)

    def test_integrates_to_one(self):
        total, _ = quad(lambda y: closed_form_density_x2(1.0, 1.0, 1.0, y), 0, np.inf, limit=200)
        assert abs(total - 1.0) < 1e-8

    def test_mean_reproduces_price(self):
        mean, _ = quad(
            lambda y: y * closed_form_density_x2(1.0, 1.0, 1.0, y), 0, np.inf, limit=200
        )
        assert abs(mean - PRICE_111) < 1e-8

    def test_nonnegative_and_vanishing_tails(self):
        ys = np.geomspace(1e-3, 1e3, 200)
        dens = closed_form_density_x2(1.0, 1.0, 1.0, ys)
        assert np.all(dens >= 0.0)
        assert closed_form_density_x2(1.0, 1.0, 1.0, 1e-6) < 1e-30
        assert closed_form_density_x2(1.0, 1.0, 1.0, 1e6) < 1e-12

    def test_domain_errors(self):
        with pytest.raises(ValueError):
            closed_form_density_x2(0.0, 1.0, 1.0, 1.0)
        with pytest.raises(ValueError):
            closed_form_density_x2(1.0, 1.0, 1.0, 0.0)


class TestClosedFormGamma:
    def test_reference_value(self):
        assert closed_form_gamma_x2(1.0, 1.0, 1.0) == pytest.approx(GAMMA_111, abs=1e-12)

    def test_always_negative(self):
        # probes chosen so the Gaussian factor stays above the underflow floor
        for x in (0.2, 0.5, 1.0, 5.0, 50.0):
            for tau in (0.1, 0.5, 2.0):
                assert closed_form_gamma_x2(x, tau, 1.0) < 0.0

    def test_vanishes_at_origin(self):
        assert closed_form_gamma_x2(1e-4, 1.0, 1.0) == 0.0
        assert abs(closed_form_gamma_x2(0.05, 1.0, 1.0)) < 1e-50


class TestClassifier:
    def test_bubble_model(self):
        v = classify_martingale(Power(sigma=1, p=2))
        assert v.verdict == "strict-local-martingale"
        assert v.evidence.fitted_eta == pytest.approx(4.0, abs=1e-6)
        assert v.evidence.probe_range == (1.0, 1.0e4)

    def test_linear_growth_model(self):
        v = classify_martingale(Power(sigma=0.2, p=1))
        assert v.verdict == "true-martingale"
        assert v.evidence.fitted_eta == pytest.approx(2.0, abs=1e-6)

    def test_log_corrected_model_is_inconclusive(self):
        v = classify_martingale(PowerLog(sigma=1.0))
        assert v.verdict == "inconclusive"

    def test_sigma_invariance(self):
        for p, expected in ((2.0, "strict-local-martingale"), (1.0, "true-martingale")):
            verdicts = {classify_martingale(Power(s, p)).verdict for s in (1e-6, 0.1, 1.0, 250.0)}
            assert verdicts == {expected}

    @given(sigma=st.floats(1e-6, 1e3))
    @settings(max_examples=50)
    def test_sigma_invariance_property(self, sigma):
        assert classify_martingale(Power(sigma, 2.0)).verdict == "strict-local-martingale"

    def test_tabulated_linear_growth(self):
        model = Tabulated(
            knots=tuple((x, 0.2 * x) for x in (1.0, 2.0, 5.0, 10.0, 50.0)),
            extrapolation_exponent=1.0,
        )
        assert classify_martingale(model).verdict == "true-martingale"

    def test_probe_validation(self):
        with pytest.raises(ValueError):
            classify_martingale(Power(1, 2), probe=(10.0, 5.0, 64))
        with pytest.raises(ValueError):
            classify_martingale(Power(1, 2), probe=(1.0, 100.0, 8))
        with pytest.raises(ValueError):
            classify_martingale(Power(1, 2), probe=(0.5, 100.0, 64))


class TestSupersolution:
    def test_h_trivial_values(self):
        params = SupersolutionParams(beta=0.5, m=2.0, M=5.0)
        assert supersolution_h(3.7, 0.0, params) == pytest.approx(3.7)
        assert supersolution_h(0.0, 0.8, params) == 0.0
        x, tau = 2.0, 0.5
        assert supersolution_h(x, tau, params) < math.exp(params.M * tau) * x

    def test_param_validation(self):
        with pytest.raises(ValueError):
            SupersolutionParams(beta=1.5, m=2.0, M=1.0)
        with pytest.raises(ValueError):
            SupersolutionParams(beta=0.5, m=-1.0, M=1.0)

    def test_default_recipe_certifies_bubble(self):
        params = default_supersolution_params(Power(1, 2), horizon=1.0, beta=0.5)
        assert params.m == pytest.approx(2.0)  # 1 + beta/(eta' - 2) + 1/2 at eta = 4
        report = verify_supersolution(
            Power(1, 2), params, x_range=(0.0, 100.0), tau_range=(0.0, 1.0), counts=(801, 161)
        )
        assert report.certified
        assert report.min_residual >= 0.0

    def test_beta_one_allowed_for_fast_growth(self):
        params = default_supersolution_params(Power(1, 2), horizon=1.0, beta=1.0)
        report = verify_supersolution(
            Power(1, 2), params, x_range=(0.0, 100.0), tau_range=(0.0, 1.0), counts=(801, 161)
        )
        assert report.certified

    def test_linear_growth_cannot_be_certified(self):
        params = default_supersolution_params(Power(0.2, 1), horizon=1.0)
        report = verify_supersolution(
            Power(0.2, 1), params, x_range=(0.0, 100.0), tau_range=(0.0, 1.0), counts=(401, 101)
        )
        assert not report.certified
        assert report.min_residual < 0.0
        # failures live at large x, where the quadratic terms overwhelm alpha^2
        assert max(pt[0] for pt in report.failing_points) > 50.0

    def test_arbitrary_params_fail_for_linear_growth(self):
        params = SupersolutionParams(beta=0.5, m=2.0, M=50.0)
        report = verify_supersolution(
            Power(0.2, 1), params, x_range=(0.0, 500.0), tau_range=(0.0, 1.0), counts=(501, 51)
        )
        assert not report.certified

    def test_grid_validation(self):
        params = SupersolutionParams(beta=0.5, m=2.0, M=5.0)
        with pytest.raises(ValueError):
            verify_supersolution(Power(1, 2), params, x_range=(10.0, 1.0))
