"""Diagnostics tests: shape verdicts, vol ordering, majorants, parity, asymptote."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bubblepde.core import (
    Call,
    CappedCall,
    Constant,
    Identity,
    MarketSpec,
    PiecewiseLinear,
    Power,
    Put,
    closed_form_price_x2,
    payoff_eval,
)
from bubblepde.pde import Grid1D, PriceSurface, SolveConfig, solve_capped, solve_minimal
from bubblepde.analysis import (
    MajorantCurve,
    asymptote_check_x2,
    concave_majorant,
    convexity_profile,
    parity_gap,
    sublinear_bound_check,
    vol_monotonicity,
)

DEFECT_111 = 0.3173105078629141  # 2 Phi(-1)
LARGE_X_LIMIT = 0.7978845608028654  # sqrt(2/pi)

BUBBLE = MarketSpec(vol=Power(sigma=1.0, p=2.0), rate=0.0, horizon=1.0)
GBM = MarketSpec(vol=Power(sigma=0.2, p=1.0), rate=0.0, horizon=1.0)


def closed_form_surface(x_max=20.0, nx=801, nt=101, sigma=1.0, horizon=1.0):
    grid = Grid1D(x_max=x_max, nx=nx, nt=nt)
    nodes, times = grid.nodes(), grid.times(horizon)
    values = np.empty((nx, nt))
    for j, t in enumerate(times):
        values[:, j] = closed_form_price_x2(nodes, horizon - t, sigma)
    return PriceSurface(grid=grid, nodes=nodes, times=times, values=values, metadata={})


@pytest.fixture(scope="module")
def bubble_surface():
    return closed_form_surface()


@pytest.fixture(scope="module")
def gbm_call_surface():
    grid = Grid1D(x_max=400.0, nx=401, nt=201)
    return solve_capped(GBM, Call(strike=100.0), cap_M=1e9, grid=grid)


class TestConvexityProfile:
    def test_bubble_surface_concave_everywhere(self, bubble_surface):
        for j in range(len(bubble_surface.times) - 1):
            assert convexity_profile(bubble_surface, j).verdict == "concave"

    def test_terminal_slice_linear(self, bubble_surface):
        assert convexity_profile(bubble_surface, -1).verdict == "linear"

    def test_gbm_call_convex(self, gbm_call_surface):
        # curvature ~0.02 sits far below the scale-aware default tolerance
        # (max|u| ~ 300 here), so the verdict needs an explicit one
        for j in range(0, 201, 20):
            verdict = convexity_profile(gbm_call_surface, j, tol=1e-6)
            assert verdict.verdict == "convex"
            assert verdict.worst_violation <= 1e-9

    def test_constant_surface_linear(self):
        surf = solve_capped(
            GBM, Constant(value=3.0), cap_M=None, grid=Grid1D(x_max=8.0, nx=64, nt=64)
        )
        assert convexity_profile(surf, 0).verdict == "linear"

    def test_bubble_call_not_convex(self):
        # headline anomaly: convex payoff, non-convex price
        surface, _ = solve_minimal(BUBBLE, Call(strike=1.0))
        assert convexity_profile(surface, 0).verdict in ("mixed", "concave")

    def test_verdict_fields(self, bubble_surface):
        verdict = convexity_profile(bubble_surface, 0)
        assert 2 <= verdict.location <= len(bubble_surface.nodes) - 3
        assert verdict.tolerance > 0.0
        assert verdict.worst_violation <= verdict.tolerance
        explicit = convexity_profile(bubble_surface, 0, tol=0.5)
        assert explicit.tolerance == 0.5

    def test_too_few_nodes(self):
        grid = Grid1D(x_max=8.0, nx=16, nt=16)
        surf = PriceSurface(
            grid=grid, nodes=np.arange(4.0), times=np.zeros(1),
            values=np.zeros((4, 1)), metadata={},
        )
        with pytest.raises(ValueError):
            convexity_profile(surf, 0)


class TestVolMonotonicity:
    def test_concave_payoff_decreasing_in_vol(self):
        report = vol_monotonicity(
            Power(sigma=0.5, p=2.0), Power(sigma=1.0, p=2.0), Identity()
        )
        assert report.direction == "decreasing-in-vol"
        assert report.min_gap >= -1e-9
        assert report.holds

    def test_bounded_convex_payoff_increasing_in_vol(self):
        report = vol_monotonicity(
            Power(sigma=0.1, p=1.0), Power(sigma=0.3, p=1.0), Put(strike=1.0)
        )
        assert report.direction == "increasing-in-vol"
        assert report.min_gap >= -1e-9
        assert report.holds

    def test_identical_models_gap_zero(self):
        report = vol_monotonicity(
            Power(sigma=1.0, p=2.0), Power(sigma=1.0, p=2.0), Identity()
        )
        assert report.min_gap == 0.0

    def test_ordering_violation_raises(self):
        with pytest.raises(ValueError, match="ordering"):
            vol_monotonicity(Power(sigma=1.0, p=2.0), Power(sigma=0.5, p=2.0), Identity())

    def test_crossing_alphas_raise(self):
        # sigma x^2 vs sigma x cross at x = 1
        with pytest.raises(ValueError, match="ordering"):
            vol_monotonicity(Power(sigma=1.0, p=2.0), Power(sigma=1.0, p=1.0), Identity())

    def test_unbounded_convex_payoff_rejected(self):
        with pytest.raises(ValueError, match="concave"):
            vol_monotonicity(
                Power(sigma=0.5, p=2.0), Power(sigma=1.0, p=2.0), Call(strike=1.0)
            )


class TestConcaveMajorant:
    def test_capped_call(self):
        curve = concave_majorant(CappedCall(strike=1.0, cap=1.0), 8.0)
        assert curve.knots == ((0.0, 0.0), (2.0, 1.0))
        assert curve.terminal_slope == 0.0
        assert curve.evaluate(1.5) == pytest.approx(0.75, abs=1e-14)
        assert curve.evaluate(50.0) == 1.0

    def test_concave_payoff_is_its_own_majorant(self):
        ramp = PiecewiseLinear(knots=((0.0, 0.0), (1.0, 1.0)), terminal_slope=0.0)
        assert concave_majorant(ramp, 8.0).knots == ((0.0, 0.0), (1.0, 1.0))

    def test_constant(self):
        assert concave_majorant(Constant(value=3.0), 8.0).knots == ((0.0, 3.0),)

    def test_put_majorant_is_constant_strike(self):
        # any concave dominator on [0, inf) is nondecreasing, so it sits at K
        assert concave_majorant(Put(strike=1.0), 8.0).knots == ((0.0, 1.0),)

    def test_tent(self):
        tent = PiecewiseLinear(knots=((0.0, 0.0), (1.0, 2.0), (3.0, 0.0)))
        assert concave_majorant(tent, 8.0).knots == ((0.0, 0.0), (1.0, 2.0))

    def test_idempotent(self):
        for payoff in (CappedCall(strike=1.0, cap=1.0), Put(strike=1.0)):
            curve = concave_majorant(payoff, 8.0)
            assert concave_majorant(curve, 8.0) == curve

    @settings(max_examples=25, deadline=None)
    @given(
        strike=st.floats(0.0, 3.0),
        cap=st.floats(0.1, 4.0),
    )
    def test_dominates_capped_calls(self, strike, cap):
        payoff = CappedCall(strike=strike, cap=cap)
        curve = concave_majorant(payoff, 20.0)
        xs = np.linspace(0.0, 20.0, 801)
        assert np.all(curve.evaluate(xs) >= payoff_eval(payoff, xs) - 1e-12)

    def test_rejections(self):
        with pytest.raises(ValueError, match="sublinear"):
            concave_majorant(Identity(), 8.0)
        with pytest.raises(ValueError, match="sublinear"):
            concave_majorant(Call(strike=1.0), 8.0)
        with pytest.raises(ValueError, match="kink"):
            concave_majorant(CappedCall(strike=1.0, cap=1.0), 1.5)
        with pytest.raises(ValueError, match="positive"):
            concave_majorant(Put(strike=1.0), 0.0)

    def test_curve_validation(self):
        with pytest.raises(ValueError, match="nonincreasing"):
            MajorantCurve(knots=((0.0, 0.0), (1.0, 0.5), (2.0, 2.0)))
        with pytest.raises(ValueError, match="nonnegative"):
            MajorantCurve(knots=((0.0, -1.0),))
        with pytest.raises(ValueError, match="x = 0"):
            MajorantCurve(knots=((1.0, 1.0),))
        with pytest.raises(ValueError, match=">= 0"):
            MajorantCurve(knots=((0.0, 1.0),), terminal_slope=-0.5)


class TestSublinearBoundCheck:
    def test_put_surface_below_majorant(self):
        grid = Grid1D(x_max=64.0, nx=320, nt=160, stretching="sinh", sinh_intensity=2.0)
        surf = solve_capped(
            BUBBLE, Put(strike=1.0), cap_M=None, grid=grid,
            config=SolveConfig(far_boundary="neumann-zero"),
        )
        report = sublinear_bound_check(surf, concave_majorant(Put(strike=1.0), 8.0))
        assert report.passed
        assert report.worst_excess <= 0.0

    def test_constant_surface_touches_majorant(self):
        surf = solve_capped(
            GBM, Constant(value=3.0), cap_M=None, grid=Grid1D(x_max=8.0, nx=64, nt=64)
        )
        report = sublinear_bound_check(surf, concave_majorant(Constant(value=3.0), 8.0))
        assert report.passed
        assert abs(report.worst_excess) < 1e-12

    def test_corrupted_surface_fails(self):
        grid = Grid1D(x_max=8.0, nx=64, nt=64)
        surf = solve_capped(
            BUBBLE, Put(strike=1.0), cap_M=None, grid=grid,
            config=SolveConfig(far_boundary="neumann-zero"),
        )
        bad = PriceSurface(
            grid=grid, nodes=surf.nodes, times=surf.times,
            values=surf.values + 1.0, metadata={},
        )
        report = sublinear_bound_check(bad, concave_majorant(Put(strike=1.0), 8.0))
        assert not report.passed
        assert report.worst_excess == pytest.approx(1.0, abs=1e-6)


class TestParityGap:
    def test_gap_is_minus_defect_for_every_strike(self):
        gaps = [parity_gap(1.0, K, 1.0, 1.0) for K in (0.5, 1.0, 2.0)]
        for gap in gaps:
            assert gap == pytest.approx(-DEFECT_111, abs=5e-4)
        assert max(gaps) - min(gaps) < 1e-3

    def test_zero_strike(self):
        assert parity_gap(1.0, 0.0, 1.0, 1.0) == pytest.approx(-DEFECT_111, abs=5e-4)

    def test_mc_route_agrees(self):
        gap = parity_gap(1.0, 1.0, 1.0, 1.0, route="mc", n_paths=200_000, seed=7)
        assert gap == pytest.approx(-DEFECT_111, abs=5e-3)

    def test_martingale_model_has_no_gap(self):
        gap = parity_gap(0.2, 1.0, 1.0, 1.0, model=Power(sigma=0.2, p=1.0))
        assert abs(gap) < 1e-3

    def test_validation(self):
        with pytest.raises(ValueError):
            parity_gap(1.0, 1.0, 1.0, 1.0, route="csv")
        with pytest.raises(ValueError):
            parity_gap(1.0, 1.0, 0.0, 1.0)
        with pytest.raises(ValueError):
            parity_gap(1.0, -1.0, 1.0, 1.0)
        with pytest.raises(ValueError):
            parity_gap(1.0, 1.0, 1.0, 1.0, route="mc", model=Power(sigma=1.0, p=1.0))


class TestAsymptoteCheck:
    def test_default_probes(self):
        report = asymptote_check_x2(1.0, 1.0)
        assert report.probes == (10.0, 100.0, 1000.0, 10000.0)
        assert report.within_bound
        assert report.sup_value <= report.bound * 1.01
        assert report.bound == pytest.approx(LARGE_X_LIMIT, abs=1e-12)
        assert report.values[-1] == pytest.approx(LARGE_X_LIMIT, abs=1e-3)
        assert report.ratio_decreasing

    def test_far_probe_always_included(self):
        report = asymptote_check_x2(1.0, 1.0, probes=(10.0,))
        assert report.probes == (10.0, 10000.0)

    def test_bound_scales_inversely_with_sigma(self):
        sup1 = asymptote_check_x2(1.0, 1.0).sup_value
        sup2 = asymptote_check_x2(2.0, 1.0).sup_value
        assert sup1 / sup2 == pytest.approx(2.0, rel=1e-6)

    def test_validation(self):
        with pytest.raises(ValueError):
            asymptote_check_x2(0.0, 1.0)
        with pytest.raises(ValueError):
            asymptote_check_x2(1.0, -1.0)
        with pytest.raises(ValueError):
            asymptote_check_x2(1.0, 1.0, probes=(0.0, 10.0))
