"""Shape and bound diagnostics for solved price surfaces.

Each function here checks one structural claim against solver or
closed-form output: slice convexity, price ordering in the volatility,
concave-majorant domination, the call-put parity gap, and the large-x
plateau of the quadratic-volatility price.
"""

from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from .core import (
    Call,
    CappedCall,
    Constant,
    Identity,
    MarketSpec,
    Payoff,
    PiecewiseLinear,
    Power,
    Put,
    VolModel,
    alpha_eval,
    closed_form_price_x2,
    payoff_eval,
    payoff_flags,
)
from .mc import exact_sample_x2
from .pde import CapSchedule, GridPolicy, PriceSurface, _minimal_grid, solve_minimal

CONVEX = "convex"
CONCAVE = "concave"
LINEAR = "linear"
MIXED = "mixed"

DECREASING_IN_VOL = "decreasing-in-vol"
INCREASING_IN_VOL = "increasing-in-vol"

# Default verdict tolerance is c * dx^2 * max|u| with c = 10: it tracks the
# discretization error of the second differences, so verdicts sharpen under
# refinement instead of flapping.
_SHAPE_TOL_SCALE = 10.0

_HULL_SAMPLES = 2049


@dataclass(frozen=True)
class ShapeVerdict:
    """Classification of one x-slice, with the worst shape violation seen.

    verdict is one of "convex", "concave", "linear", "mixed". For a convex
    slice worst_violation is the largest downward second difference (within
    tolerance by definition), and symmetrically for concave; for linear and
    mixed it is the larger of the two. location indexes surface.nodes.
    """

    verdict: str
    worst_violation: float
    location: int
    tolerance: float


@dataclass(frozen=True)
class VolComparison:
    """Worst signed gap between two solves, in the predicted direction."""

    direction: str
    min_gap: float
    holds: bool
    tolerance: float


@dataclass(frozen=True)
class MajorantCurve:
    """Concave piecewise-linear curve, linear beyond its last knot.

    Used as the dominating function in sublinear bound checks; evaluate()
    extends the last segment with terminal_slope, so the curve is defined
    on all of [0, inf).
    """

    knots: Tuple[Tuple[float, float], ...]
    terminal_slope: float = 0.0

    def __post_init__(self):
        knots = tuple((float(x), float(v)) for x, v in self.knots)
        object.__setattr__(self, "knots", knots)
        if len(knots) < 1:
            raise ValueError("majorant needs at least one knot")
        if knots[0][0] != 0.0:
            raise ValueError("majorant must start at x = 0")
        xs = [x for x, _ in knots]
        if any(b <= a for a, b in zip(xs, xs[1:])):
            raise ValueError("knot locations must be strictly increasing")
        if any(v < 0.0 for _, v in knots):
            raise ValueError("majorant values must be nonnegative")
        if self.terminal_slope < 0.0:
            raise ValueError(f"terminal slope must be >= 0, got {self.terminal_slope}")
        slopes = [
            (v1 - v0) / (x1 - x0) for (x0, v0), (x1, v1) in zip(knots, knots[1:])
        ]
        slopes.append(self.terminal_slope)
        if any(b > a + 1e-12 for a, b in zip(slopes, slopes[1:])):
            raise ValueError("majorant slopes must be nonincreasing")

    def evaluate(self, x):
        poly = PiecewiseLinear(knots=self.knots, terminal_slope=self.terminal_slope)
        return payoff_eval(poly, x)


@dataclass(frozen=True)
class BoundReport:
    passed: bool
    worst_excess: float
    node_index: int
    time_index: int
    tolerance: float


@dataclass(frozen=True)
class AsymptoteReport:
    """Large-x probe of the closed-form price against its plateau bound."""

    probes: Tuple[float, ...]
    values: Tuple[float, ...]
    sup_value: float
    bound: float
    margin: float
    within_bound: bool
    ratio_decreasing: bool


def _second_differences(nodes: np.ndarray, u: np.ndarray) -> np.ndarray:
    hm = nodes[1:-1] - nodes[:-2]
    hp = nodes[2:] - nodes[1:-1]
    return 2.0 * (hm * u[2:] - (hm + hp) * u[1:-1] + hp * u[:-2]) / (
        hm * hp * (hm + hp)
    )


def convexity_profile(
    surface: PriceSurface, t_index: int = 0, tol: Optional[float] = None
) -> ShapeVerdict:
    """Classify the x-slice at t_index by its interior second differences.

    The outermost interior node on each side is dropped: stencils touching
    the boundary rows see the boundary condition, not the solution's shape.
    """
    nodes = surface.nodes
    if len(nodes) < 5:
        raise ValueError("need at least 5 nodes to classify a slice")
    u = np.asarray(surface.values[:, t_index], dtype=float)
    d2 = _second_differences(nodes, u)[1:-1]  # node indices 2 .. nx-3
    if tol is None:
        spacing = float(np.median(np.diff(nodes)))
        tol = _SHAPE_TOL_SCALE * spacing**2 * float(np.max(np.abs(u)))
    lo = int(np.argmin(d2))
    hi = int(np.argmax(d2))
    against_convex = max(0.0, -float(d2[lo]))
    against_concave = max(0.0, float(d2[hi]))
    convex_ok = against_convex <= tol
    concave_ok = against_concave <= tol
    if convex_ok and concave_ok:
        verdict = LINEAR
        worst, where = max((against_convex, lo), (against_concave, hi))
    elif convex_ok:
        verdict, worst, where = CONVEX, against_convex, lo
    elif concave_ok:
        verdict, worst, where = CONCAVE, against_concave, hi
    else:
        verdict = MIXED
        worst, where = max((against_convex, lo), (against_concave, hi))
    return ShapeVerdict(
        verdict=verdict, worst_violation=worst, location=where + 2, tolerance=tol
    )


def vol_monotonicity(
    model_lo: VolModel,
    model_hi: VolModel,
    payoff: Payoff,
    horizon: float = 1.0,
    grid_policy: GridPolicy = GridPolicy(),
    schedule: CapSchedule = CapSchedule(),
    tol: float = 1e-6,
) -> VolComparison:
    """Order minimal-solution prices for two volatility models.

    Concave payoffs price lower under the larger volatility, bounded convex
    payoffs price higher. Both markets are solved on one shared grid and
    the worst signed gap in the predicted direction is taken over the
    reporting window, where the cap schedule certifies the values.
    """
    flags = payoff_flags(payoff)
    if flags.is_concave:
        direction = DECREASING_IN_VOL
    elif flags.is_convex and flags.is_bounded:
        direction = INCREASING_IN_VOL
    else:
        raise ValueError(
            "payoff must be concave, or convex and bounded; "
            f"{type(payoff).__name__} is neither"
        )
    probes = _minimal_grid(payoff, grid_policy, schedule).nodes()
    positive = probes[probes > 0.0]
    a_lo = alpha_eval(model_lo, positive)
    a_hi = alpha_eval(model_hi, positive)
    slack = 1e-12 * (1.0 + np.abs(a_hi))
    if np.any(a_lo > a_hi + slack):
        worst = positive[int(np.argmax(a_lo - a_hi))]
        raise ValueError(f"alpha ordering fails on the probe grid near x = {worst:.6g}")
    lo_surface, _ = solve_minimal(
        MarketSpec(vol=model_lo, rate=0.0, horizon=horizon), payoff, grid_policy, schedule
    )
    hi_surface, _ = solve_minimal(
        MarketSpec(vol=model_hi, rate=0.0, horizon=horizon), payoff, grid_policy, schedule
    )
    window = lo_surface.nodes <= grid_policy.x_report
    if direction == DECREASING_IN_VOL:
        gap = lo_surface.values[window, :] - hi_surface.values[window, :]
    else:
        gap = hi_surface.values[window, :] - lo_surface.values[window, :]
    min_gap = float(np.min(gap))
    return VolComparison(
        direction=direction, min_gap=min_gap, holds=min_gap >= -tol, tolerance=tol
    )


def _breakpoints(payoff: Payoff) -> Tuple[float, ...]:
    if isinstance(payoff, (Identity, Constant)):
        return ()
    if isinstance(payoff, Call):
        return (payoff.strike,)
    if isinstance(payoff, Put):
        return (payoff.strike,)
    if isinstance(payoff, CappedCall):
        return (payoff.strike, payoff.strike + payoff.cap)
    if isinstance(payoff, PiecewiseLinear):
        return tuple(x for x, _ in payoff.knots)
    raise TypeError(f"unknown payoff {type(payoff).__name__}")


def _cross(o, a, b) -> float:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def _upper_hull(xs: np.ndarray, ys: np.ndarray) -> list:
    # pop non-right turns; near-collinear middles count as collinear
    eps = 1e-14 * (xs[-1] - xs[0]) * (1.0 + float(np.max(np.abs(ys))))
    hull: list = []
    for point in zip(xs, ys):
        while len(hull) >= 2 and _cross(hull[-2], hull[-1], point) >= -eps:
            hull.pop()
        hull.append(point)
    return hull


def concave_majorant(payoff, x_max: float) -> MajorantCurve:
    """Least concave function dominating the payoff on [0, inf).

    Strictly sublinear payoffs only; in this catalog those are exactly the
    bounded ones, and a concave dominating function on an unbounded domain
    must be nondecreasing, so the hull is anchored at the payoff supremum
    and extended flat. x_max must cover every kink of the payoff or the
    sweep cannot see the whole graph.
    """
    if isinstance(payoff, MajorantCurve):
        payoff = PiecewiseLinear(knots=payoff.knots, terminal_slope=payoff.terminal_slope)
    flags = payoff_flags(payoff)
    if not flags.is_strictly_sublinear:
        raise ValueError("concave majorant requires a strictly sublinear payoff")
    if x_max <= 0.0:
        raise ValueError(f"x_max must be positive, got {x_max}")
    breaks = _breakpoints(payoff)
    if breaks and x_max < max(breaks):
        raise ValueError(
            f"x_max = {x_max} does not cover the payoff kink at {max(breaks)}"
        )
    xs = np.unique(
        np.concatenate([np.linspace(0.0, x_max, _HULL_SAMPLES), np.asarray(breaks)])
    )
    values = np.asarray(payoff_eval(payoff, xs), dtype=float)
    top = float(np.max(values))
    values[-1] = top  # forces a nondecreasing hull
    hull = _upper_hull(xs, values)
    while len(hull) >= 2:
        (x0, v0), (x1, v1) = hull[-2], hull[-1]
        if v1 - v0 > 1e-12 * (1.0 + top) * (x1 - x0):
            break
        hull.pop()  # merge the trailing flat piece into the extension
    return MajorantCurve(knots=tuple(hull), terminal_slope=0.0)


def sublinear_bound_check(
    surface: PriceSurface, majorant: MajorantCurve, tol: float = 1e-9
) -> BoundReport:
    """Check u <= majorant at every node of every layer."""
    bound = np.asarray(majorant.evaluate(surface.nodes), dtype=float)
    excess = surface.values - bound[:, None]
    i, j = np.unravel_index(int(np.argmax(excess)), excess.shape)
    worst = float(excess[i, j])
    return BoundReport(
        passed=worst <= tol,
        worst_excess=worst,
        node_index=int(i),
        time_index=int(j),
        tolerance=tol,
    )


def parity_gap(
    sigma: float,
    strike: float,
    x0: float,
    tau: float,
    route: str = "pde",
    model: Optional[VolModel] = None,
    grid_policy: GridPolicy = GridPolicy(),
    schedule: CapSchedule = CapSchedule(),
    n_paths: int = 200_000,
    seed: int = 0,
) -> float:
    """C - P - (x0 - strike) at t = 0, quadratic-volatility model by default.

    Zero for a true martingale. In the default model it equals minus the
    martingale defect for every strike: the call and put legs combine to the
    linear payoff x - strike, whose price falls short of x0 - strike by the
    defect. Passing a model overrides the default (martingale baselines);
    the mc route has no general-model sampler, so it allows no override.
    """
    if x0 <= 0.0 or tau <= 0.0:
        raise ValueError("parity gap needs x0 > 0 and tau > 0")
    if strike < 0.0:
        raise ValueError(f"strike must be >= 0, got {strike}")
    if route == "mc":
        if model is not None:
            raise ValueError("mc route supports only the default quadratic model")
        samples = exact_sample_x2(x0, tau, sigma, n_paths, seed)
        call = float(np.mean(np.maximum(samples - strike, 0.0)))
        put = float(np.mean(np.maximum(strike - samples, 0.0)))
        return call - put - (x0 - strike)
    if route != "pde":
        raise ValueError(f"route must be 'pde' or 'mc', got {route!r}")
    vol = Power(sigma=sigma, p=2.0) if model is None else model
    market = MarketSpec(vol=vol, rate=0.0, horizon=tau)
    call_surface, _ = solve_minimal(market, Call(strike=strike), grid_policy, schedule)
    call = call_surface.value_at(x0, 0)
    if strike == 0.0:
        put = 0.0
    else:
        put_surface, _ = solve_minimal(market, Put(strike=strike), grid_policy, schedule)
        put = put_surface.value_at(x0, 0)
    return float(call - put - (x0 - strike))


_DEFAULT_PROBES = (10.0, 100.0, 1_000.0, 10_000.0)


def asymptote_check_x2(
    sigma: float, tau: float, probes: Optional[Sequence[float]] = None
) -> AsymptoteReport:
    """Probe the closed-form price plateau at large x.

    The price approaches sqrt(2/pi)/(sigma sqrt(tau)) instead of growing
    linearly. The report compares the sup over probes (x = 10^4 is always
    included) against that bound with a one percent allowance, and tracks
    u(x)/x^0.1 along the probes: no constant is available for the sublinear
    decay, so it is checked as a monotone trend rather than a rate.
    """
    if sigma <= 0.0 or tau <= 0.0:
        raise ValueError("sigma and tau must be positive")
    chosen = _DEFAULT_PROBES if probes is None else tuple(float(p) for p in probes)
    if any(p <= 0.0 for p in chosen):
        raise ValueError("probes must be positive")
    xs = tuple(sorted(set(chosen) | {10_000.0}))
    values = tuple(closed_form_price_x2(x, tau, sigma) for x in xs)
    bound = float(np.sqrt(2.0 / np.pi) / (sigma * np.sqrt(tau)))
    sup_value = max(values)
    allowance = bound * 1.01
    ratios = np.asarray(values) / np.asarray(xs) ** 0.1
    return AsymptoteReport(
        probes=xs,
        values=values,
        sup_value=sup_value,
        bound=bound,
        margin=allowance - sup_value,
        within_bound=sup_value <= allowance,
        ratio_decreasing=bool(np.all(np.diff(ratios) < 0.0)),
    )
