"""Model catalog, closed forms, martingality classifier, supersolution machinery.

The underlying price process is dX = alpha(X) dW with x = 0 absorbing. Every
volatility model here is time-homogeneous; a time slot can be added later
without touching consumers. Prices of nonnegative payoffs g are u(x, t) =
E[g(X(T)) | X(t) = x], which for super-quadratic volatility growth is only the
*minimal* nonnegative solution of the pricing PDE u_t + alpha^2 u_xx / 2 = 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Tuple, Union

import numpy as np
from scipy.special import ndtr

__all__ = [
    "NumericError",
    "ConvergenceError",
    "Power",
    "PowerLog",
    "Tabulated",
    "VolModel",
    "Identity",
    "Call",
    "Put",
    "CappedCall",
    "Constant",
    "PiecewiseLinear",
    "Payoff",
    "PayoffFlags",
    "MarketSpec",
    "ClassifierEvidence",
    "ClassifierVerdict",
    "SupersolutionParams",
    "SupersolutionReport",
    "normal_cdf",
    "normal_pdf",
    "alpha_eval",
    "payoff_eval",
    "payoff_flags",
    "classify_martingale",
    "closed_form_price_x2",
    "closed_form_density_x2",
    "closed_form_gamma_x2",
    "supersolution_h",
    "verify_supersolution",
    "default_supersolution_params",
]


class NumericError(RuntimeError):
    """A numerical routine produced an unusable result (singular or unstable)."""


class ConvergenceError(NumericError):
    """An iterative routine exhausted its budget without meeting tolerance."""

    def __init__(self, message: str, history=None):
        super().__init__(message)
        self.history = history


# ---------------------------------------------------------------------------
# volatility models
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Power:
    """alpha(x) = sigma * x**p with p >= 1 (p = 1 is the lognormal baseline)."""

    sigma: float
    p: float = 2.0

    def __post_init__(self):
        if self.sigma <= 0.0:
            raise ValueError(f"sigma must be positive, got {self.sigma}")
        if self.p < 1.0:
            raise ValueError(f"power exponent must be >= 1, got {self.p}")


@dataclass(frozen=True)
class PowerLog:
    """alpha(x) = sigma * x * sqrt(ln(e + x)).

    Grows faster than any linear bound but slower than every power x**p with
    p > 1; sits exactly on the boundary the classifier refuses to call.
    """

    sigma: float

    def __post_init__(self):
        if self.sigma <= 0.0:
            raise ValueError(f"sigma must be positive, got {self.sigma}")


@dataclass(frozen=True)
class Tabulated:
    """Piecewise-linear alpha between knots, power extrapolation above.

    Below the first knot alpha is linear from (0, 0), which keeps x = 0
    absorbing. Above the last knot (x_n, a_n) it continues as
    a_n * (x / x_n)**extrapolation_exponent.
    """

    knots: Tuple[Tuple[float, float], ...]
    extrapolation_exponent: float = 1.0

    def __post_init__(self):
        knots = tuple((float(x), float(a)) for x, a in self.knots)
        object.__setattr__(self, "knots", knots)
        if len(knots) < 1:
            raise ValueError("tabulated model needs at least one knot")
        xs = [x for x, _ in knots]
        if any(x <= 0.0 for x in xs):
            raise ValueError("tabulated knot locations must be positive")
        if any(b <= a for a, b in zip(xs, xs[1:])):
            raise ValueError("tabulated knot locations must be strictly increasing")
        if any(a <= 0.0 for _, a in knots):
            raise ValueError("tabulated alpha values must be positive at every knot")


VolModel = Union[Power, PowerLog, Tabulated]


def alpha_eval(model: VolModel, x):
    """Evaluate alpha(x) for a catalog model.

    Accepts a scalar or an ndarray; negative input raises. alpha(0) = 0 for
    every catalog model, matching the absorbing state at zero.
    """
    arr = np.asarray(x, dtype=float)
    if np.any(arr < 0.0):
        raise ValueError("alpha_eval requires x >= 0")
    if isinstance(model, Power):
        out = model.sigma * arr**model.p
    elif isinstance(model, PowerLog):
        out = model.sigma * arr * np.sqrt(np.log(np.e + arr))
    elif isinstance(model, Tabulated):
        xs = np.array([0.0] + [k[0] for k in model.knots])
        vals = np.array([0.0] + [k[1] for k in model.knots])
        out = np.interp(arr, xs, vals)
        x_last, a_last = model.knots[-1]
        above = arr > x_last
        if np.any(above):
            out = np.where(
                above,
                a_last * (arr / x_last) ** model.extrapolation_exponent,
                out,
            )
    else:
        raise TypeError(f"unknown volatility model {type(model).__name__}")
    if np.ndim(x) == 0:
        return float(out)
    return out


# ---------------------------------------------------------------------------
# payoffs
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Identity:
    """g(x) = x, the stock option."""


@dataclass(frozen=True)
class Call:
    """g(x) = (x - strike)+."""

    strike: float

    def __post_init__(self):
        if self.strike < 0.0:
            raise ValueError(f"call strike must be >= 0, got {self.strike}")


@dataclass(frozen=True)
class Put:
    """g(x) = (strike - x)+."""

    strike: float

    def __post_init__(self):
        if self.strike <= 0.0:
            raise ValueError(f"put strike must be positive, got {self.strike}")


@dataclass(frozen=True)
class CappedCall:
    """g(x) = min((x - strike)+, cap)."""

    strike: float
    cap: float

    def __post_init__(self):
        if self.strike < 0.0:
            raise ValueError(f"strike must be >= 0, got {self.strike}")
        if self.cap <= 0.0:
            raise ValueError(f"cap must be positive, got {self.cap}")


@dataclass(frozen=True)
class Constant:
    """g(x) = value."""

    value: float

    def __post_init__(self):
        if self.value < 0.0:
            raise ValueError(f"constant payoff must be >= 0, got {self.value}")


@dataclass(frozen=True)
class PiecewiseLinear:
    """Piecewise-linear payoff through knots, linear continuation beyond.

    The first knot must sit at x = 0 so the payoff is defined on all of
    [0, inf); beyond the last knot the payoff continues with terminal_slope.
    """

    knots: Tuple[Tuple[float, float], ...]
    terminal_slope: float = 0.0

    def __post_init__(self):
        knots = tuple((float(x), float(g)) for x, g in self.knots)
        object.__setattr__(self, "knots", knots)
        if len(knots) < 1:
            raise ValueError("piecewise-linear payoff needs at least one knot")
        if knots[0][0] != 0.0:
            raise ValueError("first knot must be at x = 0")
        xs = [x for x, _ in knots]
        if any(b <= a for a, b in zip(xs, xs[1:])):
            raise ValueError("knot locations must be strictly increasing")
        if any(g < 0.0 for _, g in knots):
            raise ValueError("payoff values must be nonnegative")
        if self.terminal_slope < 0.0:
            raise ValueError(f"terminal slope must be >= 0, got {self.terminal_slope}")


Payoff = Union[Identity, Call, Put, CappedCall, Constant, PiecewiseLinear]


@dataclass(frozen=True)
class PayoffFlags:
    """Structural flags derived in closed form from the payoff family."""

    is_convex: bool
    is_concave: bool
    is_bounded: bool
    is_strictly_sublinear: bool


def payoff_eval(g: Payoff, x):
    """Evaluate g(x). Accepts a scalar or an ndarray; x must be >= 0."""
    arr = np.asarray(x, dtype=float)
    if np.any(arr < 0.0):
        raise ValueError("payoff_eval requires x >= 0")
    if isinstance(g, Identity):
        out = arr.copy()
    elif isinstance(g, Call):
        out = np.maximum(arr - g.strike, 0.0)
    elif isinstance(g, Put):
        out = np.maximum(g.strike - arr, 0.0)
    elif isinstance(g, CappedCall):
        out = np.minimum(np.maximum(arr - g.strike, 0.0), g.cap)
    elif isinstance(g, Constant):
        out = np.full_like(arr, g.value)
    elif isinstance(g, PiecewiseLinear):
        xs = np.array([k[0] for k in g.knots])
        gs = np.array([k[1] for k in g.knots])
        out = np.interp(arr, xs, gs)
        beyond = arr > xs[-1]
        if np.any(beyond):
            out = np.where(beyond, gs[-1] + g.terminal_slope * (arr - xs[-1]), out)
    else:
        raise TypeError(f"unknown payoff {type(g).__name__}")
    if np.ndim(x) == 0:
        return float(out)
    return out


def _piecewise_slopes(g: PiecewiseLinear) -> list:
    xs = [k[0] for k in g.knots]
    gs = [k[1] for k in g.knots]
    slopes = [(g1 - g0) / (x1 - x0) for (x0, x1, g0, g1) in zip(xs, xs[1:], gs, gs[1:])]
    slopes.append(g.terminal_slope)
    return slopes


def payoff_flags(g: Payoff) -> PayoffFlags:
    """Structural flags, decided per family rather than by sampling.

    Flags describe g on all of [0, inf): a capped call is not convex because
    of the kink at its cap, and "strictly sublinear" means g(x)/x -> 0.
    """
    if isinstance(g, Identity):
        return PayoffFlags(True, True, False, False)
    if isinstance(g, Call):
        # strike 0 degenerates to the identity, which is also concave
        return PayoffFlags(True, g.strike == 0.0, False, False)
    if isinstance(g, Put):
        return PayoffFlags(True, False, True, True)
    if isinstance(g, CappedCall):
        return PayoffFlags(False, g.strike == 0.0, True, True)
    if isinstance(g, Constant):
        return PayoffFlags(True, True, True, True)
    if isinstance(g, PiecewiseLinear):
        slopes = _piecewise_slopes(g)
        convex = all(b >= a for a, b in zip(slopes, slopes[1:]))
        concave = all(b <= a for a, b in zip(slopes, slopes[1:]))
        sublinear = g.terminal_slope == 0.0
        return PayoffFlags(convex, concave, sublinear, sublinear)
    raise TypeError(f"unknown payoff {type(g).__name__}")


# ---------------------------------------------------------------------------
# market
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MarketSpec:
    """Volatility model, short rate and horizon (years).

    The European-side operations require rate = 0; the American engine
    accepts any rate >= 0.
    """

    vol: VolModel
    rate: float
    horizon: float

    def __post_init__(self):
        if self.rate < 0.0:
            raise ValueError(f"rate must be >= 0, got {self.rate}")
        if self.horizon <= 0.0:
            raise ValueError(f"horizon must be positive, got {self.horizon}")


# ---------------------------------------------------------------------------
# normal distribution helpers
# ---------------------------------------------------------------------------


def normal_cdf(x):
    """Standard normal CDF via the complementary error function.

    Absolute accuracy is ~1 ulp (well inside 1e-12) over all of R because
    erfc avoids cancellation in the tails.
    """
    if np.ndim(x) == 0:
        return 0.5 * math.erfc(-float(x) / math.sqrt(2.0))
    return ndtr(np.asarray(x, dtype=float))


def normal_pdf(x):
    """Standard normal density."""
    x = np.asarray(x, dtype=float) if np.ndim(x) else float(x)
    out = np.exp(-np.square(x) / 2.0) / math.sqrt(2.0 * math.pi)
    return float(out) if np.ndim(x) == 0 else out


# ---------------------------------------------------------------------------
# closed forms for alpha(x) = sigma * x**2
# ---------------------------------------------------------------------------


def closed_form_price_x2(x, tau, sigma: float):
    """Stock-option price x * (1 - 2 Phi(-1/(x sigma sqrt(tau)))).

    Evaluated as x * erf(1/(x sigma sqrt(2 tau))), which is the same
    expression without subtractive cancellation for large x. Returns x when
    tau = 0 or x = 0. Strictly below x for x, tau > 0: the driving process is
    a strict local martingale and the price ignores the bubble component.
    """
    if sigma <= 0.0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    x_arr = np.asarray(x, dtype=float)
    tau_arr = np.asarray(tau, dtype=float)
    if np.any(x_arr < 0.0) or np.any(tau_arr < 0.0):
        raise ValueError("closed_form_price_x2 requires x >= 0 and tau >= 0")
    with np.errstate(divide="ignore"):
        z = 1.0 / (x_arr * sigma * np.sqrt(2.0 * tau_arr))
    from scipy.special import erf

    out = x_arr * erf(z)  # erf(inf) = 1 covers x = 0 or tau = 0
    out = np.where((x_arr == 0.0) | (tau_arr == 0.0), x_arr, out)
    if np.ndim(x) == 0 and np.ndim(tau) == 0:
        return float(out)
    return out


def closed_form_density_x2(x: float, tau: float, sigma: float, y):
    """Terminal transition density of dX = sigma X^2 dW started at x.

    p(y) = x / (sigma sqrt(2 pi tau) y^3) * (exp(-(1/y - 1/x)^2 / (2 s^2))
           - exp(-(1/y + 1/x)^2 / (2 s^2))),  s = sigma sqrt(tau).

    The density integrates to 1: this process never reaches zero in finite
    time, yet its mean drops below x.
    """
    if x <= 0.0 or tau <= 0.0 or sigma <= 0.0:
        raise ValueError("closed_form_density_x2 requires x, tau, sigma > 0")
    y_arr = np.asarray(y, dtype=float)
    if np.any(y_arr <= 0.0):
        raise ValueError("density is supported on y > 0")
    s2 = sigma * sigma * tau
    inv_y = 1.0 / y_arr
    a = np.exp(-((inv_y - 1.0 / x) ** 2) / (2.0 * s2))
    b = np.exp(-((inv_y + 1.0 / x) ** 2) / (2.0 * s2))
    out = x * inv_y**3 / math.sqrt(2.0 * math.pi * s2) * (a - b)
    if np.ndim(y) == 0:
        return float(out)
    return out


def closed_form_gamma_x2(x: float, tau: float, sigma: float) -> float:
    """Second x-derivative -2/(x^4 sigma^3 tau^(3/2)) * phi(1/(x sigma sqrt(tau))).

    Strictly negative for x, tau > 0: the price of the *linear* payoff is
    strictly concave, which is the shape anomaly bubbles introduce.
    """
    if x <= 0.0 or tau <= 0.0 or sigma <= 0.0:
        raise ValueError("closed_form_gamma_x2 requires x, tau, sigma > 0")
    phi = normal_pdf(1.0 / (x * sigma * math.sqrt(tau)))
    if phi == 0.0:
        # Gaussian factor underflows long before x^(-4) can overflow
        return 0.0
    return -2.0 / (x**4 * sigma**3 * tau**1.5) * phi


# ---------------------------------------------------------------------------
# martingality classifier
# ---------------------------------------------------------------------------

_ETA_MARGIN = 0.1  # slope must clear 2 by this much before we call a bubble
_RATIO_FLATNESS = 1.01  # allowed growth of alpha/(1+x) over the top decade


@dataclass(frozen=True)
class ClassifierEvidence:
    fitted_eta: float
    fitted_eps: float
    probe_range: Tuple[float, float]


@dataclass(frozen=True)
class ClassifierVerdict:
    """Outcome of the growth-based martingality test.

    Both verdicts come from sufficient conditions only: a model failing both
    checks is reported Inconclusive, never guessed.
    """

    verdict: str  # "strict-local-martingale" | "true-martingale" | "inconclusive"
    evidence: ClassifierEvidence


STRICT_LOCAL_MARTINGALE = "strict-local-martingale"
TRUE_MARTINGALE = "true-martingale"
INCONCLUSIVE = "inconclusive"


def classify_martingale(
    model: VolModel, probe: Tuple[float, float, int] = (1.0, 1.0e4, 64)
) -> ClassifierVerdict:
    """Classify martingality of dX = alpha(X) dW from growth of alpha.

    Fits log alpha^2 ~ eta log x + log eps by least squares on a geometric
    grid over [x_lo, x_hi]. The strict-local-martingale verdict requires the
    fitted slope to clear 2 with margin AND the fitted lower bound
    alpha^2 >= eps * x^eta to hold at every probe point in the upper half of
    the range, extended down to max(1/eps, x_lo) when that reaches lower. The true-martingale verdict requires a linear bound
    alpha <= C(1+x) that is actually flat at the top of the range: the ratio
    alpha/(1+x) may grow by at most 1% over the last decade, otherwise the
    largest probe ratio proves nothing about larger x. Anything else is
    inconclusive (log-corrected quadratic growth lands here on purpose:
    alpha^2 = x^2 ln x is a true martingale despite alpha^2/x^2 -> inf).
    """
    x_lo, x_hi, n_points = probe
    if not (1.0 <= x_lo < x_hi) or n_points < 16:
        raise ValueError(f"invalid probe range {probe}")
    xs = np.geomspace(x_lo, x_hi, int(n_points))
    a = alpha_eval(model, xs)
    if np.any(a <= 0.0):
        raise ValueError("alpha must be positive on the probe range")
    log_x = np.log(xs)
    log_a2 = 2.0 * np.log(a)
    eta_hat, log_eps = np.polyfit(log_x, log_a2, 1)
    eps_hat = float(np.exp(log_eps))
    evidence = ClassifierEvidence(float(eta_hat), eps_hat, (x_lo, x_hi))

    if eta_hat > 2.0 + _ETA_MARGIN:
        # check the fitted bound on the upper half of the probes and, when it
        # reaches into the probe range, on [1/eps, x_hi] as well; the slack
        # absorbs float round-off when the fit is exact
        check_from = min(math.sqrt(x_lo * x_hi), max(1.0 / eps_hat, x_lo))
        checked = xs >= check_from
        bound = eps_hat * xs[checked] ** eta_hat
        if np.all(a[checked] ** 2 >= bound * (1.0 - 1e-9)):
            return ClassifierVerdict(STRICT_LOCAL_MARTINGALE, evidence)

    ratio_hi = alpha_eval(model, x_hi) / (1.0 + x_hi)
    ratio_dec = alpha_eval(model, x_hi / 10.0) / (1.0 + x_hi / 10.0)
    if ratio_hi <= _RATIO_FLATNESS * ratio_dec:
        return ClassifierVerdict(TRUE_MARTINGALE, evidence)
    return ClassifierVerdict(INCONCLUSIVE, evidence)


# ---------------------------------------------------------------------------
# supersolution certificate
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SupersolutionParams:
    """Parameters of h(x, tau) = exp(M tau) * x / (1 + x**beta * tau**m)."""

    beta: float
    m: float
    M: float

    def __post_init__(self):
        if not (0.0 < self.beta <= 1.0):
            raise ValueError(f"beta must lie in (0, 1], got {self.beta}")
        if self.m <= 0.0 or self.M <= 0.0:
            raise ValueError("m and M must be positive")


@dataclass(frozen=True)
class SupersolutionReport:
    """Grid evaluation of the supersolution inequality.

    min_residual is the smallest LHS - RHS over the grid; failing_points
    lists every node where it is negative. An empty list certifies h as a
    discrete supersolution witness on that grid: the price process started
    anywhere under h stays under h in expectation, forcing E[X(T)] < x.
    """

    min_residual: float
    failing_points: Tuple[Tuple[float, float, float], ...]
    n_points: int

    @property
    def certified(self) -> bool:
        return len(self.failing_points) == 0


def supersolution_h(x, tau, params: SupersolutionParams):
    """Evaluate the candidate supersolution h(x, tau)."""
    x_arr = np.asarray(x, dtype=float)
    tau_arr = np.asarray(tau, dtype=float)
    if np.any(x_arr < 0.0) or np.any(tau_arr < 0.0):
        raise ValueError("supersolution_h requires x >= 0 and tau >= 0")
    out = np.exp(params.M * tau_arr) * x_arr / (1.0 + x_arr**params.beta * tau_arr**params.m)
    if np.ndim(x) == 0 and np.ndim(tau) == 0:
        return float(out)
    return out


def _supersolution_residual(model: VolModel, params: SupersolutionParams, x, tau):
    """LHS - RHS of the inequality certifying h_t + alpha^2 h_xx / 2 <= 0.

    M x + (1+b) b a2 x^(b-1) tau^m / 2 + b (1-b) a2 x^(2b-1) tau^(2m) / 2
        >= m x^(b+1) tau^(m-1) + m x^(2b+1) tau^(2m-1)

    with b = beta and a2 = alpha(x)^2. At x = 0 every term vanishes
    (alpha(0) = 0 for catalog models), so the residual is 0 there.
    """
    b, m, M = params.beta, params.m, params.M
    x = np.asarray(x, dtype=float)
    tau = np.asarray(tau, dtype=float)
    a2 = np.asarray(alpha_eval(model, x)) ** 2
    pos = x > 0.0
    xp = np.where(pos, x, 1.0)  # placeholder keeps x**negative finite
    with np.errstate(divide="ignore", invalid="ignore"):
        lhs = (
            M * xp
            + 0.5 * (1.0 + b) * b * a2 * xp ** (b - 1.0) * tau**m
            + 0.5 * b * (1.0 - b) * a2 * xp ** (2.0 * b - 1.0) * tau ** (2.0 * m)
        )
        rhs = m * xp ** (b + 1.0) * tau ** (m - 1.0) + m * xp ** (2.0 * b + 1.0) * tau ** (
            2.0 * m - 1.0
        )
    res = lhs - rhs
    return np.where(pos, res, 0.0)


def verify_supersolution(
    model: VolModel,
    params: SupersolutionParams,
    x_range: Tuple[float, float] = (0.0, 100.0),
    tau_range: Tuple[float, float] = (0.0, 1.0),
    counts: Tuple[int, int] = (401, 101),
) -> SupersolutionReport:
    """Check the supersolution inequality at every node of a rectangular grid.

    A clean report certifies strict-local-martingale behaviour for the model
    on that grid; the linear-growth baseline necessarily fails at large x
    because its alpha^2 terms cannot dominate the right-hand side.
    """
    if x_range[1] <= x_range[0] or tau_range[1] < tau_range[0]:
        raise ValueError("empty verification grid")
    xs = np.linspace(x_range[0], x_range[1], counts[0])
    taus = np.linspace(tau_range[0], tau_range[1], counts[1])
    xg, tg = np.meshgrid(xs, taus, indexing="ij")
    res = _supersolution_residual(model, params, xg, tg)
    bad = res < 0.0
    failing = tuple(
        (float(xg[i, j]), float(tg[i, j]), float(res[i, j]))
        for i, j in zip(*np.nonzero(bad))
    )
    return SupersolutionReport(
        min_residual=float(res.min()),
        failing_points=failing,
        n_points=int(res.size),
    )


def default_supersolution_params(
    model: VolModel, horizon: float, beta: float = 0.5
) -> SupersolutionParams:
    """One-call parameter recipe for the supersolution certificate.

    m comes from the constraint m > 1 + beta/(eta' - 2) with
    eta' = (2 + eta)/2 and eta the classifier's fitted growth exponent; M is
    the small-x bound m c^beta T^(m-1) + m c^(2 beta) T^(2m-1), where the
    crossover point c is found by grid search (smallest candidate whose M
    yields a clean certificate). Models without super-quadratic growth have
    no valid c; they get the first fallback candidate and an honestly
    failing certificate.
    """
    if horizon <= 0.0:
        raise ValueError(f"horizon must be positive, got {horizon}")
    eta_hat = classify_martingale(model).evidence.fitted_eta
    if eta_hat > 2.0 + _ETA_MARGIN:
        eta_prime = (2.0 + eta_hat) / 2.0
        m = 1.0 + beta / (eta_prime - 2.0) + 0.5
    else:
        m = 2.0
    T = horizon

    def recipe_m_bound(c: float) -> float:
        return max(1.0, m * c**beta * T ** (m - 1.0) + m * c ** (2.0 * beta) * T ** (2.0 * m - 1.0))

    def holds_with_margin(params: SupersolutionParams, x_top: float) -> bool:
        # dense near the small-x crossover, geometric further out; a 2%
        # relative margin keeps the certificate valid on finer user grids
        xs = np.concatenate([np.linspace(0.0, 20.0, 1601), np.geomspace(20.0, x_top, 241)])
        taus = np.linspace(0.0, T, 121)
        xg, tg = np.meshgrid(xs, taus, indexing="ij")
        res = _supersolution_residual(model, params, xg, tg)
        b, mm = params.beta, params.m
        with np.errstate(invalid="ignore"):
            rhs = mm * xg ** (b + 1.0) * tg ** (mm - 1.0) + mm * xg ** (2.0 * b + 1.0) * tg ** (
                2.0 * mm - 1.0
            )
        rhs = np.where(np.isfinite(rhs), rhs, 0.0)
        return bool(np.all(res >= 0.02 * rhs))

    for c in np.geomspace(1.0, 256.0, 49):
        params = SupersolutionParams(beta=beta, m=m, M=recipe_m_bound(float(c)))
        if holds_with_margin(params, x_top=max(100.0, 4.0 * float(c))):
            return params
    return SupersolutionParams(beta=beta, m=m, M=recipe_m_bound(8.0))
