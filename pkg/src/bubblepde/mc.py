"""Path simulation with absorption at zero and exact terminal sampling.

The Euler scheme clamps any nonpositive iterate to exactly 0 and freezes it
there, matching the absorbing-state convention; alpha(0) = 0 for every
catalog model, so frozen paths generate zero increments for free.

Draws come from a counter-based generator keyed (seed, chunk index) with a
fixed chunk width, so path i consumes the same normals no matter how many
paths are requested or how the work is split across workers.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from bubblepde.core import (
    Identity,
    MarketSpec,
    Payoff,
    Power,
    alpha_eval,
    normal_cdf,
    payoff_eval,
)

__all__ = [
    "PathConfig",
    "MCEstimate",
    "simulate_terminal",
    "exact_sample_x2",
    "estimate_price",
    "estimate_terminal_price",
    "martingale_defect",
    "terminal_cdf_x2",
    "samples_to_csv",
]

EULER_ABSORBED = "euler-absorbed"
EXACT_RECIPROCAL_BESSEL3 = "exact-reciprocal-bessel3"

# Paths per generator key. Fixed forever: changing it would silently change
# which normals path i sees and break cross-version reproducibility.
_CHUNK = 4096

# Per-step increment cap in multiples of the current state. Only ultra-coarse
# steps under explosive volatility ever trigger it; triggering is flagged.
_INCREMENT_CAP = 50.0


@dataclass(frozen=True)
class PathConfig:
    """Simulation layout: path/step counts, seed, scheme, optional barrier.

    The exact scheme ignores n_steps (it samples the terminal law directly)
    and is legal only for Power(sigma, 2) at zero rate. upper_barrier, when
    set, absorbs a path at the barrier level the first time it is reached.
    """

    n_paths: int
    n_steps: int = 256
    seed: int = 0
    scheme: str = EULER_ABSORBED
    upper_barrier: Optional[float] = None

    def __post_init__(self):
        if self.n_paths < 1 or self.n_steps < 1:
            raise ValueError("n_paths and n_steps must be positive")
        if not (0 <= self.seed < 2**64):
            raise ValueError("seed must fit in 64 unsigned bits")
        if self.scheme not in (EULER_ABSORBED, EXACT_RECIPROCAL_BESSEL3):
            raise ValueError(f"unknown scheme {self.scheme!r}")
        if self.upper_barrier is not None and self.upper_barrier <= 0.0:
            raise ValueError("upper_barrier must be positive when given")


@dataclass(frozen=True)
class MCEstimate:
    """Sample mean with its standard error.

    absorbed_fraction counts terminal values equal to exactly 0;
    increment_clamped reports whether the per-step safeguard fired anywhere,
    which biases the estimate and means n_steps was too coarse.
    """

    mean: float
    stderr: float
    n: int
    absorbed_fraction: float
    increment_clamped: bool = False


def _chunk_normals(seed: int, chunk: int, rows: int, cols: int) -> np.ndarray:
    rng = np.random.Generator(np.random.Philox(key=[seed, chunk]))
    return rng.standard_normal((rows, cols))


def _euler_terminal(
    market: MarketSpec, x0: float, config: PathConfig
) -> Tuple[np.ndarray, bool]:
    dt = market.horizon / config.n_steps
    sq_dt = math.sqrt(dt)
    barrier = config.upper_barrier
    out = np.empty(config.n_paths)
    clamped = False
    for start in range(0, config.n_paths, _CHUNK):
        rows = min(_CHUNK, config.n_paths - start)
        z = _chunk_normals(config.seed, start // _CHUNK, rows, config.n_steps)
        x = np.full(rows, float(x0))
        frozen = x == 0.0
        for k in range(config.n_steps):
            alpha = np.asarray(alpha_eval(market.vol, x))
            inc = market.rate * x * dt + alpha * sq_dt * z[:, k]
            cap = _INCREMENT_CAP * x
            over = np.abs(inc) > cap
            if np.any(over & ~frozen):
                clamped = True
            inc = np.clip(inc, -cap, cap)
            x_new = x + inc
            x_new = np.where(x_new <= 0.0, 0.0, x_new)
            if barrier is not None:
                x_new = np.where(x_new >= barrier, barrier, x_new)
            x = np.where(frozen, x, x_new)
            frozen = (x == 0.0) if barrier is None else (x == 0.0) | (x == barrier)
        out[start : start + rows] = x
    return out, clamped


def exact_sample_x2(x0: float, tau: float, sigma: float, n: int, seed: int = 0) -> np.ndarray:
    """Exact terminal draws for alpha = sigma x^2 started at x0.

    The reciprocal of the process is a three-dimensional Bessel process, so
    X(tau) = 1 / |(1/x0 + B1, B2, B3)| with the B_i independent centered
    Gaussians of variance sigma^2 tau. The norm is nonzero almost surely,
    hence every sample is strictly positive: the exact law never absorbs,
    it only loses mass in expectation.
    """
    if x0 <= 0.0 or tau <= 0.0 or sigma <= 0.0:
        raise ValueError("x0, tau and sigma must all be positive")
    if n < 1:
        raise ValueError("n must be positive")
    scale = sigma * math.sqrt(tau)
    mu = 1.0 / x0
    out = np.empty(n)
    for start in range(0, n, _CHUNK):
        rows = min(_CHUNK, n - start)
        b = scale * _chunk_normals(seed, start // _CHUNK, rows, 3)
        norm = np.sqrt((mu + b[:, 0]) ** 2 + b[:, 1] ** 2 + b[:, 2] ** 2)
        out[start : start + rows] = 1.0 / norm
    return out


def simulate_terminal(market: MarketSpec, x0: float, config: PathConfig) -> np.ndarray:
    """Terminal samples of the absorbed diffusion started at x0.

    Deterministic for a fixed (seed, n_paths, n_steps, scheme); the first k
    samples agree with any longer run of the same configuration.
    """
    samples, _ = _simulate_terminal_info(market, x0, config)
    return samples


def _simulate_terminal_info(
    market: MarketSpec, x0: float, config: PathConfig
) -> Tuple[np.ndarray, bool]:
    if x0 < 0.0:
        raise ValueError(f"x0 must be nonnegative, got {x0}")
    if x0 == 0.0:
        return np.zeros(config.n_paths), False
    if config.scheme == EXACT_RECIPROCAL_BESSEL3:
        if not (isinstance(market.vol, Power) and market.vol.p == 2.0):
            raise ValueError("the exact sampler requires a Power(sigma, 2) model")
        if market.rate != 0.0:
            raise ValueError("the exact sampler requires rate = 0")
        if config.upper_barrier is not None:
            raise ValueError("the exact sampler does not support a barrier")
        return (
            exact_sample_x2(x0, market.horizon, market.vol.sigma, config.n_paths, config.seed),
            False,
        )
    return _euler_terminal(market, x0, config)


def estimate_price(
    samples: np.ndarray, payoff: Payoff, increment_clamped: bool = False
) -> MCEstimate:
    """Mean and standard error of the payoff over terminal samples."""
    arr = np.asarray(samples, dtype=float)
    if arr.size == 0:
        raise ValueError("samples must be nonempty")
    values = np.asarray(payoff_eval(payoff, arr), dtype=float)
    n = arr.size
    mean = float(np.mean(values))
    stderr = float(np.std(values, ddof=1) / math.sqrt(n)) if n > 1 else 0.0
    return MCEstimate(
        mean=mean,
        stderr=stderr,
        n=n,
        absorbed_fraction=float(np.mean(arr == 0.0)),
        increment_clamped=increment_clamped,
    )


def estimate_terminal_price(
    market: MarketSpec, x0: float, payoff: Payoff, config: PathConfig
) -> MCEstimate:
    """Simulate then estimate, carrying the clamp flag into the result."""
    samples, clamped = _simulate_terminal_info(market, x0, config)
    return estimate_price(samples, payoff, increment_clamped=clamped)


def martingale_defect(
    market: MarketSpec, x0: float, tau: float, config: PathConfig
) -> MCEstimate:
    """Estimate x0 - E[X(tau)], the expectation lost to the bubble.

    Zero for true martingales, strictly positive for strict local
    martingales. Defined at zero rate only.
    """
    if market.rate != 0.0:
        raise ValueError("the martingale defect is a zero-rate notion")
    if tau <= 0.0:
        raise ValueError("tau must be positive")
    est = estimate_terminal_price(
        dataclasses.replace(market, horizon=tau), x0, Identity(), config
    )
    return MCEstimate(
        mean=x0 - est.mean,
        stderr=est.stderr,
        n=est.n,
        absorbed_fraction=est.absorbed_fraction,
        increment_clamped=est.increment_clamped,
    )


def terminal_cdf_x2(x, x0: float, tau: float, sigma: float):
    """P(X(tau) <= x) for alpha = sigma x^2 started at x0 > 0, in closed form.

    With R the norm of a Gaussian vector of mean (1/x0, 0, 0) and per-axis
    deviation s = sigma sqrt(tau), the event {X <= x} is {R >= 1/x} and

        F_R(r) = Phi((r-m)/s) + Phi((r+m)/s) - 1
                 + s/(m sqrt(2 pi)) (exp(-(r+m)^2/(2 s^2)) - exp(-(r-m)^2/(2 s^2)))

    with m = 1/x0. Integrating the transition density over (0, x] gives the
    same function, which the tests verify by quadrature.
    """
    if x0 <= 0.0 or tau <= 0.0 or sigma <= 0.0:
        raise ValueError("x0, tau and sigma must all be positive")
    x_arr = np.asarray(x, dtype=float)
    s = sigma * math.sqrt(tau)
    m = 1.0 / x0
    with np.errstate(divide="ignore"):
        r = np.where(x_arr > 0.0, 1.0 / np.where(x_arr > 0.0, x_arr, 1.0), np.inf)
    gauss = normal_cdf((r - m) / s) + normal_cdf((r + m) / s) - 1.0
    tail = (
        s
        / (m * math.sqrt(2.0 * math.pi))
        * (np.exp(-((r + m) ** 2) / (2.0 * s * s)) - np.exp(-((r - m) ** 2) / (2.0 * s * s)))
    )
    cdf = 1.0 - np.clip(gauss + tail, 0.0, 1.0)
    cdf = np.where(x_arr <= 0.0, 0.0, cdf)
    if np.isscalar(x) or np.ndim(x) == 0:
        return float(cdf)
    return cdf


def samples_to_csv(samples: np.ndarray, path) -> None:
    """One terminal value per line, full precision, no header."""
    with open(path, "w") as handle:
        for value in np.asarray(samples, dtype=float):
            handle.write(f"{float(value)!r}\n")
