"""Early-exercise pricing as a sequence of obstacle problems.

Each backward implicit-Euler step solves the complementarity system
max(L_h U, g - U) = 0 by projected SOR. Implicit Euler only: adding a
Crank-Nicolson half-step makes the iteration matrix lose the M-matrix
property at the free boundary and the mask oscillates.

The drift r x U_x is discretized one-sided in the drift direction; with
r >= 0 that keeps every off-diagonal nonpositive, which is what guarantees
PSOR converges for omega in (0, 2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np
from numba import njit
from scipy.linalg import solve_banded

from bubblepde.core import (
    ConvergenceError,
    MarketSpec,
    Payoff,
    alpha_eval,
    payoff_eval,
    payoff_flags,
)
from bubblepde.pde import Grid1D, PriceSurface, _d2_rows

__all__ = [
    "LCPConfig",
    "AmericanSurface",
    "solve_american",
    "capped_vol_american",
    "stopped_american",
    "solve_bermudan",
    "exercise_mask_to_csv",
]

IMPLICIT_EULER = "implicit-euler"


@dataclass(frozen=True)
class LCPConfig:
    """Projected-SOR settings for one obstacle solve per time step."""

    omega: float = 1.5
    tolerance: float = 1e-9
    max_iterations: int = 10_000
    scheme: str = IMPLICIT_EULER

    def __post_init__(self):
        if not (1.0 < self.omega < 2.0):
            raise ValueError(f"omega must lie in (1, 2), got {self.omega}")
        if self.tolerance <= 0.0:
            raise ValueError("tolerance must be positive")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be positive")
        if self.scheme != IMPLICIT_EULER:
            raise ValueError("only the implicit-euler scheme is supported")


@dataclass
class AmericanSurface:
    """Early-exercise value surface with its exercise-region mask.

    exercise[i, j] is True where U - g <= 10 * LCP tolerance; diagnostic
    only, never fed back into the solve. Field layout matches PriceSurface
    so the CSV writer accepts either.
    """

    grid: Grid1D
    nodes: np.ndarray
    times: np.ndarray
    values: np.ndarray
    exercise: np.ndarray
    metadata: dict = field(default_factory=dict)

    def slice_at(self, t_index: int) -> np.ndarray:
        return self.values[:, t_index]

    def value_at(self, x: float, t_index: int = 0) -> float:
        if not (0.0 <= x <= self.nodes[-1]):
            raise ValueError(f"x = {x} outside the grid [0, {self.nodes[-1]}]")
        return float(np.interp(x, self.nodes, self.values[:, t_index]))


@njit(cache=True)
def _psor(lo, di, up, rhs, u, g, omega, tol, max_iter):
    """Projected SOR on rows 1..n-2; u[0] and u[-1] are fixed by the caller.

    Returns (iterations, last sweep change); iterations = -1 on failure.
    """
    n = u.shape[0]
    delta = 0.0
    for it in range(max_iter):
        delta = 0.0
        for i in range(1, n - 1):
            gauss = (rhs[i] - lo[i] * u[i - 1] - up[i] * u[i + 1]) / di[i]
            val = u[i] + omega * (gauss - u[i])
            if val < g[i]:
                val = g[i]
            change = abs(val - u[i])
            if change > delta:
                delta = change
            u[i] = val
        if delta < tol:
            return it + 1, delta
    return -1, delta


def _assemble_rows(
    nodes: np.ndarray, alpha2: np.ndarray, rate: float, dt: float
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Rows of A = I - dt (alpha^2 D2 / 2 + r x D1_upwind - r I)."""
    lo2, di2, up2 = _d2_rows(nodes)
    hp = nodes[2:] - nodes[1:-1]
    half_a2 = 0.5 * alpha2[1:-1]
    conv = rate * nodes[1:-1]
    lo = np.zeros(len(nodes))
    di = np.ones(len(nodes))
    up = np.zeros(len(nodes))
    lo[1:-1] = -dt * half_a2 * lo2
    up[1:-1] = -dt * (half_a2 * up2 + conv / hp)
    di[1:-1] = 1.0 - dt * (half_a2 * di2 - conv / hp - rate)
    return lo, di, up


def _march_lcp(
    nodes: np.ndarray,
    times: np.ndarray,
    alpha2: np.ndarray,
    obstacle: np.ndarray,
    config: LCPConfig,
    rate: float,
) -> np.ndarray:
    """Backward obstacle solve with U pinned to g at both ends of the grid.

    Each layer warm-starts PSOR from the unconstrained tridiagonal solution
    projected onto the obstacle. On diffusion-dominated layers (alpha^2 dt
    far above dx^2) plain sweeps contract too slowly to be usable; the
    projected direct solve leaves only a localized error near the exercise
    boundary, which the sweeps then remove quickly. The fixed point is the
    same either way.
    """
    nt = len(times)
    dt = times[1] - times[0]
    lo, di, up = _assemble_rows(nodes, alpha2, rate, dt)
    ab = np.zeros((3, len(nodes)))
    ab[1, :] = di
    ab[0, 1:] = up[:-1]
    ab[2, :-1] = lo[1:]
    values = np.empty((len(nodes), nt))
    values[:, -1] = obstacle
    for step in range(nt - 2, -1, -1):
        rhs = values[:, step + 1].copy()
        rhs[0] = obstacle[0]
        rhs[-1] = obstacle[-1]
        u = np.maximum(solve_banded((1, 1), ab, rhs, check_finite=False), obstacle)
        u[0] = obstacle[0]
        u[-1] = obstacle[-1]
        iters, delta = _psor(
            lo, di, up, rhs, u, obstacle, config.omega, config.tolerance, config.max_iterations
        )
        if iters < 0:
            raise ConvergenceError(
                f"PSOR did not converge at layer {step}: last change {delta:.3e} "
                f"after {config.max_iterations} iterations",
                history=[delta],
            )
        values[:, step] = u
    return values


def _finish(
    grid: Grid1D,
    nodes: np.ndarray,
    times: np.ndarray,
    values: np.ndarray,
    obstacle: np.ndarray,
    config: LCPConfig,
    metadata: dict,
) -> AmericanSurface:
    exercise = values - obstacle[:, None] <= 10.0 * config.tolerance
    return AmericanSurface(
        grid=grid,
        nodes=nodes,
        times=times,
        values=values,
        exercise=exercise,
        metadata=metadata,
    )


def solve_american(
    market: MarketSpec, payoff: Payoff, grid: Grid1D, config: LCPConfig = LCPConfig()
) -> AmericanSurface:
    """Early-exercise value of the payoff under the absorbed diffusion.

    Far boundary pins U(x_max, t) = g(x_max): exact wherever the far field
    is in the exercise region (any unbounded convex payoff under bubble
    dynamics) or g is flat there (bounded payoffs). The caller picks x_max
    accordingly, as in the European cap-linked sizing.
    """
    nodes = grid.nodes()
    times = grid.times(market.horizon)
    alpha2 = np.asarray(alpha_eval(market.vol, nodes)) ** 2
    obstacle = np.asarray(payoff_eval(payoff, nodes), dtype=float)
    values = _march_lcp(nodes, times, alpha2, obstacle, config, market.rate)
    return _finish(
        grid, nodes, times, values, obstacle, config,
        {"market": market, "payoff": payoff, "config": config, "construction": "american"},
    )


def capped_vol_american(
    market: MarketSpec,
    payoff: Payoff,
    cap_M: float,
    eps: float,
    grid: Grid1D,
    config: LCPConfig = LCPConfig(),
) -> AmericanSurface:
    """Approximation from below: volatility min(alpha, M), payoff (1-eps)g.

    Values increase in M and, for eps > 0, stay below the uncapped value;
    requires a convex payoff, which is the class the approximation serves.
    """
    if not payoff_flags(payoff).is_convex:
        raise ValueError("capped_vol_american requires a convex payoff")
    if cap_M <= 0.0:
        raise ValueError("cap_M must be positive")
    if not (0.0 <= eps < 1.0):
        raise ValueError(f"eps must lie in [0, 1), got {eps}")
    nodes = grid.nodes()
    times = grid.times(market.horizon)
    alpha2 = np.minimum(np.asarray(alpha_eval(market.vol, nodes)), cap_M) ** 2
    obstacle = (1.0 - eps) * np.asarray(payoff_eval(payoff, nodes), dtype=float)
    values = _march_lcp(nodes, times, alpha2, obstacle, config, market.rate)
    return _finish(
        grid, nodes, times, values, obstacle, config,
        {
            "market": market, "payoff": payoff, "config": config,
            "construction": "capped-vol", "cap_M": cap_M, "eps": eps,
        },
    )


def stopped_american(
    market: MarketSpec,
    payoff: Payoff,
    level_M: float,
    grid: Grid1D,
    config: LCPConfig = LCPConfig(),
) -> AmericanSurface:
    """Exercise forced at the first passage over level M.

    Solves the obstacle problem on [0, M] with Dirichlet U = g at the first
    grid node at or above M and U = g frozen beyond it. Requires a
    nonincreasing payoff: for those, stopping above M forfeits nothing of
    value, which is what makes U^M a lower approximation.
    """
    nodes = grid.nodes()
    obstacle = np.asarray(payoff_eval(payoff, nodes), dtype=float)
    if np.any(np.diff(obstacle) > 1e-12):
        raise ValueError("stopped_american requires a nonincreasing payoff")
    if level_M <= 0.0 or level_M > grid.x_max:
        raise ValueError(f"level_M must lie in (0, x_max], got {level_M}")
    pin = int(np.searchsorted(nodes, level_M))
    if pin < 3:
        raise ValueError("level_M leaves too few nodes below it")
    times = grid.times(market.horizon)
    alpha2 = np.asarray(alpha_eval(market.vol, nodes)) ** 2
    values = np.tile(obstacle[:, None], (1, len(times)))
    sub = _march_lcp(
        nodes[: pin + 1], times, alpha2[: pin + 1], obstacle[: pin + 1], config, market.rate
    )
    values[: pin + 1, :] = sub
    return _finish(
        grid, nodes, times, values, obstacle, config,
        {
            "market": market, "payoff": payoff, "config": config,
            "construction": "stopped", "level_M": level_M, "pinned_node": float(nodes[pin]),
        },
    )


def solve_bermudan(
    market: MarketSpec,
    payoff: Payoff,
    n_dates: int,
    grid: Grid1D,
    config: LCPConfig = LCPConfig(),
) -> PriceSurface:
    """Exercise restricted to n_dates equispaced dates (the last is T).

    Plain implicit-Euler continuation between dates, a pointwise
    max(U, g) at each date. n_dates must divide nt - 1 so dates land on
    grid layers. Values increase with nested date sets and approach the
    American value from below.
    """
    if n_dates < 1:
        raise ValueError("n_dates must be positive")
    if (grid.nt - 1) % n_dates != 0:
        raise ValueError(f"n_dates = {n_dates} must divide nt - 1 = {grid.nt - 1}")
    nodes = grid.nodes()
    times = grid.times(market.horizon)
    nt = len(times)
    dt = times[1] - times[0]
    alpha2 = np.asarray(alpha_eval(market.vol, nodes)) ** 2
    g = np.asarray(payoff_eval(payoff, nodes), dtype=float)
    lo, di, up = _assemble_rows(nodes, alpha2, market.rate, dt)
    ab = np.zeros((3, len(nodes)))
    ab[1, :] = di
    ab[0, 1:] = up[:-1]
    ab[2, :-1] = lo[1:]
    ab[1, 0] = 1.0
    ab[0, 1] = 0.0
    ab[1, -1] = 1.0
    ab[2, -2] = 0.0
    stride = (nt - 1) // n_dates
    values = np.empty((len(nodes), nt))
    values[:, -1] = g
    u = g.copy()
    for step in range(nt - 2, -1, -1):
        rhs = u.copy()
        rhs[0] = g[0]
        rhs[-1] = g[-1]
        u = solve_banded((1, 1), ab, rhs, check_finite=False)
        if step % stride == 0 and step > 0:
            u = np.maximum(u, g)
        values[:, step] = u
    return PriceSurface(
        grid=grid, nodes=nodes, times=times, values=values,
        metadata={"market": market, "payoff": payoff, "n_dates": n_dates},
    )


def exercise_mask_to_csv(surface: AmericanSurface, path) -> None:
    """Write `x,t,exercised` rows matching the value CSV's ordering."""
    with open(path, "w") as handle:
        handle.write("x,t,exercised\n")
        for j, t in enumerate(surface.times):
            col = surface.exercise[:, j]
            for i, x in enumerate(surface.nodes):
                handle.write(f"{float(x)!r},{float(t)!r},{int(col[i])}\n")
