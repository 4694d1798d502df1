"""Backward finite-difference solver for u_t + alpha^2 u_xx / 2 = 0.

The terminal-value problem is degenerate at x = 0 (alpha vanishes there), so
the x = 0 row is never solved: it carries the absorption value g(0) directly.
Super-quadratic volatility growth makes the raw problem ill-posed; the
minimal (expected-payoff) solution is reached by capping the terminal data at
M and letting M grow, which is what solve_minimal drives.

Explicit time stepping is deliberately absent: with alpha^2 = sigma^2 x^4 the
stability bound dt <= dx^2/alpha^2 collapses at large x, so every scheme here
is implicit and each step is one tridiagonal solve.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np
from scipy.linalg import solve_banded

from bubblepde.core import (
    Call,
    CappedCall,
    Constant,
    ConvergenceError,
    Identity,
    MarketSpec,
    NumericError,
    Payoff,
    PiecewiseLinear,
    Put,
    VolModel,
    alpha_eval,
    closed_form_price_x2,
    payoff_eval,
    payoff_flags,
)

__all__ = [
    "Grid1D",
    "SolveConfig",
    "GridPolicy",
    "CapSchedule",
    "PriceSurface",
    "ConvergenceReport",
    "ResidualReport",
    "solve_capped",
    "solve_minimal",
    "pde_residual",
    "nonuniqueness_family",
    "surface_to_csv",
]

UNIFORM = "uniform"
SINH = "sinh"
IMPLICIT_EULER = "implicit-euler"
CRANK_NICOLSON = "crank-nicolson"
DIRICHLET_CAPPED_PAYOFF = "dirichlet-capped-payoff"
NEUMANN_ZERO = "neumann-zero"


@dataclass(frozen=True)
class Grid1D:
    """Spatial/temporal grid on [0, x_max] x [0, T] with nt uniform steps.

    The sinh stretching concentrates nodes near sinh_center with strength
    sinh_intensity (units 1/x): spacing grows roughly geometrically away from
    the center, which resolves the reporting window while keeping the far
    field cheap.
    """

    x_max: float
    nx: int
    nt: int
    stretching: str = UNIFORM
    sinh_center: float = 0.0
    sinh_intensity: float = 2.0

    def __post_init__(self):
        if self.x_max <= 0.0:
            raise ValueError(f"x_max must be positive, got {self.x_max}")
        if self.nx < 16 or self.nt < 16:
            raise ValueError("nx and nt must both be >= 16")
        if self.stretching not in (UNIFORM, SINH):
            raise ValueError(f"unknown stretching {self.stretching!r}")
        if self.sinh_center < 0.0 or self.sinh_intensity <= 0.0:
            raise ValueError("sinh stretching needs center >= 0 and intensity > 0")

    def nodes(self) -> np.ndarray:
        if self.stretching == UNIFORM:
            return np.linspace(0.0, self.x_max, self.nx)
        b = self.sinh_intensity
        s_lo = math.asinh(-b * self.sinh_center)
        s_hi = math.asinh(b * (self.x_max - self.sinh_center))
        s = np.linspace(s_lo, s_hi, self.nx)
        x = self.sinh_center + np.sinh(s) / b
        x[0], x[-1] = 0.0, self.x_max  # pin endpoints against round-off
        return x

    def times(self, horizon: float) -> np.ndarray:
        return np.linspace(0.0, horizon, self.nt)


@dataclass(frozen=True)
class SolveConfig:
    """Scheme and boundary policy for one backward solve.

    far_boundary "dirichlet-capped-payoff" pins u(x_max, t) to the capped
    terminal payoff there; "neumann-zero" imposes a zero first difference.
    cap_M = None means solve with the raw payoff, which is only well posed
    for bounded payoffs. rannacher_steps initial steps are integrated by
    implicit Euler before Crank-Nicolson takes over, damping the
    oscillations kinked terminal data would otherwise inject.
    """

    scheme: str = CRANK_NICOLSON
    rannacher_steps: int = 2
    far_boundary: str = DIRICHLET_CAPPED_PAYOFF
    cap_M: Optional[float] = None
    solver_tolerance: float = 1e-6

    def __post_init__(self):
        if self.scheme not in (IMPLICIT_EULER, CRANK_NICOLSON):
            raise ValueError(f"unknown scheme {self.scheme!r}")
        if self.rannacher_steps < 0:
            raise ValueError("rannacher_steps must be >= 0")
        if self.far_boundary not in (DIRICHLET_CAPPED_PAYOFF, NEUMANN_ZERO):
            raise ValueError(f"unknown far boundary {self.far_boundary!r}")
        if self.cap_M is not None and self.cap_M <= 0.0:
            raise ValueError("cap_M must be positive when given")
        if self.solver_tolerance <= 0.0:
            raise ValueError("solver tolerance must be positive")


@dataclass(frozen=True)
class GridPolicy:
    """Grid sizing for the cap-schedule driver.

    One grid serves every round: x_max is sized for the largest scheduled
    cap up front, so successive rounds share nodes exactly and pointwise
    cap-monotonicity can be checked without interpolation noise.
    """

    nx: int = 800
    nt: int = 800
    x_report: float = 5.0

    def __post_init__(self):
        if self.nx < 16 or self.nt < 16:
            raise ValueError("nx and nt must both be >= 16")
        if self.x_report <= 0.0:
            raise ValueError("x_report must be positive")


@dataclass(frozen=True)
class CapSchedule:
    """Caps M_k = M0 * growth^k for the monotone approximation rounds."""

    M0: float = 4.0
    growth: float = 2.0
    stop_tolerance: float = 1e-3
    max_rounds: int = 8

    def __post_init__(self):
        if self.M0 <= 0.0 or self.stop_tolerance <= 0.0:
            raise ValueError("M0 and stop tolerance must be positive")
        if self.growth <= 1.0:
            raise ValueError(f"growth factor must exceed 1, got {self.growth}")
        if self.max_rounds < 2:
            raise ValueError("max_rounds must be >= 2")

    def caps(self) -> List[float]:
        return [self.M0 * self.growth**k for k in range(self.max_rounds)]


@dataclass
class PriceSurface:
    """Discrete price surface u[i, j] at nodes x_i and times t_j.

    Values are nonnegative; u[0, :] is the absorption value and u[:, -1] the
    terminal payoff. metadata records how the surface was produced.
    """

    grid: Grid1D
    nodes: np.ndarray
    times: np.ndarray
    values: np.ndarray
    metadata: dict = field(default_factory=dict)

    def slice_at(self, t_index: int) -> np.ndarray:
        return self.values[:, t_index]

    def value_at(self, x: float, t_index: int = 0) -> float:
        """Linear interpolation along x at one time layer."""
        if not (0.0 <= x <= self.nodes[-1]):
            raise ValueError(f"x = {x} outside the grid [0, {self.nodes[-1]}]")
        return float(np.interp(x, self.nodes, self.values[:, t_index]))


@dataclass
class ConvergenceReport:
    """Per-round history of the cap schedule.

    window_surfaces holds each round's values restricted to the reporting
    window (same nodes every round), so monotonicity in the cap can be
    checked pointwise after the fact.
    """

    caps: List[float]
    diffs: List[float]
    window_nodes: np.ndarray
    window_surfaces: List[np.ndarray]
    converged: bool


@dataclass
class ResidualReport:
    """Discrete PDE residual on the trimmed interior."""

    sup_norm: float
    field: np.ndarray
    x_nodes: np.ndarray
    t_nodes: np.ndarray


def _d2_rows(nodes: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Three-point second-difference weights on a nonuniform grid.

    Returns (lo, di, up) for interior nodes 1..n-2: the weights of
    u_{i-1}, u_i, u_{i+1} in the u_xx estimate.
    """
    hm = nodes[1:-1] - nodes[:-2]
    hp = nodes[2:] - nodes[1:-1]
    lo = 2.0 / (hm * (hm + hp))
    up = 2.0 / (hp * (hm + hp))
    di = -2.0 / (hm * hp)
    return lo, di, up


def _d1_rows(nodes: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Three-point first-difference weights on a nonuniform grid."""
    hm = nodes[1:-1] - nodes[:-2]
    hp = nodes[2:] - nodes[1:-1]
    lo = -hp / (hm * (hm + hp))
    up = hm / (hp * (hm + hp))
    di = (hp - hm) / (hm * hp)
    return lo, di, up


class _BandedOperator:
    """Tridiagonal form of L = alpha^2 D2 / 2 on the interior rows."""

    def __init__(self, nodes: np.ndarray, alpha2: np.ndarray):
        lo, di, up = _d2_rows(nodes)
        half_a2 = 0.5 * alpha2[1:-1]
        self.lo = half_a2 * lo
        self.di = half_a2 * di
        self.up = half_a2 * up
        self.n = len(nodes)

    def apply(self, u: np.ndarray) -> np.ndarray:
        out = np.zeros_like(u)
        out[1:-1] = self.lo * u[:-2] + self.di * u[1:-1] + self.up * u[2:]
        return out


def _step_matrix(op: _BandedOperator, dt: float, theta: float, neumann_far: bool) -> np.ndarray:
    """Banded matrix of (I - theta dt L) with boundary rows in place."""
    n = op.n
    ab = np.zeros((3, n))
    ab[1, 0] = 1.0  # absorption row: value pinned directly
    ab[1, 1:-1] = 1.0 - theta * dt * op.di
    ab[0, 2:] = -theta * dt * op.up
    ab[2, 0:-2] = -theta * dt * op.lo
    if neumann_far:
        ab[1, -1] = 1.0
        ab[2, -2] = -1.0  # u_N - u_{N-1} = 0
    else:
        ab[1, -1] = 1.0
    return ab


def _banded_matvec(ab: np.ndarray, u: np.ndarray) -> np.ndarray:
    out = ab[1] * u
    out[:-1] += ab[0, 1:] * u[1:]
    out[1:] += ab[2, :-1] * u[:-1]
    return out


def _march(
    nodes: np.ndarray,
    times: np.ndarray,
    alpha2: np.ndarray,
    terminal: np.ndarray,
    bc0: float,
    far_value: Optional[float],
    config: SolveConfig,
) -> np.ndarray:
    """Backward induction; far_value = None means the zero-slope far boundary."""
    nt = len(times)
    dt = times[1] - times[0]
    if config.rannacher_steps > nt / 4:
        raise ValueError("rannacher_steps must not exceed nt/4")
    op = _BandedOperator(nodes, alpha2)
    neumann = far_value is None

    thetas = {}
    for theta in (1.0,) if config.scheme == IMPLICIT_EULER else (1.0, 0.5):
        thetas[theta] = _step_matrix(op, dt, theta, neumann)

    values = np.empty((len(nodes), nt))
    values[:, -1] = terminal
    u = terminal.copy()
    for step in range(1, nt):
        if config.scheme == IMPLICIT_EULER or step <= config.rannacher_steps:
            theta = 1.0
        else:
            theta = 0.5
        rhs = u if theta == 1.0 else u + (1.0 - theta) * dt * op.apply(u)
        rhs = rhs.copy()
        rhs[0] = bc0
        rhs[-1] = 0.0 if neumann else far_value
        ab = thetas[theta]
        try:
            u = solve_banded((1, 1), ab, rhs, overwrite_b=False, check_finite=False)
        except Exception as exc:  # singular system surfaces as a numeric error
            raise NumericError(f"tridiagonal solve failed at step {step}: {exc}") from exc
        if not np.all(np.isfinite(u)):
            raise NumericError(f"non-finite solution at step {step}")
        resid = np.max(np.abs(_banded_matvec(ab, u) - rhs))
        if resid > config.solver_tolerance * (1.0 + np.max(np.abs(rhs))):
            raise NumericError(
                f"tridiagonal solve residual {resid:.3e} exceeds tolerance at step {step}"
            )
        values[:, nt - 1 - step] = u
    return values


def _capped_terminal(payoff: Payoff, nodes: np.ndarray, cap_M: Optional[float]) -> np.ndarray:
    g = payoff_eval(payoff, nodes)
    if cap_M is None:
        return g
    return np.minimum(g, cap_M)


def solve_capped(
    market: MarketSpec,
    payoff: Payoff,
    cap_M: Optional[float],
    grid: Grid1D,
    config: SolveConfig = SolveConfig(),
) -> PriceSurface:
    """Solve the terminal-value problem with terminal data min(g, M).

    Requires rate = 0. The caller is responsible for an x_max large enough
    that min(g, M) is constant near x_max when using the Dirichlet far
    boundary; pinning the far value inside the growing part of the payoff
    instead reproduces the *linear* competing solution, which is exactly the
    diagnostic used to demonstrate nonuniqueness.
    """
    if market.rate != 0.0:
        raise ValueError("the European solver requires rate = 0")
    if cap_M is None and not payoff_flags(payoff).is_bounded:
        raise ValueError("cap_M = None is only legal for bounded payoffs")
    nodes = grid.nodes()
    times = grid.times(market.horizon)
    alpha2 = np.asarray(alpha_eval(market.vol, nodes)) ** 2
    terminal = _capped_terminal(payoff, nodes, cap_M)
    bc0 = float(terminal[0])
    far_value = None if config.far_boundary == NEUMANN_ZERO else float(terminal[-1])
    values = _march(nodes, times, alpha2, terminal, bc0, far_value, config)
    floor = values.min()
    if floor < -1e-8 * max(1.0, np.abs(values).max()):
        raise NumericError(f"solution dipped to {floor:.3e}; scheme unstable on this grid")
    values = np.maximum(values, 0.0)
    return PriceSurface(
        grid=grid,
        nodes=nodes,
        times=times,
        values=values,
        metadata={
            "market": market,
            "payoff": payoff,
            "config": config,
            "cap_M": cap_M,
        },
    )


def _cap_support(payoff: Payoff, cap_M: float) -> float:
    """Smallest x beyond which min(g, M) is constant."""
    if isinstance(payoff, Identity):
        return cap_M
    if isinstance(payoff, Call):
        return payoff.strike + cap_M
    if isinstance(payoff, Put):
        return payoff.strike
    if isinstance(payoff, CappedCall):
        return payoff.strike + min(payoff.cap, cap_M)
    if isinstance(payoff, Constant):
        return 0.0
    if isinstance(payoff, PiecewiseLinear):
        x_last, g_last = payoff.knots[-1]
        if payoff.terminal_slope == 0.0 or g_last >= cap_M:
            return x_last
        return x_last + (cap_M - g_last) / payoff.terminal_slope
    raise TypeError(f"unknown payoff {type(payoff).__name__}")


def _minimal_grid(payoff: Payoff, grid_policy: GridPolicy, schedule: CapSchedule) -> Grid1D:
    """Shared grid for every cap round, sized for the last scheduled cap."""
    caps = schedule.caps()
    x_max = max(4.0 * grid_policy.x_report, 2.0 * _cap_support(payoff, caps[-1]))
    stretching = SINH if x_max > 8.0 * grid_policy.x_report else UNIFORM
    return Grid1D(
        x_max=x_max,
        nx=grid_policy.nx,
        nt=grid_policy.nt,
        stretching=stretching,
        sinh_center=0.0,
        sinh_intensity=10.0 / grid_policy.x_report,
    )


def solve_minimal(
    market: MarketSpec,
    payoff: Payoff,
    grid_policy: GridPolicy = GridPolicy(),
    schedule: CapSchedule = CapSchedule(),
    config: Optional[SolveConfig] = None,
) -> Tuple[PriceSurface, ConvergenceReport]:
    """Approximate the minimal nonnegative solution by growing caps.

    Runs solve_capped with caps M_k = M0 * growth^k on one shared grid and
    stops when successive surfaces agree on the reporting window to the
    schedule's stop tolerance. The shared grid is sized for the last
    scheduled cap so that rounds are comparable node-by-node.

    When config is omitted the far boundary is the zero-slope one: the capped
    solution is flat at large x, while pinning a Dirichlet value inside the
    payoff's growing part would drag the limit toward the linear competing
    solution instead of the minimal one.
    """
    if config is None:
        config = SolveConfig(far_boundary=NEUMANN_ZERO)
    caps = schedule.caps()
    grid = _minimal_grid(payoff, grid_policy, schedule)
    nodes = grid.nodes()
    window = nodes <= grid_policy.x_report

    diffs: List[float] = []
    window_surfaces: List[np.ndarray] = []
    previous: Optional[PriceSurface] = None
    for k, cap in enumerate(caps):
        surface = solve_capped(market, payoff, cap, grid, config)
        window_surfaces.append(surface.values[window, :].copy())
        if previous is not None:
            diff = float(np.max(np.abs(window_surfaces[-1] - window_surfaces[-2])))
            diffs.append(diff)
            if diff < schedule.stop_tolerance:
                report = ConvergenceReport(
                    caps=caps[: k + 1],
                    diffs=diffs,
                    window_nodes=nodes[window],
                    window_surfaces=window_surfaces,
                    converged=True,
                )
                surface.metadata["cap_schedule"] = report.caps
                return surface, report
        previous = surface
    raise ConvergenceError(
        f"cap schedule exhausted after {len(caps)} rounds; last diff {diffs[-1]:.3e}",
        history=diffs,
    )


# Fraction of the horizon treated as the terminal boundary layer. Kinked
# terminal data keeps time derivatives of the true solution unbounded as
# t -> T, so residuals measured inside that layer never refine cleanly.
_TERMINAL_LAYER_FRACTION = 0.05


def pde_residual(surface: PriceSurface, model: VolModel) -> ResidualReport:
    """Central-difference residual of u_t + alpha^2 u_xx / 2 on the interior.

    The reported field excludes two nodes at each spatial boundary and the
    terminal layer: the trailing 5 percent of the horizon (at least the last
    two time levels), where the solution is not yet classical.
    """
    nodes, times, u = surface.nodes, surface.times, surface.values
    if len(nodes) < 7 or len(times) < 5:
        raise ValueError("surface too small for a trimmed interior residual")
    dt = times[1] - times[0]
    horizon = times[-1]
    j_hi = min(
        len(times) - 2,
        int(np.searchsorted(times, (1.0 - _TERMINAL_LAYER_FRACTION) * horizon, side="right")),
    )
    lo, di, up = _d2_rows(nodes)
    alpha2 = np.asarray(alpha_eval(model, nodes)) ** 2
    i_sl = slice(2, len(nodes) - 2)
    j_sl = slice(1, j_hi)
    u_t = (u[i_sl, 2 : j_hi + 1] - u[i_sl, 0 : j_hi - 1]) / (2.0 * dt)
    u_xx = (
        lo[1:-1, None] * u[1 : len(nodes) - 3, j_sl]
        + di[1:-1, None] * u[i_sl, j_sl]
        + up[1:-1, None] * u[3 : len(nodes) - 1, j_sl]
    )
    field = u_t + 0.5 * alpha2[i_sl, None] * u_xx
    return ResidualReport(
        sup_norm=float(np.max(np.abs(field))),
        field=field,
        x_nodes=nodes[i_sl],
        t_nodes=times[j_sl],
    )


def nonuniqueness_family(sigma: float, T_tilde: float, T: float, grid: Grid1D) -> PriceSurface:
    """One member of the infinite family of solutions with zero data.

    v(x, t) = x - u*(x, T_tilde - t) for t <= T_tilde and 0 afterwards, where
    u* is the closed-form minimal price of the linear payoff under
    alpha = sigma x^2. Each v solves the equation with zero terminal data and
    zero absorption value, so adding any multiple to a solution yields
    another: the homogeneous problem has an infinite-dimensional kernel.
    """
    if sigma <= 0.0:
        raise ValueError("sigma must be positive")
    if not (0.0 < T_tilde <= T):
        raise ValueError(f"T_tilde must lie in (0, T], got {T_tilde} with T = {T}")
    nodes = grid.nodes()
    times = grid.times(T)
    values = np.zeros((len(nodes), len(times)))
    for j, t in enumerate(times):
        if t <= T_tilde:
            tau = T_tilde - t
            values[:, j] = nodes - closed_form_price_x2(nodes, tau, sigma)
    return PriceSurface(
        grid=grid,
        nodes=nodes,
        times=times,
        values=values,
        metadata={"family": "homogeneous-kernel", "sigma": sigma, "T_tilde": T_tilde, "T": T},
    )


def surface_to_csv(surface: PriceSurface, path) -> None:
    """Write `x,t,u` rows, outer loop over t, inner over x, full precision."""
    with open(path, "w") as handle:
        handle.write("x,t,u\n")
        for j, t in enumerate(surface.times):
            col = surface.values[:, j]
            for i, x in enumerate(surface.nodes):
                handle.write(f"{float(x)!r},{float(t)!r},{float(col[i])!r}\n")
