"""Batch command-line front end.

Every subcommand reads one TOML config (all keys optional, defaults match
configs/reference.toml), runs an engine operation, and prints a JSON result
envelope to stdout: {"command", "inputs", "scalars", "artifacts",
"wall_ms", "version"}. The inputs echo is the fully resolved config, so a
run can be reproduced from its envelope alone. Exit codes: 0 success, 2
configuration error, 3 numeric or convergence error.
"""

import argparse
import json
import sys
import time
from dataclasses import asdict
from pathlib import Path
from typing import Optional

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # python 3.10
    import tomli as tomllib

from . import __version__
from .core import (
    Call,
    CappedCall,
    Constant,
    Identity,
    MarketSpec,
    NumericError,
    PiecewiseLinear,
    Power,
    PowerLog,
    Put,
    Tabulated,
    classify_martingale,
    closed_form_price_x2,
    default_supersolution_params,
    verify_supersolution,
)
from .mc import (
    PathConfig,
    estimate_terminal_price,
    exact_sample_x2,
    martingale_defect,
    samples_to_csv,
    simulate_terminal,
)
from .pde import (
    CapSchedule,
    Grid1D,
    GridPolicy,
    SolveConfig,
    nonuniqueness_family,
    pde_residual,
    solve_minimal,
    surface_to_csv,
)
from .american import LCPConfig, exercise_mask_to_csv, solve_american
from .analysis import convexity_profile, parity_gap, vol_monotonicity


class ConfigError(ValueError):
    """Configuration problem; maps to exit code 2."""


_MODEL_KEYS = {
    "power": {"model", "sigma", "p"},
    "power-log": {"model", "sigma"},
    "tabulated": {"model", "knots", "extrapolation_exponent"},
}

_PAYOFF_KEYS = {
    "identity": {"kind"},
    "call": {"kind", "strike"},
    "put": {"kind", "strike"},
    "capped-call": {"kind", "strike", "cap"},
    "constant": {"kind", "value"},
    "piecewise-linear": {"kind", "knots", "terminal_slope"},
}

_GRID_KEYS = {"nx", "nt", "x_report", "x_max", "stretching", "sinh_center", "sinh_intensity"}

_SOLVER_KEYS = {
    "scheme", "rannacher_steps", "far_boundary", "solver_tolerance",
    "cap_m0", "cap_growth", "cap_stop_tolerance", "cap_max_rounds",
    "omega", "lcp_tolerance", "lcp_max_iterations",
    "n_paths", "n_steps", "mc_scheme", "upper_barrier",
    "x0", "tau", "strike", "route", "t_tilde", "shape_tol", "beta", "x_top",
}

_OUTPUT_KEYS = {"directory", "surface_csv", "mask_csv", "samples_csv", "probes"}

_TOP_KEYS = {"seed", "market", "payoff", "grid", "solver", "sweep", "output"}

_GRID_DEFAULTS = {
    "nx": 800, "nt": 800, "x_report": 5.0,
    "x_max": 64.0, "stretching": "sinh", "sinh_center": 0.0, "sinh_intensity": 2.0,
}

_SOLVER_DEFAULTS = {
    "scheme": "crank-nicolson", "rannacher_steps": 2,
    "far_boundary": "neumann-zero", "solver_tolerance": 1e-6,
    "cap_m0": 4.0, "cap_growth": 2.0, "cap_stop_tolerance": 1e-3, "cap_max_rounds": 8,
    "omega": 1.5, "lcp_tolerance": 1e-9, "lcp_max_iterations": 10_000,
    "n_paths": 100_000, "n_steps": 256, "mc_scheme": "euler-absorbed",
    "upper_barrier": 0.0,  # 0 disables the barrier
    "x0": 1.0, "tau": 1.0, "strike": 1.0, "route": "pde", "t_tilde": 1.0,
    "shape_tol": "auto", "beta": 0.5, "x_top": 100.0,
}

_OUTPUT_DEFAULTS = {
    "directory": "out", "surface_csv": "", "mask_csv": "", "samples_csv": "",
    "probes": [0.5, 1.0, 2.0, 5.0],
}


def _check_keys(section: str, mapping: dict, allowed: set) -> None:
    for key in mapping:
        if key not in allowed:
            raise ConfigError(f"unknown key {section}.{key}")


def _model_from(section: dict, where: str):
    name = section.get("model", "power")
    if name not in _MODEL_KEYS:
        raise ConfigError(
            f"{where}.model must be one of {sorted(_MODEL_KEYS)}, got {name!r}"
        )
    _check_keys(where, section, _MODEL_KEYS[name] | {"rate", "horizon"})
    if name == "power":
        return Power(sigma=float(section.get("sigma", 1.0)), p=float(section.get("p", 2.0)))
    if name == "power-log":
        return PowerLog(sigma=float(section.get("sigma", 1.0)))
    knots = section.get("knots")
    if knots is None:
        raise ConfigError(f"{where}.knots is required for the tabulated model")
    return Tabulated(
        knots=tuple((float(a), float(b)) for a, b in knots),
        extrapolation_exponent=float(section.get("extrapolation_exponent", 1.0)),
    )


def _market_from(section: dict) -> MarketSpec:
    vol = _model_from(section, "market")
    return MarketSpec(
        vol=vol,
        rate=float(section.get("rate", 0.0)),
        horizon=float(section.get("horizon", 1.0)),
    )


_MODEL_NAMES = {Power: "power", PowerLog: "power-log", Tabulated: "tabulated"}


def _model_echo(vol) -> dict:
    return {"model": _MODEL_NAMES[type(vol)], **asdict(vol)}


def _market_echo(market: MarketSpec) -> dict:
    echo = _model_echo(market.vol)
    echo["rate"] = market.rate
    echo["horizon"] = market.horizon
    return echo


def _payoff_from(section: dict):
    kind = section.get("kind", "identity")
    if kind not in _PAYOFF_KEYS:
        raise ConfigError(
            f"payoff.kind must be one of {sorted(_PAYOFF_KEYS)}, got {kind!r}"
        )
    _check_keys("payoff", section, _PAYOFF_KEYS[kind])

    def need(key):
        if key not in section:
            raise ConfigError(f"payoff.{key} is required for kind {kind!r}")
        return section[key]

    if kind == "identity":
        return Identity()
    if kind == "call":
        return Call(strike=float(need("strike")))
    if kind == "put":
        return Put(strike=float(need("strike")))
    if kind == "capped-call":
        return CappedCall(strike=float(need("strike")), cap=float(need("cap")))
    if kind == "constant":
        return Constant(value=float(need("value")))
    return PiecewiseLinear(
        knots=tuple((float(a), float(b)) for a, b in need("knots")),
        terminal_slope=float(section.get("terminal_slope", 0.0)),
    )


class RunConfig:
    """Everything a subcommand can need, resolved from one TOML file."""

    def __init__(self, raw: dict):
        _check_keys("config", raw, _TOP_KEYS)
        for name in ("market", "payoff", "grid", "solver", "sweep", "output"):
            if name in raw and not isinstance(raw[name], dict):
                raise ConfigError(f"config.{name} must be a section")

        market_raw = {"model": "power", "sigma": 1.0, "p": 2.0}
        user_market = dict(raw.get("market", {}))
        if "model" in user_market and user_market["model"] != "power":
            market_raw = {}  # model-specific defaults do not carry over
        market_raw.update(user_market)
        market_raw.setdefault("rate", 0.0)
        market_raw.setdefault("horizon", 1.0)

        payoff_raw = dict(raw.get("payoff", {})) or {"kind": "identity"}
        grid_raw = {**_GRID_DEFAULTS, **raw.get("grid", {})}
        _check_keys("grid", grid_raw, _GRID_KEYS)
        solver_raw = {**_SOLVER_DEFAULTS, **raw.get("solver", {})}
        solver_raw.setdefault("tau", market_raw["horizon"])
        solver_raw.setdefault("t_tilde", market_raw["horizon"])
        _check_keys("solver", solver_raw, _SOLVER_KEYS)
        output_raw = {**_OUTPUT_DEFAULTS, **raw.get("output", {})}
        _check_keys("output", output_raw, _OUTPUT_KEYS)

        self.seed = int(raw.get("seed", 0))
        if not (0 <= self.seed < 2**64):
            raise ConfigError(f"seed must fit in 64 unsigned bits, got {self.seed}")
        self.market = _market_from(market_raw)
        self.payoff = _payoff_from(payoff_raw)
        self.sweep_model = None
        if "sweep" in raw:
            self.sweep_model = _model_from(dict(raw["sweep"]), "sweep")

        self.grid_policy = GridPolicy(
            nx=int(grid_raw["nx"]), nt=int(grid_raw["nt"]),
            x_report=float(grid_raw["x_report"]),
        )
        self.grid = Grid1D(
            x_max=float(grid_raw["x_max"]), nx=int(grid_raw["nx"]), nt=int(grid_raw["nt"]),
            stretching=str(grid_raw["stretching"]),
            sinh_center=float(grid_raw["sinh_center"]),
            sinh_intensity=float(grid_raw["sinh_intensity"]),
        )
        self.schedule = CapSchedule(
            M0=float(solver_raw["cap_m0"]), growth=float(solver_raw["cap_growth"]),
            stop_tolerance=float(solver_raw["cap_stop_tolerance"]),
            max_rounds=int(solver_raw["cap_max_rounds"]),
        )
        self.solve_config = SolveConfig(
            scheme=str(solver_raw["scheme"]),
            rannacher_steps=int(solver_raw["rannacher_steps"]),
            far_boundary=str(solver_raw["far_boundary"]),
            solver_tolerance=float(solver_raw["solver_tolerance"]),
        )
        self.lcp_config = LCPConfig(
            omega=float(solver_raw["omega"]),
            tolerance=float(solver_raw["lcp_tolerance"]),
            max_iterations=int(solver_raw["lcp_max_iterations"]),
        )
        barrier = float(solver_raw["upper_barrier"])
        self.path_config = PathConfig(
            n_paths=int(solver_raw["n_paths"]), n_steps=int(solver_raw["n_steps"]),
            seed=self.seed, scheme=str(solver_raw["mc_scheme"]),
            upper_barrier=barrier if barrier > 0.0 else None,
        )
        self.solver = solver_raw
        self.output = output_raw
        probes = output_raw["probes"]
        if not probes or any(float(p) <= 0.0 for p in probes):
            raise ConfigError("output.probes must be a nonempty list of positive values")
        self.probes = [float(p) for p in probes]

        self.echo = {
            "seed": self.seed,
            "market": _market_echo(self.market),
            "payoff": {"kind": payoff_raw.get("kind", "identity"), **asdict(self.payoff)},
            "grid": grid_raw,
            "solver": solver_raw,
            "output": output_raw,
        }
        if self.sweep_model is not None:
            self.echo["sweep"] = _model_echo(self.sweep_model)


def _load_config(path: Optional[str]) -> RunConfig:
    if path is None:
        return RunConfig({})
    file_path = Path(path)
    if not file_path.exists():
        raise ConfigError(f"config file not found: {path}")
    try:
        raw = tomllib.loads(file_path.read_text())
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"config file does not parse: {exc}") from exc
    return RunConfig(raw)


def _scalar(value, note: str, stderr: Optional[float] = None) -> dict:
    entry = {"value": value, "note": note}
    if stderr is not None:
        entry["stderr"] = stderr
    return entry


def _artifact_path(output: dict, key: str) -> Optional[Path]:
    name = output.get(key, "")
    if not name:
        return None
    directory = Path(output["directory"])
    directory.mkdir(parents=True, exist_ok=True)
    return directory / name


def _probe_scalars(surface, probes, note: str) -> dict:
    return {
        f"price(x={probe:g})": _scalar(surface.value_at(probe, 0), note)
        for probe in probes
    }


# ---------------------------------------------------------------------------
# subcommand runners: each returns (scalars, artifact paths)
# ---------------------------------------------------------------------------


def _run_price_euro(cfg: RunConfig):
    surface, report = solve_minimal(
        cfg.market, cfg.payoff, cfg.grid_policy, cfg.schedule, cfg.solve_config
    )
    scalars = _probe_scalars(surface, cfg.probes, "minimal-solution value at t = 0")
    scalars["cap_rounds"] = _scalar(len(report.caps), "cap rounds until the window settled")
    scalars["last_cap_diff"] = _scalar(
        report.diffs[-1], "sup difference between the last two cap rounds on the window"
    )
    artifacts = []
    path = _artifact_path(cfg.output, "surface_csv")
    if path is not None:
        surface_to_csv(surface, path)
        artifacts.append(path)
    return scalars, artifacts


def _run_price_amer(cfg: RunConfig):
    surface = solve_american(cfg.market, cfg.payoff, cfg.grid, cfg.lcp_config)
    scalars = _probe_scalars(surface, cfg.probes, "early-exercise value at t = 0")
    scalars["exercise_fraction"] = _scalar(
        float(np.mean(surface.exercise)), "share of grid nodes in the exercise region"
    )
    artifacts = []
    path = _artifact_path(cfg.output, "surface_csv")
    if path is not None:
        surface_to_csv(surface, path)
        artifacts.append(path)
    mask = _artifact_path(cfg.output, "mask_csv")
    if mask is not None:
        exercise_mask_to_csv(surface, mask)
        artifacts.append(mask)
    return scalars, artifacts


def _run_mc(cfg: RunConfig):
    x0 = float(cfg.solver["x0"])
    estimate = estimate_terminal_price(cfg.market, x0, cfg.payoff, cfg.path_config)
    scalars = {
        "price": _scalar(
            estimate.mean, f"payoff mean over {estimate.n} terminal samples",
            stderr=estimate.stderr,
        ),
        "absorbed_fraction": _scalar(
            estimate.absorbed_fraction, "share of paths absorbed at zero"
        ),
        "increment_clamped": _scalar(
            estimate.increment_clamped,
            "true when the per-step increment safeguard fired; means n_steps too coarse",
        ),
    }
    artifacts = []
    path = _artifact_path(cfg.output, "samples_csv")
    if path is not None:
        # same seed as the estimate, so the file matches the numbers above
        samples_to_csv(simulate_terminal(cfg.market, x0, cfg.path_config), path)
        artifacts.append(path)
    return scalars, artifacts


def _run_defect(cfg: RunConfig):
    estimate = martingale_defect(
        cfg.market, float(cfg.solver["x0"]), float(cfg.solver["tau"]), cfg.path_config
    )
    scalars = {
        "defect": _scalar(
            estimate.mean, "x0 - E[X(tau)]; zero for true martingales",
            stderr=estimate.stderr,
        ),
        "absorbed_fraction": _scalar(
            estimate.absorbed_fraction, "share of paths absorbed at zero"
        ),
    }
    return scalars, []


def _run_classify(cfg: RunConfig):
    verdict = classify_martingale(cfg.market.vol)
    scalars = {
        "verdict": _scalar(
            verdict.verdict,
            "strict-local-martingale | true-martingale | inconclusive",
        ),
        "fitted_eta": _scalar(
            verdict.evidence.fitted_eta, "fitted growth exponent of alpha over the probe range"
        ),
        "fitted_eps": _scalar(
            verdict.evidence.fitted_eps, "fitted margin in the linear-growth bound"
        ),
    }
    return scalars, []


def _run_nonunique(cfg: RunConfig):
    vol = cfg.market.vol
    if not (isinstance(vol, Power) and vol.p == 2.0):
        raise ConfigError("nonunique requires market.model = power with p = 2")
    t_tilde = float(cfg.solver["t_tilde"])
    surface = nonuniqueness_family(vol.sigma, t_tilde, cfg.market.horizon, cfg.grid)
    residual = pde_residual(surface, vol)
    scalars = {
        f"value(x={probe:g})": _scalar(
            surface.value_at(probe, 0), "competing-solution value at t = 0"
        )
        for probe in cfg.probes
    }
    scalars["residual_sup"] = _scalar(
        residual.sup_norm, "sup of the interior PDE residual of the competing solution"
    )
    artifacts = []
    path = _artifact_path(cfg.output, "surface_csv")
    if path is not None:
        surface_to_csv(surface, path)
        artifacts.append(path)
    return scalars, artifacts


def _run_sweep_vol(cfg: RunConfig):
    if cfg.sweep_model is None:
        raise ConfigError("sweep-vol requires a [sweep] section with the second model")
    report = vol_monotonicity(
        cfg.market.vol, cfg.sweep_model, cfg.payoff,
        horizon=cfg.market.horizon, grid_policy=cfg.grid_policy, schedule=cfg.schedule,
    )
    scalars = {
        "direction": _scalar(report.direction, "which solve the payoff shape puts on top"),
        "min_gap": _scalar(
            report.min_gap, "pointwise min of the predicted difference over the window"
        ),
        "holds": _scalar(report.holds, f"min_gap >= -{report.tolerance}"),
    }
    return scalars, []


def _run_shape(cfg: RunConfig):
    surface, _ = solve_minimal(
        cfg.market, cfg.payoff, cfg.grid_policy, cfg.schedule, cfg.solve_config
    )
    tol = cfg.solver["shape_tol"]
    verdict = convexity_profile(surface, 0, None if tol == "auto" else float(tol))
    scalars = {
        "verdict": _scalar(verdict.verdict, "convex | concave | linear | mixed"),
        "worst_violation": _scalar(
            verdict.worst_violation, "largest second difference against the verdict"
        ),
        "location": _scalar(verdict.location, "node index of the worst violation"),
        "tolerance": _scalar(verdict.tolerance, "second-difference tolerance used"),
    }
    return scalars, []


def _run_parity(cfg: RunConfig):
    vol = cfg.market.vol
    quadratic = isinstance(vol, Power) and vol.p == 2.0
    sigma = getattr(vol, "sigma", 1.0)
    strike = float(cfg.solver["strike"])
    x0 = float(cfg.solver["x0"])
    tau = float(cfg.solver["tau"])
    route = str(cfg.solver["route"])
    n_paths = int(cfg.solver["n_paths"])
    gap = parity_gap(
        sigma, strike, x0, tau, route=route,
        model=None if quadratic else vol,
        grid_policy=cfg.grid_policy, schedule=cfg.schedule,
        n_paths=n_paths, seed=cfg.seed,
    )
    stderr = None
    if route == "mc":
        samples = exact_sample_x2(x0, tau, sigma, n_paths, cfg.seed)
        stderr = float(np.std(samples, ddof=1) / np.sqrt(n_paths))
    scalars = {
        "gap": _scalar(
            gap, "C - P - (x0 - strike); equals minus the defect in a bubble",
            stderr=stderr,
        )
    }
    return scalars, []


def _run_verify_supersolution(cfg: RunConfig):
    params = default_supersolution_params(
        cfg.market.vol, cfg.market.horizon, beta=float(cfg.solver["beta"])
    )
    report = verify_supersolution(
        cfg.market.vol, params,
        x_range=(0.0, float(cfg.solver["x_top"])),
        tau_range=(0.0, cfg.market.horizon),
    )
    scalars = {
        "certified": _scalar(
            report.certified, "no failing grid points in the supersolution inequality"
        ),
        "min_residual": _scalar(report.min_residual, "worst inequality slack on the grid"),
        "n_failing": _scalar(len(report.failing_points), "grid points violating the inequality"),
        "beta": _scalar(params.beta, "supersolution exponent"),
        "m": _scalar(params.m, "supersolution time power"),
        "M_bound": _scalar(params.M, "small-x bound in the certificate"),
    }
    return scalars, []


def _run_reproduce_paper(out_dir: str):
    probes = [0.5, 1.0, 2.0, 5.0]
    market = MarketSpec(vol=Power(sigma=1.0, p=2.0), rate=0.0, horizon=1.0)

    surface, _ = solve_minimal(market, Identity())
    exact = {p: closed_form_price_x2(p, 1.0, 1.0) for p in probes}
    pde_vals = {p: surface.value_at(p, 0) for p in probes}

    mc_config = PathConfig(n_paths=200_000, seed=0, scheme="exact-reciprocal-bessel3")
    mc_price = estimate_terminal_price(market, 1.0, Identity(), mc_config)
    defect = martingale_defect(market, 1.0, 1.0, mc_config)

    shape = convexity_profile(surface, 0)

    coarse = nonuniqueness_family(1.0, 1.0, 1.0, Grid1D(x_max=20.0, nx=201, nt=101))
    fine = nonuniqueness_family(1.0, 1.0, 1.0, Grid1D(x_max=20.0, nx=401, nt=201))
    res_coarse = pde_residual(coarse, market.vol).sup_norm
    res_fine = pde_residual(fine, market.vol).sup_norm
    v_at_1 = fine.value_at(1.0, 0)

    rows = [("quantity", "reference", "computed", "abs error")]
    for p in probes:
        rows.append(
            (f"u(x={p:g}, t=0)", f"{exact[p]:.7f}", f"{pde_vals[p]:.7f}",
             f"{abs(pde_vals[p] - exact[p]):.2e}")
        )
    rows.append(
        ("mc price (x0=1)", f"{exact[1.0]:.7f}",
         f"{mc_price.mean:.7f} +- {mc_price.stderr:.1e}",
         f"{abs(mc_price.mean - exact[1.0]):.2e}")
    )
    rows.append(
        ("martingale defect", "0.3173105",
         f"{defect.mean:.7f} +- {defect.stderr:.1e}",
         f"{abs(defect.mean - 0.3173105078629141):.2e}")
    )
    rows.append(("slice shape at t=0", "concave", shape.verdict, "-"))
    rows.append(
        ("competing solution v(1,0)", "0.3173105", f"{v_at_1:.7f}",
         f"{abs(v_at_1 - 0.3173105078629141):.2e}")
    )
    rows.append(
        ("residual refinement factor", ">= 3",
         f"{res_coarse / res_fine:.2f}", "-")
    )

    directory = Path(out_dir)
    directory.mkdir(parents=True, exist_ok=True)
    table_path = directory / "summary.txt"
    widths = [max(len(row[k]) for row in rows) for k in range(4)]
    lines = [
        "  ".join(cell.ljust(width) for cell, width in zip(row, widths)).rstrip()
        for row in rows
    ]
    lines.insert(1, "  ".join("-" * width for width in widths))
    table_path.write_text("\n".join(lines) + "\n")

    scalars = {
        "pde_price(x=1)": _scalar(pde_vals[1.0], "minimal-solution value at t = 0"),
        "closed_form(x=1)": _scalar(exact[1.0], "reference value"),
        "mc_price(x=1)": _scalar(
            mc_price.mean, "exact-sampler mean", stderr=mc_price.stderr
        ),
        "defect(x=1)": _scalar(defect.mean, "x0 - E[X(T)]", stderr=defect.stderr),
        "shape_verdict": _scalar(shape.verdict, "slice shape of the minimal solution at t = 0"),
        "nonunique_v(x=1)": _scalar(v_at_1, "competing-solution value at t = 0"),
        "residual_factor": _scalar(
            res_coarse / res_fine, "competing-solution residual drop under 2x refinement"
        ),
    }
    return scalars, [table_path]


_RUNNERS = {
    "price-euro": _run_price_euro,
    "price-amer": _run_price_amer,
    "mc": _run_mc,
    "defect": _run_defect,
    "classify": _run_classify,
    "nonunique": _run_nonunique,
    "sweep-vol": _run_sweep_vol,
    "shape": _run_shape,
    "parity": _run_parity,
    "verify-supersolution": _run_verify_supersolution,
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bubblepde",
        description="Pricing and verification runs for bubble diffusion models",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _RUNNERS:
        cmd = sub.add_parser(name)
        cmd.add_argument("--config", default=None, help="TOML run configuration")
        if name == "classify":
            cmd.add_argument("--model", default=None, choices=sorted(_MODEL_KEYS))
            cmd.add_argument("--sigma", type=float, default=None)
            cmd.add_argument("--p", type=float, default=None)
    rp = sub.add_parser("reproduce-paper")
    rp.add_argument("--out-dir", default="out")
    return parser


def dispatch(argv) -> int:
    """Run one subcommand; print the JSON envelope; return the exit code."""
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code else 0

    start = time.monotonic()
    try:
        if args.command == "reproduce-paper":
            scalars, artifacts = _run_reproduce_paper(args.out_dir)
            inputs = {"out_dir": args.out_dir}
        else:
            cfg = _load_config(args.config)
            if args.command == "classify":
                overrides = {
                    key: value
                    for key, value in (("model", args.model), ("sigma", args.sigma), ("p", args.p))
                    if value is not None
                }
                if overrides:
                    base = dict(cfg.echo["market"])
                    if "model" in overrides and overrides["model"] != base.get("model"):
                        base = {"rate": base["rate"], "horizon": base["horizon"]}
                    base.update(overrides)
                    cfg.market = _market_from(base)
                    cfg.echo["market"] = _market_echo(cfg.market)
            scalars, artifacts = _RUNNERS[args.command](cfg)
            inputs = cfg.echo
    except NumericError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (ConfigError, ValueError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    envelope = {
        "command": args.command,
        "inputs": inputs,
        "scalars": scalars,
        "artifacts": [str(path) for path in artifacts],
        "wall_ms": int((time.monotonic() - start) * 1000.0),
        "version": __version__,
    }
    print(json.dumps(envelope, indent=2))
    return 0


def main() -> None:
    sys.exit(dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()
