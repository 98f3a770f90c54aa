"""Command line interface.

Five subcommands, each writing one delimited table plus a rendered PNG
figure next to it (unless --no-figure):

  paths        a handful of chain trajectories on the time grid
  scalefactor  the step-size map over a state grid
  cdf          empirical terminal distribution vs. the reference law
  rate         Monte Carlo error against h with fitted log-log slopes
  conda        sup |exit-time budget - h| / h over a compact window

Options come from flags, or from a TOML file via --config (flags win).
The file may also define a custom model through [space] and [measure]
sections.  Exit codes: 0 success, 1 invalid input, 2 numeric failure.
"""

from __future__ import annotations

import argparse
import math
import re
import sys
from typing import Optional

import numpy as np

try:
    import tomllib
except ImportError:  # Python < 3.11
    import tomli as tomllib

from .chains import extend_measure, fold_path, simulate_path
from .errors import NumericError
from .measures import condition_a_diagnostic, measure_from_config, space_from_config
from .models import ModelSpec, default_cantor_level, make_model, model_names
from .montecarlo import (
    empirical_cdf,
    prepare_chain,
    rate_fit,
    resolve_steps,
    simulate_terminal,
)
from .reports import write_table
from .scale import CantorLevel, Emcel, WeakEuler, build_scale_factor

__all__ = ["main"]

_MODEL_KEYS = {"name", "sigma", "theta", "level", "y0"}
_RUN_KEYS = {
    "h",
    "t",
    "paths",
    "n",
    "seed",
    "z",
    "grid",
    "h_list",
    "window",
    "strategy",
    "tol",
    "out",
    "strict",
    "figure",
    "workers",
    "grid_points",
}
_SECTIONS = {"model", "run", "space", "measure"}

_DEFAULT_GRIDS = {
    "brownian": "-3:3:601",
    "sticky": "-3:3:601",
    "reflected-sticky": "-3:3:601",
    "gbm": "0.25:4:601",
    "cantor": "-0.2:1.2:701",
}

_DEFAULT_WINDOWS = {
    "brownian": "-1:1",
    "sticky": "-1:1",
    "reflected-sticky": "-1:1",
    "gbm": "0.5:2",
    "cantor": "-0.2:1.2",
}


def _parse_number(text) -> float:
    """Parse a float, allowing the power notation 2^-10."""
    if isinstance(text, (int, float)):
        return float(text)
    s = str(text).strip()
    if "^" in s:
        base, _, exp = s.partition("^")
        try:
            return float(base) ** float(exp)
        except ValueError:
            raise ValueError(f"could not parse number {text!r}") from None
    try:
        return float(s)
    except ValueError:
        raise ValueError(f"could not parse number {text!r}") from None


def _parse_h_list(value) -> list[float]:
    """List of step sizes: TOML array, comma list, or a halving range a..b."""
    if isinstance(value, (list, tuple)):
        return [_parse_number(v) for v in value]
    s = str(value).strip()
    if ".." in s:
        first_text, _, last_text = s.partition("..")
        first = _parse_number(first_text)
        last = _parse_number(last_text)
        if not (first > 0 and last > 0):
            raise ValueError(f"h-list: range endpoints must be positive, got {s!r}")
        factor = 0.5 if first >= last else 2.0
        vals = [first]
        for _ in range(200):
            if abs(vals[-1] - last) <= 1e-12 * last:
                vals[-1] = last
                return vals
            vals.append(vals[-1] * factor)
        raise ValueError(f"h-list: {last_text!r} is not reachable from {first_text!r} by halving/doubling")
    vals = [_parse_number(p) for p in s.split(",") if p.strip()]
    if not vals:
        raise ValueError("h-list: empty list")
    return vals


def _parse_grid(value) -> np.ndarray:
    """State grid: 'lo:hi:count' or a comma list of values."""
    if isinstance(value, (list, tuple)):
        return np.asarray([_parse_number(v) for v in value], dtype=float)
    s = str(value).strip()
    parts = s.split(":")
    if len(parts) == 3:
        lo, hi = _parse_number(parts[0]), _parse_number(parts[1])
        count = int(parts[2])
        if count < 2:
            raise ValueError(f"grid: need at least 2 points, got {count}")
        if not lo < hi:
            raise ValueError(f"grid: need lo < hi, got {s!r}")
        return np.linspace(lo, hi, count)
    return np.asarray([_parse_number(p) for p in s.split(",") if p.strip()], dtype=float)


def _parse_window(value) -> tuple[float, float]:
    """Compact window 'lo:hi'."""
    if isinstance(value, (list, tuple)) and len(value) == 2:
        return _parse_number(value[0]), _parse_number(value[1])
    parts = str(value).strip().split(":")
    if len(parts) != 2:
        raise ValueError(f"window: expected 'lo:hi', got {value!r}")
    lo, hi = _parse_number(parts[0]), _parse_number(parts[1])
    if not lo < hi:
        raise ValueError(f"window: need lo < hi, got {value!r}")
    return lo, hi


def _load_config(path: Optional[str]) -> dict:
    if path is None:
        return {}
    try:
        with open(path, "rb") as fh:
            cfg = tomllib.load(fh)
    except FileNotFoundError:
        raise ValueError(f"config file not found: {path}") from None
    except tomllib.TOMLDecodeError as exc:
        raise ValueError(f"config file {path}: {exc}") from None
    unknown = set(cfg) - _SECTIONS
    if unknown:
        raise ValueError(f"config file {path}: unknown sections {sorted(unknown)}; expected {sorted(_SECTIONS)}")
    model_cfg = cfg.get("model", {})
    run_cfg = {str(k).replace("-", "_"): v for k, v in cfg.get("run", {}).items()}
    bad = set(model_cfg) - _MODEL_KEYS
    if bad:
        raise ValueError(f"config [model]: unknown keys {sorted(bad)}")
    bad = set(run_cfg) - _RUN_KEYS
    if bad:
        raise ValueError(f"config [run]: unknown keys {sorted(bad)}")
    cfg["model"] = model_cfg
    cfg["run"] = run_cfg
    return cfg


def _pick(flag_value, section: dict, key: str, default=None):
    if flag_value is not None:
        return flag_value
    if key in section:
        return section[key]
    return default


class _Resolved:
    """Flags merged over the config file for one invocation."""

    def __init__(self, args, cfg: dict):
        self.args = args
        self.model_cfg = cfg.get("model", {})
        self.run_cfg = cfg.get("run", {})
        self.cfg = cfg

    def run(self, key: str, default=None):
        return _pick(getattr(self.args, key, None), self.run_cfg, key, default)

    def number(self, key: str, default=None) -> Optional[float]:
        raw = self.run(key, default)
        return None if raw is None else _parse_number(raw)

    def integer(self, key: str, default=None) -> Optional[int]:
        raw = self.run(key, default)
        return None if raw is None else int(raw)

    def flag_bool(self, key: str, default: bool) -> bool:
        return bool(self.run(key, default))


def _build_model(res: _Resolved) -> ModelSpec:
    args = res.args
    if "space" in res.cfg or "measure" in res.cfg:
        if args.model is not None or "name" in res.model_cfg:
            raise ValueError("a model name cannot be combined with a custom [space]/[measure] config")
        space = space_from_config(res.cfg.get("space", {}))
        measure = measure_from_config(space, res.cfg.get("measure", {}))
        y0 = _pick(args.y0, res.model_cfg, "y0")
        if y0 is None:
            raise ValueError("custom models need a starting state: set --y0 or [model] y0")
        y0 = float(y0)
        if not space.in_state_set(y0):
            raise ValueError(f"y0: state {y0} lies outside the custom model's state set")
        tol = res.number("tol")
        return ModelSpec(
            name="custom",
            space=space,
            measure=measure,
            y0=y0,
            default_strategy=Emcel(tol),
            params={"space": res.cfg.get("space", {}), "measure": res.cfg.get("measure", {}), "y0": y0},
        )
    name = _pick(args.model, res.model_cfg, "name", "brownian")
    sigma = float(_pick(args.sigma, res.model_cfg, "sigma", 1.0))
    theta = float(_pick(args.theta, res.model_cfg, "theta", 1.0))
    level = _pick(args.level, res.model_cfg, "level")
    y0 = _pick(args.y0, res.model_cfg, "y0")
    if level is not None:
        level = int(level)
    if y0 is not None:
        y0 = float(y0)
    return make_model(name, sigma=sigma, theta=theta, level=level, y0=y0)


def _with_default_level(model: ModelSpec, h: float) -> ModelSpec:
    """Cantor simulations fall back to the level ceil(log2(1/h)) approximation."""
    if model.name == "cantor" and model.level is None:
        return make_model(
            "cantor",
            level=default_cantor_level(h),
            y0=model.params.get("y0"),
        )
    return model


def _strategy_for(res: _Resolved, model: ModelSpec, h: float):
    name = res.run("strategy")
    tol = res.number("tol")
    if name is None:
        if tol is not None and isinstance(model.default_strategy, Emcel):
            return Emcel(tol)
        return model.default_strategy
    name = str(name).strip().lower().replace("_", "-")
    if name == "emcel":
        return Emcel(tol)
    if name == "weak-euler":
        if model.weak_euler_eta is None:
            raise ValueError(f"strategy: model {model.name!r} has no square-root step map")
        return WeakEuler(model.weak_euler_eta)
    if name == "closed-form":
        if model.closed_form is None:
            raise ValueError(f"strategy: model {model.name!r} has no closed-form step map")
        return model.closed_form
    if name == "cantor":
        if model.name != "cantor":
            raise ValueError("strategy: the dedicated cantor solver only applies to the cantor model")
        level = model.level if model.level is not None else default_cantor_level(h)
        return CantorLevel(level, tol)
    raise ValueError(f"strategy: unknown strategy {name!r}")


def _base_config(command: str, res: _Resolved, model: ModelSpec, **extra) -> dict:
    cfg = {"command": command, "model": model.name}
    for key, value in sorted(model.params.items()):
        cfg[key] = value
    if model.level is not None:
        cfg["level"] = model.level
    cfg.update(extra)
    return cfg


def _emit(res: _Resolved, default_name: str, experiment: str, columns: dict, config: dict, extra_meta=None):
    out = res.run("out", default_name)
    strict = res.flag_bool("strict", False)
    write_table(out, experiment, columns, config, strict=strict, extra_meta=extra_meta)
    written = [str(out)]
    if res.flag_bool("figure", True):
        from .plotting import render_table

        written.append(render_table(out))
    return written


# ---------------------------------------------------------------------------
# subcommands


def _cmd_paths(res: _Resolved) -> list[str]:
    model = _build_model(res)
    h = res.number("h", 2.0**-6)
    model = _with_default_level(model, h)
    t = res.number("t", 1.0)
    n_steps = res.integer("n")
    if n_steps is None:
        n_steps, _ = resolve_steps(t, h)
    n_paths = res.integer("paths", 5)
    if n_paths < 1:
        raise ValueError(f"paths: must be at least 1, got {n_paths}")
    seed = res.integer("seed", 0)
    strategy = _strategy_for(res, model, h)
    sf, fold = prepare_chain(model, h, strategy)

    ids, steps, times, states, folded_states = [], [], [], [], []
    for i in range(n_paths):
        path = simulate_path(sf, model.y0, n_steps, seed=seed, path_index=i)
        ids.append(np.full(n_steps + 1, i))
        steps.append(np.arange(n_steps + 1))
        times.append(path.times)
        states.append(path.states)
        if fold is not None:
            folded_states.append(fold_path(path, fold).states)
    columns = {
        "path": np.concatenate(ids),
        "k": np.concatenate(steps),
        "t": np.concatenate(times),
        "state": np.concatenate(states),
    }
    if fold is not None:
        columns["state_folded"] = np.concatenate(folded_states)
    config = _base_config("paths", res, model, h=h, n=n_steps, paths=n_paths, seed=seed,
                          strategy=sf.kind)
    return _emit(res, "emcel-paths.csv", "paths", columns, config)


def _cmd_scalefactor(res: _Resolved) -> list[str]:
    model = _build_model(res)
    h = res.number("h", 2.0**-6)
    grid_text = res.run("grid", _DEFAULT_GRIDS.get(model.name))
    if grid_text is None:
        raise ValueError("custom models need an explicit state grid: set --grid lo:hi:count")
    grid = _parse_grid(grid_text)
    strategy = _strategy_for(res, model, h)
    sf, _ = prepare_chain(model, h, strategy)
    steps = sf.eval_array(grid)
    columns = {"y": grid, "step": steps, "step_over_sqrt_h": steps / math.sqrt(h)}
    config = _base_config("scalefactor", res, model, h=h, strategy=sf.kind,
                          grid=[float(grid[0]), float(grid[-1]), len(grid)])
    return _emit(res, "emcel-scalefactor.csv", "scalefactor", columns, config)


def _cmd_cdf(res: _Resolved) -> list[str]:
    model = _build_model(res)
    h = res.number("h", 2.0**-8)
    model = _with_default_level(model, h)
    t = res.number("t", 1.0)
    n_paths = res.integer("paths", 20000)
    seed = res.integer("seed", 0)
    workers = res.integer("workers")
    strategy = _strategy_for(res, model, h)
    samples = simulate_terminal(model, h, t, n_paths, seed=seed, strategy=strategy, workers=workers)
    _, t_eff = resolve_steps(t, h)

    grid_text = res.run("grid")
    if grid_text is not None:
        grid = _parse_grid(grid_text)
    else:
        lo, hi = np.quantile(samples, [0.001, 0.999])
        pad = 0.05 * max(hi - lo, 1e-12)
        grid = np.linspace(lo - pad, hi + pad, 401)
    columns = {"x": grid, "cdf_empirical": empirical_cdf(samples, grid)}
    if model.reference_cdf is not None:
        columns["cdf_reference"] = np.asarray(model.reference_cdf(grid, t_eff), dtype=float)
    config = _base_config("cdf", res, model, h=h, t=t_eff, paths=n_paths, seed=seed,
                          strategy=_strategy_kind(model, strategy))
    return _emit(res, "emcel-cdf.csv", "cdf", columns, config)


def _cmd_rate(res: _Resolved) -> list[str]:
    model = _build_model(res)
    h_values = _parse_h_list(res.run("h_list", "2^-4..2^-8"))
    t = res.number("t", 1.0)
    z = res.number("z", 0.1)
    n_paths = res.integer("paths", 20000)
    seed = res.integer("seed", 0)
    workers = res.integer("workers")

    if model.reference_cdf is None or model.reference_mean_abs is None:
        raise ValueError(
            f"model {model.name!r} has no closed-form reference law at these parameters; "
            "the rate experiment needs one to measure errors against"
        )

    rows = {k: [] for k in ("h", "log2_inv_h", "cdf_estimate", "cdf_abs_error",
                            "mean_estimate", "mean_abs_error")}
    for j, h in enumerate(h_values):
        model_h = _with_default_level(model, h)
        strategy = _strategy_for(res, model_h, h)
        samples = simulate_terminal(model_h, h, t, n_paths, seed=seed + j, strategy=strategy,
                                    workers=workers)
        _, t_eff = resolve_steps(t, h)
        cdf_est = float(empirical_cdf(samples, z))
        mean_est = float(np.mean(np.abs(samples)))
        rows["h"].append(h)
        rows["log2_inv_h"].append(math.log2(1.0 / h))
        rows["cdf_estimate"].append(cdf_est)
        rows["cdf_abs_error"].append(abs(cdf_est - float(model.reference_cdf(z, t_eff))))
        rows["mean_estimate"].append(mean_est)
        rows["mean_abs_error"].append(abs(mean_est - float(model.reference_mean_abs(t_eff))))

    fit_cdf = rate_fit(rows["h"], rows["cdf_abs_error"])
    fit_mean = rate_fit(rows["h"], rows["mean_abs_error"])
    extra = {"slope-cdf": f"{fit_cdf.slope:.4f}", "slope-mean": f"{fit_mean.slope:.4f}"}
    config = _base_config("rate", res, model, t=t, z=z, paths=n_paths, seed=seed,
                          h_list=[float(v) for v in h_values])
    written = _emit(res, "emcel-rate.csv", "rate", rows, config, extra_meta=extra)
    print(f"cdf error slope: {fit_cdf.slope:.4f}")
    print(f"mean-abs error slope: {fit_mean.slope:.4f}")
    return written


def _cmd_conda(res: _Resolved) -> list[str]:
    model = _build_model(res)
    h_values = _parse_h_list(res.run("h_list", "2^-4..2^-10"))
    window_text = res.run("window", _DEFAULT_WINDOWS.get(model.name))
    if window_text is None:
        raise ValueError("custom models need an explicit window: set --window lo:hi")
    window = _parse_window(window_text)
    grid_points = res.integer("grid_points", 201)
    measure = extend_measure(model.measure)[0] if model.reflecting else model.measure

    def family(h: float):
        return build_scale_factor(measure, h, _strategy_for(res, model, h))

    pairs = condition_a_diagnostic(measure, family, window, h_values, grid_points=grid_points)
    columns = {
        "h": [p[0] for p in pairs],
        "sup_rel_error": [p[1] for p in pairs],
    }
    worst = max(columns["sup_rel_error"])
    config = _base_config("conda", res, model, window=[window[0], window[1]],
                          grid_points=grid_points, h_list=[float(v) for v in h_values])
    written = _emit(res, "emcel-conda.csv", "conda", columns, config,
                    extra_meta={"worst-rel-error": f"{worst:.6e}"})
    print(f"worst relative budget deviation: {worst:.6e}")
    return written


def _strategy_kind(model: ModelSpec, strategy) -> str:
    return type(strategy).__name__ if strategy is not None else type(model.default_strategy).__name__


_HANDLERS = {
    "paths": _cmd_paths,
    "scalefactor": _cmd_scalefactor,
    "cdf": _cmd_cdf,
    "rate": _cmd_rate,
    "conda": _cmd_conda,
}


def _add_common(p: argparse.ArgumentParser, needs_h: bool = True) -> None:
    p.add_argument("--model", help=f"catalog model: {', '.join(model_names())}")
    p.add_argument("--sigma", type=float, help="volatility scale (default 1)")
    p.add_argument("--theta", type=float, help="stickiness parameter (default 1)")
    p.add_argument("--level", type=int, help="cantor approximation level (default: from h)")
    p.add_argument("--y0", type=float, help="starting state (default: model-specific)")
    p.add_argument("--seed", type=int, help="base seed for the coin-toss streams (default 0)")
    p.add_argument("--out", help="output table path (default: emcel-<command>.csv)")
    p.add_argument(
        "--strategy",
        choices=["emcel", "weak-euler", "closed-form", "cantor"],
        help="step-size strategy (default: model-specific)",
    )
    p.add_argument("--tol", type=float, help="bisection tolerance for solver strategies")
    p.add_argument("--workers", type=int, help="simulation threads (default: EMCEL_THREADS or 1)")
    p.add_argument("--strict", action="store_true", default=None,
                   help="omit the timestamp header so identical runs give identical bytes")
    p.add_argument("--no-figure", dest="figure", action="store_false", default=None,
                   help="skip rendering the PNG figure")
    if needs_h:
        p.add_argument("--h", type=str, help="time step, e.g. 0.015625 or 2^-6")


# argparse only treats a leading-dash token as a value when it looks like a
# plain negative number, which rejects grids ("-2:2:41"), comma lists, and
# scientific notation ("-1e-3"); widen the detection to anything numeric-ish
_DASH_VALUE = re.compile(r"^-(\d|\.\d)")


def _accept_dash_values(parser: argparse.ArgumentParser) -> None:
    parser._negative_number_matcher = _DASH_VALUE


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="emcel",
        description="Coin-tossing Markov chain approximations of diffusions given by speed measures.",
    )
    parser.add_argument("--config", help="TOML configuration file (flags override it)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("paths", help="simulate and tabulate chain trajectories")
    _add_common(p)
    p.add_argument("--paths", type=int, help="number of trajectories (default 5)")
    p.add_argument("--n", type=int, help="number of steps (default: t/h)")
    p.add_argument("--t", type=str, help="time horizon used to derive --n (default 1)")

    p = sub.add_parser("scalefactor", help="tabulate the step-size map on a state grid")
    _add_common(p)
    p.add_argument("--grid", type=str, help="state grid lo:hi:count (default: model-specific)")

    p = sub.add_parser("cdf", help="empirical terminal distribution vs. the reference law")
    _add_common(p)
    p.add_argument("--paths", type=int, help="number of Monte Carlo paths (default 20000)")
    p.add_argument("--t", type=str, help="time horizon (default 1)")
    p.add_argument("--grid", type=str, help="evaluation grid lo:hi:count (default: from samples)")

    p = sub.add_parser("rate", help="Monte Carlo error against h with fitted slopes")
    _add_common(p, needs_h=False)
    p.add_argument("--h-list", dest="h_list", type=str,
                   help="step sizes, e.g. 2^-4..2^-8 or a comma list (default 2^-4..2^-8)")
    p.add_argument("--paths", type=int, help="Monte Carlo paths per step size (default 20000)")
    p.add_argument("--t", type=str, help="time horizon (default 1)")
    p.add_argument("--z", type=str, help="threshold for the indicator payoff (default 0.1)")

    p = sub.add_parser("conda", help="sup |exit-time budget - h| / h over a window")
    _add_common(p, needs_h=False)
    p.add_argument("--h-list", dest="h_list", type=str,
                   help="step sizes to check (default 2^-4..2^-10)")
    p.add_argument("--window", "--K", dest="window", type=str, help="compact window lo:hi")
    p.add_argument("--grid-points", dest="grid_points", type=int,
                   help="states sampled in the window (default 201)")

    _accept_dash_values(parser)
    for command_parser in sub.choices.values():
        _accept_dash_values(command_parser)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _load_config(args.config)
        res = _Resolved(args, cfg)
        written = _HANDLERS[args.command](res)
    except NumericError as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    for path in written:
        print(path)
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
