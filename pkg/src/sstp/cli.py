"""Command-line runner: config parsing, experiment orchestration and
bit-exact structured output (CSV observables + JSON metadata)."""
from __future__ import annotations

import argparse
import dataclasses
import json
import math
import os
import sys
import time

import numpy as np

from . import __version__
from .bath import ModelParams
from .engine import RunConfig, run_ensemble, run_trajectory
from .estimator import ObservableSeries, estimate
from .hopping import (
    ENERGY_CONSERVING,
    EXACT_RESCALE,
    FIRST_ORDER_SHIFT,
    PRIMITIVE,
    SamplingScheme,
)

__all__ = [
    "CONFIG_KEYS",
    "PRESETS",
    "ConfigError",
    "parse_config",
    "config_to_flat",
    "run_experiment",
    "main",
]


class ConfigError(ValueError):
    pass


def _parse_bool(s: str) -> bool:
    v = s.strip().lower()
    if v in ("true", "yes", "1", "on"):
        return True
    if v in ("false", "no", "0", "off"):
        return False
    raise ValueError("expected a boolean (true/false)")


def _parse_float(s: str) -> float:
    v = float(s)
    if math.isnan(v):
        raise ValueError("NaN is not a valid value")
    return v


# key -> (parser, constraint check, constraint description)
CONFIG_KEYS = {
    "omega": (_parse_float, lambda v: v > 0, "omega must be > 0"),
    "xi": (_parse_float, lambda v: v >= 0, "xi must be >= 0"),
    "beta": (_parse_float, lambda v: v > 0, "beta must be > 0"),
    "n_modes": (int, lambda v: v >= 1, "n_modes must be >= 1"),
    "omega_c": (_parse_float, lambda v: v > 0, "omega_c must be > 0"),
    "omega_max": (_parse_float, lambda v: v > 0, "omega_max must be > 0"),
    "scheme": (
        str,
        lambda v: v in (PRIMITIVE, ENERGY_CONSERVING),
        f"scheme must be '{PRIMITIVE}' or '{ENERGY_CONSERVING}'",
    ),
    "c_energy": (_parse_float, lambda v: v > 0, "c_energy must be > 0"),
    "jump_rule": (
        str,
        lambda v: v in (EXACT_RESCALE, FIRST_ORDER_SHIFT),
        f"jump_rule must be '{EXACT_RESCALE}' or '{FIRST_ORDER_SHIFT}'",
    ),
    "tau": (_parse_float, lambda v: v > 0, "tau must be > 0"),
    "t_max": (_parse_float, lambda v: v > 0, "t_max must be > 0"),
    "n_traj": (int, lambda v: v >= 1, "n_traj must be >= 1"),
    "seed": (int, lambda v: True, "seed must be an integer"),
    "record_stride": (int, lambda v: v >= 1, "record_stride must be >= 1"),
    "enumerate_pairs": (_parse_bool, lambda v: True, "boolean"),
    "weight_cap": (_parse_float, lambda v: v > 0, "weight_cap must be > 0"),
    "truncate_flagged": (_parse_bool, lambda v: True, "boolean"),
}

DEFAULTS = {
    "n_modes": 200,
    "omega_c": 1.0,
    "omega_max": 3.0,
    "scheme": ENERGY_CONSERVING,
    "c_energy": 0.01,
    "jump_rule": FIRST_ORDER_SHIFT,
    "tau": 0.01,
    "t_max": 10.0,
    "n_traj": 1000,
    "seed": 12345,
    "record_stride": 10,
    "enumerate_pairs": True,
    "weight_cap": 1e8,
    "truncate_flagged": False,
}

PRESETS = {
    "fig1": {
        "omega": 1.0 / 3.0,
        "xi": 0.007,
        "beta": 0.3,
        "n_modes": 200,
        "t_max": 30.0,
        "record_stride": 100,
        "scheme": ENERGY_CONSERVING,
        "c_energy": 0.01,
        "n_traj": 10000,
        "enumerate_pairs": False,
    },
    "fig2": {
        "omega": 0.4,
        "xi": 0.09,
        "beta": 12.5,
        "n_modes": 200,
        "t_max": 100.0,
        "record_stride": 100,
        "scheme": ENERGY_CONSERVING,
        "c_energy": 0.01,
        "n_traj": 10000,
        "enumerate_pairs": False,
    },
    "uncoupled": {
        "omega": 1.0 / 3.0,
        "xi": 0.0,
        "beta": 1.0,
        "n_modes": 200,
        "t_max": 30.0,
        "record_stride": 10,
        "n_traj": 16,
        "enumerate_pairs": True,
    },
    "oracle-small": {
        "omega": 0.4,
        "xi": 0.09,
        "beta": 12.5,
        "n_modes": 2,
        "tau": 0.05,
        "t_max": 0.3,
        "record_stride": 1,
        "n_traj": 10000,
        "enumerate_pairs": False,
    },
}

_REQUIRED = ("omega", "xi", "beta")


def _coerce(key: str, value):
    if key not in CONFIG_KEYS:
        raise ConfigError(
            f"unknown config key {key!r}; valid keys: {', '.join(sorted(CONFIG_KEYS))}"
        )
    parser, check, constraint = CONFIG_KEYS[key]
    if isinstance(value, str):
        try:
            value = parser(value)
        except ValueError as exc:
            raise ConfigError(f"invalid value for {key!r}: {exc}") from None
    if not check(value):
        raise ConfigError(f"invalid value for {key!r}: {constraint}")
    return value


def read_config_file(path: str) -> dict:
    """Flat key-value text config: one `key = value` per line, # comments."""
    values = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
            key, _, val = line.partition("=")
            values[key.strip()] = val.strip()
    return values


def parse_config(
    path: str | None = None,
    overrides: dict | None = None,
    preset: str | None = None,
) -> RunConfig:
    """Resolve defaults < preset < config file < explicit overrides into a RunConfig."""
    values = dict(DEFAULTS)
    if preset is not None:
        if preset not in PRESETS:
            raise ConfigError(
                f"unknown preset {preset!r}; available: {', '.join(sorted(PRESETS))}"
            )
        values.update(PRESETS[preset])
    if path is not None:
        if not os.path.exists(path):
            raise ConfigError(f"config file not found: {path}")
        for k, v in read_config_file(path).items():
            values[k] = _coerce(k, v)
    for k, v in (overrides or {}).items():
        if v is not None:
            values[k] = _coerce(k, v)
    missing = [k for k in _REQUIRED if k not in values]
    if missing:
        raise ConfigError(f"missing required keys: {', '.join(missing)}")
    for k in values:
        values[k] = _coerce(k, values[k])
    try:
        model = ModelParams(
            omega_tunnel=values["omega"], kondo_xi=values["xi"], beta=values["beta"]
        )
        scheme = SamplingScheme(
            variant=values["scheme"],
            c_energy=values["c_energy"],
            jump_rule=values["jump_rule"],
        )
        return RunConfig(
            model=model,
            scheme=scheme,
            n_modes=values["n_modes"],
            omega_c=values["omega_c"],
            omega_max=values["omega_max"],
            tau=values["tau"],
            t_max=values["t_max"],
            n_traj=values["n_traj"],
            master_seed=values["seed"],
            record_stride=values["record_stride"],
            enumerate_pairs=values["enumerate_pairs"],
            weight_cap=values["weight_cap"],
            truncate_flagged=values["truncate_flagged"],
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def _g17(v: float) -> str:
    return format(float(v), ".17g")


def config_to_flat(config: RunConfig) -> dict:
    """Flat key-value form of a resolved config; parse_config round-trips it."""
    return {
        "omega": _g17(config.model.omega_tunnel),
        "xi": _g17(config.model.kondo_xi),
        "beta": _g17(config.model.beta),
        "n_modes": str(config.n_modes),
        "omega_c": _g17(config.omega_c),
        "omega_max": _g17(config.omega_max),
        "scheme": config.scheme.variant,
        "c_energy": _g17(config.scheme.c_energy),
        "jump_rule": config.scheme.jump_rule,
        "tau": _g17(config.tau),
        "t_max": _g17(config.t_max),
        "n_traj": str(config.n_traj),
        "seed": str(config.master_seed),
        "record_stride": str(config.record_stride),
        "enumerate_pairs": "true" if config.enumerate_pairs else "false",
        "weight_cap": _g17(config.weight_cap),
        "truncate_flagged": "true" if config.truncate_flagged else "false",
    }


def write_observable_csv(path: str, series: ObservableSeries) -> None:
    with open(path, "w", newline="") as fh:
        fh.write("t,mean,stderr,weight_var,n_eff\n")
        for i in range(len(series.times)):
            fh.write(
                ",".join(
                    _g17(v)
                    for v in (
                        series.times[i],
                        series.mean[i],
                        series.stderr[i],
                        series.weight_var[i],
                        series.n_eff[i],
                    )
                )
                + "\n"
            )


def _run_one(config: RunConfig, outdir: str, name: str, dump_hop_log: bool):
    t0 = time.perf_counter()
    result = run_ensemble(config)
    series = estimate(result)
    wall = time.perf_counter() - t0
    csv_path = os.path.join(outdir, f"{name}.csv")
    write_observable_csv(csv_path, series)
    meta = {
        "tool": "sstp",
        "version": __version__,
        "resolved_config": config_to_flat(config),
        "wall_time_s": wall,
        "hop_stats": result.hop_stats,
        "n_flagged_trajectories": result.n_flagged,
        "n_excluded_trajectories": series.n_excluded,
        "n_weight_series": result.n_weight_series,
    }
    meta_path = os.path.join(outdir, f"{name}_metadata.json")
    with open(meta_path, "w") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")
    paths = [csv_path, meta_path]
    if dump_hop_log:
        log_path = os.path.join(outdir, f"{name}_hops.csv")
        with open(log_path, "w", newline="") as fh:
            fh.write("traj,slot,step,which_index,target,residual\n")
            for t in range(config.n_traj):
                traj = run_trajectory(config, t)
                for slot, sub in enumerate(traj.subtrajectories):
                    for ev in sub.hop_log:
                        fh.write(
                            f"{t},{slot},{ev.step},{ev.which_index},"
                            f"{ev.target},{_g17(ev.residual)}\n"
                        )
        paths.append(log_path)
    ok = bool(
        np.all(np.isfinite(series.mean)) and np.all(np.isfinite(series.stderr))
    )
    return series, paths, ok


def run_experiment(
    config: RunConfig,
    outdir: str,
    name: str = "run",
    compare: bool = False,
    dump_hop_log: bool = False,
) -> tuple[int, list[str]]:
    """Run one experiment (or a paired scheme comparison); returns (exit code, paths)."""
    os.makedirs(outdir, exist_ok=True)
    if not compare:
        _, paths, ok = _run_one(config, outdir, name, dump_hop_log)
        return (0 if ok else 2), paths
    paths = []
    all_ok = True
    by_scheme = {}
    for variant in (PRIMITIVE, ENERGY_CONSERVING):
        scheme = SamplingScheme(
            variant=variant,
            c_energy=config.scheme.c_energy,
            jump_rule=config.scheme.jump_rule,
        )
        cfg = dataclasses.replace(config, scheme=scheme)
        tag = variant.replace("-", "_")
        series, p, ok = _run_one(cfg, outdir, f"{name}_{tag}", dump_hop_log)
        by_scheme[variant] = series
        paths.extend(p)
        all_ok = all_ok and ok
    prim = by_scheme[PRIMITIVE]
    ec = by_scheme[ENERGY_CONSERVING]
    summary = os.path.join(outdir, f"{name}_compare.csv")
    with open(summary, "w", newline="") as fh:
        fh.write("t,weight_var_primitive,weight_var_energy_conserving,ratio\n")
        for i in range(len(prim.times)):
            ratio = (
                prim.weight_var[i] / ec.weight_var[i] if ec.weight_var[i] > 0 else math.inf
            )
            fh.write(
                f"{_g17(prim.times[i])},{_g17(prim.weight_var[i])},"
                f"{_g17(ec.weight_var[i])},{_g17(ratio)}\n"
            )
    paths.append(summary)
    return (0 if all_ok else 2), paths


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sstp",
        description=(
            "Surface-hopping dynamics of the spin-boson model with primitive or "
            "energy-conserving transition sampling."
        ),
    )
    parser.add_argument("--preset", choices=sorted(PRESETS), help="named parameter preset")
    parser.add_argument("--config", help="flat key-value config file")
    parser.add_argument(
        "--out",
        default=None,
        help="output directory (default: $SSTP_OUTPUT_DIR or current directory)",
    )
    parser.add_argument("--name", default=None, help="basename for output files")
    parser.add_argument(
        "--compare",
        action="store_true",
        help="run both schemes on shared streams and write a weight-variance summary",
    )
    parser.add_argument(
        "--dump-hop-log",
        action="store_true",
        help="also write a per-trajectory hop event log (reruns trajectories)",
    )
    for key in CONFIG_KEYS:
        parser.add_argument(f"--{key.replace('_', '-')}", dest=key, default=None)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    overrides = {k: getattr(args, k) for k in CONFIG_KEYS}
    try:
        config = parse_config(path=args.config, overrides=overrides, preset=args.preset)
    except ConfigError as exc:
        print(f"sstp: config error: {exc}", file=sys.stderr)
        return 1
    outdir = args.out or os.environ.get("SSTP_OUTPUT_DIR", ".")
    name = args.name or args.preset or "run"
    try:
        code, paths = run_experiment(
            config,
            outdir,
            name=name,
            compare=args.compare,
            dump_hop_log=args.dump_hop_log,
        )
    except OSError as exc:
        print(f"sstp: output error: {exc}", file=sys.stderr)
        return 1
    for p in paths:
        print(p)
    if code != 0:
        print(
            "sstp: numeric failure: non-finite values in the observable table "
            "(flagged weight overflow); see metadata",
            file=sys.stderr,
        )
    return code


if __name__ == "__main__":
    sys.exit(main())
