"""Command-line entry point: simulate, run experiments, sweep parameters.

Usage:

    lohesphere simulate  --config cfg.json --out DIR [--seed S] [--workers K]
    lohesphere experiment --experiment e1 --config cfg.json --out DIR [--seed S]
    lohesphere sweep     --config cfg.json --out DIR [--seed S] [--workers K]

Configs are JSON key-value trees.  Exit codes: 0 on success (all gating
assertions pass), 1 on assertion failure, 2 on usage/config errors.  Every
emitted file is listed in a manifest; observable CSVs are byte-reproducible
for a fixed (config, seed, version).
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .dynamics import CouplingParams, Ensemble
from .experiments import (
    EXPERIMENT_IDS,
    ConfigError,
    ExperimentConfig,
    run_experiment,
    standard_observers,
)
from .integrators import IntegratorConfig, integrate
from .sampling import random_skew_hermitian, random_sphere_states, sample_admissible

EXIT_PASS = 0
EXIT_ASSERTION = 1
EXIT_USAGE = 2


def _load_config(path: str) -> dict:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path!r}: {exc}") from exc
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(
            f"config {path!r} is not valid JSON (line {exc.lineno}, column {exc.colno}): {exc.msg}"
        ) from exc
    if not isinstance(raw, dict):
        raise ConfigError(f"config {path!r} must contain a JSON object")
    return raw


def _config_hash(raw: dict) -> str:
    canonical = json.dumps(raw, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def _write_manifest(out_dir: Path, command: str, config_path: str, raw: dict, artifacts) -> None:
    manifest = {
        "command": command,
        "config_path": str(config_path),
        "config_sha256": _config_hash(raw),
        "version": __version__,
        "out_dir": str(out_dir),
        "artifacts": sorted(str(a.relative_to(out_dir)) for a in artifacts),
    }
    path = out_dir / "manifest.json"
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _write_report(report, out_dir: Path) -> list[Path]:
    artifacts = []
    report_path = out_dir / f"{report.experiment}_report.json"
    with open(report_path, "w", encoding="utf-8") as fh:
        json.dump(report.to_payload(), fh, indent=2, sort_keys=True)
        fh.write("\n")
    artifacts.append(report_path)
    for name, series in report.series.items():
        csv_path = out_dir / f"{report.experiment}_{name}.csv"
        series.to_csv(csv_path)
        artifacts.append(csv_path)
    return artifacts


_SIMULATE_KEYS = {
    "n": int,
    "d": int,
    "kappa0": float,
    "kappa1": float,
    "delta": float,
    "dt": float,
    "t_end": float,
    "seed": int,
    "n_samples": int,
    "omega_scale": float,
    "heterogeneous": bool,
    "init": str,
}

_SIMULATE_DEFAULTS = {
    "n": 32,
    "d": 4,
    "kappa0": 1.0,
    "kappa1": 0.0,
    "delta": 0.1,
    "dt": 1e-3,
    "t_end": 5.0,
    "seed": 0,
    "n_samples": 200,
    "omega_scale": 0.0,
    "heterogeneous": False,
    "init": "admissible",
}


def _simulate_config(raw: dict) -> dict:
    cfg = dict(_SIMULATE_DEFAULTS)
    for key, value in raw.items():
        if key not in _SIMULATE_KEYS:
            raise ConfigError(f"unknown config key {key!r} for simulate")
        expected = _SIMULATE_KEYS[key]
        if expected is bool:
            if not isinstance(value, bool):
                raise ConfigError(f"config key {key!r} must be a boolean")
            cfg[key] = value
        else:
            try:
                cfg[key] = expected(value)
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"config key {key!r}: {exc}") from exc
    if cfg["init"] not in ("admissible", "uniform"):
        raise ConfigError("config key 'init' must be 'admissible' or 'uniform'")
    if cfg["dt"] <= 0 or cfg["t_end"] < 0:
        raise ConfigError("dt must be positive and t_end nonnegative")
    return cfg


def cmd_simulate(raw: dict, out_dir: Path, config_path: str) -> int:
    """Integrate one configuration and write its observable series + manifest."""
    cfg = _simulate_config(raw)
    params = CouplingParams(cfg["kappa0"], cfg["kappa1"])
    if cfg["init"] == "admissible":
        try:
            ens = sample_admissible(
                cfg["n"],
                cfg["d"],
                cfg["kappa0"],
                cfg["kappa1"],
                cfg["delta"],
                cfg["seed"],
                omega_scale=cfg["omega_scale"],
                heterogeneous=cfg["heterogeneous"],
            )
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
    else:
        rng = np.random.default_rng(cfg["seed"])
        states = random_sphere_states(rng, cfg["n"], cfg["d"])
        if cfg["heterogeneous"]:
            freqs = np.stack(
                [random_skew_hermitian(rng, cfg["d"], cfg["omega_scale"]) for _ in range(cfg["n"])]
            )
            ens = Ensemble(states, freqs, params)
        elif cfg["omega_scale"] > 0:
            ens = Ensemble.with_common_frequency(
                states, random_skew_hermitian(rng, cfg["d"], cfg["omega_scale"]), params
            )
        else:
            ens = Ensemble.zero_frequency(states, params)

    n_steps = max(int(round(cfg["t_end"] / cfg["dt"])), 1)
    record_every = max(n_steps // (cfg["n_samples"] - 1), 1)
    icfg = IntegratorConfig(t_end=cfg["t_end"], dt=cfg["dt"], record_every=record_every)
    observers = standard_observers(params, with_dj=False)
    for k in range(cfg["d"]):
        observers[f"j_re_{k}"] = lambda t, s, k=k: float(s.mean(axis=0)[k].real)
        observers[f"j_im_{k}"] = lambda t, s, k=k: float(s.mean(axis=0)[k].imag)
    _, series = integrate(ens, icfg, observers)
    series.metadata["seed"] = cfg["seed"]

    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = out_dir / "simulate_observables.csv"
    series.to_csv(csv_path)
    _write_manifest(out_dir, "simulate", config_path, raw, [csv_path])
    return EXIT_PASS


def cmd_experiment(raw: dict, out_dir: Path, config_path: str, experiment: str | None) -> int:
    """Run one named experiment; exit 0 iff every gating assertion passes."""
    raw = dict(raw)
    if experiment is not None:
        raw["experiment"] = experiment
    cfg = ExperimentConfig.from_dict(raw)
    report = run_experiment(cfg)
    out_dir.mkdir(parents=True, exist_ok=True)
    artifacts = _write_report(report, out_dir)
    _write_manifest(out_dir, "experiment", config_path, raw, artifacts)
    for check in report.checks:
        status = "PASS" if check.passed else "FAIL"
        gate = "" if check.gating else " (report-only)"
        print(
            f"[{status}] {report.experiment}:{check.name}{gate}: "
            f"observed {check.observed:.6g} {check.comparator} "
            f"{check.limit:.6g} (tolerance {check.tolerance:g})"
        )
    return EXIT_PASS if report.passed else EXIT_ASSERTION


def _axis_values(raw: dict):
    axis = raw.get("axis")
    if not isinstance(axis, dict) or "parameter" not in axis:
        raise ConfigError("sweep config needs an 'axis' object with a 'parameter' key")
    parameter = axis["parameter"]
    if "values" in axis:
        values = list(axis["values"])
    elif {"start", "stop", "num"} <= set(axis):
        values = list(np.linspace(axis["start"], axis["stop"], int(axis["num"])))
    else:
        raise ConfigError("axis needs either 'values' or 'start'/'stop'/'num'")
    if not values:
        raise ConfigError("sweep axis is empty")
    return parameter, values


def cmd_sweep(raw: dict, out_dir: Path, config_path: str, workers: int) -> int:
    """Run an experiment across a parameter axis, one sub-report per point."""
    raw = dict(raw)
    parameter, values = _axis_values(raw)
    base = {k: v for k, v in raw.items() if k != "axis"}
    if "experiment" not in base:
        raise ConfigError("sweep config needs an 'experiment' key")

    points = []
    for value in values:
        point = dict(base)
        point[parameter] = int(value) if parameter in ("seed", "n", "d", "n_seeds") else value
        points.append(point)

    def run_point(idx_point):
        # a grid point whose parameters are infeasible (e.g. a gain sweep that
        # crosses the admissibility boundary) becomes a failed row, not a crash
        idx, point = idx_point
        try:
            return idx, run_experiment(ExperimentConfig.from_dict(point)), None
        except ConfigError as exc:
            return idx, None, str(exc)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = {idx: (rep, err) for idx, rep, err in pool.map(run_point, enumerate(points))}
    else:
        results = {idx: (rep, err) for idx, rep, err in map(run_point, enumerate(points))}

    out_dir.mkdir(parents=True, exist_ok=True)
    artifacts = []
    rows = []
    for idx in range(len(points)):
        report, error = results[idx]
        row = {"index": idx, parameter: values[idx]}
        if report is None:
            row["passed"] = 0
            row["error"] = error.replace(",", ";")
        else:
            sub_dir = out_dir / f"point_{idx:03d}"
            sub_dir.mkdir(parents=True, exist_ok=True)
            artifacts.extend(_write_report(report, sub_dir))
            row["passed"] = int(report.passed)
            for key, val in report.data.items():
                if isinstance(val, (int, float)):
                    row[key] = val
        rows.append(row)

    columns = ["index", parameter, "passed"]
    for row in rows:
        for key in row:
            if key not in columns:
                columns.append(key)
    agg_path = out_dir / "sweep_aggregate.csv"
    with open(agg_path, "w", encoding="utf-8") as fh:
        fh.write(",".join(columns) + "\n")
        for row in rows:
            fh.write(
                ",".join(
                    f"{row[c]:.17g}" if isinstance(row.get(c), float) else str(row.get(c, ""))
                    for c in columns
                )
                + "\n"
            )
    artifacts.append(agg_path)
    _write_manifest(out_dir, "sweep", config_path, raw, artifacts)
    all_passed = all(rep is not None and rep.passed for rep, _ in results.values())
    return EXIT_PASS if all_passed else EXIT_ASSERTION


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lohesphere",
        description="Aggregation dynamics on the complex unit sphere: runs and experiments.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, doc in (
        ("simulate", "integrate one configuration and dump observables"),
        ("experiment", "run a named verification experiment (e1..e7)"),
        ("sweep", "run an experiment across a parameter axis"),
    ):
        cmd = sub.add_parser(name, help=doc)
        cmd.add_argument("--config", required=True, help="path to a JSON config")
        cmd.add_argument("--out", required=True, help="output directory")
        cmd.add_argument("--seed", type=int, default=None, help="override the config seed")
        cmd.add_argument("--workers", type=int, default=1, help="worker cap for sweeps")
        if name == "experiment":
            cmd.add_argument(
                "--experiment",
                default=None,
                help=f"experiment id ({', '.join(sorted(EXPERIMENT_IDS))})",
            )
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else 0
    try:
        raw = _load_config(args.config)
        if args.seed is not None:
            raw["seed"] = args.seed
        out_dir = Path(args.out)
        if args.command == "simulate":
            return cmd_simulate(raw, out_dir, args.config)
        if args.command == "experiment":
            return cmd_experiment(raw, out_dir, args.config, args.experiment)
        return cmd_sweep(raw, out_dir, args.config, max(args.workers, 1))
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
