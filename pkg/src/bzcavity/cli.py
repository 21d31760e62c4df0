"""Command-line entry point.

    bzcavity <subcommand> --config CFG [--set key=value ...] [--out DIR]
             [--seed N] [--mode full|eliminated|adiabatic] [--strict]

Exit codes: 0 ok, 1 configuration error, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__, config
from .adiabatic import adiabatic_trace
from .analysis import fit_harmonics, spectrum
from .bandstructure import band_table, write_band_csv
from .dynamics import simulate
from .errors import ConfigError, ConvergenceError, FitError, NumericalError
from .sensing import monte_carlo_sigma, sensitivity_report
from .trace import Mode, RunTrace, json_default, params_hash
from .units import scale

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2


def _write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True, default=json_default) + "\n")


def _provenance(cfg: dict, command: str) -> dict:
    return {
        "command": command,
        "config": cfg,
        "config_hash": params_hash(cfg),
        "seed": cfg["seed"],
        "code_version": __version__,
    }


def _prepare(args, cfg):
    params = config.physical_params(cfg)
    notes = params.validity_warnings()
    for note in notes:
        print(f"warning: {note}", file=sys.stderr)
    if notes and args.strict:
        raise ConfigError("strict mode: physics-validity warnings are fatal")
    return params


def run_trace(cfg: dict, mode: Mode) -> RunTrace:
    params = scale(config.physical_params(cfg))
    if mode is Mode.ADIABATIC:
        a = cfg["adiabatic"]
        return adiabatic_trace(
            params,
            a["periods"],
            a["samples_per_period"],
            q0=cfg["dynamics"]["q0"],
            s_guess=cfg["dynamics"]["s_guess"],
        )
    return simulate(params, config.init_spec(cfg), config.numerics_spec(cfg), mode)


def _fit_summary(trace: RunTrace, cfg: dict) -> dict:
    fit = fit_harmonics(trace, cfg["analysis"]["harmonics"])
    return fit.to_dict()


def cmd_bands(args, cfg, out: Path) -> int:
    _prepare(args, cfg)
    b = cfg["bandstructure"]
    qs = np.linspace(-1.0, 1.0, b["q_points"])
    rows = band_table(qs, b["depths"], b["bands"], b["basis_halfwidth"], b["sign"])
    path = out / "bands.csv"
    write_band_csv(path, rows)
    _write_json(out / "bands.meta.json", _provenance(cfg, "bands"))
    print(path)
    return EXIT_OK


def cmd_trace(args, cfg, out: Path, mode: Mode, name: str) -> int:
    _prepare(args, cfg)
    trace = run_trace(cfg, mode)
    path = out / f"{name}.csv"
    trace.to_csv(path, _provenance(cfg, name))
    print(path)
    return EXIT_OK


def _load_trace(args) -> RunTrace:
    if not args.trace:
        raise ConfigError("--trace is required for this subcommand")
    path = Path(args.trace)
    if not path.exists():
        raise ConfigError(f"{path}: trace file not found")
    return RunTrace.from_csv(path)


def cmd_spectrum(args, cfg, out: Path) -> int:
    trace = _load_trace(args)
    spec = spectrum(trace, window=cfg["analysis"]["window"])
    spec.to_csv(out / "spectrum.csv")
    fit = fit_harmonics(trace, cfg["analysis"]["harmonics"])
    prov = _provenance(cfg, "spectrum")
    prov["trace"] = str(args.trace)
    prov["resolution_hz"] = spec.resolution
    prov["window"] = spec.window
    _write_json(out / "spectrum.meta.json", prov)
    fit.to_json(out / "fit.json", {"provenance": prov})
    print(out / "spectrum.csv")
    return EXIT_OK


def cmd_sensitivity(args, cfg, out: Path) -> int:
    params = _prepare(args, cfg)
    trace = _load_trace(args)
    fit = fit_harmonics(trace, cfg["analysis"]["harmonics"])
    epsilon = cfg["sensing"]["epsilon"] or fit.epsilon
    depth = float(np.mean(np.abs(trace.s)))
    report = sensitivity_report(params, depth, epsilon).to_dict()
    report["depth_Er"] = depth
    report["omega_fit"] = fit.omega
    report["omega_B"] = params.omega_B
    s = cfg["sensing"]
    if s["mc_trials"]:
        mc = monte_carlo_sigma(
            s["mc_rate"],
            s["mc_epsilon"],
            1.0,
            s["mc_tau_s"],
            params.omega_B,
            s["mc_trials"],
            bins_per_period=s["mc_bins_per_period"],
            seed=cfg["seed"],
        )
        report.update(
            mc_sigma_empirical=mc.sigma_empirical,
            mc_sigma_formula=mc.sigma_formula,
            mc_ratio=mc.ratio,
            mc_failures=mc.failures,
            mc_valid=mc.valid,
        )
    _write_json(out / "sensitivity.json", report)
    prov = _provenance(cfg, "sensitivity")
    prov["trace"] = str(args.trace)
    _write_json(out / "sensitivity.meta.json", prov)
    print(out / "sensitivity.json")
    return EXIT_OK


def _sweep_point(job):
    index, point_cfg, mode_value, out_dir = job
    mode = Mode(mode_value)
    trace = run_trace(point_cfg, mode)
    point_dir = Path(out_dir) / f"point_{index:03d}"
    point_dir.mkdir(parents=True, exist_ok=True)
    trace.to_csv(point_dir / "trace.csv", _provenance(point_cfg, "sweep"))
    fit = _fit_summary(trace, point_cfg)
    _write_json(point_dir / "fit.json", fit)
    params = config.physical_params(point_cfg)
    return {
        "index": index,
        "dir": point_dir.name,
        "x": params.x,
        "omega_fit": fit["omega"],
        "omega_err": fit["omega_err"],
        "omega_B": params.omega_B,
        "epsilon": fit["epsilon"],
    }


def cmd_sweep(args, cfg, out: Path, mode: Mode) -> int:
    _prepare(args, cfg)
    points = config.sweep_points(cfg)
    if not points:
        raise ConfigError("sweep.parameters is empty")
    jobs = []
    for i, point in enumerate(points):
        point_cfg = config.validate_dict(config.apply_overrides(cfg, point.items()))
        point_cfg["sweep"]["parameters"] = {}
        jobs.append((i, point_cfg, mode.value, str(out)))
    workers = cfg["sweep"]["workers"]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_sweep_point, jobs))
    else:
        results = [_sweep_point(j) for j in jobs]
    for res, point in zip(results, points):
        res["overrides"] = point
    manifest = _provenance(cfg, "sweep")
    manifest["mode"] = mode.value
    manifest["points"] = results
    _write_json(out / "manifest.json", manifest)
    print(out / "manifest.json")
    return EXIT_OK


def cmd_validate(args, cfg) -> int:
    params = config.physical_params(cfg)
    notes = params.validity_warnings()
    for note in notes:
        print(f"warning: {note}")
    if notes and args.strict:
        print("invalid (strict): physics-validity warnings")
        return EXIT_CONFIG
    print(f"ok: x = {params.x:.4g}, C = {params.cooperativity:.4g}, f_B = {params.omega_B / (2 * np.pi):.6g} Hz")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bzcavity", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="YAML configuration file")
    common.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE")
    common.add_argument("--out", default=".", help="output directory")
    common.add_argument("--seed", type=int, help="run seed (overrides config)")
    common.add_argument("--mode", choices=[m.value for m in Mode])
    common.add_argument("--strict", action="store_true", help="treat physics warnings as errors")
    common.add_argument("--trace", help="input trace CSV (spectrum, sensitivity)")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, text in [
        ("bands", "band diagram CSV over a q x s grid"),
        ("simulate", "FULL or ELIMINATED time evolution"),
        ("adiabatic", "self-consistent adiabatic trace"),
        ("spectrum", "spectrum and harmonic fit of a trace"),
        ("sensitivity", "sensing budget from parameters and a trace"),
        ("sweep", "run a parameter grid"),
        ("validate", "check a configuration without running"),
    ]:
        sub.add_parser(name, parents=[common], help=text)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        overrides = list(args.overrides)
        if args.seed is not None:
            overrides.append(f"seed={args.seed}")
        cfg = config.resolve(args.config, overrides)
        if args.command == "validate":
            return cmd_validate(args, cfg)
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        mode = Mode(args.mode or cfg["dynamics"]["mode"])
        if args.command == "bands":
            return cmd_bands(args, cfg, out)
        if args.command == "simulate":
            return cmd_trace(args, cfg, out, mode, "trace")
        if args.command == "adiabatic":
            return cmd_trace(args, cfg, out, Mode.ADIABATIC, "adiabatic")
        if args.command == "spectrum":
            return cmd_spectrum(args, cfg, out)
        if args.command == "sensitivity":
            return cmd_sensitivity(args, cfg, out)
        if args.command == "sweep":
            return cmd_sweep(args, cfg, out, mode)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalError, ConvergenceError, FitError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
