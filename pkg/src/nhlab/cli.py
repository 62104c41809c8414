"""Command-line runner: ``nhlab <subcommand> [--config PATH] [--seed N] [--out DIR] ...``.

Exit status is 0 when every check a subcommand performs passes, 1 when a
check fails (the failures are printed as JSON on stdout), and 2 on invalid
input.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import experiments, verify
from .config import ConfigError, ExperimentConfig, format_complex_list, load_config
from .noise import CountingModel

log = logging.getLogger("nhlab")


def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, default=_json_default) + "\n"


def _write(out_dir: Path, name: str, text: str) -> Path:
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / name
    path.write_text(text)
    log.info("wrote %s", path)
    return path


def _apply_flags(cfg: ExperimentConfig, args) -> ExperimentConfig:
    model = cfg.noise
    if args.noise == "on" and model is None:
        model = CountingModel(1e4)
    elif args.noise == "off":
        model = None
    if model is not None and args.seed is not None:
        model = replace(model, seed=args.seed)
    return replace(cfg, noise=model)


def _finish(checks: list[dict]) -> int:
    failures = [c for c in checks if not c["passed"]]
    if failures:
        sys.stdout.write(dumps({"failures": failures}))
        return 1
    return 0


def cmd_sweep(args, cfg: ExperimentConfig, mode: str) -> int:
    if args.config and cfg.mode != mode:
        raise ConfigError(f"{args.config}: [experiment] mode is {cfg.mode!r} but subcommand expects {mode!r}")
    cfg = cfg.with_mode(mode)
    result = experiments.run_sweep(cfg)
    out = Path(args.out)
    stem = f"sweep_{mode}"
    if args.format == "json":
        _write(out, f"{stem}.json", dumps(result.as_dict()))
    else:
        _write(out, f"{stem}.csv", result.to_csv())
        _write(out, f"{stem}_closed_form.csv", experiments.closed_form_comparison(cfg))
        _write(out, f"{stem}_summary.json", dumps({"checks": result.checks, **result.extra}))
    return _finish(result.checks)


def cmd_fringe(args, cfg: ExperimentConfig) -> int:
    scan, summary = experiments.run_fringe(cfg)
    out = Path(args.out)
    stem = "fringe_{}_{}".format(*cfg.fringe_arms)
    if args.format == "json":
        summary["phase_rad"] = scan.phases
        summary["intensity"] = scan.intensities
        if scan.counts is not None:
            summary["counts"]["values"] = scan.counts
        _write(out, f"{stem}.json", dumps(summary))
    else:
        _write(out, f"{stem}.csv", scan.to_csv())
        _write(out, f"{stem}.json", dumps(summary))
    return 0


def cmd_tmatrix(args, cfg: ExperimentConfig) -> int:
    theta0 = cfg.sweep.start if args.theta0 is None else args.theta0
    report = experiments.tmatrix_report(cfg, theta0)
    _write(Path(args.out), f"tmatrix_{cfg.mode}.json", dumps(report))
    return 0


def cmd_verify(args, cfg: ExperimentConfig) -> int:
    seed = 0 if args.seed is None else args.seed
    checks = verify.run_all(seed)
    _write(Path(args.out), "verify.json", dumps({"seed": seed, "checks": checks}))
    for c in checks:
        print(f"{'PASS' if c['passed'] else 'FAIL'}  {c['name']}")
    return _finish(checks)


def cmd_entangle(args, cfg: ExperimentConfig) -> int:
    try:
        report = experiments.run_entanglement(cfg)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    # the left side depends on the Kraus representation, so record the one used
    payload = report.as_dict() | {
        "kraus_a": [format_complex_list(k) for k in cfg.channel_a.kraus],
        "kraus_b": [format_complex_list(k) for k in cfg.channel_b.kraus],
    }
    _write(Path(args.out), "entangle.json", dumps(payload))
    print(report.verdict)
    return 0


def cmd_noise_calib(args, cfg: ExperimentConfig) -> int:
    theta0 = cfg.sweep.start if args.theta0 is None else args.theta0
    if cfg.noise is None:
        cfg = replace(cfg, noise=CountingModel(1e4, seed=0 if args.seed is None else args.seed))
    report = experiments.noise_calibration(cfg, theta0)
    _write(Path(args.out), "noise_calib.json", dumps(report))
    return _finish(report["checks"])


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="INI experiment configuration")
    common.add_argument("--seed", type=int, help="override the noise seed")
    common.add_argument("--out", help="output directory (default: [outputs] dir, else out)")
    common.add_argument("--noise", choices=("on", "off"), help="force shot noise on or off")
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="nhlab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("fringe", parents=[common], help="phase scan for one arm pair")
    sub.add_parser("sweep-real", parents=[common], help="real operators, equality form over theta0")
    sub.add_parser("sweep-complex", parents=[common], help="complex operators, normalized bound over theta0")
    for name, help_ in (("tmatrix", "Gram matrix and relation reports at one theta0"),
                        ("noise-calib", "propagated vs Monte-Carlo error bars")):
        p = sub.add_parser(name, parents=[common], help=help_)
        p.add_argument("--theta0", type=float, help="input-state angle in degrees")
    sub.add_parser("verify", parents=[common], help="run the seeded property suite")
    sub.add_parser("entangle", parents=[common], help="separability test for configured channels")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        cfg = _apply_flags(load_config(args.config), args)
        if args.out is None:
            args.out = cfg.out_dir
        if args.command == "sweep-real":
            return cmd_sweep(args, cfg, "real")
        if args.command == "sweep-complex":
            return cmd_sweep(args, cfg, "complex")
        handler = {
            "fringe": cmd_fringe,
            "tmatrix": cmd_tmatrix,
            "verify": cmd_verify,
            "entangle": cmd_entangle,
            "noise-calib": cmd_noise_calib,
        }[args.command]
        return handler(args, cfg)
    except (ConfigError, FileNotFoundError) as exc:
        sys.stdout.write(dumps({"failures": [{"name": "config", "passed": False, "error": str(exc)}]}))
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
