"""Command-line front end: pool generation/validation, calibration, and
simulation runs driven by config files.

Every command is reproducible from (config file, seed); diagnostics go to
stderr, data to files and stdout.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .calibration import (
    BracketError,
    load_calibration_report,
    run_full_calibration,
    write_calibration_report,
)
from .config import ConfigError, load_run_config
from .engine import compare_tests, write_report_csv
from .pools import PoolFormatError, pool_summary, read_pool_csv, synthetic_pool, write_pool_csv


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", type=Path, required=True, help="run configuration file")
    parser.add_argument("--seed", type=int, default=None, help="override the config seed")
    parser.add_argument("--workers", type=int, default=None, help="cap on worker processes")
    parser.add_argument("--out", type=Path, default=None, help="override the output path")


def _summary_lines(summary: dict) -> list[str]:
    lines = [f"items: {summary['size']}  categories: {summary['categories']}"]
    for name in ("a", "b", "c"):
        s = summary[name]
        lines.append(f"{name}: min {s['min']:.3f}  median {s['median']:.3f}  max {s['max']:.3f}")
    return lines


def cmd_pool_generate(args) -> int:
    pool = synthetic_pool(args.size, args.seed, categories=args.categories)
    args.out.parent.mkdir(parents=True, exist_ok=True)
    write_pool_csv(pool, args.out)
    print(f"wrote {len(pool)} items to {args.out}")
    for line in _summary_lines(pool_summary(pool)):
        print(line)
    return 0


def cmd_pool_validate(args) -> int:
    pool = read_pool_csv(args.path)
    print(f"{args.path}: valid")
    for line in _summary_lines(pool_summary(pool)):
        print(line)
    return 0


def cmd_calibrate(args) -> int:
    cfg = load_run_config(args.config, seed_override=args.seed, workers_override=args.workers)
    pool = cfg.load_pool()
    report = run_full_calibration(
        pool, cfg.hypotheses, cfg.max_length, cfg.min_stage, cfg.selection, cfg.calibration,
        constraints=cfg.constraints, clamp=cfg.clamp, kl_offset=cfg.kl_offset,
        workers=cfg.workers, method=cfg.calibration_method,
        pool_source=cfg.pool_descriptor())
    out = args.out if args.out is not None else cfg.calibration_report_path
    out.parent.mkdir(parents=True, exist_ok=True)
    write_calibration_report(report, out)
    t = report["thresholds"]
    print(f"theta_implied = {report['theta_implied']:.4f}")
    print(f"reject_bound = {t['reject_bound']:.4f}")
    print(f"accept_bound = {t['accept_bound']:.4f}")
    print(f"terminal_cutoff = {t['terminal_cutoff']:.4f}")
    print(f"report written to {out}")
    return 0


def cmd_simulate(args) -> int:
    cfg = load_run_config(args.config, seed_override=args.seed, workers_override=args.workers)
    if not cfg.rules:
        raise ConfigError(f"{cfg.path}: no [rule:*] sections to simulate")
    pool = cfg.load_pool()
    calib = None
    if cfg.calibration_report_path.is_file():
        calib = load_calibration_report(cfg.calibration_report_path)
    configs = cfg.build_test_configs(calib)
    report = compare_tests(pool, configs, cfg.theta_grid,
                           replications=cfg.sim_replications,
                           master_seed=cfg.seed, workers=cfg.workers)
    out = args.out if args.out is not None else cfg.sim_report_path
    out.parent.mkdir(parents=True, exist_ok=True)
    write_report_csv(report, out)
    written = [str(out)]
    if cfg.figures:
        from .figures import render_report_figures

        written += [str(p) for p in render_report_figures(report, out)]
    print(report.format_table())
    print()
    print("wrote " + ", ".join(written))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cmtsim",
        description="Variable-length computerized mastery tests: pool tools, "
                    "threshold calibration, and simulation studies.")
    sub = parser.add_subparsers(dest="command", required=True)

    pool = sub.add_parser("pool", help="generate or validate item-pool CSV files")
    pool_sub = pool.add_subparsers(dest="pool_command", required=True)
    gen = pool_sub.add_parser("generate", help="write a synthetic pool")
    gen.add_argument("--size", type=int, required=True)
    gen.add_argument("--seed", type=int, required=True)
    gen.add_argument("--out", type=Path, required=True)
    gen.add_argument("--categories", type=int, default=None,
                     help="assign this many content categories uniformly at random")
    gen.set_defaults(func=cmd_pool_generate)
    val = pool_sub.add_parser("validate", help="check a pool CSV and print its summary")
    val.add_argument("path", type=Path)
    val.set_defaults(func=cmd_pool_validate)

    cal = sub.add_parser("calibrate", help="compute the implied alternative and thresholds")
    _add_common(cal)
    cal.set_defaults(func=cmd_calibrate)

    simp = sub.add_parser("simulate", help="compare the configured rules over an ability grid")
    _add_common(simp)
    simp.set_defaults(func=cmd_simulate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, PoolFormatError, BracketError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
