"""Command-line interface.

Subcommands: ``simulate`` (replications of one scheme), ``compare``
(several schemes plus ANOVA/DMRT/best-scheme report), ``sweep`` (volume
sweep with linear fits), ``validate`` (observed vs simulated baseline)
and ``stats`` (standalone ANOVA/DMRT/regression on external CSVs).

Exit codes: 0 success, 2 configuration error, 3 simulation abort.
"""

from __future__ import annotations

import argparse
import csv
import sys
from collections import OrderedDict

import numpy as np

from . import harness, schemes, stats
from .demand import ObservationError
from .net import NetworkError

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_ABORT = 3


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", required=True, help="scenario config JSON")
    p.add_argument("--out", default=None, help="output directory for the report bundle")
    p.add_argument("--jobs", type=int, default=1, help="parallel replication workers")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bicutan",
        description="Microsimulation of the Bicutan Roundabout traffic schemes",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run replications of one scheme")
    _add_common(p)
    p.add_argument("--scheme", default=None, help="override the config's scheme id")
    p.add_argument("--seed", type=int, default=None, help="override the base seed")
    p.add_argument("--reps", type=int, default=None, help="override the replication count")

    p = sub.add_parser("compare", help="compare schemes and pick the best")
    _add_common(p)
    p.add_argument(
        "--schemes",
        default=",".join(schemes.SCHEME_IDS[:6]),
        help="comma-separated scheme ids (default t0..t5)",
    )

    p = sub.add_parser("sweep", help="volume sweep with linear fits")
    _add_common(p)
    p.add_argument("--scheme", default=None, help="scheme id (default from config)")
    p.add_argument(
        "--volumes", default="0,10,50,100", help="comma-separated V+ percents"
    )

    p = sub.add_parser("validate", help="observed vs simulated baseline")
    _add_common(p)
    p.add_argument("--observed", required=True, help="observed CSV (replicate,delta_s,sigma_kph)")

    p = sub.add_parser("stats", help="standalone statistics on external data")
    statsub = p.add_subparsers(dest="stats_command", required=True)
    for name, hint in (
        ("anova", "one-way ANOVA on a group,value CSV"),
        ("dmrt", "ANOVA plus Duncan letter groups on a group,value CSV"),
        ("regress", "ordinary least squares on an x,y CSV"),
    ):
        sp = statsub.add_parser(name, help=hint)
        sp.add_argument("--input", required=True, help="input CSV")
        sp.add_argument("--out", default=None, help="write the rendering to this directory")

    return parser


def _load_config(args) -> harness.ScenarioConfig:
    cfg = harness.ScenarioConfig.from_file(args.config)
    overrides = {}
    if getattr(args, "seed", None) is not None:
        overrides["base_seed"] = args.seed
    if getattr(args, "reps", None) is not None:
        overrides["replications"] = args.reps
    if overrides:
        cfg = cfg.replaced(**overrides)
    return cfg


def _emit(report: harness.ExperimentReport, out_dir) -> None:
    text = harness.render_report_text(report)
    sys.stdout.write(text)
    if out_dir:
        paths = harness.export_report(report, out_dir)
        print("wrote:")
        for p in paths:
            print(f"  {p}")


def cmd_simulate(args) -> int:
    cfg = _load_config(args)
    runset = harness.run_replications(cfg, scheme_id=args.scheme, jobs=args.jobs)
    report = harness.ExperimentReport(config=cfg, runsets={runset.scheme_id: runset})
    _emit(report, args.out)
    return EXIT_OK


def cmd_compare(args) -> int:
    cfg = _load_config(args)
    ids = [s.strip() for s in args.schemes.split(",") if s.strip()]
    runsets = OrderedDict()
    for sid in ids:
        runsets[sid] = harness.run_replications(cfg, scheme_id=sid, jobs=args.jobs)
    comparison = harness.compare_schemes(runsets)
    report = harness.ExperimentReport(config=cfg, runsets=runsets, comparison=comparison)
    _emit(report, args.out)
    return EXIT_OK


def cmd_sweep(args) -> int:
    cfg = _load_config(args)
    sid = args.scheme or cfg.scheme
    volumes = [float(v) for v in args.volumes.split(",") if v.strip()]
    sweep = harness.volume_sweep(cfg, [sid], volumes_pct=volumes, jobs=args.jobs)
    report = harness.ExperimentReport(config=cfg, sweep=sweep)
    _emit(report, args.out)
    return EXIT_OK


def cmd_validate(args) -> int:
    cfg = _load_config(args)
    observed = harness.read_observed_csv(args.observed)
    runset = harness.run_replications(
        cfg.replaced(replications=len(observed)), jobs=args.jobs
    )
    validation = harness.validate_against_observed(observed, runset.results)
    report = harness.ExperimentReport(
        config=cfg, runsets={runset.scheme_id: runset}, validation=validation
    )
    _emit(report, args.out)
    return EXIT_OK


def _read_grouped_csv(path):
    groups = OrderedDict()
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if len(header) != 2:
            raise harness.ConfigError("expected a two-column group,value CSV")
        for row in reader:
            if not row or all(not c.strip() for c in row):
                continue
            groups.setdefault(row[0].strip(), []).append(float(row[1]))
    return list(groups.items())


def _read_xy_csv(path):
    points = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if len(header) != 2:
            raise harness.ConfigError("expected a two-column x,y CSV")
        for row in reader:
            if not row or all(not c.strip() for c in row):
                continue
            points.append((float(row[0]), float(row[1])))
    return points


def cmd_stats(args) -> int:
    out_lines = []
    if args.stats_command == "anova":
        table = stats.one_way_anova(_read_grouped_csv(args.input))
        out_lines.append(stats.render_anova(table, f"One-way ANOVA: {args.input}"))
    elif args.stats_command == "dmrt":
        groups = _read_grouped_csv(args.input)
        table = stats.one_way_anova(groups)
        ns = {len(v) for _, v in groups}
        if len(ns) != 1:
            raise harness.ConfigError("DMRT needs equal group sizes")
        grouping = stats.dmrt(
            [(g, float(np.mean(v))) for g, v in groups],
            n=ns.pop(),
            ms_error=table.error.ms,
            df_error=table.error.df,
        )
        out_lines.append(stats.render_anova(table, f"One-way ANOVA: {args.input}"))
        out_lines.append("")
        out_lines.append(stats.render_dmrt(grouping, "Group means"))
    else:
        fit = stats.linear_regression(_read_xy_csv(args.input))
        out_lines.append(fit.equation("y", "x"))
        out_lines.append(
            f"slope = {fit.slope:.6g} (p = {stats.format_p(fit.slope_p)}), "
            f"intercept = {fit.intercept:.6g} (p = {stats.format_p(fit.intercept_p)}), "
            f"r^2 = {fit.r_squared:.4f}, residual df = {fit.residual_df}"
        )
    text = "\n".join(out_lines) + "\n"
    sys.stdout.write(text)
    if args.out:
        import os

        os.makedirs(args.out, exist_ok=True)
        path = os.path.join(args.out, f"stats_{args.stats_command}.txt")
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
        print(f"wrote:\n  {path}")
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "simulate":
            return cmd_simulate(args)
        if args.command == "compare":
            return cmd_compare(args)
        if args.command == "sweep":
            return cmd_sweep(args)
        if args.command == "validate":
            return cmd_validate(args)
        if args.command == "stats":
            return cmd_stats(args)
        parser.error(f"unknown command {args.command!r}")
    except (harness.ConfigError, NetworkError, ObservationError, stats.StatsError,
            schemes.SchemeError, FileNotFoundError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except harness.SimulationAborted as exc:
        print(f"simulation aborted: {exc}", file=sys.stderr)
        return EXIT_ABORT
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
