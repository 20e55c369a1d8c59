"""Command-line entry point exposing every capability as a subcommand.

Reports go to standard output (or ``--out``); logs and usage errors go to
standard error. Exit codes: 0 success, 1 validation error, 2 I/O error.
"""
from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from pathlib import Path

from . import __version__
from .aggregation import (
    METRIC_HEADER,
    ScanOptions,
    ScanReport,
    load_experiment_configs,
    rank_report,
    scan,
)
from .bootstrap_check import BootstrapConfig, ratio_table
from .cohorts import bucket, load_edge_list, write_cohort_csv
from .core import AversionParam, estimate
from .elicitation import solve_epsilon
from .errors import DataFormatError, ValidationError
from .inference import compare


class _UsageError(Exception):
    def __init__(self, message: str) -> None:
        super().__init__(message)
        self.message = message


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # exit 1, not argparse's default 2
        self.print_usage(sys.stderr)
        raise _UsageError(f"{self.prog}: error: {message}")


def ede_reading(delta: float) -> str:
    """Render an inequality delta as its equally-distributed-equivalent cost."""
    return f"equivalent to giving up {100.0 * delta:.4g}% of the metric"


def _parse_epsilons(raw: str) -> list[AversionParam]:
    out = []
    for part in raw.split(","):
        part = part.strip()
        if not part:
            continue
        try:
            out.append(AversionParam(float(part)))
        except ValueError as exc:
            raise ValidationError(f"bad --epsilon value {part!r}: {exc}") from exc
    if not out:
        raise ValidationError("--epsilon needs at least one value")
    return out


def _read_metric_csv(path: str) -> dict[str, list[float]]:
    """Read either the canonical 3-column metrics CSV or a 1-column value list."""
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise DataFormatError(f"{path} is empty")
        header = [h.strip() for h in header]
        values: dict[str, list[float]] = {}
        if header == METRIC_HEADER:
            for i, row in enumerate(reader, start=2):
                if not row or not any(f.strip() for f in row):
                    continue
                if len(row) != 3:
                    raise DataFormatError(f"{path}:{i}: expected 3 columns")
                try:
                    values.setdefault(row[1].strip(), []).append(float(row[2]))
                except ValueError as exc:
                    raise DataFormatError(f"{path}:{i}: bad value {row[2]!r}") from exc
        elif header == ["value"]:
            col: list[float] = []
            for i, row in enumerate(reader, start=2):
                if not row or not row[0].strip():
                    continue
                try:
                    col.append(float(row[0]))
                except ValueError as exc:
                    raise DataFormatError(f"{path}:{i}: bad value {row[0]!r}") from exc
            values["metric"] = col
        else:
            raise DataFormatError(
                f"{path}: expected header {','.join(METRIC_HEADER)!r} or 'value'"
            )
    if not values:
        raise DataFormatError(f"{path} contains no data rows")
    return values


def _emit(payload: dict | str, out: str | None) -> None:
    text = payload if isinstance(payload, str) else json.dumps(payload, indent=2)
    if out:
        Path(out).write_text(text + "\n", encoding="utf-8")
    else:
        print(text)


def _cmd_compute(args) -> int:
    metrics = _read_metric_csv(args.metrics)
    if args.metric:
        if args.metric not in metrics:
            raise ValidationError(f"metric {args.metric!r} not present in {args.metrics}")
        metrics = {args.metric: metrics[args.metric]}
    results = []
    for name in sorted(metrics):
        for eps in _parse_epsilons(args.epsilon):
            est = estimate(metrics[name], eps)
            results.append(
                {
                    "metric": name,
                    "epsilon": eps.epsilon,
                    "index": est.index,
                    "sigma2": est.sigma2,
                    "variance": est.variance,
                    "n": est.n,
                }
            )
    _emit({"results": results}, args.out)
    return 0


def _cmd_abtest(args) -> int:
    treatment = _read_metric_csv(args.treatment)
    control = _read_metric_csv(args.control)
    if args.metric:
        names = [args.metric]
    else:
        names = sorted(set(treatment) & set(control))
        if not names:
            raise ValidationError("the two files share no metric names")
    results = []
    for name in names:
        if name not in treatment or name not in control:
            raise ValidationError(f"metric {name!r} missing from one of the files")
        for eps in _parse_epsilons(args.epsilon):
            t_est = estimate(treatment[name], eps)
            c_est = estimate(control[name], eps)
            res = compare(t_est, c_est, alpha=args.alpha)
            results.append(
                {
                    "metric": name,
                    "epsilon": eps.epsilon,
                    "treatment": {"index": t_est.index, "sigma2": t_est.sigma2, "n": t_est.n},
                    "control": {"index": c_est.index, "sigma2": c_est.sigma2, "n": c_est.n},
                    "delta": res.delta,
                    "var_delta": res.var_delta,
                    "t": res.t_stat,
                    "p": res.p_value,
                    "significant": res.significant,
                    "direction": res.direction,
                    "ede_reading": ede_reading(res.delta),
                }
            )
    _emit({"alpha": args.alpha, "results": results}, args.out)
    return 0


def _scan_options(args) -> ScanOptions:
    return ScanOptions(
        alpha=args.alpha,
        srm_alpha=args.srm_alpha,
        zero_fill=not args.no_zero_fill,
        malformed_budget=args.error_budget,
        threads=args.threads,
    )


def _report_json(report: ScanReport) -> dict:
    payload = report.to_json_dict()
    for entry in payload["comparisons"]:
        entry["ede_reading"] = ede_reading(entry["delta"])
    return payload


def _cmd_scan(args) -> int:
    report = scan(
        args.assignments,
        args.metrics,
        load_experiment_configs(args.config),
        options=_scan_options(args),
    )
    payload = _report_json(report)
    if args.top is not None:
        ranked = rank_report(report, args.top)
        payload["top"] = [c.to_json_dict() | {"ede_reading": ede_reading(c.result.delta)} for c in ranked]
    _emit(payload, args.out)
    return 0


def _cmd_sitewide(args) -> int:
    report = scan(
        args.assignments,
        args.metrics,
        load_experiment_configs(args.config),
        options=_scan_options(args),
    )
    payload = _report_json(report)
    payload["comparisons"] = [e for e in payload["comparisons"] if "sitewide" in e]
    if not payload["comparisons"]:
        print(
            "warning: no site-wide results; configure population.rest_totals per (metric, epsilon)",
            file=sys.stderr,
        )
    _emit(payload, args.out)
    return 0


def _cmd_bootstrap_check(args) -> int:
    with open(args.config, "r", encoding="utf-8") as fh:
        try:
            raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise DataFormatError(f"config is not valid JSON: {exc}") from exc
    table = ratio_table(BootstrapConfig.from_dict(raw), threads=args.threads)
    if args.csv:
        with open(args.csv, "w", encoding="utf-8", newline="") as fh:
            table.to_csv(fh)
    _emit(table.to_json_dict(), args.out)
    return 0


def _cmd_cohorts(args) -> int:
    graph, counters = load_edge_list(args.edges)
    result = bucket(graph)
    meta = {
        "eligible": result.eligible_count,
        "bucket_size": result.bucket_size,
        "low_threshold": result.low_threshold,
        "high_threshold": result.high_threshold,
        "tie_rule": result.tie_rule,
        "counts": result.counts(),
        "edges": {
            "rows_read": counters.rows_read,
            "edges_loaded": counters.edges_loaded,
            "self_loops_dropped": counters.self_loops_dropped,
            "duplicates_dropped": counters.duplicates_dropped,
        },
    }
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            write_cohort_csv(result, fh)
    else:
        write_cohort_csv(result, sys.stdout)
    if args.meta:
        Path(args.meta).write_text(json.dumps(meta, indent=2) + "\n", encoding="utf-8")
    else:
        print(json.dumps(meta), file=sys.stderr)
    return 0


def _cmd_elicit_serve(args) -> int:
    from .service import serve

    serve(port=args.port, host=args.host, static_dir=args.static)
    return 0


def _cmd_elicit_solve(args) -> int:
    eps = solve_epsilon(args.t1, args.s1, args.t2, args.s2)
    _emit({"epsilon": eps}, args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="atkinson-ab", description=__doc__)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("compute", help="index, variance, and n for a metrics CSV")
    p.add_argument("metrics", help="metrics CSV (member_id,metric_name,value or a value column)")
    p.add_argument("--epsilon", required=True, help="aversion parameter(s), comma-separated")
    p.add_argument("--metric", help="restrict to one metric name")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_compute)

    p = sub.add_parser("abtest", help="treatment-vs-control comparison from two metrics CSVs")
    p.add_argument("treatment")
    p.add_argument("control")
    p.add_argument("--epsilon", required=True)
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--metric")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_abtest)

    for name, fn, about in (
        ("scan", _cmd_scan, "multi-experiment scan producing the full report"),
        ("sitewide", _cmd_sitewide, "scan restricted to site-wide extrapolation results"),
    ):
        p = sub.add_parser(name, help=about)
        p.add_argument("--assignments", required=True)
        p.add_argument("--metrics", required=True)
        p.add_argument("--config", required=True)
        p.add_argument("--alpha", type=float, default=0.05)
        p.add_argument("--srm-alpha", type=float, default=0.001)
        p.add_argument("--threads", type=int, default=os.cpu_count() or 1)
        p.add_argument("--no-zero-fill", action="store_true",
                       help="do not count assigned members missing from the metrics as zeros")
        p.add_argument("--error-budget", type=float, default=0.01,
                       help="abort when malformed rows exceed this fraction")
        if name == "scan":
            p.add_argument("--top", type=int, help="also emit the top-K ranked comparisons")
        p.add_argument("--out")
        p.set_defaults(func=fn)

    p = sub.add_parser("bootstrap-check", help="bootstrap vs theoretical variance ratio table")
    p.add_argument("config", help="JSON config (sample_sizes, epsilons, bootstrap_runs, ...)")
    p.add_argument("--threads", type=int, default=os.cpu_count() or 1)
    p.add_argument("--csv", help="also write the table as CSV to this path")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_bootstrap_check)

    p = sub.add_parser("cohorts", help="social-capital cohorts from an edge-list CSV")
    p.add_argument("edges")
    p.add_argument("--out", help="cohort CSV destination (default: stdout)")
    p.add_argument("--meta", help="write thresholds/counters JSON to this path")
    p.set_defaults(func=_cmd_cohorts)

    p = sub.add_parser("elicit", help="aversion-parameter elicitation")
    esub = p.add_subparsers(dest="elicit_command", required=True, parser_class=_Parser)
    ps = esub.add_parser("serve", help="run the choice-experiment HTTP service")
    ps.add_argument("--port", type=int, required=True)
    ps.add_argument("--host", default="127.0.0.1")
    ps.add_argument("--static", help="serve this directory (the UI bundle) at /")
    ps.set_defaults(func=_cmd_elicit_serve)
    ps = esub.add_parser("solve", help="solve eps from one equivalence judgment")
    ps.add_argument("--t1", type=float, required=True)
    ps.add_argument("--s1", type=float, required=True)
    ps.add_argument("--t2", type=float, required=True)
    ps.add_argument("--s2", type=float, required=True)
    ps.add_argument("--out")
    ps.set_defaults(func=_cmd_elicit_solve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except _UsageError as exc:
        print(exc.message, file=sys.stderr)
        return 1
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
