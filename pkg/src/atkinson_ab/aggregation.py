"""Multi-experiment scan over assignment and metric files.

Assignments are loaded into an in-memory index keyed by member id; the
metric file is then streamed once, updating one moment buffer per
(experiment, segment, variant, metric, eps) key. Partitions of the metric
stream are folded by independent workers with private buffers and merged at
the end, so thread count never changes results beyond float tolerance.
"""
from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from scipy.stats import chi2

from .core import (
    AtkinsonEstimate,
    AversionParam,
    MomentAccumulator,
    MomentSums,
    estimate_from_sums,
)
from .errors import DataFormatError, ValidationError, ZeroTotalError
from .inference import ComparisonResult, compare
from .sitewide import SitewideInputs, sitewide_compare

ASSIGNMENT_HEADER = ["member_id", "experiment_id", "segment_id", "variant"]
METRIC_HEADER = ["member_id", "metric_name", "value"]

DEFAULT_ALPHA = 0.05
DEFAULT_SRM_ALPHA = 0.001
DEFAULT_MALFORMED_BUDGET = 0.01


@dataclass(frozen=True)
class AssignmentRecord:
    member_id: str
    experiment_id: str
    segment_id: str
    variant: str


@dataclass(frozen=True)
class MetricRecord:
    member_id: str
    metric_name: str
    value: float


@dataclass(frozen=True)
class SegmentConfig:
    segment_id: str
    designed_fractions: dict[str, float]

    def __post_init__(self) -> None:
        if not self.segment_id:
            raise ValidationError("segment_id must be non-empty")
        if not self.designed_fractions:
            raise ValidationError(f"segment {self.segment_id!r} has no variants")
        total = sum(self.designed_fractions.values())
        if any(f < 0.0 for f in self.designed_fractions.values()):
            raise ValidationError(f"segment {self.segment_id!r} has a negative fraction")
        if abs(total - 1.0) > 1e-9:
            raise ValidationError(
                f"designed fractions for segment {self.segment_id!r} sum to {total}, not 1"
            )


@dataclass(frozen=True)
class RestTotals:
    metric: str
    epsilon: AversionParam
    x_rest: float
    y_rest: float


@dataclass(frozen=True)
class PopulationConfig:
    n_all: int
    rest_totals: tuple[RestTotals, ...]

    def __post_init__(self) -> None:
        if self.n_all < 1:
            raise ValidationError(f"population n_all must be >= 1, got {self.n_all}")

    def rest_for(self, metric: str, eps: AversionParam) -> RestTotals | None:
        for rt in self.rest_totals:
            if rt.metric == metric and rt.epsilon == eps:
                return rt
        return None


@dataclass(frozen=True)
class ExperimentConfig:
    experiment_id: str
    control_variant: str
    segments: tuple[SegmentConfig, ...]
    metrics: tuple[str, ...]
    epsilons: tuple[AversionParam, ...]
    population: PopulationConfig | None = None

    def __post_init__(self) -> None:
        if not self.experiment_id:
            raise ValidationError("experiment_id must be non-empty")
        if not self.segments:
            raise ValidationError(f"experiment {self.experiment_id!r} has no segments")
        if not self.metrics or any(not m for m in self.metrics):
            raise ValidationError(f"experiment {self.experiment_id!r} needs non-empty metric names")
        if len(set(self.metrics)) != len(self.metrics):
            raise ValidationError(f"experiment {self.experiment_id!r} lists a metric twice")
        if not self.epsilons:
            raise ValidationError(f"experiment {self.experiment_id!r} needs at least one epsilon")
        seg_ids = [s.segment_id for s in self.segments]
        if len(set(seg_ids)) != len(seg_ids):
            raise ValidationError(f"experiment {self.experiment_id!r} lists a segment twice")
        for seg in self.segments:
            if self.control_variant not in seg.designed_fractions:
                raise ValidationError(
                    f"control variant {self.control_variant!r} missing from segment "
                    f"{seg.segment_id!r} of experiment {self.experiment_id!r}"
                )

    def segment(self, segment_id: str) -> SegmentConfig | None:
        for seg in self.segments:
            if seg.segment_id == segment_id:
                return seg
        return None


def _config_from_dict(raw: dict) -> ExperimentConfig:
    try:
        segments = tuple(
            SegmentConfig(
                segment_id=str(s["segment_id"]),
                designed_fractions={str(v): float(f) for v, f in s["designed_fractions"].items()},
            )
            for s in raw["segments"]
        )
        population = None
        if raw.get("population") is not None:
            pop = raw["population"]
            population = PopulationConfig(
                n_all=int(pop["n_all"]),
                rest_totals=tuple(
                    RestTotals(
                        metric=str(rt["metric"]),
                        epsilon=AversionParam(float(rt["epsilon"])),
                        x_rest=float(rt["x_rest"]),
                        y_rest=float(rt["y_rest"]),
                    )
                    for rt in pop.get("rest_totals", [])
                ),
            )
        return ExperimentConfig(
            experiment_id=str(raw["experiment_id"]),
            control_variant=str(raw["control_variant"]),
            segments=segments,
            metrics=tuple(str(m) for m in raw["metrics"]),
            epsilons=tuple(AversionParam(float(e)) for e in raw["epsilons"]),
            population=population,
        )
    except KeyError as exc:
        raise DataFormatError(f"experiment config missing field {exc}") from exc
    except (TypeError, AttributeError) as exc:
        raise DataFormatError(f"experiment config is structurally invalid: {exc}") from exc


def load_experiment_configs(source: str | Path | dict) -> list[ExperimentConfig]:
    """Parse the experiment-config JSON document (path or already-loaded dict)."""
    if isinstance(source, (str, Path)):
        with open(source, "r", encoding="utf-8") as fh:
            try:
                source = json.load(fh)
            except json.JSONDecodeError as exc:
                raise DataFormatError(f"config is not valid JSON: {exc}") from exc
    if not isinstance(source, dict) or "experiments" not in source:
        raise DataFormatError('config must be an object with an "experiments" array')
    configs = [_config_from_dict(raw) for raw in source["experiments"]]
    ids = [c.experiment_id for c in configs]
    if len(set(ids)) != len(ids):
        raise DataFormatError("config lists an experiment_id twice")
    return configs


@dataclass(frozen=True)
class BufferKey:
    experiment_id: str
    segment_id: str
    variant: str
    metric_name: str
    epsilon: AversionParam

    def __post_init__(self) -> None:
        for name in ("experiment_id", "segment_id", "variant", "metric_name"):
            if not getattr(self, name):
                raise ValidationError(f"buffer key component {name} must be non-empty")


@dataclass(frozen=True)
class SrmVerdict:
    statistic: float
    p_value: float
    df: int
    alpha: float
    passed: bool


def srm_check(
    observed: Mapping[str, int],
    designed: Mapping[str, float],
    alpha: float = DEFAULT_SRM_ALPHA,
) -> SrmVerdict:
    """Pearson chi-squared check of observed arm sizes against designed fractions."""
    if not 0.0 < alpha < 1.0:
        raise ValidationError(f"alpha must lie in (0, 1), got {alpha!r}")
    unknown = set(observed) - set(designed)
    if unknown:
        raise ValidationError(f"observed variants missing from the design: {sorted(unknown)}")
    if any(c < 0 for c in observed.values()):
        raise ValidationError("observed counts must be >= 0")
    total = sum(observed.values())
    if total <= 0:
        raise ValidationError("total observed count must be > 0")
    frac_total = sum(designed.values())
    if abs(frac_total - 1.0) > 1e-9:
        raise ValidationError(f"designed fractions sum to {frac_total}, not 1")

    statistic = 0.0
    df = -1
    for variant, fraction in designed.items():
        count = observed.get(variant, 0)
        if fraction <= 0.0:
            if count > 0:
                raise ValidationError(
                    f"variant {variant!r} has designed fraction 0 but {count} observed members"
                )
            continue
        expected = total * fraction
        statistic += (count - expected) ** 2 / expected
        df += 1
    if df < 1:
        raise ValidationError("need at least two variants with positive designed fractions")
    p_value = float(chi2.sf(statistic, df))
    return SrmVerdict(statistic=statistic, p_value=p_value, df=df, alpha=alpha, passed=p_value >= alpha)


@dataclass
class ScanOptions:
    alpha: float = DEFAULT_ALPHA
    srm_alpha: float = DEFAULT_SRM_ALPHA
    zero_fill: bool = True
    malformed_budget: float = DEFAULT_MALFORMED_BUDGET
    threads: int = 1


@dataclass
class InputCounters:
    rows_read: int = 0
    rows_used: int = 0
    rows_skipped: int = 0
    rows_malformed: int = 0

    def to_dict(self) -> dict:
        return {
            "rows_read": self.rows_read,
            "rows_used": self.rows_used,
            "rows_skipped": self.rows_skipped,
            "rows_malformed": self.rows_malformed,
        }

    def add(self, other: "InputCounters") -> None:
        self.rows_read += other.rows_read
        self.rows_used += other.rows_used
        self.rows_skipped += other.rows_skipped
        self.rows_malformed += other.rows_malformed


@dataclass
class ScanCounters:
    assignments: InputCounters = field(default_factory=InputCounters)
    metrics: InputCounters = field(default_factory=InputCounters)
    unknown_experiment_rows: int = 0
    unknown_segment_rows: int = 0
    unknown_variant_rows: int = 0
    duplicate_assignment_rows: int = 0
    assignment_conflicts: int = 0
    unassigned_member_rows: int = 0
    unconfigured_metric_rows: int = 0
    duplicate_metric_rows: int = 0
    zero_filled_members: int = 0
    comparisons: int = 0
    comparisons_skipped: int = 0
    sitewide_skipped: int = 0
    srm_failures: int = 0

    def to_dict(self) -> dict:
        return {
            "assignments": self.assignments.to_dict(),
            "metrics": self.metrics.to_dict(),
            "unknown_experiment_rows": self.unknown_experiment_rows,
            "unknown_segment_rows": self.unknown_segment_rows,
            "unknown_variant_rows": self.unknown_variant_rows,
            "duplicate_assignment_rows": self.duplicate_assignment_rows,
            "assignment_conflicts": self.assignment_conflicts,
            "unassigned_member_rows": self.unassigned_member_rows,
            "unconfigured_metric_rows": self.unconfigured_metric_rows,
            "duplicate_metric_rows": self.duplicate_metric_rows,
            "zero_filled_members": self.zero_filled_members,
            "comparisons": self.comparisons,
            "comparisons_skipped": self.comparisons_skipped,
            "sitewide_skipped": self.sitewide_skipped,
            "srm_failures": self.srm_failures,
        }


@dataclass(frozen=True)
class ScanComparison:
    experiment_id: str
    segment_id: str
    metric: str
    epsilon: float
    variant: str
    control: str
    variant_estimate: AtkinsonEstimate
    control_estimate: AtkinsonEstimate
    result: ComparisonResult
    srm: SrmVerdict
    sitewide: ComparisonResult | None = None

    def sort_key(self) -> tuple:
        return (self.experiment_id, self.segment_id, self.metric, self.epsilon, self.variant)

    def to_json_dict(self) -> dict:
        def _est(e: AtkinsonEstimate) -> dict:
            return {"index": e.index, "sigma2": e.sigma2, "variance": e.variance, "n": e.n}

        entry = {
            "experiment_id": self.experiment_id,
            "segment_id": self.segment_id,
            "metric": self.metric,
            "epsilon": self.epsilon,
            "variant": self.variant,
            "control": self.control,
            "estimates": {
                self.variant: _est(self.variant_estimate),
                self.control: _est(self.control_estimate),
            },
            "delta": self.result.delta,
            "t": self.result.t_stat,
            "p": self.result.p_value,
            "significant": self.result.significant,
            "direction": self.result.direction,
            "srm": {
                "statistic": self.srm.statistic,
                "p": self.srm.p_value,
                "pass": self.srm.passed,
            },
        }
        if self.sitewide is not None:
            entry["sitewide"] = {
                "delta": self.sitewide.delta,
                "t": self.sitewide.t_stat,
                "p": self.sitewide.p_value,
                "significant": self.sitewide.significant,
            }
        return entry


@dataclass
class ScanReport:
    comparisons: list[ScanComparison]
    estimates: dict[BufferKey, AtkinsonEstimate | None]
    srm: dict[tuple[str, str], SrmVerdict]
    counters: ScanCounters

    def to_json_dict(self) -> dict:
        return {
            "comparisons": [c.to_json_dict() for c in self.comparisons],
            "counters": self.counters.to_dict(),
        }

    def to_json(self, indent: int | None = 2) -> str:
        return json.dumps(self.to_json_dict(), indent=indent)


def rank_report(report: ScanReport, k: int) -> list[ScanComparison]:
    """Top-k significant, SRM-passing comparisons by absolute inequality impact."""
    if k < 0:
        raise ValidationError(f"k must be >= 0, got {k}")
    eligible = [c for c in report.comparisons if c.result.significant and c.srm.passed]
    eligible.sort(key=lambda c: (-abs(c.result.delta), c.result.p_value, c.sort_key()))
    return eligible[:k]


# --- input plumbing ---------------------------------------------------------


def _open_rows(
    source: str | Path | Iterable, header: list[str]
) -> tuple[list, io.TextIOBase | None]:
    """Materialize input rows: CSV file path, CSV text lines, or record objects."""
    if isinstance(source, (str, Path)):
        fh = open(source, "r", encoding="utf-8", newline="")
        reader = csv.reader(fh)
        first = next(reader, None)
        if first is None or [h.strip() for h in first] != header:
            fh.close()
            raise DataFormatError(f"expected header {','.join(header)!r} in {source}")
        return list(reader), fh
    rows = list(source)
    if rows and isinstance(rows[0], str):
        reader = csv.reader(rows)
        first = next(reader, None)
        if first is None or [h.strip() for h in first] != header:
            raise DataFormatError(f"expected header {','.join(header)!r} in line input")
        return list(reader), None
    return rows, None


def _parse_assignment(row) -> tuple[str, str, str, str] | None:
    if isinstance(row, AssignmentRecord):
        fields = (row.member_id, row.experiment_id, row.segment_id, row.variant)
    else:
        if len(row) != 4:
            return None
        fields = tuple(f.strip() for f in row)
    if not all(fields):
        return None
    return fields  # type: ignore[return-value]


def _parse_metric(row) -> tuple[str, str, float] | None:
    if isinstance(row, MetricRecord):
        member, metric, value = row.member_id, row.metric_name, row.value
    else:
        if len(row) != 3:
            return None
        member, metric = row[0].strip(), row[1].strip()
        try:
            value = float(row[2])
        except ValueError:
            return None
    if not member or not metric:
        return None
    if not math.isfinite(value) or value < 0.0:
        return None
    return member, metric, value


def _load_assignments(
    rows: list,
    configs_by_id: Mapping[str, ExperimentConfig],
    counters: ScanCounters,
) -> tuple[dict[str, tuple[tuple[str, str, str], ...]], dict[tuple[str, str, str], int]]:
    groups: dict[tuple[str, str], dict[tuple[str, str], int]] = {}
    stats = counters.assignments
    for row in rows:
        if isinstance(row, list) and not any(f.strip() for f in row):
            continue
        stats.rows_read += 1
        parsed = _parse_assignment(row)
        if parsed is None:
            stats.rows_malformed += 1
            continue
        member, exp, seg, variant = parsed
        cfg = configs_by_id.get(exp)
        if cfg is None:
            stats.rows_skipped += 1
            counters.unknown_experiment_rows += 1
            continue
        seg_cfg = cfg.segment(seg)
        if seg_cfg is None:
            stats.rows_skipped += 1
            counters.unknown_segment_rows += 1
            continue
        if variant not in seg_cfg.designed_fractions:
            stats.rows_skipped += 1
            counters.unknown_variant_rows += 1
            continue
        groups.setdefault((member, exp), {})
        groups[(member, exp)][(seg, variant)] = groups[(member, exp)].get((seg, variant), 0) + 1

    index: dict[str, list[tuple[str, str, str]]] = {}
    assigned_counts: dict[tuple[str, str, str], int] = {}
    for (member, exp), placements in groups.items():
        total_rows = sum(placements.values())
        if len(placements) > 1:
            counters.assignment_conflicts += 1
            stats.rows_malformed += total_rows
            continue
        (seg, variant), count = next(iter(placements.items()))
        stats.rows_used += 1
        stats.rows_skipped += count - 1
        counters.duplicate_assignment_rows += count - 1
        index.setdefault(member, []).append((exp, seg, variant))
        assigned_counts[(exp, seg, variant)] = assigned_counts.get((exp, seg, variant), 0) + 1
    return {m: tuple(t) for m, t in index.items()}, assigned_counts


class _Cell:
    """Private per-worker state for one (experiment, segment, variant, metric)."""

    __slots__ = ("accumulators", "rows", "seen")

    def __init__(self, epsilons: Sequence[AversionParam]) -> None:
        self.accumulators = {eps: MomentAccumulator(eps) for eps in epsilons}
        self.rows = 0
        self.seen: set[str] = set()

    def add(self, member: str, value: float) -> None:
        for acc in self.accumulators.values():
            acc.add(value)
        self.rows += 1
        self.seen.add(member)

    def merge_from(self, other: "_Cell") -> None:
        for eps, acc in self.accumulators.items():
            acc.merge_from(other.accumulators[eps])
        self.rows += other.rows
        self.seen |= other.seen


def _scan_metric_partition(
    rows: list,
    index: Mapping[str, tuple[tuple[str, str, str], ...]],
    configs_by_id: Mapping[str, ExperimentConfig],
) -> tuple[dict[tuple[str, str, str, str], _Cell], InputCounters, int, int]:
    cells: dict[tuple[str, str, str, str], _Cell] = {}
    stats = InputCounters()
    unassigned = 0
    unconfigured = 0
    for row in rows:
        if isinstance(row, list) and not any(f.strip() for f in row):
            continue
        stats.rows_read += 1
        parsed = _parse_metric(row)
        if parsed is None:
            stats.rows_malformed += 1
            continue
        member, metric, value = parsed
        targets = index.get(member)
        if not targets:
            stats.rows_skipped += 1
            unassigned += 1
            continue
        contributed = False
        for exp, seg, variant in targets:
            cfg = configs_by_id[exp]
            if metric not in cfg.metrics:
                continue
            cell_key = (exp, seg, variant, metric)
            cell = cells.get(cell_key)
            if cell is None:
                cell = cells[cell_key] = _Cell(cfg.epsilons)
            cell.add(member, value)
            contributed = True
        if contributed:
            stats.rows_used += 1
        else:
            stats.rows_skipped += 1
            unconfigured += 1
    return cells, stats, unassigned, unconfigured


def _partition(rows: list, parts: int) -> list[list]:
    if parts <= 1 or len(rows) <= 1:
        return [rows]
    size = math.ceil(len(rows) / parts)
    return [rows[i : i + size] for i in range(0, len(rows), size)]


def scan(
    assignments: str | Path | Iterable,
    metrics: str | Path | Iterable,
    configs: str | Path | dict | Sequence[ExperimentConfig],
    *,
    options: ScanOptions | None = None,
) -> ScanReport:
    """Scan assignment and metric inputs into a full multi-experiment report.

    ``assignments`` and ``metrics`` may be CSV file paths, iterables of CSV
    lines (header first), or iterables of record objects. Members assigned to
    a variant but absent from the metric data contribute value 0 unless
    ``options.zero_fill`` is disabled.
    """
    opts = options or ScanOptions()
    if isinstance(configs, (str, Path, dict)):
        configs = load_experiment_configs(configs)
    configs_by_id = {c.experiment_id: c for c in configs}
    counters = ScanCounters()

    a_rows, a_fh = _open_rows(assignments, ASSIGNMENT_HEADER)
    try:
        index, assigned_counts = _load_assignments(a_rows, configs_by_id, counters)
    finally:
        if a_fh is not None:
            a_fh.close()
    _check_budget("assignments", counters.assignments, opts.malformed_budget)

    m_rows, m_fh = _open_rows(metrics, METRIC_HEADER)
    try:
        partitions = _partition(m_rows, max(1, opts.threads))
        if len(partitions) > 1:
            with ThreadPoolExecutor(max_workers=len(partitions)) as pool:
                results = list(
                    pool.map(
                        lambda part: _scan_metric_partition(part, index, configs_by_id),
                        partitions,
                    )
                )
        else:
            results = [_scan_metric_partition(partitions[0], index, configs_by_id)]
    finally:
        if m_fh is not None:
            m_fh.close()

    cells: dict[tuple[str, str, str, str], _Cell] = {}
    for part_cells, stats, unassigned, unconfigured in results:
        counters.metrics.add(stats)
        counters.unassigned_member_rows += unassigned
        counters.unconfigured_metric_rows += unconfigured
        for cell_key, cell in part_cells.items():
            base = cells.get(cell_key)
            if base is None:
                cells[cell_key] = cell
            else:
                base.merge_from(cell)
    _check_budget("metrics", counters.metrics, opts.malformed_budget)

    # every observed (experiment, segment, variant) owns a buffer per
    # configured metric, even if no metric rows arrived
    for (exp, seg, variant), _count in assigned_counts.items():
        cfg = configs_by_id[exp]
        for metric in cfg.metrics:
            cells.setdefault((exp, seg, variant, metric), _Cell(cfg.epsilons))

    estimates: dict[BufferKey, AtkinsonEstimate | None] = {}
    buffers: dict[BufferKey, MomentSums] = {}
    for (exp, seg, variant, metric), cell in cells.items():
        assigned = assigned_counts[(exp, seg, variant)]
        missing = assigned - len(cell.seen)
        counters.duplicate_metric_rows += cell.rows - len(cell.seen)
        for eps, acc in cell.accumulators.items():
            ms = acc.snapshot()
            if opts.zero_fill and missing > 0:
                ms = replace(ms, n=ms.n + missing)
            key = BufferKey(exp, seg, variant, metric, eps)
            buffers[key] = ms
            try:
                estimates[key] = estimate_from_sums(ms)
            except ValidationError:
                estimates[key] = None
        if opts.zero_fill and missing > 0:
            counters.zero_filled_members += missing

    srm_verdicts: dict[tuple[str, str], SrmVerdict] = {}
    for (exp, seg) in sorted({(e, s) for (e, s, _v) in assigned_counts}):
        cfg = configs_by_id[exp]
        seg_cfg = cfg.segment(seg)
        observed = {
            variant: assigned_counts.get((exp, seg, variant), 0)
            for variant in seg_cfg.designed_fractions
        }
        verdict = srm_check(observed, seg_cfg.designed_fractions, alpha=opts.srm_alpha)
        srm_verdicts[(exp, seg)] = verdict
        if not verdict.passed:
            counters.srm_failures += 1

    comparisons: list[ScanComparison] = []
    for (exp, seg) in sorted(srm_verdicts):
        cfg = configs_by_id[exp]
        control = cfg.control_variant
        observed_variants = sorted(
            v for (e, s, v) in assigned_counts if e == exp and s == seg
        )
        for metric in cfg.metrics:
            for eps in cfg.epsilons:
                control_est = estimates.get(BufferKey(exp, seg, control, metric, eps))
                for variant in observed_variants:
                    if variant == control:
                        continue
                    variant_est = estimates.get(BufferKey(exp, seg, variant, metric, eps))
                    if control_est is None or variant_est is None:
                        counters.comparisons_skipped += 1
                        continue
                    result = compare(variant_est, control_est, alpha=opts.alpha)
                    sitewide = _maybe_sitewide(
                        cfg,
                        metric,
                        eps,
                        buffers[BufferKey(exp, seg, variant, metric, eps)],
                        buffers[BufferKey(exp, seg, control, metric, eps)],
                        variant,
                        control,
                        n_seg=sum(
                            assigned_counts.get((exp, seg, v), 0) for v in observed_variants
                        ),
                        alpha=opts.alpha,
                        counters=counters,
                    )
                    comparisons.append(
                        ScanComparison(
                            experiment_id=exp,
                            segment_id=seg,
                            metric=metric,
                            epsilon=eps.epsilon,
                            variant=variant,
                            control=control,
                            variant_estimate=variant_est,
                            control_estimate=control_est,
                            result=result,
                            srm=srm_verdicts[(exp, seg)],
                            sitewide=sitewide,
                        )
                    )
                    counters.comparisons += 1
    comparisons.sort(key=ScanComparison.sort_key)
    return ScanReport(
        comparisons=comparisons,
        estimates=estimates,
        srm=srm_verdicts,
        counters=counters,
    )


def _maybe_sitewide(
    cfg: ExperimentConfig,
    metric: str,
    eps: AversionParam,
    variant_ms: MomentSums,
    control_ms: MomentSums,
    variant: str,
    control: str,
    n_seg: int,
    alpha: float,
    counters: ScanCounters,
) -> ComparisonResult | None:
    if cfg.population is None:
        return None
    rest = cfg.population.rest_for(metric, eps)
    if rest is None:
        return None
    try:
        inputs = SitewideInputs(
            epsilon=eps,
            x_rest=rest.x_rest,
            y_rest=rest.y_rest,
            n_all=cfg.population.n_all,
            n_seg=n_seg,
            variants={variant: variant_ms, control: control_ms},
        )
        return sitewide_compare(inputs, treatment=variant, control=control, alpha=alpha)
    except (ValidationError, ZeroTotalError):
        counters.sitewide_skipped += 1
        return None


def _check_budget(name: str, stats: InputCounters, budget: float) -> None:
    if stats.rows_read > 0 and stats.rows_malformed > budget * stats.rows_read:
        raise DataFormatError(
            f"{stats.rows_malformed} of {stats.rows_read} {name} rows are malformed, "
            f"exceeding the {budget:.0%} budget"
        )
