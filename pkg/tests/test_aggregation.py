import json

import numpy as np
import pytest

from atkinson_ab import ValidationError, atkinson, estimate
from atkinson_ab.aggregation import (
    AssignmentRecord,
    BufferKey,
    MetricRecord,
    ScanOptions,
    load_experiment_configs,
    rank_report,
    scan,
    srm_check,
)
from atkinson_ab.core import AversionParam
from atkinson_ab.errors import DataFormatError

from test_core import ATKINSON_1_3

# frozen from mpmath regularized upper incomplete gamma, 50 digits
CHI2_SF_40_DF1 = 2.5396285894708649706533620770144511e-10
CHI2_SF_1_DF1 = 0.31731050786291410282953490873592416


class TestSrmCheck:
    def test_exact_split_passes(self):
        v = srm_check({"A": 500, "B": 500}, {"A": 0.5, "B": 0.5})
        assert v.statistic == 0.0
        assert v.passed

    def test_sixty_forty_fails_hard(self):
        v = srm_check({"A": 600, "B": 400}, {"A": 0.5, "B": 0.5})
        assert v.statistic == pytest.approx(40.0, abs=1e-9)
        assert v.p_value == pytest.approx(CHI2_SF_40_DF1, rel=1e-9)
        assert v.p_value < 1e-9
        assert not v.passed

    def test_small_imbalance_passes_conservative_alpha(self):
        v = srm_check({"A": 5050, "B": 4950}, {"A": 0.5, "B": 0.5}, alpha=0.001)
        assert v.statistic == pytest.approx(1.0, abs=1e-12)
        assert v.p_value == pytest.approx(CHI2_SF_1_DF1, rel=1e-9)
        assert v.passed

    def test_three_variants_df(self):
        v = srm_check({"A": 100, "B": 100, "C": 100}, {"A": 1 / 3, "B": 1 / 3, "C": 1 / 3})
        assert v.df == 2

    def test_zero_fraction_with_observations(self):
        with pytest.raises(ValidationError):
            srm_check({"A": 10, "B": 5}, {"A": 1.0, "B": 0.0})

    def test_zero_fraction_without_observations_is_ignored(self):
        v = srm_check({"A": 50, "B": 50, "C": 0}, {"A": 0.5, "B": 0.5, "C": 0.0})
        assert v.df == 1

    def test_unknown_observed_variant(self):
        with pytest.raises(ValidationError):
            srm_check({"A": 10, "Z": 5}, {"A": 0.5, "B": 0.5})

    def test_fractions_must_sum_to_one(self):
        with pytest.raises(ValidationError):
            srm_check({"A": 10, "B": 10}, {"A": 0.5, "B": 0.4})

    def test_zero_total(self):
        with pytest.raises(ValidationError):
            srm_check({"A": 0, "B": 0}, {"A": 0.5, "B": 0.5})


def _config_dict(**overrides) -> dict:
    cfg = {
        "experiment_id": "exp1",
        "control_variant": "control",
        "segments": [
            {"segment_id": "seg1", "designed_fractions": {"treatment": 0.5, "control": 0.5}}
        ],
        "metrics": ["sessions"],
        "epsilons": [0.5],
    }
    cfg.update(overrides)
    return cfg


def _assignment_lines(rows) -> list[str]:
    return ["member_id,experiment_id,segment_id,variant"] + [",".join(r) for r in rows]


def _metric_lines(rows) -> list[str]:
    return ["member_id,metric_name,value"] + [f"{m},{name},{v}" for m, name, v in rows]


BASIC_ASSIGNMENTS = [
    ("m1", "exp1", "seg1", "treatment"),
    ("m2", "exp1", "seg1", "treatment"),
    ("m3", "exp1", "seg1", "control"),
    ("m4", "exp1", "seg1", "control"),
]
BASIC_METRICS = [
    ("m1", "sessions", 1.0),
    ("m2", "sessions", 3.0),
    ("m3", "sessions", 2.0),
    ("m4", "sessions", 2.0),
]


class TestConfigLoading:
    def test_round_trip(self):
        configs = load_experiment_configs({"experiments": [_config_dict()]})
        assert configs[0].experiment_id == "exp1"
        assert configs[0].epsilons == (AversionParam(0.5),)

    def test_population_block(self):
        cfg_dict = _config_dict(
            population={
                "n_all": 100,
                "rest_totals": [
                    {"metric": "sessions", "epsilon": 0.5, "x_rest": 10.0, "y_rest": 8.0}
                ],
            }
        )
        cfg = load_experiment_configs({"experiments": [cfg_dict]})[0]
        assert cfg.population.n_all == 100
        assert cfg.population.rest_for("sessions", AversionParam(0.5)).x_rest == 10.0
        assert cfg.population.rest_for("sessions", AversionParam(0.2)) is None

    def test_missing_field(self):
        broken = _config_dict()
        del broken["control_variant"]
        with pytest.raises(DataFormatError):
            load_experiment_configs({"experiments": [broken]})

    def test_control_must_be_designed(self):
        with pytest.raises(ValidationError):
            load_experiment_configs(
                {"experiments": [_config_dict(control_variant="zz")]}
            )

    def test_fractions_must_sum(self):
        bad = _config_dict(
            segments=[{"segment_id": "s", "designed_fractions": {"a": 0.5, "b": 0.6}}],
            control_variant="a",
        )
        with pytest.raises(ValidationError):
            load_experiment_configs({"experiments": [bad]})

    def test_duplicate_experiment_ids(self):
        with pytest.raises(DataFormatError):
            load_experiment_configs({"experiments": [_config_dict(), _config_dict()]})


class TestScan:
    def test_empty_inputs(self):
        report = scan(
            _assignment_lines([]),
            _metric_lines([]),
            {"experiments": [_config_dict()]},
        )
        assert report.comparisons == []
        assert report.counters.assignments.rows_read == 0
        assert report.counters.metrics.rows_read == 0

    def test_single_experiment_matches_direct_computation(self):
        report = scan(
            _assignment_lines(BASIC_ASSIGNMENTS),
            _metric_lines(BASIC_METRICS),
            {"experiments": [_config_dict()]},
        )
        assert len(report.comparisons) == 1
        entry = report.comparisons[0]
        assert entry.result.delta == pytest.approx(ATKINSON_1_3, rel=1e-12)
        direct = estimate([1.0, 3.0], 0.5)
        assert entry.variant_estimate.index == pytest.approx(direct.index, rel=1e-12)
        assert entry.variant_estimate.sigma2 == pytest.approx(direct.sigma2, rel=1e-9)
        assert entry.control_estimate.index == 0.0
        assert entry.srm.passed

    def test_zero_fill_counts_missing_member(self):
        assignments = BASIC_ASSIGNMENTS + [("m5", "exp1", "seg1", "treatment")]
        report = scan(
            _assignment_lines(assignments),
            _metric_lines(BASIC_METRICS),
            {"experiments": [_config_dict()]},
        )
        key = BufferKey("exp1", "seg1", "treatment", "sessions", AversionParam(0.5))
        assert report.counters.zero_filled_members == 1
        est = report.estimates[key]
        assert est.n == 3  # two observed rows plus one zero-filled member
        assert est.index == pytest.approx(atkinson([1.0, 3.0, 0.0], 0.5), rel=1e-12)

    def test_zero_fill_disabled(self):
        assignments = BASIC_ASSIGNMENTS + [("m5", "exp1", "seg1", "treatment")]
        report = scan(
            _assignment_lines(assignments),
            _metric_lines(BASIC_METRICS),
            {"experiments": [_config_dict()]},
            options=ScanOptions(zero_fill=False),
        )
        key = BufferKey("exp1", "seg1", "treatment", "sessions", AversionParam(0.5))
        assert report.estimates[key].n == 2
        assert report.counters.zero_filled_members == 0

    def test_unknown_experiment_rows_are_skipped(self):
        assignments = BASIC_ASSIGNMENTS + [("m9", "zzz", "seg1", "treatment")]
        report = scan(
            _assignment_lines(assignments),
            _metric_lines(BASIC_METRICS),
            {"experiments": [_config_dict()]},
        )
        assert report.counters.unknown_experiment_rows == 1
        assert report.counters.assignments.rows_skipped == 1

    def test_conflicting_assignment_excludes_member(self):
        assignments = BASIC_ASSIGNMENTS + [("m1", "exp1", "seg1", "control")]
        report = scan(
            _assignment_lines(assignments),
            _metric_lines(BASIC_METRICS),
            {"experiments": [_config_dict()]},
            options=ScanOptions(malformed_budget=0.9),
        )
        assert report.counters.assignment_conflicts == 1
        assert report.counters.assignments.rows_malformed == 2
        # m1 is excluded entirely, leaving a single treatment member
        key = BufferKey("exp1", "seg1", "treatment", "sessions", AversionParam(0.5))
        assert report.estimates[key] is None

    def test_duplicate_assignment_rows_dedup(self):
        assignments = BASIC_ASSIGNMENTS + [("m1", "exp1", "seg1", "treatment")]
        report = scan(
            _assignment_lines(assignments),
            _metric_lines(BASIC_METRICS),
            {"experiments": [_config_dict()]},
        )
        assert report.counters.duplicate_assignment_rows == 1
        key = BufferKey("exp1", "seg1", "treatment", "sessions", AversionParam(0.5))
        assert report.estimates[key].n == 2

    def test_malformed_budget_aborts(self):
        metrics = _metric_lines(BASIC_METRICS) + ["m1,sessions,not-a-number"]
        with pytest.raises(DataFormatError):
            scan(
                _assignment_lines(BASIC_ASSIGNMENTS),
                metrics,
                {"experiments": [_config_dict()]},
            )
        report = scan(
            _assignment_lines(BASIC_ASSIGNMENTS),
            metrics,
            {"experiments": [_config_dict()]},
            options=ScanOptions(malformed_budget=0.5),
        )
        assert report.counters.metrics.rows_malformed == 1

    def test_counter_conservation(self):
        assignments = BASIC_ASSIGNMENTS + [
            ("m1", "exp1", "seg1", "treatment"),  # duplicate
            ("m9", "zzz", "seg1", "treatment"),  # unknown experiment
            ("m2", "exp1", "seg1", "control"),  # conflict with m2's treatment row
        ]
        metrics = BASIC_METRICS + [
            ("stranger", "sessions", 4.0),  # unassigned member
            ("m1", "clicks", 2.0),  # unconfigured metric
        ]
        report = scan(
            _assignment_lines(assignments),
            _metric_lines(metrics) + ["m1,sessions,oops"],
            {"experiments": [_config_dict()]},
            options=ScanOptions(malformed_budget=0.9),
        )
        for stats in (report.counters.assignments, report.counters.metrics):
            assert stats.rows_read == stats.rows_used + stats.rows_skipped + stats.rows_malformed
        # the conflicted m2 is excluded, so its metric row is also unassigned
        assert report.counters.unassigned_member_rows == 2
        assert report.counters.unconfigured_metric_rows == 1
        assert report.counters.assignment_conflicts == 1

    def test_duplicate_metric_rows_counted_and_used(self):
        metrics = BASIC_METRICS + [("m1", "sessions", 5.0)]
        report = scan(
            _assignment_lines(BASIC_ASSIGNMENTS),
            _metric_lines(metrics),
            {"experiments": [_config_dict()]},
        )
        assert report.counters.duplicate_metric_rows == 1
        key = BufferKey("exp1", "seg1", "treatment", "sessions", AversionParam(0.5))
        assert report.estimates[key].n == 3

    def test_record_objects_accepted(self):
        assignments = [AssignmentRecord(*row) for row in BASIC_ASSIGNMENTS]
        metrics = [MetricRecord(*row) for row in BASIC_METRICS]
        report = scan(assignments, metrics, {"experiments": [_config_dict()]})
        assert len(report.comparisons) == 1

    def test_buffer_keys_cover_observed_cross_product(self):
        cfg = _config_dict(metrics=["sessions", "clicks"], epsilons=[0.2, 0.5])
        report = scan(
            _assignment_lines(BASIC_ASSIGNMENTS),
            _metric_lines(BASIC_METRICS),
            {"experiments": [cfg]},
        )
        expected = {
            BufferKey("exp1", "seg1", variant, metric, AversionParam(eps))
            for variant in ("treatment", "control")
            for metric in ("sessions", "clicks")
            for eps in (0.2, 0.5)
        }
        assert set(report.estimates) == expected

    def test_partition_invariance(self):
        rng = np.random.default_rng(97)
        members = [f"m{i}" for i in range(600)]
        assignments = [
            (m, "exp1", "seg1", "treatment" if i % 2 == 0 else "control")
            for i, m in enumerate(members)
        ]
        metrics = [(m, "sessions", float(v)) for m, v in zip(members, rng.lognormal(0, 1, 600))]
        reports = {
            p: scan(
                _assignment_lines(assignments),
                _metric_lines(metrics),
                {"experiments": [_config_dict()]},
                options=ScanOptions(threads=p),
            )
            for p in (1, 2, 4, 8)
        }
        base = reports[1]
        for p in (2, 4, 8):
            other = reports[p]
            assert other.counters.to_dict() == base.counters.to_dict()
            for key, est in base.estimates.items():
                assert other.estimates[key].index == pytest.approx(est.index, rel=1e-9)
                assert other.estimates[key].sigma2 == pytest.approx(est.sigma2, rel=1e-9)

    def test_sitewide_block_present_when_population_configured(self):
        cfg = _config_dict(
            population={
                "n_all": 10,
                "rest_totals": [
                    {"metric": "sessions", "epsilon": 0.5, "x_rest": 6.0, "y_rest": 6.0}
                ],
            }
        )
        report = scan(
            _assignment_lines(BASIC_ASSIGNMENTS),
            _metric_lines(BASIC_METRICS),
            {"experiments": [cfg]},
        )
        entry = report.comparisons[0]
        assert entry.sitewide is not None
        # brute force: rest is six members at value 1, each arm ramps 2 -> 4
        trt_universe = [1.0] * 6 + [1.0, 3.0, 1.0, 3.0]
        ctl_universe = [1.0] * 6 + [2.0, 2.0, 2.0, 2.0]
        expected = atkinson(trt_universe, 0.5) - atkinson(ctl_universe, 0.5)
        assert entry.sitewide.delta == pytest.approx(expected, abs=1e-12)

    def test_sitewide_equals_plain_compare_for_full_population(self):
        cfg = _config_dict(population={"n_all": 4, "rest_totals": [
            {"metric": "sessions", "epsilon": 0.5, "x_rest": 0.0, "y_rest": 0.0}
        ]})
        report = scan(
            _assignment_lines(BASIC_ASSIGNMENTS),
            _metric_lines(BASIC_METRICS),
            {"experiments": [cfg]},
        )
        entry = report.comparisons[0]
        assert entry.sitewide.delta == pytest.approx(entry.result.delta, abs=1e-12)
        assert entry.sitewide.p_value == pytest.approx(entry.result.p_value, abs=1e-12)

    def test_report_json_shape(self):
        report = scan(
            _assignment_lines(BASIC_ASSIGNMENTS),
            _metric_lines(BASIC_METRICS),
            {"experiments": [_config_dict()]},
        )
        payload = json.loads(report.to_json())
        assert set(payload) == {"comparisons", "counters"}
        entry = payload["comparisons"][0]
        for field in (
            "experiment_id", "segment_id", "metric", "epsilon", "variant", "control",
            "estimates", "delta", "t", "p", "significant", "srm",
        ):
            assert field in entry
        assert set(entry["srm"]) == {"statistic", "p", "pass"}
        assert entry["estimates"]["treatment"]["n"] == 2


class TestRankReport:
    def _report(self):
        rng = np.random.default_rng(101)
        members, assignments, metrics = [], [], []
        for e, spread in (("expA", 9.0), ("expB", 3.0), ("expC", 1.0)):
            for i in range(200):
                m = f"{e}-m{i}"
                variant = "treatment" if i % 2 == 0 else "control"
                assignments.append((m, e, "seg1", variant))
                if variant == "treatment":
                    value = float(rng.lognormal(0, 1)) * (spread if i % 4 == 0 else 1.0)
                else:
                    value = float(rng.lognormal(0, 1))
                metrics.append((m, "sessions", value))
        configs = {"experiments": [_config_dict(experiment_id=e) for e in ("expA", "expB", "expC")]}
        return scan(_assignment_lines(assignments), _metric_lines(metrics), configs)

    def test_k_zero(self):
        assert rank_report(self._report(), 0) == []

    def test_k_larger_than_available(self):
        report = self._report()
        eligible = [c for c in report.comparisons if c.result.significant and c.srm.passed]
        assert len(rank_report(report, 100)) == len(eligible)

    def test_ordering_by_absolute_delta(self):
        ranked = rank_report(self._report(), 10)
        deltas = [abs(c.result.delta) for c in ranked]
        assert deltas == sorted(deltas, reverse=True)

    def test_negative_k_rejected(self):
        with pytest.raises(ValidationError):
            rank_report(self._report(), -1)
