import json

import pytest

from asral.orchestrator import RunConfig, run_adaptation
from asral.reporting import (
    ACCENT_SERIES_COLUMNS,
    ROUNDS_CSV_COLUMNS,
    SCORES_CSV_COLUMNS,
    emit_round_report,
    emit_round_reports,
    format_decimal,
    render_accent_series,
    render_round_reports,
    render_uncertainty_records,
    report_from_dict,
    report_to_dict,
    round_report_rows,
)
from asral.synth import make_synthetic_corpus, synthetic_accents, synthetic_base_rates
from asral.uncertainty import UncertaintyRecord


def run_small(tmp_path=None, **overrides):
    cfg = RunConfig.from_dict(
        dict(
            strategy="eu_most",
            rounds=2,
            passes=3,
            top_k=8,
            test_fraction=0.2,
            seed=5,
            hard_accent_count=4,
            simulator={
                "base_error_rates": synthetic_base_rates(synthetic_accents(6)),
                "learning_scale": 0.25,
            },
            **({"out_dir": str(tmp_path)} if tmp_path else {}),
            **overrides,
        )
    )
    return run_adaptation(cfg, make_synthetic_corpus(count=120, accent_count=6, seed=2))


class TestFormatDecimal:
    def test_nine_significant_digits(self):
        assert format_decimal(1 / 3) == "0.333333333"
        assert format_decimal(0.5) == "0.5"
        assert format_decimal(0.0) == "0"
        assert format_decimal(None) == "NA"
        assert format_decimal(1e-5) == "1e-05"


class TestRoundsCsv:
    def test_header_pinned(self):
        assert ROUNDS_CSV_COLUMNS == (
            "round,phase,strategy,scope,accent,train_size,pool_size,budget_fraction,"
            "n_test,test_wer,test_wer_mc,u_wer,n_selected,n_truncated,pool_exhausted,"
            "adapt_acknowledged,plan_digest"
        )

    def test_row_cardinality_matches_accents(self):
        result = run_small()
        report = result.reports[0]
        rows = round_report_rows(report)
        assert len(rows) == 1 + len(report.evaluation.per_accent)
        assert rows[0].split(",")[3] == "summary"
        assert all(r.split(",")[3] == "accent" for r in rows[1:])

    def test_append_equals_bulk(self, tmp_path):
        result = run_small()
        bulk = tmp_path / "bulk.csv"
        emit_round_reports(result.reports, str(bulk))
        appended = tmp_path / "appended.csv"
        for report in result.reports:
            emit_round_report(report, str(appended))
        assert bulk.read_bytes() == appended.read_bytes()

    def test_append_rejects_foreign_header(self, tmp_path):
        path = tmp_path / "other.csv"
        path.write_text("round,other\n")
        with pytest.raises(ValueError, match="schema"):
            emit_round_report(run_small().reports[0], str(path))

    def test_identical_runs_byte_identical_files(self, tmp_path):
        a_dir = tmp_path / "a"
        b_dir = tmp_path / "b"
        run_small(a_dir)
        run_small(b_dir)
        for name in ("rounds.csv", "accent_series.csv", "round_reports.json"):
            assert (a_dir / name).read_bytes() == (b_dir / name).read_bytes()

    def test_metadata_is_sidecar_not_report(self, tmp_path):
        run_small(tmp_path)
        metadata = json.loads((tmp_path / "run_metadata.json").read_text())
        assert "wall_times_s" in metadata
        assert "config_digest" in metadata
        assert metadata["effective_config"]["strategy"] == "eu_most"
        rounds = (tmp_path / "rounds.csv").read_text()
        assert "wall" not in rounds


class TestAccentSeries:
    def test_cardinality(self):
        result = run_small()
        text = render_accent_series(result.reports, list(result.hard_accents))
        lines = text.strip().split("\n")
        assert lines[0] == ACCENT_SERIES_COLUMNS
        assert len(lines) - 1 == len(result.hard_accents) * len(result.reports)

    def test_unknown_accent_rejected(self):
        result = run_small()
        with pytest.raises(ValueError, match="unknown accent"):
            render_accent_series(result.reports, ["martian"])

    def test_absent_accent_gets_na_markers(self):
        result = run_small()
        report = result.reports[0]
        # fabricate an accent that exists in the corpus metadata but not in test
        from dataclasses import replace

        from asral.orchestrator import AccentEval

        ghost = AccentEval(accent="ghost", n_test=0, train_count=2, pool_count=3)
        patched = replace(
            report,
            evaluation=replace(
                report.evaluation,
                per_accent={**report.evaluation.per_accent, "ghost": ghost},
            ),
        )
        text = render_accent_series([patched], ["ghost"])
        assert text.strip().split("\n")[1] == "ghost,0,NA,NA,2"

    def test_train_counts_non_decreasing_per_accent(self):
        result = run_small()
        text = render_accent_series(result.reports, list(result.hard_accents))
        per_accent: dict[str, list[int]] = {}
        for line in text.strip().split("\n")[1:]:
            accent, _, _, _, train_count = line.split(",")
            per_accent.setdefault(accent, []).append(int(train_count))
        for counts in per_accent.values():
            assert counts == sorted(counts)


class TestRoundReportsJson:
    def test_roundtrip_reproduces_rows(self):
        result = run_small()
        for report in result.reports:
            clone = report_from_dict(json.loads(json.dumps(report_to_dict(report))))
            assert round_report_rows(clone) == round_report_rows(report)

    def test_wall_time_not_persisted(self):
        result = run_small()
        assert "wall_time" not in json.dumps(report_to_dict(result.reports[0]))


class TestScoresCsv:
    def test_schema_and_quoting(self):
        records = [
            UncertaintyRecord(
                utterance_id="u1",
                mode="pairwise",
                per_pass_wers=(0.0, 0.5),
                eu=0.25,
                accent="yoruba",
            )
        ]
        text = render_uncertainty_records(records, {"u1": 'say "hi", friend'})
        lines = text.strip().split("\n")
        assert lines[0] == SCORES_CSV_COLUMNS
        assert lines[1] == 'u1,yoruba,pairwise,0.25,"say ""hi"", friend",0|0.5'
