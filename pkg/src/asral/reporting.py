"""Deterministic emission of round and accent metrics.

Report bodies are pure functions of the reports: fixed column order, fixed
decimal formatting (9 significant digits), explicit "NA" null markers, no
timestamps or machine identifiers. Wall times and environment identity live
in the run_metadata.json sidecar, which is the one non-reproducible output.

Schemas are versioned via the constants below; golden-file tests pin the
exact header bytes.
"""

from __future__ import annotations

import hashlib
import json
import os
import time
from typing import TYPE_CHECKING, Sequence

if TYPE_CHECKING:  # pragma: no cover
    from .orchestrator import RoundReport
    from .uncertainty import UncertaintyRecord

SCHEMA_VERSIONS = {
    "rounds.csv": "1",
    "accent_series.csv": "1",
    "scores.csv": "1",
    "round_reports.json": "1",
}

ROUNDS_CSV_COLUMNS = (
    "round,phase,strategy,scope,accent,train_size,pool_size,budget_fraction,"
    "n_test,test_wer,test_wer_mc,u_wer,n_selected,n_truncated,pool_exhausted,"
    "adapt_acknowledged,plan_digest"
)
ACCENT_SERIES_COLUMNS = "accent,round,wer,u_wer,train_count"
SCORES_CSV_COLUMNS = "utterance_id,accent,mode,eu,consensus_label,per_pass_wers"

NA = "NA"


def format_decimal(value: float | None) -> str:
    """9-significant-digit rendering; byte-stable across runs."""
    if value is None:
        return NA
    return f"{value:.9g}"


def _format_bool(value: bool) -> str:
    return "true" if value else "false"


def _atomic_write(path: str, content: str) -> None:
    tmp = path + ".tmp"
    with open(tmp, "w", encoding="utf-8", newline="") as fout:
        fout.write(content)
        fout.flush()
        os.fsync(fout.fileno())
    os.replace(tmp, path)


def plan_digest(report: "RoundReport") -> str:
    if report.plan is None:
        return NA
    plan = report.plan
    labels = None
    if plan.consensus_labels is not None:
        labels = {uid: plan.consensus_labels[uid] for uid in plan.selected}
    payload = json.dumps(
        {"selected": list(plan.selected), "labels": labels},
        ensure_ascii=False,
        sort_keys=True,
    )
    digest = hashlib.sha256(payload.encode("utf-8")).hexdigest()[:12]
    return f"{plan.strategy}:k={plan.k}:n={len(plan.selected)}:{digest}"


def round_report_rows(report: "RoundReport") -> list[str]:
    """One summary row plus one row per accent, accents sorted."""
    ev = report.evaluation
    rows = [
        ",".join(
            [
                str(report.round_index),
                report.phase,
                report.strategy,
                "summary",
                NA,
                str(report.post_train_size),
                str(report.post_pool_size),
                format_decimal(report.budget_fraction_used),
                str(ev.n_test),
                format_decimal(ev.test_wer),
                format_decimal(ev.test_wer_mc_mean),
                NA,
                str(report.n_selected),
                str(report.n_truncated),
                _format_bool(report.pool_exhausted),
                _format_bool(report.adapt_acknowledged),
                plan_digest(report),
            ]
        )
    ]
    for accent in sorted(ev.per_accent):
        acc = ev.per_accent[accent]
        rows.append(
            ",".join(
                [
                    str(report.round_index),
                    report.phase,
                    report.strategy,
                    "accent",
                    accent,
                    str(acc.train_count),
                    str(acc.pool_count),
                    NA,
                    str(acc.n_test),
                    format_decimal(acc.wer),
                    format_decimal(acc.wer_mc_mean),
                    format_decimal(acc.u_wer),
                    NA,
                    NA,
                    NA,
                    NA,
                    NA,
                ]
            )
        )
    return rows


def emit_round_report(report: "RoundReport", sink: str) -> None:
    """Append one report's row set to the CSV sink, atomically.

    Creates the file with the schema header when absent; rejects a sink
    whose header disagrees with the current schema.
    """
    existing = ""
    if os.path.exists(sink):
        with open(sink, "r", encoding="utf-8") as fin:
            existing = fin.read()
        header = existing.splitlines()[0] if existing else ""
        if header != ROUNDS_CSV_COLUMNS:
            raise ValueError(f"{sink}: header does not match rounds.csv schema v1")
    body = existing if existing else ROUNDS_CSV_COLUMNS + "\n"
    body += "\n".join(round_report_rows(report)) + "\n"
    _atomic_write(sink, body)


def render_round_reports(reports: Sequence["RoundReport"]) -> str:
    lines = [ROUNDS_CSV_COLUMNS]
    for report in reports:
        lines.extend(round_report_rows(report))
    return "\n".join(lines) + "\n"


def emit_round_reports(reports: Sequence["RoundReport"], sink: str) -> None:
    _atomic_write(sink, render_round_reports(reports))


def render_accent_series(
    reports: Sequence["RoundReport"], hard_accents: Sequence[str]
) -> str:
    """Long-format (accent, round, wer, u_wer, train_count) plot series
    restricted to the hard-accent set. Accents missing from a round's test
    set get explicit NA markers, never silent omission."""
    known: set[str] = set()
    for report in reports:
        known.update(report.evaluation.per_accent)
    unknown = [a for a in hard_accents if a not in known]
    if unknown:
        raise ValueError(f"unknown accent names: {', '.join(sorted(unknown))}")

    lines = [ACCENT_SERIES_COLUMNS]
    for accent in hard_accents:
        for report in reports:
            acc = report.evaluation.per_accent.get(accent)
            if acc is None or acc.n_test == 0:
                train_count = acc.train_count if acc is not None else 0
                lines.append(f"{accent},{report.round_index},{NA},{NA},{train_count}")
            else:
                lines.append(
                    f"{accent},{report.round_index},{format_decimal(acc.wer)},"
                    f"{format_decimal(acc.u_wer)},{acc.train_count}"
                )
    return "\n".join(lines) + "\n"


def emit_accent_series(
    reports: Sequence["RoundReport"], hard_accents: Sequence[str], sink: str
) -> None:
    _atomic_write(sink, render_accent_series(reports, hard_accents))


def render_uncertainty_records(
    records: Sequence["UncertaintyRecord"],
    consensus_labels: dict[str, str] | None = None,
) -> str:
    lines = [SCORES_CSV_COLUMNS]
    for record in records:
        label = ""
        if consensus_labels is not None:
            label = consensus_labels.get(record.utterance_id, "")
        per_pass = "|".join(format_decimal(w) for w in record.per_pass_wers)
        lines.append(
            ",".join(
                [
                    record.utterance_id,
                    record.accent,
                    record.mode,
                    format_decimal(record.eu),
                    _csv_quote(label),
                    per_pass,
                ]
            )
        )
    return "\n".join(lines) + "\n"


def emit_uncertainty_records(
    records: Sequence["UncertaintyRecord"],
    sink: str,
    consensus_labels: dict[str, str] | None = None,
) -> None:
    _atomic_write(sink, render_uncertainty_records(records, consensus_labels))


def _csv_quote(text: str) -> str:
    if any(ch in text for ch in (",", '"', "\n")):
        return '"' + text.replace('"', '""') + '"'
    return text


def report_to_dict(report: "RoundReport") -> dict:
    """Full-fidelity report record minus wall time (kept out of report
    bodies so reruns are byte-identical)."""
    ev = report.evaluation
    out = {
        "round_index": report.round_index,
        "phase": report.phase,
        "strategy": report.strategy,
        "pre_train_size": report.pre_train_size,
        "pre_pool_size": report.pre_pool_size,
        "post_train_size": report.post_train_size,
        "post_pool_size": report.post_pool_size,
        "budget_fraction_used": report.budget_fraction_used,
        "budget_cap_fraction": report.budget_cap_fraction,
        "hard_accents": list(report.hard_accents),
        "acquired": list(report.acquired),
        "n_selected": report.n_selected,
        "n_truncated": report.n_truncated,
        "pool_exhausted": report.pool_exhausted,
        "adapt_acknowledged": report.adapt_acknowledged,
        "evaluation": {
            "n_test": ev.n_test,
            "test_wer": ev.test_wer,
            "test_wer_mc_mean": ev.test_wer_mc_mean,
            "per_accent": {
                accent: {
                    "n_test": acc.n_test,
                    "train_count": acc.train_count,
                    "pool_count": acc.pool_count,
                    "wer": acc.wer,
                    "wer_mc_mean": acc.wer_mc_mean,
                    "u_wer": acc.u_wer,
                    "mean_eu": acc.mean_eu,
                    "n_pass_values": acc.n_pass_values,
                    "pass_wer_mean": acc.pass_wer_mean,
                }
                for accent, acc in sorted(ev.per_accent.items())
            },
        },
        "plan": None,
    }
    if report.plan is not None:
        out["plan"] = {
            "strategy": report.plan.strategy,
            "k": report.plan.k,
            "selected": list(report.plan.selected),
            "scores": report.plan.scores,
            "consensus_labels": report.plan.consensus_labels,
            "digest": plan_digest(report),
        }
    return out


def render_round_reports_json(reports: Sequence["RoundReport"]) -> str:
    payload = {
        "schema_version": SCHEMA_VERSIONS["round_reports.json"],
        "reports": [report_to_dict(r) for r in reports],
    }
    return json.dumps(payload, ensure_ascii=False, sort_keys=True, indent=2) + "\n"


def emit_round_reports_json(reports: Sequence["RoundReport"], sink: str) -> None:
    _atomic_write(sink, render_round_reports_json(reports))


def report_from_dict(raw: dict) -> "RoundReport":
    """Rebuild a report from its round_reports.json record (wall time is
    not persisted and comes back as 0)."""
    from .orchestrator import AccentEval, EvalSummary, RoundReport
    from .strategy import SelectionPlan

    ev = raw["evaluation"]
    per_accent = {
        accent: AccentEval(
            accent=accent,
            n_test=acc["n_test"],
            train_count=acc["train_count"],
            pool_count=acc["pool_count"],
            wer=acc["wer"],
            wer_mc_mean=acc["wer_mc_mean"],
            u_wer=acc["u_wer"],
            mean_eu=acc["mean_eu"],
            n_pass_values=acc["n_pass_values"],
            pass_wer_mean=acc["pass_wer_mean"],
        )
        for accent, acc in ev["per_accent"].items()
    }
    plan = None
    if raw.get("plan"):
        plan_raw = raw["plan"]
        plan = SelectionPlan(
            strategy=plan_raw["strategy"],
            k=plan_raw["k"],
            selected=tuple(plan_raw["selected"]),
            scores=plan_raw.get("scores"),
            consensus_labels=plan_raw.get("consensus_labels"),
        )
    return RoundReport(
        round_index=raw["round_index"],
        phase=raw["phase"],
        strategy=raw["strategy"],
        pre_train_size=raw["pre_train_size"],
        pre_pool_size=raw["pre_pool_size"],
        post_train_size=raw["post_train_size"],
        post_pool_size=raw["post_pool_size"],
        budget_fraction_used=raw["budget_fraction_used"],
        budget_cap_fraction=raw["budget_cap_fraction"],
        evaluation=EvalSummary(
            n_test=ev["n_test"],
            test_wer=ev["test_wer"],
            test_wer_mc_mean=ev["test_wer_mc_mean"],
            per_accent=per_accent,
        ),
        hard_accents=tuple(raw["hard_accents"]),
        plan=plan,
        acquired=tuple(raw["acquired"]),
        n_selected=raw["n_selected"],
        n_truncated=raw["n_truncated"],
        pool_exhausted=raw["pool_exhausted"],
        adapt_acknowledged=raw["adapt_acknowledged"],
        wall_time_s=0.0,
    )


def emit_run_metadata(
    effective_config: dict,
    backend_name: str,
    backend_supports_dropout: bool,
    wall_times_s: Sequence[float],
    path: str,
) -> None:
    """The non-reproducible sidecar: seed/config echo, backend identity,
    timing. Everything needed to replay the run lives in effective_config."""
    config_json = json.dumps(effective_config, ensure_ascii=False, sort_keys=True)
    metadata = {
        "effective_config": effective_config,
        "config_digest": hashlib.sha256(config_json.encode("utf-8")).hexdigest(),
        "backend": {"name": backend_name, "supports_dropout": backend_supports_dropout},
        "schemas": SCHEMA_VERSIONS,
        "wall_times_s": list(wall_times_s),
        "created_at_unix": time.time(),
    }
    _atomic_write(path, json.dumps(metadata, ensure_ascii=False, sort_keys=True, indent=2) + "\n")
