"""The N-round adaptation loop.

Each round, in fixed order: (1) adapt the model on the current train set,
(2) evaluate on the test set (overall and per-accent WER, accent-conditioned
uncertainty), (3) score the pool under the configured strategy, (4) acquire
the top-k into the train set under the budget cap. After the last round a
final adapt+evaluate closes the loop, so round-r metrics always reflect
training on data acquired through round r-1.

Runs are pure functions of (manifest, config): repeating one reproduces its
report files byte for byte, independent of worker count.
"""

from __future__ import annotations

import json
import os
import time
from dataclasses import dataclass, field
from math import fsum
from typing import Mapping, Sequence

from . import reporting
from .manifest import (
    DEFAULT_BUDGET_CAP_FRACTION,
    DatasetState,
    Utterance,
    acquire,
    filter_domain,
    initial_split,
    load_manifest,
)
from .strategy import (
    STRATEGIES,
    SelectionPlan,
    map_ordered,
    select_al_eu_most,
    select_eu_most,
    select_random,
)
from .textmetric import tokenize
from .transcriber import (
    ExternalTranscriber,
    SimulatedTranscriber,
    SimulatorConfig,
    Transcriber,
    TransportError,
    derive_round_seed,
)
from .uncertainty import UncertaintyRecord, eu_pairwise, eu_supervised, u_wer

DOMAIN_FILTERS = ("general", "clinical", "both")
HARD_ACCENT_POLICIES = ("frequency", "round0_eu")
BACKENDS = ("sim", "external")


class ConfigError(ValueError):
    """Invalid run configuration; reported before any work starts."""


@dataclass
class RunConfig:
    manifest: str | None = None
    strategy: str = "eu_most"
    rounds: int = 3
    passes: int = 10
    top_k: int = 100
    train_fraction: float = 0.30
    budget_cap_fraction: float = DEFAULT_BUDGET_CAP_FRACTION
    val_fraction: float = 0.0
    test_fraction: float = 0.0
    seed: int = 0
    domain: str = "both"
    stratify_by: str | None = None
    hard_accent_policy: str = "frequency"
    hard_accent_count: int = 10
    backend: str = "sim"
    endpoint: str | None = None
    simulator: dict = field(default_factory=dict)
    out_dir: str | None = None
    # scoring parallelism; results are worker-count independent
    workers: int = field(default_factory=lambda: os.cpu_count() or 1)
    backend_options: dict = field(default_factory=dict)

    _KNOWN = (
        "manifest strategy rounds passes top_k train_fraction budget_cap_fraction "
        "val_fraction test_fraction seed domain stratify_by hard_accent_policy "
        "hard_accent_count backend endpoint simulator out_dir workers backend_options"
    ).split()

    @classmethod
    def from_dict(cls, raw: Mapping) -> "RunConfig":
        """Build a config from a key-value mapping (the config-file schema).

        Unknown keys (finetuning hyper-parameters such as attention_dropout,
        hidden_dropout, learning_rate, ...) are accepted and forwarded
        opaquely to external backends via the adapt manifest.
        """
        cfg = cls()
        passthrough = dict(cfg.backend_options)
        for key, value in raw.items():
            if key in cls._KNOWN:
                setattr(cfg, key, value)
            else:
                passthrough[key] = value
        if "backend_options" in raw:
            passthrough.update(raw["backend_options"])
        cfg.backend_options = passthrough
        return cfg

    def to_dict(self) -> dict:
        return {key: getattr(self, key) for key in self._KNOWN}

    def validate(self) -> None:
        if self.rounds < 1:
            raise ConfigError("rounds must be >= 1")
        if self.passes < 2:
            raise ConfigError("passes must be >= 2")
        if self.top_k < 0:
            raise ConfigError("top_k must be >= 0")
        if not 0.0 < self.train_fraction < 1.0:
            raise ConfigError("train_fraction must be in (0, 1)")
        if not 0.0 < self.budget_cap_fraction <= 1.0:
            raise ConfigError("budget_cap_fraction must be in (0, 1]")
        if self.train_fraction > self.budget_cap_fraction:
            raise ConfigError("train_fraction must not exceed budget_cap_fraction")
        if self.strategy not in STRATEGIES:
            raise ConfigError(
                f"unknown strategy {self.strategy!r}; valid strategies: "
                + ", ".join(STRATEGIES)
            )
        if self.domain not in DOMAIN_FILTERS:
            raise ConfigError(
                f"unknown domain {self.domain!r}; valid domains: " + ", ".join(DOMAIN_FILTERS)
            )
        if self.hard_accent_policy not in HARD_ACCENT_POLICIES:
            raise ConfigError(
                f"unknown hard_accent_policy {self.hard_accent_policy!r}; valid: "
                + ", ".join(HARD_ACCENT_POLICIES)
            )
        if self.hard_accent_count < 1:
            raise ConfigError("hard_accent_count must be >= 1")
        if self.backend not in BACKENDS:
            raise ConfigError(
                f"unknown backend {self.backend!r}; valid backends: " + ", ".join(BACKENDS)
            )
        if self.backend == "external" and not self.endpoint:
            raise ConfigError("external backend requires an endpoint")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        if self.stratify_by not in (None, "accent", "domain"):
            raise ConfigError("stratify_by must be omitted, 'accent', or 'domain'")


@dataclass(frozen=True)
class AccentEval:
    accent: str
    n_test: int
    train_count: int
    pool_count: int
    wer: float | None = None
    wer_mc_mean: float | None = None
    u_wer: float | None = None
    mean_eu: float | None = None
    n_pass_values: int = 0
    pass_wer_mean: float | None = None


@dataclass(frozen=True)
class EvalSummary:
    n_test: int
    test_wer: float | None
    test_wer_mc_mean: float | None
    per_accent: dict[str, AccentEval]


@dataclass(frozen=True)
class RoundReport:
    round_index: int
    phase: str  # "round" or "final"
    strategy: str
    pre_train_size: int
    pre_pool_size: int
    post_train_size: int
    post_pool_size: int
    budget_fraction_used: float
    budget_cap_fraction: float
    evaluation: EvalSummary
    hard_accents: tuple[str, ...]
    plan: SelectionPlan | None
    acquired: tuple[str, ...]
    n_selected: int
    n_truncated: int
    pool_exhausted: bool
    adapt_acknowledged: bool
    wall_time_s: float


@dataclass
class RunResult:
    reports: list[RoundReport]
    hard_accents: tuple[str, ...]
    state: DatasetState
    label_overrides: dict[str, str]
    effective_config: dict
    backend_name: str
    backend_supports_dropout: bool


def evaluate_model(
    model: Transcriber,
    test_utterances: Sequence[Utterance],
    passes: int,
    run_seed: int,
    workers: int,
    train_counts: Mapping[str, int],
    pool_counts: Mapping[str, int],
) -> EvalSummary:
    """Supervised evaluation: single-pass (pass 0) WER headline plus the
    MC mean over all passes, and pooled accent-conditioned uncertainty."""

    def score(utt: Utterance) -> UncertaintyRecord:
        pass_set = model.transcribe_passes(utt, passes, run_seed)
        return eu_supervised(tokenize(utt.gold_transcript), pass_set, accent=utt.accent)

    records = map_ordered(score, test_utterances, workers)

    accents = sorted(set(train_counts) | set(pool_counts) | {r.accent for r in records})
    by_accent: dict[str, list[UncertaintyRecord]] = {a: [] for a in accents}
    for record in records:
        by_accent[record.accent].append(record)

    per_accent: dict[str, AccentEval] = {}
    for accent in accents:
        accent_records = by_accent[accent]
        base = AccentEval(
            accent=accent,
            n_test=len(accent_records),
            train_count=train_counts.get(accent, 0),
            pool_count=pool_counts.get(accent, 0),
        )
        if accent_records:
            pooled = [w for r in accent_records for w in r.per_pass_wers]
            base = AccentEval(
                accent=accent,
                n_test=len(accent_records),
                train_count=train_counts.get(accent, 0),
                pool_count=pool_counts.get(accent, 0),
                wer=fsum(r.per_pass_wers[0] for r in accent_records) / len(accent_records),
                wer_mc_mean=fsum(
                    fsum(r.per_pass_wers) / len(r.per_pass_wers) for r in accent_records
                )
                / len(accent_records),
                u_wer=u_wer(accent, accent_records),
                mean_eu=fsum(r.eu for r in accent_records) / len(accent_records),
                n_pass_values=len(pooled),
                pass_wer_mean=fsum(pooled) / len(pooled),
            )
        per_accent[accent] = base

    n_test = len(records)
    return EvalSummary(
        n_test=n_test,
        test_wer=fsum(r.per_pass_wers[0] for r in records) / n_test if n_test else None,
        test_wer_mc_mean=(
            fsum(fsum(r.per_pass_wers) / len(r.per_pass_wers) for r in records) / n_test
            if n_test
            else None
        ),
        per_accent=per_accent,
    )


def run_round(
    state: DatasetState,
    model: Transcriber,
    cfg: RunConfig,
    round_index: int,
    corpus_by_id: Mapping[str, Utterance],
    hard_accents: tuple[str, ...] | None,
    newly_acquired: tuple[str, ...],
    final: bool = False,
) -> tuple[DatasetState, Transcriber, RoundReport, dict[str, str]]:
    """One adaptation round; returns the new state, report, and any
    consensus-label overrides for acquired utterances.

    A backend transport failure propagates before any state is committed,
    so the caller's state is unchanged (rounds are atomic).
    """
    started = time.perf_counter()
    manifest_ref = _write_adapt_manifest(cfg, round_index, state, corpus_by_id)
    ack = model.adapt(newly_acquired, state, manifest_ref=manifest_ref)

    test_utts = [corpus_by_id[uid] for uid in state.test]
    evaluation = evaluate_model(
        model,
        test_utts,
        cfg.passes,
        cfg.seed,
        cfg.workers,
        train_counts=_accent_counts(state.train, corpus_by_id),
        pool_counts=_accent_counts(state.pool, corpus_by_id),
    )

    if hard_accents is None:
        hard_accents = _hard_accents_from_eval(evaluation, cfg.hard_accent_count)

    plan: SelectionPlan | None = None
    overrides: dict[str, str] = {}
    new_state = state
    acquired: tuple[str, ...] = ()
    n_truncated = 0
    pool_exhausted = False
    if not final:
        pool_utts = [corpus_by_id[uid] for uid in state.pool]
        pool_exhausted = cfg.top_k > len(pool_utts)
        if cfg.strategy == "random":
            plan = select_random(
                [u.id for u in pool_utts], cfg.top_k, derive_round_seed(cfg.seed, round_index)
            )
        elif cfg.strategy == "eu_most":
            plan = select_eu_most(
                pool_utts, model, cfg.passes, cfg.seed, cfg.top_k, workers=cfg.workers
            )
        else:
            plan = select_al_eu_most(
                pool_utts, model, cfg.passes, cfg.seed, cfg.top_k, workers=cfg.workers
            )
        result = acquire(state, plan.selected)
        new_state = result.state
        acquired = result.moved
        n_truncated = len(result.truncated)
        if plan.consensus_labels:
            overrides = {uid: plan.consensus_labels[uid] for uid in result.moved}

    report = RoundReport(
        round_index=round_index,
        phase="final" if final else "round",
        strategy=cfg.strategy,
        pre_train_size=len(state.train),
        pre_pool_size=len(state.pool),
        post_train_size=len(new_state.train),
        post_pool_size=len(new_state.pool),
        budget_fraction_used=new_state.budget_fraction_used,
        budget_cap_fraction=new_state.budget_cap_fraction,
        evaluation=evaluation,
        hard_accents=hard_accents,
        plan=plan,
        acquired=acquired,
        n_selected=len(plan.selected) if plan else 0,
        n_truncated=n_truncated,
        pool_exhausted=pool_exhausted,
        adapt_acknowledged=ack.adapted,
        wall_time_s=time.perf_counter() - started,
    )
    return new_state, model, report, overrides


def run_adaptation(
    cfg: RunConfig, utterances: Sequence[Utterance] | None = None
) -> RunResult:
    """Split, run N rounds plus the final evaluation, emit reports.

    Per-round failures abort the run but flush the reports completed so far
    to out_dir before re-raising.
    """
    cfg.validate()
    if utterances is None:
        if not cfg.manifest:
            raise ConfigError("a manifest path (or explicit utterances) is required")
        utterances = load_manifest(cfg.manifest)
    corpus = filter_domain(utterances, cfg.domain)
    if not corpus:
        raise ConfigError(f"no utterances left after domain filter {cfg.domain!r}")
    corpus_by_id = {u.id: u for u in corpus}

    state = initial_split(
        corpus,
        cfg.train_fraction,
        cfg.seed,
        val_fraction=cfg.val_fraction,
        test_fraction=cfg.test_fraction,
        budget_cap_fraction=cfg.budget_cap_fraction,
        stratify_by=cfg.stratify_by,
    )
    _check_gold(state, corpus_by_id, cfg.strategy)

    model = build_backend(cfg, corpus)
    hard_accents: tuple[str, ...] | None = None
    if cfg.hard_accent_policy == "frequency":
        hard_accents = _hard_accents_by_frequency(corpus, cfg.hard_accent_count)

    reports: list[RoundReport] = []
    label_overrides: dict[str, str] = {}
    newly_acquired: tuple[str, ...] = state.train
    try:
        for round_index in range(cfg.rounds):
            state, model, report, overrides = run_round(
                state,
                model,
                cfg,
                round_index,
                corpus_by_id,
                hard_accents,
                newly_acquired,
            )
            if hard_accents is None:
                hard_accents = report.hard_accents
            newly_acquired = report.acquired
            label_overrides.update(overrides)
            reports.append(report)
        state, model, report, _ = run_round(
            state,
            model,
            cfg,
            cfg.rounds,
            corpus_by_id,
            hard_accents,
            newly_acquired,
            final=True,
        )
        reports.append(report)
    except Exception:
        if cfg.out_dir and reports:
            _emit_reports(cfg, reports, hard_accents or (), model)
        raise

    result = RunResult(
        reports=reports,
        hard_accents=hard_accents or (),
        state=state,
        label_overrides=label_overrides,
        effective_config=cfg.to_dict(),
        backend_name=model.name,
        backend_supports_dropout=model.supports_dropout,
    )
    if cfg.out_dir:
        _emit_reports(cfg, reports, result.hard_accents, model)
    return result


def score_pool(
    cfg: RunConfig, mode: str, utterances: Sequence[Utterance] | None = None
) -> tuple[list[UncertaintyRecord], dict[str, str] | None]:
    """Score the pool with the round-0 model without acquiring anything.

    mode "supervised" computes per-pass WERs against gold references; mode
    "pairwise" is label-free and also returns consensus transcripts.
    """
    if mode not in ("supervised", "pairwise"):
        raise ConfigError("score mode must be 'supervised' or 'pairwise'")
    state, model, corpus_by_id = _prepare_round0(cfg, utterances)
    pool_utts = [corpus_by_id[uid] for uid in state.pool]

    if mode == "supervised":
        for utt in pool_utts:
            if not utt.gold_transcript:
                raise ConfigError(
                    f"supervised scoring requires gold transcripts; {utt.id!r} has none"
                )

        def score_supervised(utt: Utterance) -> UncertaintyRecord:
            passes = model.transcribe_passes(utt, cfg.passes, cfg.seed)
            return eu_supervised(tokenize(utt.gold_transcript), passes, accent=utt.accent)

        return map_ordered(score_supervised, pool_utts, cfg.workers), None

    from .consensus import select_best

    labels: dict[str, str] = {}

    def score_pairwise(utt: Utterance) -> tuple[UncertaintyRecord, str]:
        passes = model.transcribe_passes(utt, cfg.passes, cfg.seed)
        return eu_pairwise(passes, accent=utt.accent), select_best(passes).best_hypothesis

    scored = map_ordered(score_pairwise, pool_utts, cfg.workers)
    records = [record for record, _ in scored]
    labels = {record.utterance_id: label for record, label in scored}
    return records, labels


def plan_selection(
    cfg: RunConfig, utterances: Sequence[Utterance] | None = None
) -> SelectionPlan:
    """Produce the round-0 selection plan without acquiring anything."""
    state, model, corpus_by_id = _prepare_round0(cfg, utterances)
    pool_utts = [corpus_by_id[uid] for uid in state.pool]
    if cfg.strategy == "random":
        return select_random(
            [u.id for u in pool_utts], cfg.top_k, derive_round_seed(cfg.seed, 0)
        )
    if cfg.strategy == "eu_most":
        return select_eu_most(
            pool_utts, model, cfg.passes, cfg.seed, cfg.top_k, workers=cfg.workers
        )
    return select_al_eu_most(
        pool_utts, model, cfg.passes, cfg.seed, cfg.top_k, workers=cfg.workers
    )


def build_backend(cfg: RunConfig, corpus: Sequence[Utterance]) -> Transcriber:
    if cfg.backend == "sim":
        try:
            sim_cfg = SimulatorConfig(**cfg.simulator)
        except TypeError as exc:
            raise ConfigError(f"bad simulator parameters: {exc}") from exc
        return SimulatedTranscriber(corpus, sim_cfg)
    return ExternalTranscriber(cfg.endpoint)


def split_state(
    cfg: RunConfig, utterances: Sequence[Utterance] | None = None
) -> tuple[DatasetState, list[Utterance]]:
    cfg.validate()
    if utterances is None:
        if not cfg.manifest:
            raise ConfigError("a manifest path (or explicit utterances) is required")
        utterances = load_manifest(cfg.manifest)
    corpus = filter_domain(utterances, cfg.domain)
    if not corpus:
        raise ConfigError(f"no utterances left after domain filter {cfg.domain!r}")
    state = initial_split(
        corpus,
        cfg.train_fraction,
        cfg.seed,
        val_fraction=cfg.val_fraction,
        test_fraction=cfg.test_fraction,
        budget_cap_fraction=cfg.budget_cap_fraction,
        stratify_by=cfg.stratify_by,
    )
    return state, corpus


def _prepare_round0(
    cfg: RunConfig, utterances: Sequence[Utterance] | None
) -> tuple[DatasetState, Transcriber, dict[str, Utterance]]:
    state, corpus = split_state(cfg, utterances)
    corpus_by_id = {u.id: u for u in corpus}
    model = build_backend(cfg, corpus)
    manifest_ref = _write_adapt_manifest(cfg, 0, state, corpus_by_id)
    model.adapt(state.train, state, manifest_ref=manifest_ref)
    return state, model, corpus_by_id


def _check_gold(
    state: DatasetState, corpus_by_id: Mapping[str, Utterance], strategy: str
) -> None:
    missing_test = [uid for uid in state.test if not corpus_by_id[uid].gold_transcript]
    if missing_test:
        raise ConfigError(
            f"{len(missing_test)} test utterances lack gold transcripts "
            f"(first: {missing_test[0]!r}); evaluation is supervised"
        )
    if strategy == "eu_most":
        missing_pool = [uid for uid in state.pool if not corpus_by_id[uid].gold_transcript]
        if missing_pool:
            raise ConfigError(
                f"strategy eu_most scores against gold transcripts but "
                f"{len(missing_pool)} pool utterances lack them (first: {missing_pool[0]!r})"
            )


def _accent_counts(ids: Sequence[str], corpus_by_id: Mapping[str, Utterance]) -> dict[str, int]:
    counts: dict[str, int] = {}
    for uid in ids:
        accent = corpus_by_id[uid].accent
        counts[accent] = counts.get(accent, 0) + 1
    return counts


def _hard_accents_by_frequency(corpus: Sequence[Utterance], m: int) -> tuple[str, ...]:
    counts: dict[str, int] = {}
    for utt in corpus:
        counts[utt.accent] = counts.get(utt.accent, 0) + 1
    ranked = sorted(counts.items(), key=lambda item: (-item[1], item[0]))
    return tuple(accent for accent, _ in ranked[:m])


def _hard_accents_from_eval(evaluation: EvalSummary, m: int) -> tuple[str, ...]:
    scored = [
        (accent, acc.mean_eu)
        for accent, acc in evaluation.per_accent.items()
        if acc.mean_eu is not None
    ]
    ranked = sorted(scored, key=lambda item: (-item[1], item[0]))
    return tuple(accent for accent, _ in ranked[:m])


def _write_adapt_manifest(
    cfg: RunConfig,
    round_index: int,
    state: DatasetState,
    corpus_by_id: Mapping[str, Utterance],
) -> str:
    """Materialize the adapt payload for external backends.

    The wire message carries only a reference string; the referenced JSON
    document holds the train ids and the passthrough finetuning options.
    Simulator runs skip the file unless an out_dir is configured.
    """
    if cfg.backend != "external" and not cfg.out_dir:
        return ""
    if not cfg.out_dir:
        return f"train:{len(state.train)}:round:{round_index}"
    adapt_dir = os.path.join(cfg.out_dir, "adapt")
    os.makedirs(adapt_dir, exist_ok=True)
    path = os.path.join(adapt_dir, f"round_{round_index:03d}.json")
    document = {
        "round": round_index,
        "train_ids": list(state.train),
        "options": cfg.backend_options,
    }
    with open(path, "w", encoding="utf-8") as fout:
        json.dump(document, fout, ensure_ascii=False, indent=2, sort_keys=True)
        fout.write("\n")
    return path


def _emit_reports(
    cfg: RunConfig,
    reports: Sequence[RoundReport],
    hard_accents: tuple[str, ...],
    model: Transcriber,
) -> None:
    os.makedirs(cfg.out_dir, exist_ok=True)
    reporting.emit_round_reports(reports, os.path.join(cfg.out_dir, "rounds.csv"))
    reporting.emit_accent_series(
        reports, list(hard_accents), os.path.join(cfg.out_dir, "accent_series.csv")
    )
    reporting.emit_round_reports_json(reports, os.path.join(cfg.out_dir, "round_reports.json"))
    reporting.emit_run_metadata(
        effective_config=cfg.to_dict(),
        backend_name=model.name,
        backend_supports_dropout=model.supports_dropout,
        wall_times_s=[r.wall_time_s for r in reports],
        path=os.path.join(cfg.out_dir, "run_metadata.json"),
    )
