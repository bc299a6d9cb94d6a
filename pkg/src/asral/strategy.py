"""Acquisition strategies: random, eu_most, al_eu_most.

Each strategy produces a SelectionPlan picking up to k pool utterances per
round. eu_most ranks by supervised uncertainty (gold transcripts required);
al_eu_most treats the pool as unlabeled, ranks by consensus dispersion, and
carries the consensus transcript as the training pseudo-label. Ties are
broken by utterance id ascending everywhere so plans are reproducible.
"""

from __future__ import annotations

import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Literal, Sequence, TypeVar

from .consensus import select_best
from .manifest import Utterance
from .textmetric import tokenize
from .transcriber.base import Transcriber, check_passes
from .uncertainty import UncertaintyRecord, eu_supervised

StrategyName = Literal["random", "eu_most", "al_eu_most"]
STRATEGIES: tuple[str, ...] = ("random", "eu_most", "al_eu_most")

_T = TypeVar("_T")
_R = TypeVar("_R")


@dataclass(frozen=True)
class SelectionPlan:
    strategy: str
    k: int
    selected: tuple[str, ...]
    scores: dict[str, float] | None = None
    consensus_labels: dict[str, str] | None = None


def select_random(pool: Sequence[str], k: int, seed: int) -> SelectionPlan:
    """Seeded uniform sample without replacement, draw order preserved."""
    if k < 0:
        raise ValueError("k must be >= 0")
    ids = list(pool)
    rng = random.Random(seed)
    take = min(k, len(ids))
    # partial Fisher-Yates over rng.random(): stable across Python versions
    for i in range(take):
        j = i + int(rng.random() * (len(ids) - i))
        if j >= len(ids):
            j = len(ids) - 1
        ids[i], ids[j] = ids[j], ids[i]
    return SelectionPlan(strategy="random", k=k, selected=tuple(ids[:take]))


def select_eu_most(
    pool: Sequence[Utterance],
    model: Transcriber,
    passes: int,
    run_seed: int,
    k: int,
    workers: int = 1,
) -> SelectionPlan:
    """Top-k pool utterances by supervised epistemic uncertainty."""
    check_passes(passes)
    if k < 0:
        raise ValueError("k must be >= 0")
    for utt in pool:
        if not utt.gold_transcript:
            raise ValueError(
                f"eu_most requires gold transcripts; utterance {utt.id!r} has none"
            )

    def score(utt: Utterance) -> UncertaintyRecord:
        try:
            pass_set = model.transcribe_passes(utt, passes, run_seed)
            return eu_supervised(tokenize(utt.gold_transcript), pass_set, accent=utt.accent)
        except Exception as exc:
            raise _with_utterance_id(exc, utt.id) from exc

    records = map_ordered(score, pool, workers)
    scores = {r.utterance_id: r.eu for r in records}
    return SelectionPlan(
        strategy="eu_most",
        k=k,
        selected=_top_k_ids(scores, k),
        scores=scores,
    )


def select_al_eu_most(
    pool: Sequence[Utterance],
    model: Transcriber,
    passes: int,
    run_seed: int,
    k: int,
    workers: int = 1,
) -> SelectionPlan:
    """Top-k by consensus dispersion; gold transcripts are ignored.

    Each scored utterance gets its consensus transcript recorded; acquired
    utterances train on that pseudo-label.
    """
    check_passes(passes)
    if k < 0:
        raise ValueError("k must be >= 0")

    def score(utt: Utterance) -> tuple[str, float, str]:
        try:
            pass_set = model.transcribe_passes(utt, passes, run_seed)
            result = select_best(pass_set)
            return (utt.id, result.dispersion, result.best_hypothesis)
        except Exception as exc:
            raise _with_utterance_id(exc, utt.id) from exc

    results = map_ordered(score, pool, workers)
    scores = {uid: dispersion for uid, dispersion, _ in results}
    labels = {uid: label for uid, _, label in results}
    return SelectionPlan(
        strategy="al_eu_most",
        k=k,
        selected=_top_k_ids(scores, k),
        scores=scores,
        consensus_labels=labels,
    )


def _with_utterance_id(exc: Exception, utterance_id: str) -> Exception:
    """Recreate the error with the utterance id attached, keeping its type
    (the orchestrator dispatches on TransportError for atomic aborts)."""
    try:
        return type(exc)(f"utterance {utterance_id!r}: {exc}")
    except Exception:
        return RuntimeError(f"utterance {utterance_id!r}: {exc}")


def _top_k_ids(scores: dict[str, float], k: int) -> tuple[str, ...]:
    ranked = sorted(scores.items(), key=lambda item: (-item[1], item[0]))
    return tuple(uid for uid, _ in ranked[:k])


def map_ordered(fn: Callable[[_T], _R], items: Sequence[_T], workers: int) -> list[_R]:
    """Apply fn preserving input order; results are worker-count independent."""
    if workers <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as executor:
        return list(executor.map(fn, items))
