"""Dataset manifests and the train/pool/val/test partition.

Manifest file format (documented contract): UTF-8 JSON Lines, one record per
line with fields

    id               required, unique string
    payload          required string; reference text or an audio path,
                     handed opaquely to the transcriber
    accent           required string tag
    gold_transcript  optional string, >= 10 characters when present
    domain           optional, one of {general, clinical, both-eligible},
                     default "general"
    duration_s       optional non-negative number, default 0.0

Unknown fields are ignored. DatasetState is a value: acquisitions produce new
states, so read-only sharing across concurrent scorers is safe.
"""

from __future__ import annotations

import json
import math
import random
from collections import deque
from dataclasses import dataclass, replace
from typing import Iterable, Sequence

MIN_TRANSCRIPT_CHARS = 10
DOMAINS = ("general", "clinical", "both-eligible")
DEFAULT_BUDGET_CAP_FRACTION = 0.65


class ManifestError(ValueError):
    """Manifest file rejected; message carries the offending row number."""


@dataclass(frozen=True)
class Utterance:
    id: str
    payload: str
    accent: str
    domain: str = "general"
    duration_s: float = 0.0
    gold_transcript: str | None = None


@dataclass(frozen=True)
class DatasetState:
    """Partition of a corpus plus budget accounting.

    original_train_size is the train-eligible count (train + pool at split
    time) and is immutable; the train set may never exceed
    budget_cap_fraction of it.
    """

    train: tuple[str, ...]
    pool: tuple[str, ...]
    val: tuple[str, ...]
    test: tuple[str, ...]
    original_train_size: int
    budget_cap_fraction: float = DEFAULT_BUDGET_CAP_FRACTION

    @property
    def max_train_size(self) -> int:
        return _floor_fraction(self.budget_cap_fraction, self.original_train_size)

    @property
    def budget_fraction_used(self) -> float:
        return len(self.train) / self.original_train_size


@dataclass(frozen=True)
class AcquireResult:
    state: DatasetState
    moved: tuple[str, ...]
    truncated: tuple[str, ...]

    @property
    def was_truncated(self) -> bool:
        return len(self.truncated) > 0


def load_manifest(path: str) -> list[Utterance]:
    """Load and validate a JSONL manifest, preserving file order."""
    utterances: list[Utterance] = []
    seen: set[str] = set()
    with open(path, "r", encoding="utf-8") as fin:
        for row, line in enumerate(fin, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ManifestError(f"{path}:{row}: invalid JSON ({exc.msg})") from exc
            if not isinstance(record, dict):
                raise ManifestError(f"{path}:{row}: record must be a JSON object")
            utt = _validate_record(record, path, row)
            if utt.id in seen:
                raise ManifestError(f"{path}:{row}: duplicate id {utt.id!r}")
            seen.add(utt.id)
            utterances.append(utt)
    return utterances


def write_manifest(utterances: Iterable[Utterance], path: str) -> None:
    with open(path, "w", encoding="utf-8") as fout:
        for utt in utterances:
            record = {
                "id": utt.id,
                "payload": utt.payload,
                "accent": utt.accent,
                "domain": utt.domain,
                "duration_s": utt.duration_s,
            }
            if utt.gold_transcript is not None:
                record["gold_transcript"] = utt.gold_transcript
            fout.write(json.dumps(record, ensure_ascii=False) + "\n")


def _validate_record(record: dict, path: str, row: int) -> Utterance:
    for field in ("id", "payload", "accent"):
        if field not in record:
            raise ManifestError(f"{path}:{row}: missing required field {field!r}")
        if not isinstance(record[field], str) or not record[field]:
            raise ManifestError(f"{path}:{row}: field {field!r} must be a non-empty string")

    gold = record.get("gold_transcript")
    if gold is not None:
        if not isinstance(gold, str):
            raise ManifestError(f"{path}:{row}: gold_transcript must be a string")
        if len(gold) < MIN_TRANSCRIPT_CHARS:
            raise ManifestError(
                f"{path}:{row}: gold_transcript has {len(gold)} characters, "
                f"minimum transcript length is {MIN_TRANSCRIPT_CHARS}"
            )

    domain = record.get("domain", "general")
    if domain not in DOMAINS:
        raise ManifestError(
            f"{path}:{row}: domain {domain!r} not one of {', '.join(DOMAINS)}"
        )

    duration = record.get("duration_s", 0.0)
    if not isinstance(duration, (int, float)) or isinstance(duration, bool) or duration < 0:
        raise ManifestError(f"{path}:{row}: duration_s must be a non-negative number")

    return Utterance(
        id=record["id"],
        payload=record["payload"],
        accent=record["accent"],
        domain=domain,
        duration_s=float(duration),
        gold_transcript=gold,
    )


def filter_domain(utterances: Sequence[Utterance], domain: str) -> list[Utterance]:
    """Restrict a corpus to one evaluation domain.

    "both-eligible" utterances participate in every domain; domain="both"
    keeps the whole corpus.
    """
    if domain == "both":
        return list(utterances)
    if domain not in ("general", "clinical"):
        raise ValueError(f"unknown domain filter {domain!r}")
    return [u for u in utterances if u.domain in (domain, "both-eligible")]


def initial_split(
    utterances: Sequence[Utterance],
    train_fraction: float,
    seed: int,
    *,
    val_fraction: float = 0.0,
    test_fraction: float = 0.0,
    budget_cap_fraction: float = DEFAULT_BUDGET_CAP_FRACTION,
    stratify_by: str | None = None,
) -> DatasetState:
    """Seeded shuffle then prefix split into train/pool (and optional val/test).

    val/test are carved from the tail of the shuffled order first; the train
    fraction then applies to the remaining train-eligible count, which
    becomes original_train_size for budget purposes. A pure function of
    (utterance ids, fractions, seed, stratify_by).
    """
    if not utterances:
        raise ValueError("cannot split an empty utterance list")
    if not 0.0 < train_fraction < 1.0:
        raise ValueError("train_fraction must be in (0, 1)")
    if val_fraction < 0 or test_fraction < 0 or val_fraction + test_fraction >= 1.0:
        raise ValueError("val_fraction/test_fraction must be >= 0 and sum below 1")
    if not 0.0 < budget_cap_fraction <= 1.0:
        raise ValueError("budget_cap_fraction must be in (0, 1]")

    ids = [u.id for u in utterances]
    if len(set(ids)) != len(ids):
        raise ValueError("duplicate utterance ids in split input")

    if stratify_by is None:
        ordered = _shuffled(ids, random.Random(seed))
    else:
        ordered = _stratified_order(utterances, stratify_by, seed)

    n = len(ordered)
    n_val = _floor_fraction(val_fraction, n)
    n_test = _floor_fraction(test_fraction, n)
    eligible = n - n_val - n_test
    if eligible <= 0:
        raise ValueError("val/test fractions leave no train-eligible utterances")
    n_train = _floor_fraction(train_fraction, eligible)
    if n_train > _floor_fraction(budget_cap_fraction, eligible):
        raise ValueError(
            f"train_fraction {train_fraction} exceeds budget cap {budget_cap_fraction}"
        )

    return DatasetState(
        train=tuple(ordered[:n_train]),
        pool=tuple(ordered[n_train:eligible]),
        val=tuple(ordered[eligible : eligible + n_val]),
        test=tuple(ordered[eligible + n_val :]),
        original_train_size=eligible,
        budget_cap_fraction=budget_cap_fraction,
    )


def acquire(state: DatasetState, selected: Sequence[str]) -> AcquireResult:
    """Move selected ids pool -> train, preserving selection order.

    If the move would exceed the budget cap, the selection is clamped to its
    prefix and the dropped tail is reported as truncated.
    """
    sel = list(selected)
    if len(set(sel)) != len(sel):
        raise ValueError("selection contains duplicate ids")
    pool_set = set(state.pool)
    for uid in sel:
        if uid not in pool_set:
            raise ValueError(f"selected id {uid!r} is not in the pool")

    room = state.max_train_size - len(state.train)
    moved = tuple(sel[: max(room, 0)])
    truncated = tuple(sel[len(moved) :])
    moved_set = set(moved)
    new_state = replace(
        state,
        train=state.train + moved,
        pool=tuple(uid for uid in state.pool if uid not in moved_set),
    )
    return AcquireResult(state=new_state, moved=moved, truncated=truncated)


def split_summary(
    state: DatasetState, utterances: Sequence[Utterance]
) -> dict:
    """Structured split report: counts per split, per accent, per domain."""
    by_id = {u.id: u for u in utterances}
    summary: dict = {
        "original_train_size": state.original_train_size,
        "budget_cap_fraction": state.budget_cap_fraction,
        "max_train_size": state.max_train_size,
        "splits": {},
    }
    for name in ("train", "pool", "val", "test"):
        ids = getattr(state, name)
        accents: dict[str, int] = {}
        domains: dict[str, int] = {}
        for uid in ids:
            utt = by_id[uid]
            accents[utt.accent] = accents.get(utt.accent, 0) + 1
            domains[utt.domain] = domains.get(utt.domain, 0) + 1
        summary["splits"][name] = {
            "count": len(ids),
            "per_accent": dict(sorted(accents.items())),
            "per_domain": dict(sorted(domains.items())),
        }
    return summary


def _floor_fraction(fraction: float, count: int) -> int:
    # 1e-9 nudge so decimal fractions like 0.30 floor to their decimal
    # intent despite binary rounding (0.29 * 100 == 28.999999999999996).
    return int(math.floor(fraction * count + 1e-9))


def _shuffled(ids: Sequence[str], rng: random.Random) -> list[str]:
    # Explicit Fisher-Yates on rng.random() so the permutation is stable
    # across Python versions.
    xs = list(ids)
    for i in range(len(xs) - 1, 0, -1):
        j = int(rng.random() * (i + 1))
        if j > i:
            j = i
        xs[i], xs[j] = xs[j], xs[i]
    return xs


def _stratified_order(
    utterances: Sequence[Utterance], stratify_by: str, seed: int
) -> list[str]:
    """Shuffle within strata, then interleave strata round-robin.

    Round-robin interleaving keeps every prefix of the order close to the
    stratum proportions, so the prefix split is stratified without
    per-stratum bookkeeping downstream.
    """
    if stratify_by not in ("accent", "domain"):
        raise ValueError("stratify_by must be 'accent' or 'domain'")
    groups: dict[str, list[str]] = {}
    for u in utterances:
        groups.setdefault(getattr(u, stratify_by), []).append(u.id)
    rng = random.Random(seed)
    queues = [deque(_shuffled(groups[key], rng)) for key in sorted(groups)]
    ordered: list[str] = []
    while queues:
        survivors = []
        for queue in queues:
            ordered.append(queue.popleft())
            if queue:
                survivors.append(queue)
        queues = survivors
    return ordered
