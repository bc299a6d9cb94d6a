"""Epistemic uncertainty from repeated stochastic transcription passes.

The uncertainty of an utterance is the population standard deviation of its
per-pass WERs:

    eu = sqrt(mean(f^2) - mean(f)^2)        with divisor T, not T-1

computed either against a gold transcript (supervised: T values) or over all
ordered hypothesis pairs when no gold exists (pairwise: T*(T-1) values, each
hypothesis serving in turn as the reference for every other). The
accent-conditioned variant (u_wer) pools the per-pass WERs of all records of
one accent and takes the same population std.

Sums use math.fsum (exactly rounded), so eu is invariant under any
permutation of the passes, bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import fsum, sqrt
from typing import Literal, Sequence

from .textmetric import (
    EmptyReferenceError,
    TokenSeq,
    edit_distance,
    tokenize,
    wer_value,
)
from .transcriber.base import PassSet

Mode = Literal["supervised", "pairwise"]


@dataclass(frozen=True)
class UncertaintyRecord:
    utterance_id: str
    mode: Mode
    per_pass_wers: tuple[float, ...]
    eu: float
    accent: str = ""


@dataclass(frozen=True)
class PairValue:
    """One ordered pairwise WER: hypothesis j scored against reference i."""

    ref_index: int
    hyp_index: int
    value: float
    exact: Fraction


def population_std(values: Sequence[float]) -> float:
    """Population (1/N) standard deviation, clamped against rounding residue."""
    n = len(values)
    if n == 0:
        raise ValueError("population_std of an empty sequence")
    if min(values) == max(values):
        return 0.0
    mean = fsum(values) / n
    variance = fsum(v * v for v in values) / n - mean * mean
    if variance < 0.0:
        variance = 0.0
    return sqrt(variance)


def eu_supervised(gold: TokenSeq, passes: PassSet, accent: str = "") -> UncertaintyRecord:
    """Uncertainty against a gold reference: std of the T supervised WERs."""
    if len(gold) == 0:
        raise EmptyReferenceError("supervised uncertainty needs a non-empty gold reference")
    _require_multiple_passes(passes)
    wers = tuple(wer_value(gold, tokenize(h)) for h in passes.hypotheses)
    return UncertaintyRecord(
        utterance_id=passes.utterance_id,
        mode="supervised",
        per_pass_wers=wers,
        eu=population_std(wers),
        accent=accent,
    )


def eu_pairwise(passes: PassSet, accent: str = "") -> UncertaintyRecord:
    """Label-free uncertainty: std over all T*(T-1) ordered pairwise WERs."""
    _require_multiple_passes(passes)
    wers = tuple(pair.value for pair in pairwise_values(passes.hypotheses))
    return UncertaintyRecord(
        utterance_id=passes.utterance_id,
        mode="pairwise",
        per_pass_wers=wers,
        eu=population_std(wers),
        accent=accent,
    )


def u_wer(accent: str, records: Sequence[UncertaintyRecord]) -> float:
    """Accent-conditioned uncertainty, pooled over the accent's records."""
    if not records:
        raise ValueError("u_wer needs at least one record")
    pooled: list[float] = []
    for record in records:
        if record.accent != accent:
            raise ValueError(
                f"record {record.utterance_id!r} has accent {record.accent!r}, "
                f"expected {accent!r}"
            )
        pooled.extend(record.per_pass_wers)
    return population_std(pooled)


def pairwise_values(hypotheses: Sequence[str]) -> list[PairValue]:
    """All ordered pairwise WERs in loop order (reference index outer).

    Returns both the float ratio (feeding the std) and the exact rational
    (feeding consensus tie-breaks). Identical hypothesis strings share one
    tokenization and one distance computation.
    """
    keys: list[int] = []
    unique: dict[str, int] = {}
    token_lists: list[list[str]] = []
    for text in hypotheses:
        idx = unique.get(text)
        if idx is None:
            idx = len(token_lists)
            unique[text] = idx
            token_lists.append(tokenize(text))
        keys.append(idx)

    cache: dict[tuple[int, int], tuple[float, Fraction]] = {}

    def pair(ki: int, kj: int) -> tuple[float, Fraction]:
        if ki == kj:
            return (0.0, Fraction(0))
        got = cache.get((ki, kj))
        if got is None:
            ref = token_lists[ki]
            hyp = token_lists[kj]
            if len(ref) == 0:
                # sentinel policy for an empty pairwise reference
                got = (0.0, Fraction(0)) if len(hyp) == 0 else (1.0, Fraction(1))
            else:
                distance = edit_distance(ref, hyp)
                got = (distance / len(ref), Fraction(distance, len(ref)))
            cache[(ki, kj)] = got
        return got

    out: list[PairValue] = []
    for i, ki in enumerate(keys):
        for j, kj in enumerate(keys):
            if i == j:
                continue
            value, exact = pair(ki, kj)
            out.append(PairValue(ref_index=i, hyp_index=j, value=value, exact=exact))
    return out


def _require_multiple_passes(passes: PassSet) -> None:
    if len(passes.hypotheses) < 2:
        raise ValueError("uncertainty needs at least 2 passes")
