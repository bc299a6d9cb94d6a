"""Tokenization and word error rate.

Every uncertainty and consensus computation in this package funnels through
the two functions here, so the normalization convention is fixed and
versioned: WER values are only comparable when produced by the same
tokenizer.

WER is the minimal word-level edit distance (unit substitution / insertion /
deletion costs) divided by the reference length. It can exceed 1.0.
"""

from __future__ import annotations

import unicodedata
from dataclasses import dataclass
from typing import Sequence

TOKENIZER_VERSION = "1"

TokenSeq = Sequence[str]


class EmptyReferenceError(ValueError):
    """Raised when a WER reference has no tokens.

    Manifests enforce a minimum transcript length, so an empty reference
    indicates an upstream bug rather than a scoreable input. Pairwise
    (label-free) scoring uses the sentinel policy in pairwise_value instead.
    """


@dataclass(frozen=True)
class WerScore:
    value: float
    substitutions: int
    insertions: int
    deletions: int
    ref_len: int


def tokenize(text: str) -> list[str]:
    """Normalize text into the canonical token sequence.

    Lowercase, split on Unicode whitespace, strip leading/trailing
    punctuation from each token, drop tokens that end up empty. Interior
    punctuation (e.g. apostrophes) is kept.
    """
    tokens = []
    for raw in text.lower().split():
        token = _strip_punct(raw)
        if token:
            tokens.append(token)
    return tokens


def _strip_punct(token: str) -> str:
    start = 0
    end = len(token)
    while start < end and unicodedata.category(token[start]).startswith("P"):
        start += 1
    while end > start and unicodedata.category(token[end - 1]).startswith("P"):
        end -= 1
    return token[start:end]


def wer(reference: TokenSeq, hypothesis: TokenSeq) -> WerScore:
    """Word error rate of `hypothesis` against a non-empty `reference`.

    Returns the edit-count breakdown of one optimal alignment. When several
    alignments are optimal, the one with the fewest insertion+deletion
    operations (i.e. preferring substitutions) is reported; the value is the
    same for all of them.
    """
    if len(reference) == 0:
        raise EmptyReferenceError("WER reference must contain at least one token")
    cost, indel = _distance_with_indel(reference, hypothesis)
    # cost = S + I + D, indel = I + D, and D - I = len(ref) - len(hyp),
    # so the breakdown is fully determined.
    deletions = (indel + len(reference) - len(hypothesis)) // 2
    insertions = indel - deletions
    substitutions = cost - indel
    return WerScore(
        value=cost / len(reference),
        substitutions=substitutions,
        insertions=insertions,
        deletions=deletions,
        ref_len=len(reference),
    )


def wer_value(reference: TokenSeq, hypothesis: TokenSeq) -> float:
    """WER ratio only — the hot path used by scoring loops."""
    if len(reference) == 0:
        raise EmptyReferenceError("WER reference must contain at least one token")
    if reference == hypothesis:
        return 0.0
    return _distance(reference, hypothesis) / len(reference)


def pairwise_value(reference: TokenSeq, hypothesis: TokenSeq) -> float:
    """WER with the label-free sentinel policy for empty references.

    In consensus mode a hypothesis may be empty yet still serve as the
    pairwise reference; the score is then 1.0 against any non-empty
    hypothesis and 0.0 against another empty one.
    """
    if len(reference) == 0:
        return 0.0 if len(hypothesis) == 0 else 1.0
    if reference == hypothesis:
        return 0.0
    return _distance(reference, hypothesis) / len(reference)


def edit_distance(reference: TokenSeq, hypothesis: TokenSeq) -> int:
    """Minimal word-level edit count (the WER numerator)."""
    if reference == hypothesis:
        return 0
    return _distance(reference, hypothesis)


def _distance(reference: TokenSeq, hypothesis: TokenSeq) -> int:
    """Levenshtein distance over tokens, single rolling row."""
    if len(hypothesis) == 0:
        return len(reference)
    prev = list(range(len(hypothesis) + 1))
    for i, ref_tok in enumerate(reference, start=1):
        cur = [i]
        for j, hyp_tok in enumerate(hypothesis, start=1):
            if ref_tok == hyp_tok:
                cur.append(prev[j - 1])
            else:
                best = prev[j - 1]
                if prev[j] < best:
                    best = prev[j]
                if cur[-1] < best:
                    best = cur[-1]
                cur.append(best + 1)
        prev = cur
    return prev[-1]


def _distance_with_indel(reference: TokenSeq, hypothesis: TokenSeq) -> tuple[int, int]:
    """Minimal (cost, insertions+deletions) under lexicographic order.

    Minimizing the indel count secondarily makes the reported breakdown
    deterministic and substitution-preferring.
    """
    prev = [(j, j) for j in range(len(hypothesis) + 1)]
    for i, ref_tok in enumerate(reference, start=1):
        cur = [(i, i)]
        for j, hyp_tok in enumerate(hypothesis, start=1):
            if ref_tok == hyp_tok:
                best = prev[j - 1]
            else:
                c, d = prev[j - 1]
                best = (c + 1, d)  # substitution
            c, d = prev[j]
            cand = (c + 1, d + 1)  # deletion
            if cand < best:
                best = cand
            c, d = cur[-1]
            cand = (c + 1, d + 1)  # insertion
            if cand < best:
                best = cand
            cur.append(best)
        prev = cur
    return prev[-1]
