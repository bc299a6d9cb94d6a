"""Consensus transcript selection for unlabeled utterances.

Among the T hypotheses of a pass set, the best transcript is the one with
the lowest mean pairwise WER when used as the reference for every other
hypothesis. The dispersion of all ordered pairwise WERs doubles as the
utterance's label-free uncertainty score.

Row means are compared in exact rational arithmetic so that ties are broken
by lowest pass index and never by floating-point accidents.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .transcriber.base import PassSet
from .uncertainty import pairwise_values, population_std


@dataclass(frozen=True)
class ConsensusResult:
    best_hypothesis: str
    best_index: int
    mean_pairwise_by_target: dict[int, float]
    dispersion: float


def select_best(passes: PassSet) -> ConsensusResult:
    """Pick the hypothesis minimizing mean pairwise WER against the rest."""
    count = len(passes.hypotheses)
    if count < 2:
        raise ValueError("consensus selection needs at least 2 passes")

    pairs = pairwise_values(passes.hypotheses)
    totals = [Fraction(0)] * count
    floats: list[float] = []
    for pair in pairs:
        totals[pair.ref_index] += pair.exact
        floats.append(pair.value)

    divisor = count - 1
    means = [total / divisor for total in totals]
    best_index = 0
    for i in range(1, count):
        if means[i] < means[best_index]:
            best_index = i

    return ConsensusResult(
        best_hypothesis=passes.hypotheses[best_index],
        best_index=best_index,
        mean_pairwise_by_target={i: float(m) for i, m in enumerate(means)},
        dispersion=population_std(floats),
    )
