"""Independent brute-force oracles used by the test suite.

These deliberately share no code with the package implementations: the
edit-distance oracle is a plain full-matrix DP, the std oracle is a naive
two-pass computation, and the consensus oracle builds the explicit pairwise
matrix in exact rational arithmetic.
"""

from __future__ import annotations

from fractions import Fraction
from math import sqrt
from typing import Sequence


def oracle_edit_distance(ref: Sequence[str], hyp: Sequence[str]) -> int:
    rows = len(ref) + 1
    cols = len(hyp) + 1
    d = [[0] * cols for _ in range(rows)]
    for i in range(rows):
        d[i][0] = i
    for j in range(cols):
        d[0][j] = j
    for i in range(1, rows):
        for j in range(1, cols):
            if ref[i - 1] == hyp[j - 1]:
                d[i][j] = d[i - 1][j - 1]
            else:
                d[i][j] = 1 + min(d[i - 1][j - 1], d[i - 1][j], d[i][j - 1])
    return d[-1][-1]


def oracle_two_pass_std(values: Sequence[float]) -> float:
    n = len(values)
    mean = sum(values) / n
    variance = sum((v - mean) ** 2 for v in values) / n
    return sqrt(variance)


def oracle_pair_value(ref: Sequence[str], hyp: Sequence[str]) -> Fraction:
    if len(ref) == 0:
        return Fraction(0) if len(hyp) == 0 else Fraction(1)
    return Fraction(oracle_edit_distance(ref, hyp), len(ref))


def oracle_consensus(
    token_lists: Sequence[Sequence[str]],
) -> tuple[int, float, list[float]]:
    """Explicit T x T pairwise matrix, row means, argmin (lowest index wins).

    Returns (best_index, dispersion, wer_list) with the pairwise list in
    reference-major order.
    """
    count = len(token_lists)
    matrix = [
        [oracle_pair_value(token_lists[i], token_lists[j]) for j in range(count)]
        for i in range(count)
    ]
    wer_list = [float(matrix[i][j]) for i in range(count) for j in range(count) if j != i]
    row_means = [
        sum((matrix[i][j] for j in range(count) if j != i), Fraction(0)) / (count - 1)
        for i in range(count)
    ]
    best_index = 0
    for i in range(1, count):
        if row_means[i] < row_means[best_index]:
            best_index = i
    return best_index, oracle_two_pass_std(wer_list), wer_list
