import random

import pytest

from asral.consensus import select_best
from asral.textmetric import tokenize
from asral.transcriber import PassSet
from asral.uncertainty import eu_pairwise

from oracles import oracle_consensus, oracle_pair_value


def passes(*hypotheses, uid="u1"):
    return PassSet(utterance_id=uid, hypotheses=tuple(hypotheses))


class TestSelectBest:
    def test_all_identical(self):
        result = select_best(passes("x y", "x y", "x y"))
        assert result.best_index == 0
        assert result.best_hypothesis == "x y"
        assert result.mean_pairwise_by_target == {0: 0.0, 1: 0.0, 2: 0.0}
        assert result.dispersion == 0.0

    def test_majority_of_three(self):
        result = select_best(passes("a b", "a b", "a c"))
        assert result.best_index == 0
        assert result.best_hypothesis == "a b"
        assert result.mean_pairwise_by_target == {0: 0.25, 1: 0.25, 2: 0.5}

    def test_majority_of_ten(self):
        hyps = ["the cat sat"] * 7 + ["wild guess one", "another thing", "the dog ran"]
        rng = random.Random(5)
        rng.shuffle(hyps)
        result = select_best(passes(*hyps))
        assert result.best_hypothesis == "the cat sat"

    def test_tie_broken_by_lowest_index(self):
        result = select_best(passes("a", "b"))
        assert result.mean_pairwise_by_target == {0: 1.0, 1: 1.0}
        assert result.best_index == 0

    def test_exact_tie_beats_float_rounding(self):
        """Rows 0 and 1 both have an exact mean of 7/9, but the float sums
        land one ulp apart (row 0 at 0.7777777777777778, row 1 at
        0.7777777777777777), so a float argmin would pick index 1. The exact
        row means must treat them as tied and keep index 0."""
        hyps = ("c a c", "b c b", "a b b", "c c")
        toks = [tokenize(h) for h in hyps]
        naive = []
        for i in range(4):
            vals = [
                oracle_pair_value(toks[i], toks[j]) for j in range(4) if j != i
            ]
            naive.append(sum(float(v) for v in vals) / 3)
        assert naive[1] < naive[0]  # the hazard a float argmin would hit
        result = select_best(passes(*hyps))
        assert result.mean_pairwise_by_target[0] == result.mean_pairwise_by_target[1]
        assert result.best_index == 0

    def test_dispersion_equals_eu_pairwise_exactly(self):
        pass_set = passes("one two", "one three", "completely different", "one two")
        assert select_best(pass_set).dispersion == eu_pairwise(pass_set).eu

    def test_needs_two_passes(self):
        with pytest.raises(ValueError):
            select_best(passes("only one"))

    def test_permutation_maps_best_index(self):
        hyps = ["a b", "a b", "z q", "a c"]
        base = select_best(passes(*hyps))
        permuted = ["z q", "a c", "a b", "a b"]
        moved = select_best(passes(*permuted))
        assert base.best_hypothesis == moved.best_hypothesis == "a b"
        assert moved.best_index == 2  # first occurrence in the permuted order

    def test_randomized_oracle_equivalence(self):
        rng = random.Random(17)
        vocab = ["a", "b", "c"]
        for _ in range(400):
            count = rng.randint(2, 6)
            hyps = [
                " ".join(rng.choice(vocab) for _ in range(rng.randint(0, 4)))
                for _ in range(count)
            ]
            result = select_best(passes(*hyps))
            best, dispersion, wer_list = oracle_consensus([tokenize(h) for h in hyps])
            assert result.best_index == best
            assert result.dispersion == pytest.approx(dispersion, abs=1e-12)
            assert list(eu_pairwise(passes(*hyps)).per_pass_wers) == wer_list
