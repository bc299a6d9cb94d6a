import random

import pytest

from asral.textmetric import (
    EmptyReferenceError,
    edit_distance,
    pairwise_value,
    tokenize,
    wer,
    wer_value,
)

from oracles import oracle_edit_distance


class TestTokenize:
    def test_normalizes_case_and_punctuation(self):
        assert tokenize("The cat sat.") == ["the", "cat", "sat"]

    def test_empty_string(self):
        assert tokenize("") == []

    def test_whitespace_only_splitting(self):
        assert tokenize("  a\tb ") == ["a", "b"]

    def test_interior_punctuation_kept(self):
        assert tokenize("don't stop") == ["don't", "stop"]

    def test_pure_punctuation_token_dropped(self):
        assert tokenize("hello -- world") == ["hello", "world"]

    def test_unicode_punctuation_stripped(self):
        assert tokenize("«bonjour»") == ["bonjour"]

    def test_deterministic(self):
        text = "Some, Mixed: CASE text!"
        assert tokenize(text) == tokenize(text)


class TestWer:
    def test_identity_is_zero(self):
        score = wer(["the", "cat", "sat"], ["the", "cat", "sat"])
        assert score.value == 0.0
        assert (score.substitutions, score.insertions, score.deletions) == (0, 0, 0)

    def test_sub_plus_deletion(self):
        score = wer(["a", "b", "c", "d"], ["a", "x", "c"])
        assert score.value == 0.5
        assert score.substitutions == 1
        assert score.deletions == 1
        assert score.insertions == 0

    def test_value_may_exceed_one(self):
        score = wer(["a"], ["a", "b", "c"])
        assert score.value == 2.0
        assert score.insertions == 2

    def test_empty_hypothesis_all_deletions(self):
        score = wer(["x", "y", "z"], [])
        assert score.value == 1.0
        assert score.deletions == 3

    def test_empty_reference_raises(self):
        with pytest.raises(EmptyReferenceError):
            wer([], ["a"])
        with pytest.raises(EmptyReferenceError):
            wer_value([], [])

    def test_breakdown_prefers_substitutions(self):
        # swapped pair: sub/sub alignment beats the del+match+ins one
        score = wer(["a", "b"], ["b", "a"])
        assert score.substitutions == 2
        assert score.insertions == 0
        assert score.deletions == 0

    def test_breakdown_identities(self):
        rng = random.Random(7)
        vocab = "abcd"
        for _ in range(300):
            ref = [rng.choice(vocab) for _ in range(rng.randint(1, 9))]
            hyp = [rng.choice(vocab) for _ in range(rng.randint(0, 9))]
            score = wer(ref, hyp)
            total = score.substitutions + score.insertions + score.deletions
            assert score.value == total / len(ref)
            assert score.ref_len == len(ref)
            # alignment arithmetic must be consistent with both lengths
            assert score.deletions - score.insertions == len(ref) - len(hyp)
            assert len(hyp) == len(ref) - score.deletions + score.insertions

    def test_matches_oracle_on_random_pairs(self):
        rng = random.Random(11)
        vocab = "abcd"
        for _ in range(500):
            ref = [rng.choice(vocab) for _ in range(rng.randint(1, 8))]
            hyp = [rng.choice(vocab) for _ in range(rng.randint(0, 8))]
            expected = oracle_edit_distance(ref, hyp)
            score = wer(ref, hyp)
            assert score.substitutions + score.insertions + score.deletions == expected
            assert wer_value(ref, hyp) == expected / len(ref)
            assert edit_distance(ref, hyp) == expected

    def test_triangle_like_lower_bound(self):
        rng = random.Random(13)
        for _ in range(200):
            ref = [rng.choice("ab") for _ in range(rng.randint(1, 6))]
            hyp = [rng.choice("ab") for _ in range(rng.randint(0, 6))]
            assert wer_value(ref, hyp) >= abs(len(ref) - len(hyp)) / len(ref)


class TestPairwiseValue:
    def test_empty_reference_sentinels(self):
        assert pairwise_value([], ["a"]) == 1.0
        assert pairwise_value([], []) == 0.0

    def test_non_empty_matches_wer(self):
        assert pairwise_value(["a", "b"], ["a"]) == wer_value(["a", "b"], ["a"])
