import pytest

from asral.manifest import Utterance
from asral.strategy import (
    SelectionPlan,
    select_al_eu_most,
    select_eu_most,
    select_random,
)
from asral.transcriber import AdaptAck, PassSet, SimulatedTranscriber, SimulatorConfig


class FakeModel:
    """Deterministic transcriber returning canned hypotheses per utterance."""

    name = "fake"
    supports_dropout = True

    def __init__(self, hypotheses_by_id):
        self._hyps = hypotheses_by_id

    def transcribe_passes(self, utterance, passes, run_seed):
        hyps = self._hyps[utterance.id]
        assert len(hyps) == passes
        return PassSet(utterance_id=utterance.id, hypotheses=tuple(hyps))

    def adapt(self, new_train_ids, dataset, manifest_ref=None):
        return AdaptAck(adapted=True, backend_name=self.name)


def utt(uid, accent="yoruba", text="a b"):
    return Utterance(id=uid, payload=text, accent=accent, gold_transcript=text)


class TestSelectRandom:
    def test_k_equals_pool_takes_everything(self):
        plan = select_random(["a", "b", "c", "d", "e"], 5, seed=3)
        assert sorted(plan.selected) == ["a", "b", "c", "d", "e"]
        assert len(plan.selected) == 5

    def test_same_seed_reproduces(self):
        pool = [f"u{i}" for i in range(100)]
        assert select_random(pool, 10, seed=7) == select_random(pool, 10, seed=7)

    def test_k_zero_empty(self):
        assert select_random(["a", "b"], 0, seed=1).selected == ()

    def test_k_beyond_pool_returns_pool(self):
        plan = select_random(["a", "b"], 10, seed=1)
        assert sorted(plan.selected) == ["a", "b"]

    def test_no_scores_attached(self):
        assert select_random(["a"], 1, seed=0).scores is None

    def test_negative_k_rejected(self):
        with pytest.raises(ValueError):
            select_random(["a"], -1, seed=0)

    def test_draws_are_unbiasedish(self):
        pool = [f"u{i}" for i in range(10)]
        first_counts = {uid: 0 for uid in pool}
        for seed in range(500):
            first_counts[select_random(pool, 1, seed=seed).selected[0]] += 1
        assert max(first_counts.values()) < 3 * min(first_counts.values())


class TestSelectEuMost:
    def tie_setup(self):
        pool = [utt("u1"), utt("u2"), utt("u3")]
        model = FakeModel(
            {
                "u1": ["a b", "x y"],  # f = [0, 1] -> eu 0.5
                "u2": ["a b", "a b"],  # eu 0
                "u3": ["a b", "x y"],  # eu 0.5, ties with u1
            }
        )
        return pool, model

    def test_tie_broken_by_id(self):
        pool, model = self.tie_setup()
        plan = select_eu_most(pool, model, passes=2, run_seed=0, k=2)
        assert plan.selected == ("u1", "u3")

    def test_k_at_least_pool_returns_all_sorted_by_score(self):
        pool, model = self.tie_setup()
        plan = select_eu_most(pool, model, passes=2, run_seed=0, k=10)
        assert plan.selected == ("u1", "u3", "u2")

    def test_missing_gold_rejected(self):
        pool = [Utterance(id="u1", payload="a b", accent="x")]
        with pytest.raises(ValueError, match="gold"):
            select_eu_most(pool, FakeModel({}), passes=2, run_seed=0, k=1)

    def test_selected_scores_dominate_rest(self):
        corpus = [
            utt(f"u{i:03d}", accent="hard" if i % 3 == 0 else "easy",
                text="one two three four five six")
            for i in range(40)
        ]
        model = SimulatedTranscriber(
            corpus,
            SimulatorConfig(
                base_error_rates={"hard": 0.7, "easy": 0.05}, pass_jitter=0.05
            ),
        )
        plan = select_eu_most(corpus, model, passes=6, run_seed=11, k=12)
        inside = min(plan.scores[uid] for uid in plan.selected)
        outside = max(
            plan.scores[uid] for uid in plan.scores if uid not in plan.selected
        )
        assert inside >= outside

    def test_high_noise_accent_dominates_selection(self):
        corpus = [
            utt(f"u{i:03d}", accent="hard" if i % 4 == 0 else "easy",
                text="one two three four five six")
            for i in range(80)
        ]
        model = SimulatedTranscriber(
            corpus,
            SimulatorConfig(base_error_rates={"hard": 0.8, "easy": 0.05}),
        )
        plan = select_eu_most(corpus, model, passes=8, run_seed=5, k=20)
        by_id = {u.id: u for u in corpus}
        hard_share = sum(1 for uid in plan.selected if by_id[uid].accent == "hard") / 20
        assert hard_share > 0.5  # 'hard' is only 25% of the pool

    def test_rank_invariance_under_monotone_transform(self):
        pool, model = self.tie_setup()
        plan = select_eu_most(pool, model, passes=2, run_seed=0, k=2)
        transformed = {uid: 3.0 * s**3 + 1.0 for uid, s in plan.scores.items()}
        reranked = sorted(transformed.items(), key=lambda kv: (-kv[1], kv[0]))
        assert tuple(uid for uid, _ in reranked[:2]) == plan.selected

    def test_worker_count_does_not_change_plan(self):
        corpus = [
            utt(f"u{i:03d}", text="one two three four five") for i in range(30)
        ]
        model = SimulatedTranscriber(corpus, SimulatorConfig(default_base_error=0.4))
        single = select_eu_most(corpus, model, passes=4, run_seed=2, k=7, workers=1)
        multi = select_eu_most(corpus, model, passes=4, run_seed=2, k=7, workers=4)
        assert single == multi


class TestSelectAlEuMost:
    def test_most_inconsistent_wins(self):
        pool = [utt("u1"), utt("u2"), utt("u3")]
        model = FakeModel(
            {
                "u1": ["a b", "a b", "a b"],
                "u2": ["a b", "completely different words", "third thing entirely"],
                "u3": ["a b", "a b", "a b"],
            }
        )
        plan = select_al_eu_most(pool, model, passes=3, run_seed=0, k=1)
        assert plan.selected == ("u2",)

    def test_global_tie_first_k_ids_ascending(self):
        pool = [utt("u3"), utt("u1"), utt("u2")]
        model = FakeModel({uid: ["a b", "a b", "a b"] for uid in ("u1", "u2", "u3")})
        plan = select_al_eu_most(pool, model, passes=3, run_seed=0, k=2)
        assert plan.selected == ("u1", "u2")
        assert all(s == 0.0 for s in plan.scores.values())

    def test_consensus_labels_recorded_for_all_scored(self):
        pool = [utt("u1"), utt("u2")]
        model = FakeModel(
            {
                "u1": ["x y", "x y", "x z"],
                "u2": ["q", "q", "q"],
            }
        )
        plan = select_al_eu_most(pool, model, passes=3, run_seed=0, k=1)
        assert plan.consensus_labels == {"u1": "x y", "u2": "q"}

    def test_gold_transcripts_ignored(self):
        pool = [Utterance(id="u1", payload="a b", accent="x")]  # no gold at all
        model = FakeModel({"u1": ["a b", "a c"]})
        plan = select_al_eu_most(pool, model, passes=2, run_seed=0, k=1)
        assert plan.selected == ("u1",)

    def test_deterministic_including_labels(self):
        corpus = [utt(f"u{i}", text="one two three four five") for i in range(12)]
        model = SimulatedTranscriber(corpus, SimulatorConfig(default_base_error=0.5))
        a = select_al_eu_most(corpus, model, passes=5, run_seed=9, k=4)
        b = select_al_eu_most(corpus, model, passes=5, run_seed=9, k=4)
        assert a == b
