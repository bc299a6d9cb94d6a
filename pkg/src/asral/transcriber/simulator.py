"""Seeded noisy-channel simulator standing in for a finetunable ASR model.

The simulator treats an utterance's payload as the true word sequence and
corrupts it through a per-accent error rate. Adaptation follows a monotone,
saturating learning curve driven purely by how many train utterances of each
accent the model has been exposed to:

    error_rate(a) = base_rate(a) / (1 + scale * exposure(a) ** exponent)

The curve form is artifact plumbing: it only needs to be monotone
non-increasing in exposure and deterministic.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from ..manifest import DatasetState, Utterance
from ..textmetric import tokenize
from .base import AdaptAck, PassSet, check_passes, derive_pass_seed

# Fixed confusion vocabulary for substituted/inserted words; disjoint from
# typical synthetic-corpus vocabularies so corruption is always an error.
DEFAULT_CONFUSION_VOCAB = (
    "alfa", "bravo", "charlie", "delta", "echo", "foxtrot", "golf", "hotel",
    "india", "juliett", "kilo", "lima", "mike", "november", "oscar", "papa",
    "quebec", "romeo", "sierra", "tango", "uniform", "victor", "whiskey",
    "xray", "yankee", "zulu",
)

# Fractions of the effective error rate going to each corruption kind,
# chosen so expected WER tracks the error rate for small rates.
SUBSTITUTE_FRACTION = 0.6
DELETE_FRACTION = 0.2
INSERT_FRACTION = 0.2


@dataclass(frozen=True)
class SimulatorConfig:
    base_error_rates: Mapping[str, float] = field(default_factory=dict)
    default_base_error: float = 0.3
    learning_scale: float = 0.15
    learning_exponent: float = 1.0
    # additive jitter clamps at zero, so large values put a noise floor
    # under every accent's WER; keep it small relative to base rates
    pass_jitter: float = 0.02
    confusion_vocab: tuple[str, ...] = DEFAULT_CONFUSION_VOCAB

    def __post_init__(self) -> None:
        for accent, rate in self.base_error_rates.items():
            if not 0.0 <= rate <= 1.0:
                raise ValueError(f"base error rate for {accent!r} must be in [0, 1]")
        if not 0.0 <= self.default_base_error <= 1.0:
            raise ValueError("default_base_error must be in [0, 1]")
        if self.learning_scale <= 0:
            raise ValueError("learning_scale must be > 0")
        if not 0.0 < self.learning_exponent <= 1.0:
            raise ValueError("learning_exponent must be in (0, 1]")
        if self.pass_jitter < 0:
            raise ValueError("pass_jitter must be >= 0")
        if not self.confusion_vocab:
            raise ValueError("confusion_vocab must be non-empty")


def simulate_channel(
    gold: Sequence[str],
    error_rate: float,
    pass_seed: int,
    jitter: float = 0.0,
    vocab: Sequence[str] = DEFAULT_CONFUSION_VOCAB,
) -> str:
    """Corrupt a gold token sequence through the seeded noisy channel.

    Per word, independently: substitute with probability 0.6*e', delete with
    0.2*e', and insert a random vocabulary word after it with 0.2*e', where
    e' = clamp(error_rate + jitter * eta, 0, 1) and eta is one seeded
    standard-normal draw for the whole pass. Fully deterministic per
    pass_seed. A zero error rate bypasses the channel entirely (exact gold,
    any seed).
    """
    if not 0.0 <= error_rate <= 1.0:
        raise ValueError("error_rate must be in [0, 1]")
    if error_rate == 0.0:
        return " ".join(gold)
    rng = random.Random(pass_seed)
    eta = rng.normalvariate(0.0, 1.0)
    effective = min(1.0, max(0.0, error_rate + jitter * eta))
    p_sub = SUBSTITUTE_FRACTION * effective
    p_del = (SUBSTITUTE_FRACTION + DELETE_FRACTION) * effective
    p_ins = INSERT_FRACTION * effective
    out: list[str] = []
    for word in gold:
        u = rng.random()
        if u < p_sub:
            out.append(vocab[int(rng.random() * len(vocab))])
        elif u < p_del:
            pass
        else:
            out.append(word)
        if rng.random() < p_ins:
            out.append(vocab[int(rng.random() * len(vocab))])
    return " ".join(out)


class SimulatedTranscriber:
    """Noisy-channel transcriber with exposure-driven per-accent learning."""

    name = "simulator"
    supports_dropout = True

    def __init__(self, utterances: Sequence[Utterance], config: SimulatorConfig | None = None):
        self._config = config or SimulatorConfig()
        self._by_id = {u.id: u for u in utterances}
        self._exposure: dict[str, int] = {}
        self._tokens_cache: dict[str, list[str]] = {}

    @property
    def config(self) -> SimulatorConfig:
        return self._config

    def exposure(self, accent: str) -> int:
        return self._exposure.get(accent, 0)

    def error_rate(self, accent: str) -> float:
        cfg = self._config
        base = cfg.base_error_rates.get(accent, cfg.default_base_error)
        n = self._exposure.get(accent, 0)
        return base / (1.0 + cfg.learning_scale * n**cfg.learning_exponent)

    def transcribe_passes(self, utterance: Utterance, passes: int, run_seed: int) -> PassSet:
        check_passes(passes)
        tokens = self._source_tokens(utterance)
        rate = self.error_rate(utterance.accent)
        hypotheses = tuple(
            simulate_channel(
                tokens,
                rate,
                derive_pass_seed(run_seed, utterance.id, t),
                jitter=self._config.pass_jitter,
                vocab=self._config.confusion_vocab,
            )
            for t in range(passes)
        )
        return PassSet(utterance_id=utterance.id, hypotheses=hypotheses)

    def adapt(
        self,
        new_train_ids: Sequence[str],
        dataset: DatasetState,
        manifest_ref: str | None = None,
    ) -> AdaptAck:
        """Recompute per-accent exposure from the full current train set.

        State depends on train-set totals, not on how many adapt calls
        delivered them, so repeated calls with the same cumulative train set
        are idempotent.
        """
        train_set = set(dataset.train)
        for uid in new_train_ids:
            if uid not in train_set:
                raise ValueError(f"adapt id {uid!r} is not in the train set")
        exposure: dict[str, int] = {}
        for uid in dataset.train:
            utt = self._by_id.get(uid)
            if utt is None:
                raise ValueError(f"train id {uid!r} unknown to the simulator corpus")
            exposure[utt.accent] = exposure.get(utt.accent, 0) + 1
        self._exposure = exposure
        return AdaptAck(adapted=True, backend_name=self.name)

    def _source_tokens(self, utterance: Utterance) -> list[str]:
        cached = self._tokens_cache.get(utterance.id)
        if cached is None:
            cached = tokenize(utterance.payload)
            self._tokens_cache[utterance.id] = cached
        return cached
