"""Deterministic synthetic speech corpora for simulator experiments.

Utterance payloads are the reference texts themselves (the simulator's
noisy channel corrupts them), accents follow a Zipf-skewed frequency
distribution, and base error rates ramp up for rarer accents so that
uncertainty-driven selection has real structure to find. All constants
here are artifact plumbing, not values from any publication.
"""

from __future__ import annotations

import argparse
import random
from bisect import bisect_right
from itertools import accumulate
from typing import Sequence

from .manifest import Utterance, write_manifest

DEFAULT_ACCENT_COUNT = 12
DEFAULT_VOCAB_SIZE = 48
DOMAIN_WEIGHTS = (("general", 0.40), ("clinical", 0.40), ("both-eligible", 0.20))


def synthetic_accents(count: int = DEFAULT_ACCENT_COUNT) -> list[str]:
    return [f"ac{i:02d}" for i in range(1, count + 1)]


def zipf_weights(count: int) -> list[float]:
    weights = [1.0 / rank for rank in range(1, count + 1)]
    total = sum(weights)
    return [w / total for w in weights]


def synthetic_base_rates(
    accents: Sequence[str], low: float = 0.10, high: float = 0.76
) -> dict[str, float]:
    """Error rates ramping from `low` (most frequent accent) to `high`
    (rarest), so rare accents are also the hard ones."""
    if len(accents) == 1:
        return {accents[0]: low}
    step = (high - low) / (len(accents) - 1)
    return {accent: low + i * step for i, accent in enumerate(accents)}


def make_synthetic_corpus(
    count: int = 2000,
    accent_count: int = DEFAULT_ACCENT_COUNT,
    seed: int = 0,
    vocab_size: int = DEFAULT_VOCAB_SIZE,
    min_words: int = 5,
    max_words: int = 10,
) -> list[Utterance]:
    """Seeded corpus; a pure function of its arguments."""
    if count < 1:
        raise ValueError("count must be >= 1")
    accents = synthetic_accents(accent_count)
    cumulative = list(accumulate(zipf_weights(accent_count)))
    domain_cumulative = list(accumulate(w for _, w in DOMAIN_WEIGHTS))
    vocab = [f"w{i:02d}" for i in range(1, vocab_size + 1)]
    rng = random.Random(seed)

    utterances = []
    for i in range(count):
        accent = accents[min(bisect_right(cumulative, rng.random()), accent_count - 1)]
        domain = DOMAIN_WEIGHTS[
            min(bisect_right(domain_cumulative, rng.random()), len(DOMAIN_WEIGHTS) - 1)
        ][0]
        n_words = min_words + int(rng.random() * (max_words - min_words + 1))
        words = [vocab[int(rng.random() * vocab_size)] for _ in range(n_words)]
        text = " ".join(words)
        utterances.append(
            Utterance(
                id=f"u{i:05d}",
                payload=text,
                accent=accent,
                domain=domain,
                duration_s=round(0.4 * n_words, 2),
                gold_transcript=text,
            )
        )
    return utterances


def main(argv: Sequence[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="python -m asral.synth", description="Write a synthetic JSONL manifest."
    )
    parser.add_argument("--out", required=True, help="output manifest path")
    parser.add_argument("--count", type=int, default=2000)
    parser.add_argument("--accents", type=int, default=DEFAULT_ACCENT_COUNT)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)
    corpus = make_synthetic_corpus(count=args.count, accent_count=args.accents, seed=args.seed)
    write_manifest(corpus, args.out)
    print(f"wrote {len(corpus)} utterances to {args.out}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
