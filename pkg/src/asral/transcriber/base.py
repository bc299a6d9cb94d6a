"""Stochastic-transcriber contract shared by the simulator and wire client.

A transcriber produces T hypothesis transcripts per utterance, one per
stochastic pass, and can be adapted on the current train set. All outputs
are pure functions of (model state, inputs, seeds): the per-pass seed is the
only source of within-utterance variation.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from typing import Protocol, Sequence, runtime_checkable

from ..manifest import DatasetState, Utterance

_M64 = (1 << 64) - 1


@dataclass(frozen=True)
class PassSet:
    """The ordered hypotheses of one utterance, index t == pass t."""

    utterance_id: str
    hypotheses: tuple[str, ...]

    def __post_init__(self) -> None:
        if len(self.hypotheses) < 1:
            raise ValueError("PassSet requires at least one hypothesis")


@dataclass(frozen=True)
class AdaptAck:
    adapted: bool
    backend_name: str


@runtime_checkable
class Transcriber(Protocol):
    name: str
    supports_dropout: bool

    def transcribe_passes(self, utterance: Utterance, passes: int, run_seed: int) -> PassSet:
        ...

    def adapt(
        self,
        new_train_ids: Sequence[str],
        dataset: DatasetState,
        manifest_ref: str | None = None,
    ) -> AdaptAck:
        ...


def mix64(x: int) -> int:
    """splitmix64 finalizer; the 64-bit mixing primitive for all seeds."""
    x = (x + 0x9E3779B97F4A7C15) & _M64
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _M64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _M64
    return z ^ (z >> 31)


def utterance_hash(utterance_id: str) -> int:
    return int.from_bytes(
        hashlib.blake2b(utterance_id.encode("utf-8"), digest_size=8).digest(), "big"
    )


def derive_pass_seed(run_seed: int, utterance_id: str, pass_index: int) -> int:
    """64-bit pass seed; pure function of its arguments.

    Independent of iteration order and worker count, so a pass can be
    recomputed anywhere and yield the identical hypothesis.
    """
    if pass_index < 0:
        raise ValueError("pass_index must be >= 0")
    x = mix64(run_seed & _M64)
    x = mix64(x ^ utterance_hash(utterance_id))
    return mix64(x ^ pass_index)


def derive_round_seed(run_seed: int, round_index: int) -> int:
    # Domain-separated from pass seeds by the tag constant.
    return mix64(mix64((run_seed & _M64) ^ 0xB10C5EEDB10C5EED) ^ round_index)


def check_passes(passes: int) -> None:
    if passes < 2:
        raise ValueError("at least 2 stochastic passes are required")
