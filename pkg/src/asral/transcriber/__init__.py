from .base import (
    AdaptAck,
    PassSet,
    Transcriber,
    derive_pass_seed,
    derive_round_seed,
    mix64,
    utterance_hash,
)
from .client import ExternalTranscriber, TransportError
from .simulator import (
    DEFAULT_CONFUSION_VOCAB,
    SimulatedTranscriber,
    SimulatorConfig,
    simulate_channel,
)

__all__ = [
    "AdaptAck",
    "PassSet",
    "Transcriber",
    "derive_pass_seed",
    "derive_round_seed",
    "mix64",
    "utterance_hash",
    "ExternalTranscriber",
    "TransportError",
    "DEFAULT_CONFUSION_VOCAB",
    "SimulatedTranscriber",
    "SimulatorConfig",
    "simulate_channel",
]
