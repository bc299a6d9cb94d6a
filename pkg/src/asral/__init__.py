"""Uncertainty-driven active-learning engine for speech transcription."""

__version__ = "0.1.0"

from .consensus import ConsensusResult, select_best
from .manifest import (
    AcquireResult,
    DatasetState,
    ManifestError,
    Utterance,
    acquire,
    initial_split,
    load_manifest,
    split_summary,
    write_manifest,
)
from .orchestrator import ConfigError, RoundReport, RunConfig, RunResult, run_adaptation
from .strategy import SelectionPlan, select_al_eu_most, select_eu_most, select_random
from .textmetric import EmptyReferenceError, WerScore, tokenize, wer, wer_value
from .transcriber import (
    AdaptAck,
    ExternalTranscriber,
    PassSet,
    SimulatedTranscriber,
    SimulatorConfig,
    TransportError,
    derive_pass_seed,
    simulate_channel,
)
from .uncertainty import UncertaintyRecord, eu_pairwise, eu_supervised, population_std, u_wer

__all__ = [
    "__version__",
    "ConsensusResult",
    "select_best",
    "AcquireResult",
    "DatasetState",
    "ManifestError",
    "Utterance",
    "acquire",
    "initial_split",
    "load_manifest",
    "split_summary",
    "write_manifest",
    "ConfigError",
    "RoundReport",
    "RunConfig",
    "RunResult",
    "run_adaptation",
    "SelectionPlan",
    "select_al_eu_most",
    "select_eu_most",
    "select_random",
    "EmptyReferenceError",
    "WerScore",
    "tokenize",
    "wer",
    "wer_value",
    "AdaptAck",
    "ExternalTranscriber",
    "PassSet",
    "SimulatedTranscriber",
    "SimulatorConfig",
    "TransportError",
    "derive_pass_seed",
    "simulate_channel",
    "UncertaintyRecord",
    "eu_pairwise",
    "eu_supervised",
    "population_std",
    "u_wer",
]
