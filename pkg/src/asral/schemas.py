"""Pydantic request/response models for the HTTP service.

The run configuration model accepts unknown keys (finetuning
hyper-parameters like attention_dropout or learning_rate) and passes them
through to the engine's backend options rather than rejecting them.
"""

from __future__ import annotations

import os
from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field

from .orchestrator import RunConfig


class RunConfigModel(BaseModel):
    model_config = ConfigDict(extra="allow")

    manifest: Optional[str] = None
    strategy: Literal["random", "eu_most", "al_eu_most"] = "eu_most"
    rounds: int = Field(default=3, ge=1)
    passes: int = Field(default=10, ge=2)
    top_k: int = Field(default=100, ge=0)
    train_fraction: float = Field(default=0.30, gt=0, lt=1)
    budget_cap_fraction: float = Field(default=0.65, gt=0, le=1)
    val_fraction: float = Field(default=0.0, ge=0, lt=1)
    test_fraction: float = Field(default=0.0, ge=0, lt=1)
    seed: int = 0
    domain: Literal["general", "clinical", "both"] = "both"
    stratify_by: Optional[Literal["accent", "domain"]] = None
    hard_accent_policy: Literal["frequency", "round0_eu"] = "frequency"
    hard_accent_count: int = Field(default=10, ge=1)
    backend: Literal["sim", "external"] = "sim"
    endpoint: Optional[str] = None
    simulator: dict = Field(default_factory=dict)
    out_dir: Optional[str] = None
    workers: int = Field(default_factory=lambda: os.cpu_count() or 1, ge=1)
    backend_options: dict = Field(default_factory=dict)

    def to_run_config(self) -> RunConfig:
        data = self.model_dump()
        extras = self.model_extra or {}
        data.update(extras)
        return RunConfig.from_dict(data)


class SplitRequest(BaseModel):
    config: RunConfigModel


class SplitResponse(BaseModel):
    original_train_size: int
    budget_cap_fraction: float
    max_train_size: int
    splits: dict


class ScoreRequest(BaseModel):
    config: RunConfigModel
    mode: Literal["supervised", "pairwise"] = "supervised"


class UncertaintyRecordModel(BaseModel):
    utterance_id: str
    accent: str
    mode: str
    eu: float
    per_pass_wers: list[float]
    consensus_label: Optional[str] = None


class ScoreResponse(BaseModel):
    mode: str
    records: list[UncertaintyRecordModel]
    scores_csv: str


class SelectRequest(BaseModel):
    config: RunConfigModel


class SelectionPlanModel(BaseModel):
    strategy: str
    k: int
    selected: list[str]
    scores: Optional[dict[str, float]] = None
    consensus_labels: Optional[dict[str, str]] = None


class SelectResponse(BaseModel):
    plan: SelectionPlanModel


class RunRequest(BaseModel):
    config: RunConfigModel


class RoundSummaryModel(BaseModel):
    round_index: int
    phase: str
    strategy: str
    post_train_size: int
    post_pool_size: int
    budget_fraction_used: float
    test_wer: Optional[float]
    test_wer_mc_mean: Optional[float]
    n_selected: int
    n_truncated: int
    pool_exhausted: bool
    adapt_acknowledged: bool


class RunResponse(BaseModel):
    rounds: list[RoundSummaryModel]
    hard_accents: list[str]
    backend_name: str
    backend_supports_dropout: bool
    effective_config: dict
    wall_times_s: list[float]
    files: dict[str, str]


class ReportRequest(BaseModel):
    """Re-emit CSV tables from a previously produced round_reports.json."""

    round_reports: dict
    hard_accents: Optional[list[str]] = None


class ReportResponse(BaseModel):
    files: dict[str, str]


class BackendCheckRequest(BaseModel):
    endpoint: str


class BackendCheckResponse(BaseModel):
    backend_name: str
    supports_dropout: bool


class HealthResponse(BaseModel):
    status: str
    name: str
    version: str
