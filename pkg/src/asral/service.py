"""HTTP service wrapping the engine.

Each endpoint maps onto one pipeline phase (split / score / select / run /
report / backend check) so partial pipelines are scriptable by any client;
the bundled CLI is one such client. Runs execute synchronously: report file
contents come back in the response, and are additionally written server-side
when the config carries an out_dir.
"""

from __future__ import annotations

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from . import __version__, reporting
from .manifest import ManifestError, split_summary
from .orchestrator import (
    ConfigError,
    RunConfig,
    plan_selection,
    run_adaptation,
    score_pool,
    split_state,
)
from .schemas import (
    BackendCheckRequest,
    BackendCheckResponse,
    HealthResponse,
    ReportRequest,
    ReportResponse,
    RoundSummaryModel,
    RunRequest,
    RunResponse,
    ScoreRequest,
    ScoreResponse,
    SelectionPlanModel,
    SelectRequest,
    SelectResponse,
    SplitRequest,
    SplitResponse,
    UncertaintyRecordModel,
)
from .transcriber import TransportError
from .transcriber.client import ExternalTranscriber

SERVICE_NAME = "asral"


def create_app() -> FastAPI:
    app = FastAPI(title=SERVICE_NAME, version=__version__)

    @app.exception_handler(ConfigError)
    @app.exception_handler(ManifestError)
    async def _validation_error(request: Request, exc: Exception) -> JSONResponse:
        return JSONResponse(status_code=400, content={"detail": str(exc)})

    @app.exception_handler(FileNotFoundError)
    @app.exception_handler(ValueError)
    async def _missing_file(request: Request, exc: Exception) -> JSONResponse:
        return JSONResponse(status_code=400, content={"detail": str(exc)})

    @app.exception_handler(TransportError)
    async def _transport_error(request: Request, exc: Exception) -> JSONResponse:
        return JSONResponse(status_code=502, content={"detail": str(exc)})

    @app.get("/healthz", response_model=HealthResponse)
    def healthz() -> HealthResponse:
        return HealthResponse(status="ok", name=SERVICE_NAME, version=__version__)

    @app.post("/split", response_model=SplitResponse)
    def split(request: SplitRequest) -> SplitResponse:
        cfg = request.config.to_run_config()
        state, corpus = split_state(cfg)
        summary = split_summary(state, corpus)
        return SplitResponse(**summary)

    @app.post("/score", response_model=ScoreResponse)
    def score(request: ScoreRequest) -> ScoreResponse:
        cfg = request.config.to_run_config()
        cfg.validate()
        records, labels = score_pool(cfg, request.mode)
        models = [
            UncertaintyRecordModel(
                utterance_id=r.utterance_id,
                accent=r.accent,
                mode=r.mode,
                eu=r.eu,
                per_pass_wers=list(r.per_pass_wers),
                consensus_label=labels.get(r.utterance_id) if labels else None,
            )
            for r in records
        ]
        return ScoreResponse(
            mode=request.mode,
            records=models,
            scores_csv=reporting.render_uncertainty_records(records, labels),
        )

    @app.post("/select", response_model=SelectResponse)
    def select(request: SelectRequest) -> SelectResponse:
        cfg = request.config.to_run_config()
        cfg.validate()
        plan = plan_selection(cfg)
        return SelectResponse(
            plan=SelectionPlanModel(
                strategy=plan.strategy,
                k=plan.k,
                selected=list(plan.selected),
                scores=plan.scores,
                consensus_labels=plan.consensus_labels,
            )
        )

    @app.post("/run", response_model=RunResponse)
    def run(request: RunRequest) -> RunResponse:
        cfg = request.config.to_run_config()
        result = run_adaptation(cfg)
        rounds = [
            RoundSummaryModel(
                round_index=r.round_index,
                phase=r.phase,
                strategy=r.strategy,
                post_train_size=r.post_train_size,
                post_pool_size=r.post_pool_size,
                budget_fraction_used=r.budget_fraction_used,
                test_wer=r.evaluation.test_wer,
                test_wer_mc_mean=r.evaluation.test_wer_mc_mean,
                n_selected=r.n_selected,
                n_truncated=r.n_truncated,
                pool_exhausted=r.pool_exhausted,
                adapt_acknowledged=r.adapt_acknowledged,
            )
            for r in result.reports
        ]
        files = {
            "rounds.csv": reporting.render_round_reports(result.reports),
            "accent_series.csv": reporting.render_accent_series(
                result.reports, list(result.hard_accents)
            ),
            "round_reports.json": reporting.render_round_reports_json(result.reports),
        }
        return RunResponse(
            rounds=rounds,
            hard_accents=list(result.hard_accents),
            backend_name=result.backend_name,
            backend_supports_dropout=result.backend_supports_dropout,
            effective_config=result.effective_config,
            wall_times_s=[r.wall_time_s for r in result.reports],
            files=files,
        )

    @app.post("/report", response_model=ReportResponse)
    def report(request: ReportRequest) -> ReportResponse:
        raw = request.round_reports
        if "reports" not in raw:
            raise ConfigError("round_reports payload must contain a 'reports' list")
        reports = [reporting.report_from_dict(r) for r in raw["reports"]]
        hard_accents = request.hard_accents
        if hard_accents is None:
            hard_accents = list(reports[-1].hard_accents) if reports else []
        return ReportResponse(
            files={
                "rounds.csv": reporting.render_round_reports(reports),
                "accent_series.csv": reporting.render_accent_series(reports, hard_accents),
            }
        )

    @app.post("/backend/check", response_model=BackendCheckResponse)
    def backend_check(request: BackendCheckRequest) -> BackendCheckResponse:
        client = ExternalTranscriber(request.endpoint)
        try:
            return BackendCheckResponse(
                backend_name=client.name, supports_dropout=client.supports_dropout
            )
        finally:
            client.close()

    return app


app = create_app()
