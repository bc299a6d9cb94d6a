"""Command-line client for the engine service.

The CLI always speaks the HTTP API: against an in-process application by
default, or against a remote instance when --server is given. Exit codes:
0 success, 1 validation error, 2 runtime error. Diagnostics go to stderr;
reports go to the configured sinks.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from typing import Any, Sequence

import httpx

from . import reporting

VALID_STRATEGIES = ("random", "eu_most", "al_eu_most")
VALID_BACKENDS = ("sim", "external")

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_RUNTIME = 2


class CliValidationError(Exception):
    pass


class CliRuntimeError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # type: ignore[override]
        raise CliValidationError(message)


class ServiceClient:
    """Thin HTTP client; in-process ASGI transport unless --server is set."""

    def __init__(self, server: str | None):
        if server:
            self._client = httpx.Client(base_url=server, timeout=600.0)
        else:
            import warnings

            with warnings.catch_warnings():
                # starlette's test transport warns about its httpx pin;
                # irrelevant noise for CLI users
                warnings.simplefilter("ignore")
                from fastapi.testclient import TestClient

            from .service import create_app

            self._client = TestClient(create_app(), raise_server_exceptions=False)

    def post(self, path: str, payload: dict) -> dict:
        try:
            response = self._client.post(path, json=payload)
        except httpx.HTTPError as exc:
            raise CliRuntimeError(f"cannot reach service: {exc}") from exc
        if response.status_code in (400, 422):
            raise CliValidationError(_detail(response))
        if response.status_code >= 500 or response.status_code == 502:
            raise CliRuntimeError(_detail(response))
        return response.json()

    def close(self) -> None:
        self._client.close()


def _detail(response: httpx.Response) -> str:
    try:
        body = response.json()
    except ValueError:
        return f"service returned {response.status_code}"
    detail = body.get("detail", body)
    if isinstance(detail, str):
        return detail
    return json.dumps(detail)


def build_parser() -> _Parser:
    parser = _Parser(prog="asral", description="Uncertainty-driven data selection for ASR.")
    sub = parser.add_subparsers(dest="verb", required=True)

    def common(p: _Parser) -> None:
        p.add_argument("--config", help="JSON key-value config file")
        p.add_argument("--manifest", help="JSONL manifest path")
        p.add_argument("--seed", type=int)
        p.add_argument("--strategy", choices=VALID_STRATEGIES)
        p.add_argument("--rounds", type=int)
        p.add_argument("--passes", type=int)
        p.add_argument("--top-k", dest="top_k", type=int)
        p.add_argument("--backend", choices=VALID_BACKENDS)
        p.add_argument("--endpoint", help="external backend endpoint (host:port or unix:/path)")
        p.add_argument("--out-dir", dest="out_dir")
        p.add_argument("--workers", type=int)
        p.add_argument("--domain", choices=("general", "clinical", "both"))
        p.add_argument("--server", help="remote service URL (default: in-process)")

    common(sub.add_parser("split", help="load a manifest and report the split"))
    score = sub.add_parser("score", help="score the pool without acquiring")
    common(score)
    score.add_argument("--mode", choices=("supervised", "pairwise"), default="supervised")
    common(sub.add_parser("select", help="produce one round's selection plan"))
    common(sub.add_parser("run", help="run the full multi-round adaptation"))

    report = sub.add_parser("report", help="re-emit CSV tables from round_reports.json")
    report.add_argument("--reports", required=True, help="path to round_reports.json")
    report.add_argument("--out-dir", dest="out_dir", required=True)
    report.add_argument("--hard-accents", help="comma-separated accent list")
    report.add_argument("--server")

    check = sub.add_parser("check-backend", help="ping a protocol backend")
    check.add_argument("--endpoint", required=True)
    check.add_argument("--server")

    return parser


def effective_config(args: argparse.Namespace) -> dict:
    """Config file merged with CLI overrides; overrides win."""
    config: dict[str, Any] = {}
    if args.config:
        if not os.path.exists(args.config):
            raise CliValidationError(f"config file not found: {args.config}")
        with open(args.config, "r", encoding="utf-8") as fin:
            try:
                config = json.load(fin)
            except json.JSONDecodeError as exc:
                raise CliValidationError(f"config file is not valid JSON: {exc}") from exc
        if not isinstance(config, dict):
            raise CliValidationError("config file must hold a JSON object")
    for key in (
        "manifest",
        "seed",
        "strategy",
        "rounds",
        "passes",
        "top_k",
        "backend",
        "endpoint",
        "workers",
        "domain",
    ):
        value = getattr(args, key, None)
        if value is not None:
            config[key] = value
    return config


def _write(path: str, content: str) -> None:
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fout:
        fout.write(content)


def cmd_split(args: argparse.Namespace, client: ServiceClient) -> int:
    response = client.post("/split", {"config": effective_config(args)})
    text = json.dumps(response, indent=2, sort_keys=True)
    if args.out_dir:
        _write(os.path.join(args.out_dir, "split.json"), text + "\n")
        print(os.path.join(args.out_dir, "split.json"))
    else:
        print(text)
    return EXIT_OK


def cmd_score(args: argparse.Namespace, client: ServiceClient) -> int:
    response = client.post("/score", {"config": effective_config(args), "mode": args.mode})
    if args.out_dir:
        path = os.path.join(args.out_dir, "scores.csv")
        _write(path, response["scores_csv"])
        print(path)
    else:
        sys.stdout.write(response["scores_csv"])
    return EXIT_OK


def cmd_select(args: argparse.Namespace, client: ServiceClient) -> int:
    response = client.post("/select", {"config": effective_config(args)})
    text = json.dumps(response["plan"], indent=2, sort_keys=True)
    if args.out_dir:
        path = os.path.join(args.out_dir, "selection.json")
        _write(path, text + "\n")
        print(path)
    else:
        print(text)
    return EXIT_OK


def cmd_run(args: argparse.Namespace, client: ServiceClient) -> int:
    config = effective_config(args)
    # the client owns the sinks: files come back in the response
    config.pop("out_dir", None)
    response = client.post("/run", {"config": config})
    for round_summary in response["rounds"]:
        print(
            "round {round_index} ({phase}): train={post_train_size} "
            "pool={post_pool_size} test_wer={test_wer:.6f} selected={n_selected}".format(
                **{**round_summary, "test_wer": round_summary["test_wer"] or 0.0}
            )
        )
    if args.out_dir:
        for name, content in response["files"].items():
            _write(os.path.join(args.out_dir, name), content)
        reporting.emit_run_metadata(
            effective_config=response["effective_config"],
            backend_name=response["backend_name"],
            backend_supports_dropout=response["backend_supports_dropout"],
            wall_times_s=response["wall_times_s"],
            path=os.path.join(args.out_dir, "run_metadata.json"),
        )
        print(f"reports written to {args.out_dir}")
    return EXIT_OK


def cmd_report(args: argparse.Namespace, client: ServiceClient) -> int:
    if not os.path.exists(args.reports):
        raise CliValidationError(f"reports file not found: {args.reports}")
    with open(args.reports, "r", encoding="utf-8") as fin:
        payload = json.load(fin)
    hard_accents = None
    if args.hard_accents:
        hard_accents = [a.strip() for a in args.hard_accents.split(",") if a.strip()]
    response = client.post(
        "/report", {"round_reports": payload, "hard_accents": hard_accents}
    )
    for name, content in response["files"].items():
        _write(os.path.join(args.out_dir, name), content)
    print(f"reports written to {args.out_dir}")
    return EXIT_OK


def cmd_check_backend(args: argparse.Namespace, client: ServiceClient) -> int:
    response = client.post("/backend/check", {"endpoint": args.endpoint})
    print(
        f"backend={response['backend_name']} "
        f"supports_dropout={str(response['supports_dropout']).lower()}"
    )
    return EXIT_OK


_COMMANDS = {
    "split": cmd_split,
    "score": cmd_score,
    "select": cmd_select,
    "run": cmd_run,
    "report": cmd_report,
    "check-backend": cmd_check_backend,
}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        client = ServiceClient(getattr(args, "server", None))
        try:
            return _COMMANDS[args.verb](args, client)
        finally:
            client.close()
    except CliValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except CliRuntimeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    raise SystemExit(main())
