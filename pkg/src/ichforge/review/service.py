"""HTTP surface of the review loop, /api/v1, JSON in and out."""

from __future__ import annotations

import json
import os
from pathlib import Path

from fastapi import Depends, FastAPI, Request
from fastapi.responses import JSONResponse, StreamingResponse
from fastapi.staticfiles import StaticFiles

from ichforge.instruct import ReviewState, TaskKind, sample_to_record
from ichforge.review.store import (
    DecisionAction,
    ReviewDecision,
    ReviewError,
    ReviewStore,
)

STATE_NAMES = {state.value.lower(): state for state in ReviewState}


def _error_response(status: int, code: str, message: str) -> JSONResponse:
    return JSONResponse(
        status_code=status, content={"error": {"code": code, "message": message}}
    )


_STATUS_BY_CODE = {
    "bad_request": 400,
    "validation": 422,
    "unauthorized": 401,
    "not_found": 404,
    "conflict": 409,
}


def create_app(
    store: ReviewStore,
    token: str | None = None,
    ui_dir: str | Path | None = None,
) -> FastAPI:
    app = FastAPI(title="ichforge review service")

    async def require_token(request: Request) -> None:
        if token is None:
            return
        header = request.headers.get("authorization", "")
        if header != f"Bearer {token}":
            raise ReviewError("unauthorized", "missing or invalid bearer token")

    @app.exception_handler(ReviewError)
    async def handle_review_error(_request: Request, exc: ReviewError) -> JSONResponse:
        return _error_response(_STATUS_BY_CODE.get(exc.code, 400), exc.code, exc.message)

    def _sample_payload(sample) -> dict:
        record = sample_to_record(sample)
        snippet = store.source_snippet(sample)
        if snippet is not None:
            record["source_snippet"] = snippet
        return record

    @app.get("/api/v1/samples", dependencies=[Depends(require_token)])
    async def list_samples(
        state: str = "pending",
        task: str | None = None,
        page: int = 0,
        page_size: int = 50,
    ):
        state_value = STATE_NAMES.get(state.lower())
        if state_value is None:
            raise ReviewError("bad_request", f"unknown state {state!r}")
        task_value = None
        if task:
            try:
                task_value = TaskKind.from_name(task)
            except ValueError as exc:
                raise ReviewError("bad_request", str(exc)) from exc
        items, total = store.list_samples(state_value, task_value, page, page_size)
        return {
            "items": [_sample_payload(s) for s in items],
            "page": page,
            "page_size": page_size,
            "total": total,
        }

    @app.post("/api/v1/decisions", dependencies=[Depends(require_token)])
    async def submit_decision(request: Request):
        try:
            body = await request.json()
        except json.JSONDecodeError as exc:
            raise ReviewError("bad_request", "request body is not valid JSON") from exc
        if not isinstance(body, dict) or "sample_id" not in body or "action" not in body:
            raise ReviewError("bad_request", "body needs sample_id and action")
        decision = ReviewDecision(
            sample_id=str(body["sample_id"]),
            action=DecisionAction.from_name(str(body["action"])),
            reviewer=str(body.get("reviewer", "")),
            edited_output=body.get("edited_output"),
        )
        sample = store.submit_decision(decision)
        return {"sample": _sample_payload(sample)}

    @app.get("/api/v1/stats", dependencies=[Depends(require_token)])
    async def stats():
        snapshot = store.stats()
        return {
            "pending": snapshot.pending,
            "accepted": snapshot.accepted,
            "edited": snapshot.edited,
            "rejected": snapshot.rejected,
            "total": snapshot.total,
        }

    @app.get("/api/v1/export", dependencies=[Depends(require_token)])
    async def export(states: str = "accepted,edited"):
        parsed: set[ReviewState] = set()
        for name in states.split(","):
            name = name.strip().lower()
            if not name:
                continue
            state = STATE_NAMES.get(name)
            if state is None:
                raise ReviewError("bad_request", f"unknown state {name!r}")
            parsed.add(state)

        def stream():
            for record in store.export_records(parsed):
                yield json.dumps(record, ensure_ascii=False) + "\n"

        return StreamingResponse(stream(), media_type="application/x-ndjson")

    if ui_dir:
        app.mount("/", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    return app


def serve(
    store_path: str | Path,
    log_path: str | Path,
    port: int = 8787,
    host: str = "127.0.0.1",
    corpus_path: str | Path | None = None,
    ui_dir: str | Path | None = None,
) -> None:
    """Blocking entry point used by the CLI."""
    import uvicorn

    store = ReviewStore.from_files(store_path, log_path, corpus_path)
    token = os.environ.get("FORGE_REVIEW_TOKEN") or None
    app = create_app(store, token=token, ui_dir=ui_dir)
    uvicorn.run(app, host=host, port=port, log_level="warning")
