"""HTTP front door: session lifecycle, turns, world snapshots, and a
server-push event stream the web console tails.

Each created session gets its own world, log, and scripted-rule state, so
concurrent console sessions never share state.
"""

from __future__ import annotations

from contextlib import asynccontextmanager
from dataclasses import replace
from pathlib import Path

from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import StreamingResponse
from pydantic import BaseModel

from .core import RosterError
from .scenario import load_scenario
from .session import ConfigError, Session, SessionClosedError, create_session
from .wire import canonical_json

STREAM_POLL_S = 0.5


class CreateSessionBody(BaseModel):
    threshold: float | None = None
    fallback: str | None = None
    retry_cap: int | None = None
    time_dilation: float | None = None
    seed: int | None = None
    external_scenes: bool | None = None


class UtteranceBody(BaseModel):
    text: str
    addressee: str | None = None


def create_app(
    scenario_path: str | Path,
    time_dilation: float | None = None,
    backend: str | None = None,
) -> FastAPI:
    """Build the service around one scenario's config. The scenario's script
    is ignored here; the console drives the conversation."""
    base_config = load_scenario(scenario_path).config
    if time_dilation is not None:
        base_config = replace(base_config, time_dilation=time_dilation)
    if backend is not None:
        base_config = replace(base_config, backend=replace(base_config.backend, kind=backend))

    @asynccontextmanager
    async def lifespan(app: FastAPI):
        yield
        for session in app.state.sessions.values():
            session.close()

    app = FastAPI(title="cohort runtime", lifespan=lifespan)
    # The console may be served from a static host or file, so the API
    # answers cross-origin requests. There is no credential to protect.
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    app.state.sessions = {}
    app.state.base_config = base_config

    def _session(session_id: str) -> Session:
        session = app.state.sessions.get(session_id)
        if session is None:
            raise HTTPException(status_code=404, detail=f"unknown session {session_id!r}")
        return session

    @app.post("/api/sessions")
    def create(body: CreateSessionBody | None = None) -> dict:
        config = app.state.base_config
        config = replace(config, session_id=None, log_path=None)
        if body is not None:
            overrides = {k: v for k, v in body.model_dump().items() if v is not None}
            if "fallback" in overrides:
                from .coordinator import FallbackMode

                try:
                    overrides["fallback"] = FallbackMode(overrides["fallback"])
                except ValueError as exc:
                    raise HTTPException(status_code=400, detail=str(exc)) from exc
            config = replace(config, **overrides)
        try:
            session = create_session(config)
        except ConfigError as exc:
            raise HTTPException(status_code=400, detail=[list(issue) for issue in exc.issues]) from exc
        app.state.sessions[session.id] = session
        return {"session_id": session.id}

    @app.post("/api/sessions/{session_id}/utterance")
    def utterance(session_id: str, body: UtteranceBody) -> dict:
        session = _session(session_id)
        try:
            record = session.post_utterance(body.text, body.addressee)
        except SessionClosedError as exc:
            raise HTTPException(status_code=409, detail=str(exc)) from exc
        except (RosterError, ValueError) as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        return record.to_dict()

    @app.get("/api/sessions/{session_id}/world")
    def world(session_id: str) -> dict:
        return _session(session_id).world.to_dict()

    @app.get("/api/sessions/{session_id}/events")
    def events(session_id: str, from_seq: int = 0, max_events: int | None = None):
        """Server-push stream of EventRecords from ``from_seq`` onward. The
        stream stays open for live sessions; ``max_events`` bounds it for
        clients that want a finite read."""
        session = _session(session_id)

        def stream():
            cursor = max(0, from_seq)
            sent = 0
            while max_events is None or sent < max_events:
                batch = session.wait_events(cursor, timeout=STREAM_POLL_S)
                if batch:
                    for record in batch:
                        yield f"id: {record.seq}\ndata: {canonical_json(record.to_dict())}\n\n"
                        sent += 1
                        if max_events is not None and sent >= max_events:
                            return
                    cursor = batch[-1].seq + 1
                elif session.closed:
                    return
                else:
                    yield ": keep-alive\n\n"

        return StreamingResponse(stream(), media_type="text/event-stream")

    return app
