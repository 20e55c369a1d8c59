"""Local HTTP/JSON service running interactive elicitation sessions.

Session state lives in process memory; mutations are serialized per session.
The companion browser UI consumes exactly this API and can be served from the
same process via a static-files mount.
"""
from __future__ import annotations

import threading
from typing import Literal

from fastapi import FastAPI, HTTPException
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from .elicitation import (
    DEFAULT_ALT_SHARE,
    DEFAULT_RICHEST_SHARE,
    DEFAULT_TOLERANCE,
    DEFAULT_TOTAL,
    ChoiceScenario,
    ElicitationSession,
    Question,
    STATUS_ACTIVE,
)
from .errors import ValidationError


class SessionStore:
    def __init__(self) -> None:
        self._sessions: dict[str, ElicitationSession] = {}
        self._locks: dict[str, threading.Lock] = {}
        self._registry_lock = threading.Lock()

    def add(self, session: ElicitationSession) -> None:
        with self._registry_lock:
            self._sessions[session.session_id] = session
            self._locks[session.session_id] = threading.Lock()

    def get(self, session_id: str) -> ElicitationSession | None:
        with self._registry_lock:
            return self._sessions.get(session_id)

    def lock(self, session_id: str) -> threading.Lock:
        with self._registry_lock:
            return self._locks[session_id]


class CreateSessionBody(BaseModel):
    total: float | None = None
    s1: float | None = None
    s_alt: float | None = None
    tolerance: float | None = None


class AnswerBody(BaseModel):
    question_id: str
    choice: Literal["A", "B"]


def _scenario_json(s: ChoiceScenario) -> dict:
    hi, lo = s.values
    return {"total": s.total, "richest_share": s.richest_share, "values": [hi, lo]}


def _question_json(q: Question) -> dict:
    return {
        "question_id": q.question_id,
        "option_a": _scenario_json(q.option_a),
        "option_b": _scenario_json(q.option_b),
    }


def _session_json(session: ElicitationSession) -> dict:
    body = {
        "session_id": session.session_id,
        "status": session.status,
        "interval": [session.eps_lo, session.eps_hi],
        "tolerance": session.tolerance,
        "history_length": len(session.history),
    }
    if session.status == STATUS_ACTIVE:
        body["question"] = _question_json(session.next_question())
    if session.epsilon is not None:
        body["epsilon"] = session.epsilon
    if session.at_boundary is not None:
        body["at_boundary"] = session.at_boundary
    return body


def create_app(store: SessionStore | None = None) -> FastAPI:
    app = FastAPI(title="atkinson-ab elicitation service")
    sessions = store or SessionStore()

    @app.exception_handler(ValidationError)
    async def _validation_handler(_request, exc: ValidationError):
        return JSONResponse(status_code=422, content={"detail": str(exc)})

    @app.get("/healthz")
    def healthz() -> dict:
        return {"status": "ok"}

    @app.post("/sessions", status_code=201)
    def create_session(body: CreateSessionBody) -> JSONResponse:
        session = ElicitationSession(
            total=body.total if body.total is not None else DEFAULT_TOTAL,
            s1=body.s1 if body.s1 is not None else DEFAULT_RICHEST_SHARE,
            s_alt=body.s_alt if body.s_alt is not None else DEFAULT_ALT_SHARE,
            tolerance=body.tolerance if body.tolerance is not None else DEFAULT_TOLERANCE,
        )
        sessions.add(session)
        return JSONResponse(status_code=201, content=_session_json(session))

    @app.get("/sessions/{session_id}")
    def get_session(session_id: str) -> dict:
        session = sessions.get(session_id)
        if session is None:
            raise HTTPException(status_code=404, detail=f"unknown session {session_id!r}")
        with sessions.lock(session_id):
            return _session_json(session)

    @app.post("/sessions/{session_id}/answers")
    def post_answer(session_id: str, body: AnswerBody) -> dict:
        session = sessions.get(session_id)
        if session is None:
            raise HTTPException(status_code=404, detail=f"unknown session {session_id!r}")
        with sessions.lock(session_id):
            if session.status != STATUS_ACTIVE:
                raise HTTPException(
                    status_code=409, detail=f"session is {session.status}; no open question"
                )
            pending = session.next_question()
            if body.question_id != pending.question_id:
                raise HTTPException(
                    status_code=409,
                    detail=f"stale question_id {body.question_id!r}; "
                    f"current question is {pending.question_id!r}",
                )
            session.answer(body.choice)
            return _session_json(session)

    return app


def serve(port: int, host: str = "127.0.0.1", static_dir: str | None = None) -> None:
    """Run the service (blocking). ``static_dir`` serves the UI bundle at /."""
    import uvicorn

    app = create_app()
    if static_dir is not None:
        app.mount("/", StaticFiles(directory=static_dir, html=True), name="ui")
    uvicorn.run(app, host=host, port=port, log_level="info")
