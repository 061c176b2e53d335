"""HTTP facade over the session engine.

One endpoint per state transition. Every mutation appends to the session's
JSONL log before the response goes out, and every response carries the
session version so clients can poll cheaply. Participants authenticate
with an opaque token issued at join time; only the server ever holds the
token-to-identity mapping, which is what keeps sealed estimates anonymous.
"""

from __future__ import annotations

import threading
import uuid
from datetime import datetime, timezone
from pathlib import Path
from typing import Optional

from fastapi import FastAPI, Header, Request, Response
from fastapi.responses import FileResponse, JSONResponse
from pydantic import BaseModel, Field

from .core import EstimationScale, PayoffConfig, encode_rational
from .errors import DomainError, UnknownParticipant
from .ledger import EventLogStore, leaderboard, velocity_series
from .session import Session


def now_utc() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="microseconds").replace(
        "+00:00", "Z"
    )


class CreateSessionBody(BaseModel):
    scale: Optional[list] = None
    cfg: Optional[dict] = None
    session_id: Optional[str] = None


class JoinBody(BaseModel):
    display_name: str


class StoryBody(BaseModel):
    role: str = ""
    function: str
    benefit: str = ""


class EstimateBody(BaseModel):
    token: str
    value: int | float | str


class ClarifyBody(BaseModel):
    token: str
    question: str


class RevealBody(BaseModel):
    override: bool = False


class ReviseBody(BaseModel):
    token: str
    value: int | float | str
    note: str = ""


class ActualBody(BaseModel):
    value: int | float | str


class SessionHub:
    """All live sessions plus their locks, tokens, and idempotency caches."""

    def __init__(self, data_dir: str | Path):
        self.store = EventLogStore(data_dir)
        self.sessions: dict[str, Session] = {}
        self.tokens: dict[tuple[str, str], str] = {}
        self.idempotent: dict[tuple[str, str], tuple[int, dict]] = {}
        self.locks: dict[str, threading.Lock] = {}
        self.registry_lock = threading.Lock()

    def lock_for(self, session_id: str) -> threading.Lock:
        with self.registry_lock:
            return self.locks.setdefault(session_id, threading.Lock())

    def get(self, session_id: str) -> Session:
        session = self.sessions.get(session_id)
        if session is None:
            session = self.store.load(session_id)  # raises UnknownSession
            self.sessions[session_id] = session
        return session

    def persist_from(self, session: Session, version_before: int) -> None:
        self.store.append(session.session_id, session.events[version_before:])

    def issue_token(self, session_id: str, participant_id: str) -> str:
        token = uuid.uuid4().hex
        self.tokens[(session_id, token)] = participant_id
        return token

    def participant_for(self, session_id: str, token: str) -> str:
        pid = self.tokens.get((session_id, token))
        if pid is None:
            raise UnknownParticipant("unknown or expired participant token")
        return pid


def create_app(data_dir: str | Path) -> FastAPI:
    app = FastAPI(title="estgames session service")
    hub = SessionHub(data_dir)
    app.state.hub = hub

    @app.exception_handler(DomainError)
    async def domain_error_handler(_request: Request, exc: DomainError):
        return JSONResponse(
            status_code=exc.http_status,
            content={"code": exc.code, "message": str(exc)},
        )

    def mutate(session_id: str, idempotency_key: Optional[str], fn) -> dict:
        """Run a command under the session lock, persist, remember the response."""
        cache_key = (session_id, idempotency_key or "")
        with hub.lock_for(session_id):
            if idempotency_key and cache_key in hub.idempotent:
                return hub.idempotent[cache_key][1]
            session = hub.get(session_id)
            version_before = session.version
            body = fn(session)
            hub.persist_from(session, version_before)
            body["version"] = session.version
            if idempotency_key:
                hub.idempotent[cache_key] = (200, body)
            return body

    @app.post("/sessions", status_code=201)
    def create_session(
        body: CreateSessionBody,
        idempotency_key: Optional[str] = Header(default=None, alias="Idempotency-Key"),
    ):
        cache_key = ("", idempotency_key or "")
        with hub.registry_lock:
            if idempotency_key and cache_key in hub.idempotent:
                return hub.idempotent[cache_key][1]
        scale = EstimationScale.from_json(body.scale) if body.scale else None
        cfg = PayoffConfig.from_json(body.cfg) if body.cfg else None
        session = Session.create(scale, cfg, session_id=body.session_id, at=now_utc())
        with hub.lock_for(session.session_id):
            hub.sessions[session.session_id] = session
            hub.persist_from(session, 0)
        response = {"session_id": session.session_id, "version": session.version}
        if idempotency_key:
            with hub.registry_lock:
                hub.idempotent[cache_key] = (201, response)
        return response

    @app.post("/sessions/{session_id}/participants")
    def join(
        session_id: str,
        body: JoinBody,
        idempotency_key: Optional[str] = Header(default=None, alias="Idempotency-Key"),
    ):
        def run(session: Session) -> dict:
            participant = session.join_participant(body.display_name, at=now_utc())
            token = hub.issue_token(session_id, participant.participant_id)
            return {"participant_id": participant.participant_id, "token": token}

        return mutate(session_id, idempotency_key, run)

    @app.post("/sessions/{session_id}/stories")
    def add_story(
        session_id: str,
        body: StoryBody,
        idempotency_key: Optional[str] = Header(default=None, alias="Idempotency-Key"),
    ):
        def run(session: Session) -> dict:
            story = session.add_story(
                body.role, body.function, body.benefit, at=now_utc()
            )
            return {"story_id": story.story_id, "sprint": story.sprint}

        return mutate(session_id, idempotency_key, run)

    @app.post("/sessions/{session_id}/stories/{story_id}/open")
    def open_estimation(
        session_id: str,
        story_id: str,
        idempotency_key: Optional[str] = Header(default=None, alias="Idempotency-Key"),
    ):
        def run(session: Session) -> dict:
            session.open_estimation(story_id, at=now_utc())
            return {"story_id": story_id, "state": "Estimating"}

        return mutate(session_id, idempotency_key, run)

    @app.post("/sessions/{session_id}/stories/{story_id}/estimates")
    def submit_estimate(
        session_id: str,
        story_id: str,
        body: EstimateBody,
        idempotency_key: Optional[str] = Header(default=None, alias="Idempotency-Key"),
    ):
        def run(session: Session) -> dict:
            pid = hub.participant_for(session_id, body.token)
            session.submit_estimate(story_id, pid, body.value, at=now_utc())
            return {"story_id": story_id, "sealed": True}

        return mutate(session_id, idempotency_key, run)

    @app.post("/sessions/{session_id}/stories/{story_id}/clarifications")
    def clarify(
        session_id: str,
        story_id: str,
        body: ClarifyBody,
        idempotency_key: Optional[str] = Header(default=None, alias="Idempotency-Key"),
    ):
        def run(session: Session) -> dict:
            pid = hub.participant_for(session_id, body.token)
            session.register_clarification(story_id, pid, body.question, at=now_utc())
            return {"story_id": story_id, "recorded": True}

        return mutate(session_id, idempotency_key, run)

    @app.post("/sessions/{session_id}/stories/{story_id}/reveal")
    def reveal(
        session_id: str,
        story_id: str,
        body: Optional[RevealBody] = None,
        idempotency_key: Optional[str] = Header(default=None, alias="Idempotency-Key"),
    ):
        def run(session: Session) -> dict:
            view = session.reveal(
                story_id, override=bool(body and body.override), at=now_utc()
            )
            return {"reveal": view.to_json()}

        return mutate(session_id, idempotency_key, run)

    @app.post("/sessions/{session_id}/stories/{story_id}/commit")
    def commit(
        session_id: str,
        story_id: str,
        idempotency_key: Optional[str] = Header(default=None, alias="Idempotency-Key"),
    ):
        def run(session: Session) -> dict:
            final = session.commit_final(story_id, at=now_utc())
            return {"story_id": story_id, "final_estimate": encode_rational(final)}

        return mutate(session_id, idempotency_key, run)

    @app.post("/sessions/{session_id}/sprints")
    def start_sprint(
        session_id: str,
        idempotency_key: Optional[str] = Header(default=None, alias="Idempotency-Key"),
    ):
        def run(session: Session) -> dict:
            session.start_sprint(at=now_utc())
            return {"sprint_counter": session.sprint_counter}

        return mutate(session_id, idempotency_key, run)

    @app.post("/sessions/{session_id}/stories/{story_id}/revise")
    def revise(
        session_id: str,
        story_id: str,
        body: ReviseBody,
        idempotency_key: Optional[str] = Header(default=None, alias="Idempotency-Key"),
    ):
        def run(session: Session) -> dict:
            pid = hub.participant_for(session_id, body.token)
            session.revise_estimate(story_id, pid, body.value, body.note, at=now_utc())
            return {"story_id": story_id, "revised": True}

        return mutate(session_id, idempotency_key, run)

    @app.post("/sessions/{session_id}/stories/{story_id}/actual")
    def record_actual(
        session_id: str,
        story_id: str,
        body: ActualBody,
        idempotency_key: Optional[str] = Header(default=None, alias="Idempotency-Key"),
    ):
        def run(session: Session) -> dict:
            session.record_actual(story_id, body.value, at=now_utc())
            return {"story_id": story_id, "state": "Done"}

        return mutate(session_id, idempotency_key, run)

    @app.post("/sessions/{session_id}/stories/{story_id}/score")
    def score(
        session_id: str,
        story_id: str,
        idempotency_key: Optional[str] = Header(default=None, alias="Idempotency-Key"),
    ):
        def run(session: Session) -> dict:
            breakdowns = session.score_story(story_id, at=now_utc())
            return {
                "story_id": story_id,
                "scores": {pid: b.to_json() for pid, b in breakdowns.items()},
            }

        return mutate(session_id, idempotency_key, run)

    @app.get("/sessions/{session_id}")
    def snapshot(session_id: str, since_version: Optional[int] = None):
        with hub.lock_for(session_id):
            session = hub.get(session_id)
            if since_version is not None and session.version == since_version:
                return Response(status_code=304)
            return session.public_snapshot()

    @app.get("/sessions/{session_id}/leaderboard")
    def get_leaderboard(session_id: str):
        with hub.lock_for(session_id):
            session = hub.get(session_id)
            return {
                "version": session.version,
                "leaderboard": [e.to_json() for e in leaderboard(session)],
            }

    @app.get("/sessions/{session_id}/velocity")
    def get_velocity(session_id: str):
        with hub.lock_for(session_id):
            session = hub.get(session_id)
            return {
                "version": session.version,
                "velocity": [v.to_json() for v in velocity_series(session)],
            }

    _mount_static(app)
    return app


def _mount_static(app: FastAPI) -> None:
    """Serve the built web client when it sits next to the package."""
    root = Path(__file__).resolve().parent.parent.parent / "frontend" / "dist"
    if not root.exists():
        return

    @app.get("/")
    def index():
        return FileResponse(root / "index.html")

    @app.get("/app/{asset_path:path}")
    def asset(asset_path: str):
        target = (root / asset_path).resolve()
        if root.resolve() not in target.parents or not target.is_file():
            return Response(status_code=404)
        return FileResponse(target)
