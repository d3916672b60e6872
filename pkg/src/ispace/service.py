"""HTTP session service over information-space models.

Sessions hold a model id plus a history of assignment deltas; every view is
recomputed by replaying the merged history against the stored model, so a
session's state is exactly its history.  The two interaction styles meet
here: browsing clicks an arm of the current residual, out-of-turn input
volunteers settled tests, and both append a delta and re-specialize.
Conflicting input is rejected whole (409) and leaves the session unchanged.
"""

from __future__ import annotations

import json
import secrets
import threading
from contextlib import asynccontextmanager
from dataclasses import dataclass, field
from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from .core import (
    Assignment,
    Chain,
    Node,
    Program,
    Seq,
    SpaceError,
    assignment_from_json,
    parse,
    program_from_json,
    program_to_json,
    serialize,
)
from .specialize import is_complete, specialize


class UnknownModelError(SpaceError):
    pass


class UnknownSessionError(SpaceError):
    pass


class NoSuchArmError(SpaceError):
    pass


class EmptyHistoryError(SpaceError):
    pass


_STATUS = {
    "UnknownModelError": 404,
    "UnknownSessionError": 404,
    "InconsistentAssignmentError": 409,
    "NoSuchArmError": 409,
    "EmptyHistoryError": 409,
}


def _error_name(exc: SpaceError) -> str:
    name = type(exc).__name__
    if name == "DslSyntaxError":
        return "SyntaxError"
    return name[:-len("Error")] if name.endswith("Error") else name


@dataclass
class HistoryStep:
    action: str  # "input" | "browse"
    delta: Assignment


@dataclass
class Session:
    token: str
    model_id: str
    history: list[HistoryStep] = field(default_factory=list)
    lock: threading.Lock = field(default_factory=threading.Lock, repr=False)


class Store:
    def __init__(self):
        self.models: dict[str, Program] = {}
        self.sessions: dict[str, Session] = {}
        self.lock = threading.Lock()
        self.counter = 0

    def add_model(self, program: Program, model_id: str | None = None) -> str:
        with self.lock:
            if model_id is None:
                self.counter += 1
                model_id = f"m{self.counter}"
                while model_id in self.models:
                    self.counter += 1
                    model_id = f"m{self.counter}"
            self.models[model_id] = program
            return model_id

    def model(self, model_id: str) -> Program:
        try:
            return self.models[model_id]
        except KeyError:
            raise UnknownModelError(f"no such model {model_id!r}") from None

    def create_session(self, model_id: str) -> Session:
        self.model(model_id)  # existence check
        session = Session(token=secrets.token_urlsafe(16), model_id=model_id)
        with self.lock:
            self.sessions[session.token] = session
        return session

    def session(self, token: str) -> Session:
        try:
            return self.sessions[token]
        except KeyError:
            raise UnknownSessionError(f"no such session {token!r}") from None


def merged_history(history: list[HistoryStep]) -> Assignment:
    merged = Assignment()
    for step in history:
        merged = merged.merge(step.delta)
    return merged


def replay(program: Program, history: list[HistoryStep]) -> Program:
    return specialize(program, merged_history(history)).residual


def available_tests(node: Node | None) -> list[dict]:
    """The arms a browsing user can click: tests of the top-level chains."""
    out: list[dict] = []
    seen = set()

    def walk(n: Node | None) -> None:
        if isinstance(n, Chain):
            for arm in n.arms:
                if arm.test not in seen:
                    seen.add(arm.test)
                    out.append(
                        {
                            "key": arm.test.key,
                            "value": arm.test.value,
                            "label": str(arm.test),
                        }
                    )
        elif isinstance(n, Seq):
            for child in n.children:
                walk(child)

    walk(node)
    return out


def session_view(store: Store, session: Session) -> dict:
    program = store.model(session.model_id)
    residual = replay(program, session.history)
    return {
        "session": session.token,
        "model": session.model_id,
        "residual": program_to_json(residual),
        "available": available_tests(residual.root),
        "complete": is_complete(residual),
        "breadcrumb": [
            {"action": step.action, "set": step.delta.to_json()}
            for step in session.history
        ],
    }


class ModelUpload(BaseModel):
    source: str
    id: str | None = None


class SessionCreate(BaseModel):
    model: str


class InputBody(BaseModel):
    set: dict[str, object] | list


class BrowseBody(BaseModel):
    key: str
    value: str = "true"


def save_snapshot(store: Store, path: Path) -> None:
    data = {
        "models": {mid: program_to_json(p) for mid, p in store.models.items()},
        "sessions": [
            {
                "token": s.token,
                "model": s.model_id,
                "history": [
                    {"action": step.action, "set": step.delta.to_json()}
                    for step in s.history
                ],
            }
            for s in store.sessions.values()
        ],
    }
    path.write_text(json.dumps(data, indent=2))


def load_snapshot(store: Store, path: Path) -> None:
    data = json.loads(path.read_text())
    for mid, pdata in data.get("models", {}).items():
        store.models[mid] = program_from_json(pdata)
    for sdata in data.get("sessions", []):
        program = store.models.get(sdata["model"])
        if program is None:
            continue
        session = Session(token=sdata["token"], model_id=sdata["model"])
        for step in sdata.get("history", []):
            session.history.append(
                HistoryStep(step["action"], assignment_from_json(program, step["set"]))
            )
        store.sessions[session.token] = session


def load_models_dir(store: Store, directory: Path) -> None:
    for file in sorted(directory.glob("*.ispace")):
        store.add_model(parse(file.read_text()), model_id=file.stem)


def create_app(
    models: dict[str, Program] | None = None,
    models_dir: str | Path | None = None,
    snapshot: str | Path | None = None,
) -> FastAPI:
    store = Store()
    snapshot_path = Path(snapshot) if snapshot else None

    @asynccontextmanager
    async def lifespan(app: FastAPI):
        if snapshot_path and snapshot_path.exists():
            load_snapshot(store, snapshot_path)
        yield
        if snapshot_path:
            save_snapshot(store, snapshot_path)

    app = FastAPI(title="ispace service", lifespan=lifespan)
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    app.state.store = store

    if models:
        for mid, program in models.items():
            store.add_model(program, model_id=mid)
    if models_dir:
        load_models_dir(store, Path(models_dir))

    @app.exception_handler(SpaceError)
    async def space_error_handler(request: Request, exc: SpaceError):
        status = _STATUS.get(type(exc).__name__, 400)
        return JSONResponse(
            status_code=status,
            content={"error": _error_name(exc), "detail": str(exc)},
        )

    @app.post("/models")
    def upload_model(body: ModelUpload):
        program = parse(body.source)
        model_id = store.add_model(program, model_id=body.id)
        return {"id": model_id}

    @app.get("/models")
    def list_models():
        return {"models": sorted(store.models)}

    @app.get("/models/{model_id}")
    def get_model(model_id: str):
        program = store.model(model_id)
        return {
            "id": model_id,
            "program": program_to_json(program),
            "source": serialize(program) if program.root is not None else None,
        }

    @app.post("/sessions")
    def create_session(body: SessionCreate):
        session = store.create_session(body.model)
        return session_view(store, session)

    @app.get("/sessions/{token}/view")
    def view(token: str):
        session = store.session(token)
        with session.lock:
            return session_view(store, session)

    @app.post("/sessions/{token}/input")
    def volunteer(token: str, body: InputBody):
        session = store.session(token)
        program = store.model(session.model_id)
        with session.lock:
            delta = assignment_from_json(program, body.set)
            trial = session.history + [HistoryStep("input", delta)]
            replay(program, trial)  # raises on conflict; session untouched
            session.history.append(HistoryStep("input", delta))
            return session_view(store, session)

    @app.post("/sessions/{token}/browse")
    def browse(token: str, body: BrowseBody):
        session = store.session(token)
        program = store.model(session.model_id)
        with session.lock:
            residual = replay(program, session.history)
            offered = available_tests(residual.root)
            if not any(
                t["key"] == body.key and t["value"] == body.value for t in offered
            ):
                raise NoSuchArmError(
                    f"{body.key}={body.value} is not an offered arm"
                )
            delta = Assignment.make({body.key: body.value})
            trial = session.history + [HistoryStep("browse", delta)]
            replay(program, trial)
            session.history.append(HistoryStep("browse", delta))
            return session_view(store, session)

    @app.post("/sessions/{token}/undo")
    def undo(token: str):
        session = store.session(token)
        with session.lock:
            if not session.history:
                raise EmptyHistoryError("nothing to undo")
            session.history.pop()
            return session_view(store, session)

    @app.post("/sessions/{token}/reset")
    def reset(token: str):
        session = store.session(token)
        with session.lock:
            session.history.clear()
            return session_view(store, session)

    return app
