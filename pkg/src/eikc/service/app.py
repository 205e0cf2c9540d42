"""HTTP surface: one endpoint per engine/exploitation operation.

Every handler is a stateless adapter: resolve the session actor, decode
the request, call the operation, encode the result. Engine errors pass
through 1:1 as machine-readable codes; no business rule lives here.
"""

from __future__ import annotations

import errno
import json
import socket
from contextlib import asynccontextmanager
from pathlib import Path
from typing import Optional

from fastapi import Depends, FastAPI, Header, Query, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse, PlainTextResponse
from fastapi.staticfiles import StaticFiles

from .. import __version__
from ..engine import Clock, Engine
from ..errors import (
    BadRegistry,
    CorruptLog,
    DuplicateEntryId,
    EikcError,
    EmptyDescription,
    EmptyQuery,
    EmptyTitle,
    IllegalTransition,
    InvalidContent,
    NotOriginator,
    NotValidated,
    PortInUse,
    ProjectCollision,
    RatingOutOfRange,
    RoleNotPermitted,
    ThreadClosed,
    UnknownActor,
    UnknownEntry,
    UnknownProject,
    UnknownThread,
)
from ..exploitation import EXPLORE_AXES, Exploitation, QuerySpec, ViewMode
from ..model import Actor, Role, TaskKind
from ..repository import Repository
from . import schemas

STATUS_BY_CODE = {
    UnknownActor.code: 401,
    RoleNotPermitted.code: 403,
    NotOriginator.code: 403,
    UnknownProject.code: 404,
    UnknownThread.code: 404,
    UnknownEntry.code: 404,
    ThreadClosed.code: 409,
    IllegalTransition.code: 409,
    NotValidated.code: 409,
    ProjectCollision.code: 409,
    DuplicateEntryId.code: 409,
    EmptyTitle.code: 422,
    InvalidContent.code: 422,
    EmptyQuery.code: 422,
    EmptyDescription.code: 422,
    RatingOutOfRange.code: 422,
    CorruptLog.code: 422,
}


def load_registry(path: str | Path) -> dict[str, Actor]:
    """Parse the static actor registry file: token -> Actor.

    Format: ``{"actors": [{"actor_id", "display_name", "role", "token"?}]}``;
    the token defaults to the actor id.
    """
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise BadRegistry(f"cannot read actor registry {path}: {exc}") from exc
    if not isinstance(raw, dict) or not isinstance(raw.get("actors"), list):
        raise BadRegistry(f"registry {path} must contain an 'actors' list")
    registry: dict[str, Actor] = {}
    seen_ids: set[str] = set()
    for i, item in enumerate(raw["actors"]):
        try:
            actor = Actor(
                actor_id=item["actor_id"],
                display_name=item.get("display_name", item["actor_id"]),
                role=Role(item["role"]),
            )
            token = item.get("token", actor.actor_id)
        except (KeyError, TypeError, ValueError) as exc:
            raise BadRegistry(f"registry {path} actor #{i + 1} is invalid: {exc}") from exc
        if actor.actor_id in seen_ids:
            raise BadRegistry(f"duplicate actor_id {actor.actor_id!r}")
        if token in registry:
            raise BadRegistry(f"duplicate token {token!r}")
        seen_ids.add(actor.actor_id)
        registry[token] = actor
    return registry


def create_app(
    data_dir: str | Path,
    registry: dict[str, Actor] | str | Path,
    clock: Optional[Clock] = None,
    ui_dir: Optional[str | Path] = None,
) -> FastAPI:
    """Build the service around one open store."""
    tokens = registry if isinstance(registry, dict) else load_registry(registry)
    names = {a.actor_id: a.display_name for a in tokens.values()}

    repository = Repository(data_dir)
    engine = Engine(repository, clock=clock)
    exploitation = Exploitation(engine)

    @asynccontextmanager
    async def lifespan(_app: FastAPI):
        try:
            yield
        finally:
            repository.close()

    app = FastAPI(title="eikc", version=__version__, lifespan=lifespan)
    app.state.repository = repository
    app.state.engine = engine
    app.state.exploitation = exploitation
    app.state.tokens = tokens

    @app.exception_handler(EikcError)
    def eikc_error_handler(_request: Request, exc: EikcError) -> JSONResponse:
        status = STATUS_BY_CODE.get(exc.code, 500)
        return JSONResponse(
            status_code=status,
            content={"error": {"code": exc.code, "message": exc.message}},
        )

    @app.exception_handler(RequestValidationError)
    def validation_error_handler(_request: Request, exc: RequestValidationError) -> JSONResponse:
        return JSONResponse(
            status_code=422,
            content={"error": {"code": "ValidationError", "message": str(exc.errors())}},
        )

    def current_actor(x_actor_token: Optional[str] = Header(default=None)) -> Actor:
        if x_actor_token is None:
            raise UnknownActor("missing X-Actor-Token header")
        actor = tokens.get(x_actor_token)
        if actor is None:
            raise UnknownActor("token does not resolve to a registered actor")
        return actor

    def display(actor_id: str) -> str:
        return names.get(actor_id, actor_id)

    # -- capitalization ------------------------------------------------------

    @app.post("/projects", response_model=schemas.ProjectOut, status_code=201)
    def create_project(body: schemas.ProjectCreate, actor: Actor = Depends(current_actor)):
        project = engine.open_project(body.title, body.organization)
        return schemas.ProjectOut.from_project(project)

    @app.get("/projects", response_model=list[schemas.ProjectOut])
    def list_projects():
        return [schemas.ProjectOut.from_project(p) for p in repository.list_projects()]

    @app.get("/projects/{project_id}/threads", response_model=list[schemas.ThreadOut])
    def list_threads(project_id: str):
        return [schemas.ThreadOut.from_thread(t) for t in repository.list_threads(project_id)]

    @app.post("/projects/{project_id}/threads", response_model=schemas.DeclareOut, status_code=201)
    def declare(project_id: str, body: schemas.DeclareRequest, actor: Actor = Depends(current_actor)):
        task = _parse_task(body.task_kind)
        thread_id = engine.declare(project_id, actor, task, body.content.to_content())
        thread, entries = repository.load_thread(thread_id)
        return schemas.DeclareOut(
            thread=schemas.ThreadOut.from_thread(thread),
            entry=schemas.EntryOut.from_entry(entries[0], display(entries[0].who)),
        )

    @app.post("/threads/{thread_id}/annotations", response_model=schemas.EntryCreatedOut, status_code=201)
    def annotate(thread_id: str, body: schemas.AnnotateRequest, actor: Actor = Depends(current_actor)):
        entry_id = engine.annotate(thread_id, actor, body.text)
        return _entry_created(entry_id, thread_id)

    @app.post("/threads/{thread_id}/revisions", response_model=schemas.EntryCreatedOut, status_code=201)
    def revise(thread_id: str, body: schemas.ReviseRequest, actor: Actor = Depends(current_actor)):
        entry_id = engine.revise(thread_id, actor, body.content.to_content())
        return _entry_created(entry_id, thread_id)

    @app.post("/threads/{thread_id}/validation", response_model=schemas.EntryCreatedOut, status_code=201)
    def validate(thread_id: str, body: schemas.ValidateRequest, actor: Actor = Depends(current_actor)):
        entry_id = engine.validate(thread_id, actor, body.remark)
        return _entry_created(entry_id, thread_id)

    def _entry_created(entry_id: str, thread_id: str) -> schemas.EntryCreatedOut:
        thread, _ = repository.load_thread(thread_id)
        return schemas.EntryCreatedOut(
            entry_id=entry_id,
            thread_id=thread_id,
            state=thread.state.value,
            version=len(thread.entry_ids),
        )

    @app.post("/entries/{entry_id}/feedback", response_model=schemas.EntryCreatedOut, status_code=201)
    def feedback(entry_id: str, body: schemas.FeedbackRequest, actor: Actor = Depends(current_actor)):
        created = exploitation.record_feedback(actor, entry_id, body.rating, body.comment)
        target = repository.entry(entry_id)
        return _entry_created(created, target.thread_id)

    # -- exploitation ----------------------------------------------------------

    @app.get("/threads/{thread_id}", response_model=schemas.ThreadViewOut)
    def view_thread(thread_id: str, mode: str = Query(default="complete")):
        view = exploitation.visualize(thread_id, _parse_mode(mode))
        thread, _ = repository.load_thread(thread_id)
        return schemas.ThreadViewOut.from_view(view, thread, names=names)

    @app.get("/explore", response_model=schemas.ExploreOut)
    def explore(axis: str = Query(...)):
        if axis not in EXPLORE_AXES:
            return JSONResponse(
                status_code=422,
                content={
                    "error": {
                        "code": "ValidationError",
                        "message": f"axis must be one of {', '.join(EXPLORE_AXES)}",
                    }
                },
            )
        clusters = exploitation.explore(axis)
        return schemas.ExploreOut(axis=axis, clusters=[schemas.ClusterOut.from_cluster(c) for c in clusters])

    @app.get("/query", response_model=schemas.QueryOut)
    def query(
        terms: str = Query(...),
        project: Optional[str] = Query(default=None),
        task: Optional[str] = Query(default=None),
        year: Optional[int] = Query(default=None),
        validated_only: bool = Query(default=False),
    ):
        spec = QuerySpec.build(
            terms.split(","),
            project_id=project,
            task_kind=_parse_task(task) if task is not None else None,
            year=year,
            validated_only=validated_only,
        )
        return schemas.QueryOut.from_result(exploitation.query(spec))

    @app.get("/similar", response_model=schemas.SimilarOut)
    def similar(q: str = Query(...), k: int = Query(default=5, ge=1)):
        cases = exploitation.similar_cases(q, k)
        return schemas.SimilarOut(cases=[schemas.SimilarCaseOut.from_case(c) for c in cases])

    # -- transport -------------------------------------------------------------

    @app.get("/export", response_class=PlainTextResponse)
    def export(project: Optional[str] = Query(default=None)):
        return PlainTextResponse(repository.export(project))

    @app.post("/import", response_model=schemas.ImportOut)
    async def import_log(request: Request, actor: Actor = Depends(current_actor)):
        text = (await request.body()).decode("utf-8")
        counts = repository.import_log(text)
        return schemas.ImportOut(**counts)

    @app.get("/health", response_model=schemas.HealthOut)
    def health():
        stats = repository.stats()
        return schemas.HealthOut(status="ok", fingerprint=repository.state_fingerprint(), **stats)

    @app.get("/actors", response_model=list[schemas.ActorOut])
    def actors():
        return [schemas.ActorOut.from_actor(actor, token) for token, actor in tokens.items()]

    if ui_dir is not None and Path(ui_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    return app


def _parse_task(value: str) -> TaskKind:
    try:
        return TaskKind(value)
    except ValueError:
        raise RequestValidationError(
            [{"loc": ("task_kind",), "msg": f"unknown task kind {value!r}", "type": "value_error"}]
        ) from None


def _parse_mode(value: str) -> ViewMode:
    try:
        return ViewMode(value)
    except ValueError:
        raise RequestValidationError(
            [{"loc": ("mode",), "msg": f"mode must be one of validated, evolution, complete", "type": "value_error"}]
        ) from None


def check_port_free(host: str, port: int) -> None:
    """Fail fast with PortInUse before handing off to the server loop."""
    probe = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    try:
        probe.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        probe.bind((host, port))
    except OSError as exc:
        if exc.errno == errno.EADDRINUSE:
            raise PortInUse(f"port {port} is already in use") from exc
        raise
    finally:
        probe.close()


def serve(
    data_dir: str | Path,
    registry_path: str | Path,
    host: str = "127.0.0.1",
    port: int = 8000,
    ui_dir: Optional[str | Path] = None,
) -> None:
    """Run the service until interrupted."""
    import uvicorn

    check_port_free(host, port)
    app = create_app(data_dir, registry_path, ui_dir=ui_dir)
    uvicorn.run(app, host=host, port=port, log_level="info")
