"""HTTP facade for the engine: sessions, the recommendation pipeline, telemetry.

Single-process, in-memory sessions with optional snapshot-to-file. Request
and response bodies are canonical wire envelopes; any 4xx/5xx leaves the
session state (and its revision) untouched. Per-session mutations are
serialized by a lock, while recommendation work runs off the lock so the
workspace stays interactive; clients poll the snapshot for proposal status.
"""

from __future__ import annotations

import logging
import threading
from dataclasses import dataclass, field, replace
from pathlib import Path

from fastapi import FastAPI, Request, Response
from starlette.concurrency import run_in_threadpool

from .config import EngineConfig, build_provider
from .errors import (
    DomainError,
    IntrusionError,
    OccupiedCellError,
    PendingProposalError,
    UnresolvableIntrusionError,
    ValidationError,
    ZonePlannerError,
)
from .layout import TemplateKind, ThetaParams
from .recommender import AppDescriptor, Provider, default_catalog
from .workspace import (
    Proposal,
    WorkspaceState,
    add_occlusion,
    add_zone,
    delete_zone,
    drag_window_in,
    drag_window_out,
    ingest_events,
    knob_inner,
    knob_outer,
    request_recommendation,
    resolve_proposal,
    translate_zone,
    validate_state,
)
from . import wire

logger = logging.getLogger(__name__)

RECOMMEND_JOIN_SLACK = 5.0


@dataclass
class Session:
    state: WorkspaceState
    lock: threading.Lock = field(default_factory=threading.Lock)
    worker: threading.Thread | None = None
    history: list[WorkspaceState] = field(default_factory=list)

    def remember(self, state: WorkspaceState, depth: int = 50) -> None:
        self.history.append(state)
        del self.history[:-depth]


class ServiceState:
    def __init__(
        self,
        config: EngineConfig,
        provider: Provider | None = None,
        catalog: list[AppDescriptor] | None = None,
    ):
        self.config = config
        self.provider = provider if provider is not None else build_provider(config.provider)
        self.catalog = catalog if catalog is not None else default_catalog()
        self.sessions: dict[str, Session] = {}
        self.registry_lock = threading.Lock()

    def session(self, workspace_id: str) -> Session:
        with self.registry_lock:
            session = self.sessions.get(workspace_id)
        if session is None:
            raise LookupError(workspace_id)
        return session

    def snapshot_to_file(self, state: WorkspaceState) -> None:
        if not self.config.snapshot_dir:
            return
        path = Path(self.config.snapshot_dir)
        path.mkdir(parents=True, exist_ok=True)
        doc = wire.canonical_dumps(wire.state_to_doc(state))
        (path / f"{state.id}.json").write_text(doc)


def _error_response(
    status: int, code: str, message: str, request_id: str = "", diagnostics=None
) -> Response:
    body = {
        "code": code,
        "message": message,
        "diagnostics": list(diagnostics or []),
    }
    return _canonical_response(wire.envelope("error", body, request_id), status)


def _canonical_response(doc: dict, status: int = 200) -> Response:
    return Response(
        content=wire.canonical_dumps(doc),
        media_type="application/json",
        status_code=status,
    )


_ERROR_MAP = [
    (ValidationError, 400, "invalid_document"),
    (PendingProposalError, 409, "proposal_pending"),
    (OccupiedCellError, 409, "cell_occupied"),
    (IntrusionError, 409, "occlusion_intrusion"),
    (UnresolvableIntrusionError, 409, "unresolvable_intrusion"),
    (DomainError, 400, "domain_error"),
    (ZonePlannerError, 400, "engine_error"),
]


def _map_error(exc: Exception, request_id: str) -> Response:
    for kind, status, code in _ERROR_MAP:
        if isinstance(exc, kind):
            diagnostics = getattr(exc, "diagnostics", [])
            return _error_response(status, code, str(exc), request_id, diagnostics)
    logger.exception("unhandled service error")
    return _error_response(500, "internal_error", str(exc), request_id)


def create_app(
    config: EngineConfig | None = None,
    provider: Provider | None = None,
    catalog: list[AppDescriptor] | None = None,
) -> FastAPI:
    """Build the service; provider and catalog may be injected for tests."""
    config = config or EngineConfig()
    service = ServiceState(config, provider, catalog)
    app = FastAPI(title="zoneplanner", docs_url=None, redoc_url=None)
    app.state.service = service

    def parse_envelope(raw: bytes, expected_kind: str) -> tuple[dict, str]:
        doc = wire.canonical_loads(raw.decode("utf-8"))
        kind, body, request_id = wire.open_envelope(doc, expected_kind)
        if not isinstance(body, dict):
            raise ValidationError("body must be an object", ["body: not an object"])
        return body, request_id

    # -- session management ------------------------------------------------

    def do_create_workspace(raw: bytes) -> Response:
        request_id = ""
        try:
            body, request_id = parse_envelope(raw, "workspace_create")
            state = wire.state_from_doc(body)
            state = replace(state, revision=0, pending=None)
            validate_state(state)
        except Exception as exc:
            return _map_error(exc, request_id)
        with service.registry_lock:
            if state.id in service.sessions:
                return _error_response(
                    409, "duplicate_id", f"workspace {state.id!r} already exists",
                    request_id,
                )
            service.sessions[state.id] = Session(state=state)
        service.snapshot_to_file(state)
        return _canonical_response(
            wire.envelope(
                "workspace_created", {"id": state.id, "revision": 0}, request_id
            ),
            201,
        )

    @app.post("/v1/workspaces")
    async def create_workspace_endpoint(request: Request):
        raw = await request.body()
        return await run_in_threadpool(do_create_workspace, raw)

    def do_snapshot(workspace_id: str) -> Response:
        try:
            session = service.session(workspace_id)
        except LookupError:
            return _error_response(404, "not_found", f"no workspace {workspace_id!r}")
        with session.lock:
            doc = wire.state_to_doc(session.state)
        return _canonical_response(wire.envelope("workspace_snapshot", doc))

    @app.get("/v1/workspaces/{workspace_id}")
    async def snapshot_endpoint(workspace_id: str):
        return await run_in_threadpool(do_snapshot, workspace_id)

    @app.get("/v1/health")
    async def health_endpoint():
        return _canonical_response(wire.envelope("health", {"status": "ok"}))

    # -- recommendation lifecycle -------------------------------------------

    def do_recommend(workspace_id: str, raw: bytes) -> Response:
        request_id = ""
        try:
            body, request_id = parse_envelope(raw, "recommend_request")
            goal = wire.goal_from_doc(body.get("goal"))
        except Exception as exc:
            return _map_error(exc, request_id)
        wait = bool(body.get("wait", True))
        allow_fallback = bool(body.get("allow_fallback", True))
        try:
            session = service.session(workspace_id)
        except LookupError:
            return _error_response(404, "not_found", f"no workspace {workspace_id!r}", request_id)

        with session.lock:
            base = session.state
            if base.pending is not None and base.pending.status != "failed":
                return _error_response(
                    409, "proposal_pending",
                    f"proposal {base.pending.id!r} is {base.pending.status}",
                    request_id,
                )
            if base.pending is not None:
                base = replace(base, pending=None)
            stub = Proposal(
                id=f"prop-{base.revision + 1}", goal=goal, status="pending"
            )
            session.remember(session.state)
            session.state = replace(base, pending=stub, revision=base.revision + 1)

        def worker():
            try:
                computed = request_recommendation(
                    base,
                    goal,
                    service.catalog,
                    service.provider,
                    service.config.weights,
                    service.config.sizing,
                    engine="llm",
                    smoothing=service.config.smoothing,
                )
                proposal = replace(computed.pending, id=stub.id)
            except Exception as exc:  # surface worker crashes as failed proposals
                logger.exception("recommendation worker failed")
                proposal = replace(stub, status="failed", error=str(exc))
            with session.lock:
                current = session.state
                if current.pending is not None and current.pending.id == stub.id:
                    session.state = replace(
                        current, pending=proposal, revision=current.revision + 1
                    )
                    service.snapshot_to_file(session.state)

        thread = threading.Thread(target=worker, daemon=True)
        session.worker = thread
        thread.start()
        if not wait:
            return _canonical_response(
                wire.envelope("proposal", wire.proposal_to_doc(stub), request_id), 200
            )
        thread.join(timeout=service.config.provider.timeout * 2 + RECOMMEND_JOIN_SLACK)
        with session.lock:
            pending = session.state.pending
            if pending is None or pending.id != stub.id:
                return _error_response(
                    409, "proposal_superseded", "proposal was replaced", request_id
                )
            if pending.status == "failed":
                session.state = replace(
                    session.state, pending=None,
                    revision=session.state.revision + 1,
                )
                return _error_response(
                    500, "pipeline_error", pending.error or "recommendation failed",
                    request_id,
                )
            if pending.status == "ready" and pending.fallback and not allow_fallback:
                session.state = replace(
                    session.state, pending=None,
                    revision=session.state.revision + 1,
                )
                return _error_response(
                    504, "provider_unavailable",
                    "provider failed and fallback is disabled", request_id,
                )
            return _canonical_response(
                wire.envelope("proposal", wire.proposal_to_doc(pending), request_id),
                200,
            )

    @app.post("/v1/workspaces/{workspace_id}/recommend")
    async def recommend_endpoint(workspace_id: str, request: Request):
        raw = await request.body()
        return await run_in_threadpool(do_recommend, workspace_id, raw)

    def do_resolve(workspace_id: str, raw: bytes) -> Response:
        request_id = ""
        try:
            body, request_id = parse_envelope(raw, "resolve_request")
            session = service.session(workspace_id)
        except LookupError:
            return _error_response(404, "not_found", f"no workspace {workspace_id!r}", request_id)
        except Exception as exc:
            return _map_error(exc, request_id)
        decisions = body.get("decisions", {})
        batch = body.get("batch_accept_zones", [])
        if not isinstance(decisions, dict) or not isinstance(batch, list):
            return _error_response(
                400, "invalid_document", "decisions must be an object and batch a list",
                request_id,
            )
        with session.lock:
            state = session.state
            if state.pending is None:
                return _error_response(409, "no_proposal", "nothing to resolve", request_id)
            if state.pending.status != "ready":
                return _error_response(
                    409, "proposal_not_ready",
                    f"proposal is {state.pending.status}", request_id,
                )
            try:
                new_state, record = resolve_proposal(state, decisions, batch)
            except Exception as exc:
                return _map_error(exc, request_id)
            session.remember(state)
            session.state = new_state
            service.snapshot_to_file(new_state)
            body_out = {
                "record": wire.record_to_doc(record),
                "state": wire.state_to_doc(new_state),
            }
        return _canonical_response(wire.envelope("resolve_result", body_out, request_id))

    @app.post("/v1/workspaces/{workspace_id}/resolve")
    async def resolve_endpoint(workspace_id: str, request: Request):
        raw = await request.body()
        return await run_in_threadpool(do_resolve, workspace_id, raw)

    # -- telemetry and arrangement ops ---------------------------------------

    def do_events(workspace_id: str, raw: bytes) -> Response:
        request_id = ""
        try:
            body, request_id = parse_envelope(raw, "events_request")
            session = service.session(workspace_id)
            events = [wire.event_from_doc(e) for e in body.get("events", [])]
        except LookupError:
            return _error_response(404, "not_found", f"no workspace {workspace_id!r}", request_id)
        except Exception as exc:
            return _map_error(exc, request_id)
        with session.lock:
            try:
                new_state = ingest_events(session.state, events)
            except Exception as exc:
                return _map_error(exc, request_id)
            session.remember(session.state)
            session.state = new_state
            service.snapshot_to_file(new_state)
            out = {"stored": len(events), "revision": new_state.revision}
        return _canonical_response(wire.envelope("events_stored", out, request_id))

    @app.post("/v1/workspaces/{workspace_id}/events")
    async def events_endpoint(workspace_id: str, request: Request):
        raw = await request.body()
        return await run_in_threadpool(do_events, workspace_id, raw)

    def apply_op(state: WorkspaceState, op: dict) -> tuple[WorkspaceState, dict]:
        kind = op.get("kind")
        extra: dict = {}
        if kind == "create_zone":
            theta = op.get("theta")
            state = add_zone(
                state,
                str(op["id"]),
                TemplateKind(str(op["template"])),
                float(op["width"]),
                float(op["height"]),
                [float(v) for v in op["position"]],
                theta=ThetaParams(float(theta["w0"]), float(theta["h0"]))
                if theta
                else None,
                locked=bool(op.get("locked", False)),
            )
        elif kind == "create_occlusion":
            state = add_occlusion(
                state,
                str(op["id"]),
                float(op["width"]),
                float(op["height"]),
                [float(v) for v in op["position"]],
            )
        elif kind == "delete_zone":
            state = delete_zone(state, str(op["id"]))
        elif kind == "translate_zone":
            state = translate_zone(
                state, str(op["id"]), [float(v) for v in op["position"]]
            )
        elif kind == "move_inner_knob":
            state, clamped = knob_inner(
                state, str(op["id"]), str(op["axis"]), float(op["value"])
            )
            extra["clamped"] = clamped
        elif kind == "move_outer_knob":
            state = knob_outer(
                state, str(op["id"]), float(op["width"]), float(op["height"])
            )
        elif kind == "drag_in":
            state = drag_window_in(
                state, str(op["app"]), str(op["zone"]), int(op["cell"])
            )
        elif kind == "drag_out":
            state = drag_window_out(
                state, str(op["app"]), [float(v) for v in op["position"]]
            )
        else:
            raise ValidationError(f"unknown op kind {kind!r}", ["op.kind: unknown"])
        return state, extra

    def do_ops(workspace_id: str, raw: bytes) -> Response:
        request_id = ""
        try:
            body, request_id = parse_envelope(raw, "ops_request")
            session = service.session(workspace_id)
        except LookupError:
            return _error_response(404, "not_found", f"no workspace {workspace_id!r}", request_id)
        except Exception as exc:
            return _map_error(exc, request_id)
        op = body.get("op")
        if not isinstance(op, dict):
            return _error_response(
                400, "invalid_document", "op must be an object", request_id
            )
        with session.lock:
            state = session.state
            expected = body.get("expected_revision")
            if expected is not None and int(expected) != state.revision:
                return _error_response(
                    409, "stale_revision",
                    f"expected revision {expected}, session is at {state.revision}",
                    request_id,
                )
            try:
                new_state, extra = apply_op(state, op)
            except KeyError as exc:
                return _error_response(
                    400, "invalid_document", f"op missing field {exc}", request_id
                )
            except Exception as exc:
                return _map_error(exc, request_id)
            session.remember(state)
            session.state = new_state
            service.snapshot_to_file(new_state)
            out = {
                "revision": new_state.revision,
                "state": wire.state_to_doc(new_state),
            }
            out.update(extra)
        return _canonical_response(wire.envelope("ops_result", out, request_id))

    @app.post("/v1/workspaces/{workspace_id}/ops")
    async def ops_endpoint(workspace_id: str, request: Request):
        raw = await request.body()
        return await run_in_threadpool(do_ops, workspace_id, raw)

    return app


def serve(config: EngineConfig) -> None:
    """Run the service under uvicorn; blocks until interrupted."""
    import uvicorn

    uvicorn.run(create_app(config), host=config.host, port=config.port, log_level="info")
