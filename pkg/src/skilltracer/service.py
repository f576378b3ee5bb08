"""HTTP front door over the tracker: ingest observations, serve posteriors.

The app binds one store directory and at most one graph at a time.  All
mutation endpoints are idempotent under a client-supplied request key: the
serialized response body is persisted next to the observation log and
replayed byte-for-byte when the key is seen again.  Error bodies are
uniformly {code, message, detail}.  A single lock serializes tracker
access; with one writer the log order, and hence replay, is total.
"""

from __future__ import annotations

import json
import re
import threading
import time
from typing import Optional

from fastapi import FastAPI, Request, Response

from . import basis, serialize
from .config import ServiceConfig, apply_graph_defaults
from .errors import (
    AllZeroError,
    OrderOverflowError,
    TimestampRegressionError,
    UnknownExerciseError,
    UnknownSkillError,
    UnknownStudentError,
)
from .graph import Observation, graph_from_text, graph_to_text
from .store import Store
from .tracker import Tracker

# Student ids become snapshot filenames; keep them path-safe.
STUDENT_ID = re.compile(r"[A-Za-z0-9][A-Za-z0-9._-]{0,63}")


class ApiError(Exception):
    """Carries a structured error body to the transport layer."""

    def __init__(self, status: int, code: str, message: str, detail=None):
        super().__init__(message)
        self.status = status
        self.code = code
        self.message = message
        self.detail = detail


def _json(payload, status: int = 200) -> Response:
    return Response(
        content=serialize.dumps(payload),
        status_code=status,
        media_type="application/json",
    )


class ServiceState:
    """Store, tracker, and response cache behind a single lock."""

    def __init__(self, config: ServiceConfig):
        self.config = config
        self.lock = threading.RLock()
        self.store = Store(config.store_root, fsync=config.fsync)
        self.tracker: Optional[Tracker] = None
        self.responses = self.store.load_responses()
        text = self.store.load_graph()
        if text is not None:
            graph, report = graph_from_text(text)
            if graph is None:
                raise ApiError(500, "invalid-stored-graph",
                               "the persisted graph no longer validates",
                               report.to_dict())
            self.tracker = Tracker(graph, self.store,
                                   snapshot_every=config.snapshot_every)

    def require_tracker(self) -> Tracker:
        if self.tracker is None:
            raise ApiError(409, "no-graph",
                           "no skill graph is loaded; POST /graph first")
        return self.tracker

    def install_graph(self, doc: dict):
        """Validate, persist, and activate a graph document."""
        filled = apply_graph_defaults(doc, self.config)
        text = graph_to_text(filled)
        graph, report = graph_from_text(text)
        if graph is not None:
            cap = self.config.correlation_cap
            for sid in sorted(graph.skills):
                for other, n_c in graph.skills[sid].correlations:
                    if n_c > cap:
                        report.add_error(
                            "correlation-cap", f"skill:{sid}",
                            f"n_c={n_c} exceeds the configured cap {cap}",
                        )
        if not report.ok:
            raise ApiError(422, "invalid-graph",
                           "the graph definition failed validation",
                           report.to_dict())
        self.store.save_graph(text)
        self.tracker = Tracker(graph, self.store,
                               snapshot_every=self.config.snapshot_every)
        return report


async def _body(request: Request) -> dict:
    try:
        payload = await request.json()
    except (json.JSONDecodeError, UnicodeDecodeError):
        raise ApiError(400, "bad-request", "body is not valid JSON")
    if not isinstance(payload, dict):
        raise ApiError(400, "bad-request", "body must be a JSON object")
    return payload


def _field(payload: dict, key: str, kind, required: bool = True, default=None):
    if key not in payload:
        if required:
            raise ApiError(400, "bad-request", f"missing field {key!r}")
        return default
    value = payload[key]
    if kind is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ApiError(400, "bad-request", f"field {key!r} must be a number")
        return float(value)
    if kind is bool and not isinstance(value, bool):
        raise ApiError(400, "bad-request", f"field {key!r} must be a boolean")
    if kind is str and not isinstance(value, str):
        raise ApiError(400, "bad-request", f"field {key!r} must be a string")
    return value


def _query_float(request: Request, key: str, default: float) -> float:
    raw = request.query_params.get(key)
    if raw is None:
        return default
    try:
        return float(raw)
    except ValueError:
        raise ApiError(400, "bad-request", f"query parameter {key!r} must be a number")


_ERROR_MAP = [
    (UnknownStudentError, 404, "unknown-student"),
    (UnknownSkillError, 404, "unknown-skill"),
    (UnknownExerciseError, 404, "unknown-exercise"),
    (TimestampRegressionError, 409, "timestamp-regression"),
    (AllZeroError, 422, "degenerate-update"),
    (OrderOverflowError, 422, "order-overflow"),
]


def create_app(config: Optional[ServiceConfig] = None,
               now=time.time, ui_dir: Optional[str] = None) -> FastAPI:
    """Build the service; ``now`` is injectable for deterministic tests.

    ``ui_dir`` mounts a static dashboard build at /ui so the dashboard and
    the API share an origin.
    """
    state = ServiceState(config or ServiceConfig())
    app = FastAPI(title="skilltracer", docs_url=None, redoc_url=None)
    app.state.service = state
    if ui_dir is not None:
        from fastapi.staticfiles import StaticFiles

        app.mount("/ui", StaticFiles(directory=ui_dir, html=True), name="ui")

    @app.exception_handler(ApiError)
    async def _api_error(_request, err: ApiError):
        return _json(
            {"code": err.code, "message": err.message, "detail": err.detail},
            err.status,
        )

    def _translate(err: Exception) -> ApiError:
        for etype, status, code in _ERROR_MAP:
            if isinstance(err, etype):
                return ApiError(status, code, str(err))
        raise err

    @app.get("/healthz")
    async def healthz():
        return _json({"status": "ok", "graph_loaded": state.tracker is not None})

    @app.post("/graph")
    async def post_graph(request: Request):
        doc = await _body(request)
        with state.lock:
            report = state.install_graph(doc)
        return _json(report.to_dict())

    @app.get("/graph")
    async def get_graph():
        with state.lock:
            text = state.store.load_graph()
        if text is None:
            raise ApiError(404, "no-graph", "no skill graph is loaded")
        return Response(content=text, media_type="application/json")

    @app.post("/students")
    async def post_student(request: Request):
        payload = await _body(request)
        student = _field(payload, "id", str)
        if not STUDENT_ID.fullmatch(student):
            raise ApiError(422, "bad-student-id",
                           "ids are 1-64 chars of [A-Za-z0-9._-], "
                           "starting alphanumeric")
        with state.lock:
            tracker = state.require_tracker()
            tracker.add_student(student)
        return _json({"id": student}, 201)

    @app.get("/students")
    async def get_students():
        with state.lock:
            tracker = state.require_tracker()
            return _json({"students": tracker.students()})

    @app.post("/observations")
    async def post_observation(request: Request):
        payload = await _body(request)
        # The wire carries outcome as a boolean; the engine names outcomes.
        succeeded = _field(payload, "outcome", bool)
        obs = Observation(
            student=_field(payload, "student", str),
            exercise=_field(payload, "exercise", str),
            outcome="success" if succeeded else "failure",
            at=_field(payload, "at", float, required=False,
                      default=float(now())),
        )
        request_key = _field(payload, "request_key", str, required=False)
        dry_run = _field(payload, "dry_run", bool, required=False, default=False)

        with state.lock:
            tracker = state.require_tracker()
            if dry_run:
                try:
                    updated = tracker.preview(obs)
                except Exception as err:  # noqa: BLE001 - mapped below
                    raise _translate(err)
                return _json({
                    "dry_run": True,
                    "student": obs.student,
                    "exercise": obs.exercise,
                    "outcome": succeeded,
                    "at": obs.at,
                    "skills": [
                        {"skill": v, "mean": basis.mean(c), "coeffs": c.to_dict()}
                        for v, c in sorted(updated.items())
                    ],
                })

            if request_key and tracker.seen_request_key(request_key):
                cached = state.responses.get(request_key)
                if cached is None:
                    # The observation is in the log but its response record
                    # was lost (crash between the two appends).
                    raise ApiError(409, "duplicate-request",
                                   "request key already applied; "
                                   "recorded response unavailable")
                return Response(content=cached["body"],
                                status_code=int(cached["status"]),
                                media_type="application/json")

            try:
                updated = tracker.record(obs, request_key)
            except Exception as err:  # noqa: BLE001 - mapped below
                raise _translate(err)
            seq = state.store.last_seq()
            posteriors = [
                tracker.posterior(obs.student, st.skill, obs.at).to_dict()
                for st in sorted(updated, key=lambda s: s.skill)
            ]
            body = serialize.dumps({
                "student": obs.student,
                "exercise": obs.exercise,
                "outcome": succeeded,
                "at": obs.at,
                "seq": seq,
                "skills": posteriors,
            })
            if request_key:
                record = {"status": 200, "body": body}
                state.store.append_response(request_key, record)
                state.responses[request_key] = record
        return Response(content=body, status_code=200,
                        media_type="application/json")

    @app.get("/students/{student}/skills/{skill}")
    async def get_skill(student: str, skill: str, request: Request):
        at = _query_float(request, "at", float(now()))
        with state.lock:
            tracker = state.require_tracker()
            try:
                post = tracker.posterior(student, skill, at)
            except Exception as err:  # noqa: BLE001 - mapped below
                raise _translate(err)
        payload = post.to_dict()
        payload["at"] = at
        payload["student"] = student
        return _json(payload)

    @app.get("/students/{student}/skills")
    async def get_skills(student: str, request: Request):
        at = _query_float(request, "at", float(now()))
        with state.lock:
            tracker = state.require_tracker()
            try:
                posts = tracker.all_posteriors(student, at)
            except Exception as err:  # noqa: BLE001 - mapped below
                raise _translate(err)
        return _json({
            "student": student,
            "at": at,
            "skills": [
                {"skill": p.skill, "mean": p.mean, "interval": list(p.interval)}
                for p in posts
            ],
        })

    @app.get("/students/{student}/recommendations")
    async def get_recommendations(student: str, request: Request):
        at = _query_float(request, "at", float(now()))
        lo = _query_float(request, "lo", 0.4)
        hi = _query_float(request, "hi", 0.8)
        if not 0.0 <= lo < hi <= 1.0:
            raise ApiError(422, "bad-window",
                           f"need 0 <= lo < hi <= 1, got [{lo}, {hi}]")
        with state.lock:
            tracker = state.require_tracker()
            try:
                ranked = tracker.recommend(student, at, lo, hi)
            except Exception as err:  # noqa: BLE001 - mapped below
                raise _translate(err)
        return _json({
            "student": student,
            "at": at,
            "lo": lo,
            "hi": hi,
            "recommendations": [
                {"exercise": eid, "expected_success": p} for eid, p in ranked
            ],
        })

    return app
