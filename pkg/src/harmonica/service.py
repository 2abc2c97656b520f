"""Stateful HTTP facade: sessions hold a rest mesh, its operators and a
solver-context cache so interactive clients get factorization reuse."""

from __future__ import annotations

import argparse
import base64
import os
import threading
import time
import uuid

import numpy as np
from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from .guidance import GuidanceError, Handle, Transform, make_handle_set
from .mesh import MeshError, parse_obj
from .pipeline import DeformationPipeline
from .solver import SolverError

DEFAULT_PORT = 8787
SESSION_IDLE_TIMEOUT_S = 30 * 60


class TransformBody(BaseModel):
    rotation: list[float] = Field(default=[1.0, 0.0, 0.0, 0.0])
    translation: list[float] = Field(default=[0.0, 0.0, 0.0])
    scale: float = 1.0
    pivot: list[float] | None = None


class HandleBody(BaseModel):
    name: str
    vertices: list[int]


class HandlesBody(BaseModel):
    handles: list[HandleBody]


class DeformBody(BaseModel):
    transforms: dict[str, TransformBody]
    beta: float = 0.2
    operator: str = "curved"


class Session:
    def __init__(self, pipeline: DeformationPipeline):
        self.pipeline = pipeline
        self.partition: list[HandleBody] | None = None
        self.lock = threading.RLock()
        self.last_access = time.monotonic()

    def touch(self):
        self.last_access = time.monotonic()


def _b64_f32(arr: np.ndarray) -> str:
    return base64.b64encode(
        np.ascontiguousarray(arr, dtype="<f4").tobytes()).decode("ascii")


def _b64_u8(arr: np.ndarray) -> str:
    return base64.b64encode(
        np.ascontiguousarray(arr, dtype=np.uint8).tobytes()).decode("ascii")


def create_app(idle_timeout_s: float = SESSION_IDLE_TIMEOUT_S) -> FastAPI:
    app = FastAPI(title="harmonica")
    sessions: dict[str, Session] = {}
    registry_lock = threading.Lock()

    def evict_idle():
        now = time.monotonic()
        stale = [sid for sid, s in sessions.items()
                 if now - s.last_access > idle_timeout_s]
        for sid in stale:
            sessions.pop(sid, None)

    def get_session(sid: str) -> Session | None:
        with registry_lock:
            evict_idle()
            s = sessions.get(sid)
            if s is not None:
                s.touch()
            return s

    @app.get("/healthz")
    def healthz():
        return {"status": "ok"}

    @app.post("/sessions")
    async def create_session(request: Request):
        body = await request.body()
        if not body.strip():
            return JSONResponse({"error": "empty mesh payload"}, status_code=400)
        try:
            mesh = parse_obj(body.decode("utf-8", errors="replace"))
            pipeline = DeformationPipeline(mesh)
        except MeshError as exc:
            return JSONResponse({"error": str(exc), "code": exc.code},
                                status_code=422)
        sid = uuid.uuid4().hex
        with registry_lock:
            evict_idle()
            sessions[sid] = Session(pipeline)
        lo, hi = mesh.bbox
        return JSONResponse({
            "session_id": sid,
            "n_vertices": mesh.n_vertices,
            "n_triangles": mesh.n_triangles,
            "bbox": {"min": list(lo), "max": list(hi)},
        }, status_code=201)

    @app.put("/sessions/{sid}/handles")
    def set_handles(sid: str, body: HandlesBody):
        session = get_session(sid)
        if session is None:
            return JSONResponse({"error": "unknown session"}, status_code=404)
        with session.lock:
            try:
                hs = make_handle_set(
                    [Handle(h.name, np.asarray(h.vertices, dtype=np.int64))
                     for h in body.handles],
                    session.pipeline.mesh.n_vertices)
                session.pipeline.weights(hs)  # solve + cache harmonic weights
            except GuidanceError as exc:
                return JSONResponse({"error": str(exc)}, status_code=422)
            session.partition = body.handles
            session.pipeline.clear_context_cache()
        return {"handles": [h.name for h in body.handles]}

    @app.get("/sessions/{sid}/weights")
    def get_weights(sid: str):
        session = get_session(sid)
        if session is None:
            return JSONResponse({"error": "unknown session"}, status_code=404)
        with session.lock:
            if session.partition is None:
                return JSONResponse({"error": "handles not set"}, status_code=409)
            hs = make_handle_set(
                [Handle(h.name, np.asarray(h.vertices, dtype=np.int64))
                 for h in session.partition],
                session.pipeline.mesh.n_vertices)
            w = session.pipeline.weights(hs)
        return {"handles": [h.name for h in session.partition],
                "weights": w.vertex_weights.tolist()}

    @app.post("/sessions/{sid}/deform")
    def deform(sid: str, body: DeformBody):
        session = get_session(sid)
        if session is None:
            return JSONResponse({"error": "unknown session"}, status_code=404)
        if session.partition is None:
            return JSONResponse({"error": "handles not set"}, status_code=409)
        if not 0.0 <= body.beta < 1.0:
            return JSONResponse({"error": f"beta must be in [0, 1), got {body.beta}"},
                                status_code=422)
        if body.operator not in ("flat", "curved"):
            return JSONResponse({"error": f"unknown operator {body.operator!r}"},
                                status_code=422)
        try:
            handles = []
            for h in session.partition:
                t = body.transforms.get(h.name, TransformBody())
                handles.append(Handle(
                    h.name, np.asarray(h.vertices, dtype=np.int64),
                    Transform(rotation=tuple(t.rotation),
                              translation=tuple(t.translation),
                              scale=t.scale,
                              pivot=None if t.pivot is None else tuple(t.pivot))))
            hs = make_handle_set(handles, session.pipeline.mesh.n_vertices)
        except GuidanceError as exc:
            return JSONResponse({"error": str(exc)}, status_code=422)
        try:
            with session.lock:
                res = session.pipeline.deform(hs, body.beta, body.operator,
                                              use_cache=True)
        except (GuidanceError, SolverError) as exc:
            return JSONResponse({"error": str(exc)}, status_code=422)
        return {
            "positions_b64": _b64_f32(res.positions.ravel()),
            "energy": res.local_energy.tolist(),
            "colors_b64": _b64_u8(res.colors.ravel()),
            "p95": res.p95,
            "max_iso": res.max_iso,
            "max_conf": res.max_conf,
            "factorize_ms": res.factorize_ms,
            "solve_ms": res.solve_ms,
            "cache_hit": res.cache_hit,
            "factorizations": session.pipeline.counters.factorizations,
        }

    _mount_ui(app)
    return app


def _mount_ui(app: FastAPI) -> None:
    """Serve the browser viewer bundle under /ui when it has been built."""
    root = os.environ.get("HARMONICA_UI_DIR")
    if root is None:
        here = os.path.dirname(os.path.abspath(__file__))
        root = os.path.normpath(os.path.join(here, "..", "..", "frontend", "dist"))
    if os.path.isdir(root):
        from fastapi.staticfiles import StaticFiles
        app.mount("/ui", StaticFiles(directory=root, html=True), name="ui")


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="harmonica-service")
    parser.add_argument("--port", type=int, default=DEFAULT_PORT)
    parser.add_argument("--host", default="127.0.0.1")
    args = parser.parse_args(argv)
    import uvicorn
    uvicorn.run(create_app(), host=args.host, port=args.port)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
