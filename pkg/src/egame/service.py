"""Session-scoped HTTP/JSON API for interactive play.

Sessions live in memory; each one serializes its operations behind a lock and
hands out immutable snapshots.  The firing rule is the engine's -- every
snapshot's legal-move set comes straight from ``engine.legal_moves`` on the
current values.  Undo moves a pointer back over the append-only event log;
firing after an undo drops the undone tail.
"""

from __future__ import annotations

import json
import secrets
import threading
import time
from contextlib import asynccontextmanager
from dataclasses import dataclass, field

from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from .divergence import (
    ConditionStarError,
    alternating_sequence,
    condition_star,
    inequalities,
    kappas,
    triple_of,
)
from .engine import EPS_LEGAL, FiringEvent, fire, legal_moves
from .graph import EGCMGraph, GraphError, canonicalize_triangle, validate_spec


@dataclass
class Session:
    id: str
    graph: EGCMGraph
    labels: object | None           # TriangleLabels when certificate-eligible
    initial: tuple
    events: list = field(default_factory=list)
    pointer: int = 0                # number of events currently applied
    created: float = field(default_factory=time.time)
    updated: float = field(default_factory=time.time)
    lock: threading.Lock = field(default_factory=threading.Lock)

    @property
    def position(self) -> tuple:
        return self.events[self.pointer - 1].after if self.pointer else self.initial


def _error(status: int, code: str, message: str, detail=None) -> JSONResponse:
    return JSONResponse(
        status_code=status,
        content={"code": code, "message": message, "detail": detail},
    )


def _snapshot(session: Session) -> dict:
    pos = session.position
    graph = session.graph
    legal = sorted(legal_moves(graph, pos), key=graph.index)
    doc = {
        "session": session.id,
        "nodes": list(graph.nodes),
        "values": list(pos),
        "legal": legal,
        "move_count": session.pointer,
        "eligible": session.labels is not None,
        "condition_star": None,
        "linear_form": None,
        "created": session.created,
        "updated": session.updated,
    }
    if session.labels is not None:
        status = condition_star(session.labels, triple_of(graph, session.labels, pos))
        doc["condition_star"] = {
            "sign_ok": status.sign_ok,
            "linear_form": status.linear_form,
            "holds": status.holds,
        }
        doc["linear_form"] = status.linear_form
    return doc


def _analysis(session: Session) -> dict:
    doc = _snapshot(session)
    out = {
        "legal": doc["legal"],
        "condition_star": doc["condition_star"],
        "kappas": None,
        "inequalities": None,
        "suggested_sequence": None,
        "hint": None,
    }
    labels = session.labels
    if labels is None:
        return out
    k1, k2 = kappas(labels)
    one, two, three = inequalities(labels)
    out["kappas"] = [k1, k2]
    out["inequalities"] = {"i": one, "ii": two, "iii": three}
    triple = triple_of(session.graph, labels, session.position)
    try:
        out["suggested_sequence"] = list(alternating_sequence(labels, triple))
    except ConditionStarError:
        if triple[2] > EPS_LEGAL:
            out["hint"] = f"fire {labels.gamma3!r} first"
    return out


def _parse_start(graph: EGCMGraph, raw) -> tuple:
    if isinstance(raw, str):
        if not raw.startswith("omega"):
            raise GraphError(f"start shorthand {raw!r} not understood")
        i = int(raw[len("omega"):])
        if not 1 <= i <= graph.node_count:
            raise GraphError(f"{raw!r} out of range for {graph.node_count} nodes")
        return tuple(1.0 if j == i - 1 else 0.0 for j in range(graph.node_count))
    values = tuple(float(v) for v in raw)
    if len(values) != graph.node_count:
        raise GraphError(
            f"start has {len(values)} values for a {graph.node_count}-node graph"
        )
    return values


def create_app(snapshot_path: str | None = None) -> FastAPI:
    sessions: dict[str, Session] = {}

    @asynccontextmanager
    async def lifespan(app: FastAPI):
        yield
        if snapshot_path:
            doc = {
                sid: {
                    "graph": s.graph.to_spec(),
                    "initial": list(s.initial),
                    "moves": [ev.node for ev in s.events[: s.pointer]],
                    "values": list(s.position),
                }
                for sid, s in sessions.items()
            }
            with open(snapshot_path, "w", encoding="utf-8") as fh:
                json.dump(doc, fh, indent=2)

    app = FastAPI(title="egame play service", lifespan=lifespan)
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )

    def get_session(session_id: str) -> Session | None:
        return sessions.get(session_id)

    @app.get("/healthz")
    async def healthz():
        return {"ok": True, "sessions": len(sessions)}

    @app.post("/sessions")
    async def create_session(request: Request):
        body = await request.json()
        spec = body.get("graph")
        report = validate_spec(spec if spec is not None else {})
        if report.problems:
            return _error(422, "invalid_graph", "graph document failed validation",
                          detail=report.to_dict())
        graph = EGCMGraph.from_spec(spec)
        labels = None
        if report.certificate_eligible:
            labels = canonicalize_triangle(graph)
        try:
            start = _parse_start(graph, body.get("start", [0.0] * graph.node_count))
        except (GraphError, TypeError, ValueError) as exc:
            return _error(422, "invalid_start", str(exc))
        session = Session(
            id=secrets.token_hex(8), graph=graph, labels=labels, initial=start
        )
        sessions[session.id] = session
        return {"id": session.id, "snapshot": _snapshot(session)}

    @app.get("/sessions/{session_id}")
    async def get_snapshot(session_id: str):
        session = get_session(session_id)
        if session is None:
            return _error(404, "unknown_session", f"no session {session_id!r}")
        with session.lock:
            return _snapshot(session)

    @app.post("/sessions/{session_id}/fire")
    async def fire_node(session_id: str, request: Request):
        session = get_session(session_id)
        if session is None:
            return _error(404, "unknown_session", f"no session {session_id!r}")
        body = await request.json()
        node = body.get("node")
        with session.lock:
            graph = session.graph
            try:
                idx = graph.index(node)
            except GraphError:
                return _error(404, "unknown_node", f"no node {node!r}")
            pos = session.position
            if pos[idx] <= EPS_LEGAL:
                return _error(
                    409,
                    "illegal_move",
                    f"node {node!r} is not fireable",
                    detail={"node": node, "value": pos[idx]},
                )
            after = fire(graph, pos, node)
            del session.events[session.pointer:]
            session.events.append(
                FiringEvent(node=node, before=pos, after=after, fired_value=pos[idx])
            )
            session.pointer += 1
            session.updated = time.time()
            return _snapshot(session)

    @app.post("/sessions/{session_id}/undo")
    async def undo(session_id: str):
        session = get_session(session_id)
        if session is None:
            return _error(404, "unknown_session", f"no session {session_id!r}")
        with session.lock:
            if session.pointer > 0:
                session.pointer -= 1
                session.updated = time.time()
            return _snapshot(session)

    @app.get("/sessions/{session_id}/analysis")
    async def analysis(session_id: str):
        session = get_session(session_id)
        if session is None:
            return _error(404, "unknown_session", f"no session {session_id!r}")
        with session.lock:
            return _analysis(session)

    return app
