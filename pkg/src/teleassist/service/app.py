"""FastAPI app: WebSocket teleop sessions plus a small REST surface.

Each WebSocket connection owns one session and one control loop. In live mode
a 20 Hz ticker consumes the newest client command (stale commands count as
idle); in lockstep mode every command message advances exactly one tick, which
makes replays deterministic.
"""

from __future__ import annotations

import asyncio
import logging
import os
from dataclasses import replace

import numpy as np
from fastapi import FastAPI, WebSocket, WebSocketDisconnect
from fastapi.staticfiles import StaticFiles

from .. import harness
from ..harness import ControlLoop, derive_seed
from . import schemas
from .engine import LIVE, PAUSED, RETRAINING, TeleopEngine

log = logging.getLogger(__name__)

STALE_TICKS = 2
LIVE_TICK_CAP = 12000  # service sessions run far longer than scripted trials


class Session:
    def __init__(self, engine: TeleopEngine):
        self.id = engine.next_session_id()
        self.engine = engine
        self.method = "ours"
        self.pending_method: str | None = None
        self.loop: ControlLoop | None = None
        self.bundle_version = engine.bundle.version
        self.mailbox: tuple | None = None  # (vector, tick posted)
        self.mode = PAUSED
        self.interactions = 0

    @property
    def live(self) -> bool:
        return self.mode == LIVE and self.loop is not None

    def start(self, task_hint: str | None):
        if self.pending_method:
            self.method = self.pending_method
            self.pending_method = None
        self.interactions += 1
        self.bundle_version = self.engine.bundle.version
        seed = derive_seed(self.engine.scenario.seed, "session", self.id, self.interactions)
        runtime = self.engine.make_runtime(self.method, seed)
        cfg = replace(self.engine.scenario.sim, t_max=LIVE_TICK_CAP)
        self.loop = ControlLoop(
            task=None, runtime=runtime, cfg=cfg, start=self.engine.scenario.start,
            record_id=f"live-{self.id}-{self.interactions}", seed=seed,
        )
        if task_hint:
            self.loop.record.label = task_hint
        self.mailbox = None
        self.mode = LIVE

    def advance(self, command: np.ndarray | None = None) -> dict:
        """One tick; ``command`` overrides the mailbox (lockstep path)."""
        loop = self.loop
        loop.begin_tick()
        a_h = np.zeros_like(loop.state)
        if command is not None:
            a_h = command
        elif self.mailbox is not None:
            v, posted = self.mailbox
            if loop.tick_index - posted < STALE_TICKS:
                a_h = v
        rec = loop.apply(a_h)
        return self._frame(rec)

    def _frame(self, step) -> dict:
        return schemas.FrameMsg(
            tick=step.tick,
            state=[float(x) for x in step.state],
            a_h=[float(x) for x in step.a_h],
            a_r=[float(x) for x in step.a_r],
            beta=float(step.beta),
            bundle=self.bundle_version,
        ).model_dump()

    def end(self):
        """Finish the loop; returns (record, final frame)."""
        record = self.loop.finish()
        terminal = record.steps[-1]
        frame = self._frame(terminal)
        self.mode = PAUSED
        self.loop = None
        self.mailbox = None
        return record, frame

    def status(self, detail: str | None = None) -> dict:
        return schemas.StatusMsg(
            mode=self.mode if self.engine.mode != RETRAINING else RETRAINING,
            bundle=self.engine.bundle.version,
            dataset_size=len(self.engine.dataset),
            method=self.method,
            detail=detail,
        ).model_dump()


async def _live_ticker(ws: WebSocket, session: Session):
    clock = asyncio.get_event_loop()
    dt = session.engine.scenario.sim.dt
    next_t = clock.time() + dt
    while session.live and not session.loop.finished:
        frame = session.advance()
        await ws.send_json(frame)
        delay = next_t - clock.time()
        next_t += dt
        if delay > 0:
            await asyncio.sleep(delay)
        else:  # fell behind; resynchronize rather than bursting
            next_t = clock.time() + dt
    if session.live and session.loop.finished:
        session.mode = PAUSED
        await ws.send_json(session.status(detail="tick limit reached; interaction paused"))


async def _finish_interaction(ws: WebSocket, session: Session, lockstep: bool):
    engine = session.engine
    record, final_frame = session.end()
    await ws.send_json(final_frame)
    if not any(s.commanded for s in record.steps):
        await ws.send_json(session.status(detail="empty interaction discarded"))
        return
    due = engine.end_interaction(record)
    if not due:
        await ws.send_json(session.status(detail="interaction stored"))
        return
    engine.mode = RETRAINING
    await ws.send_json(session.status(detail="retraining"))
    if lockstep:
        ok, detail = engine.retrain()
    else:
        ok, detail = await asyncio.to_thread(engine.retrain)
    engine.mode = LIVE
    await ws.send_json(session.status(detail=detail if ok else f"kept old bundle: {detail}"))


def create_app(engine: TeleopEngine, lockstep: bool = False, static_dir: str | None = None) -> FastAPI:
    app = FastAPI(title="teleassist service")
    app.state.engine = engine
    sessions: dict[int, Session] = {}

    @app.get("/api/health", response_model=schemas.HealthResponse)
    def health():
        return schemas.HealthResponse()

    @app.get("/api/scene", response_model=schemas.SceneMsg)
    def scene():
        return schemas.SceneMsg.model_validate(engine.scene_dict())

    @app.get("/api/state", response_model=schemas.ServerState)
    def state():
        return schemas.ServerState(
            mode=engine.mode,
            bundle_version=engine.bundle.version,
            dataset_size=len(engine.dataset),
            sessions=len(sessions),
            retrain_cadence=engine.retrain_cadence,
        )

    @app.post("/api/retrain", response_model=schemas.RetrainResponse)
    def retrain_now():
        engine.mode = RETRAINING
        ok, detail = engine.retrain()
        engine.mode = LIVE
        return schemas.RetrainResponse(ok=ok, bundle_version=engine.bundle.version, detail=detail)

    @app.websocket("/ws")
    async def ws_endpoint(ws: WebSocket):
        await ws.accept()
        session = Session(engine)
        sessions[session.id] = session
        ticker: asyncio.Task | None = None
        await ws.send_json(engine.scene_dict())
        await ws.send_json(session.status())
        try:
            while True:
                data = await ws.receive_json()
                try:
                    msg = schemas.parse_client_message(data)
                except Exception as exc:
                    await ws.send_json(session.status(detail=f"bad message: {exc}"))
                    continue
                if isinstance(msg, schemas.StartMsg):
                    if session.live:
                        await ws.send_json(session.status(detail="already live"))
                        continue
                    session.start(msg.task_hint)
                    await ws.send_json(session.status())
                    if not lockstep:
                        ticker = asyncio.create_task(_live_ticker(ws, session))
                elif isinstance(msg, schemas.CommandMsg):
                    if not session.live:
                        continue
                    v = np.asarray(msg.v, dtype=float)
                    if v.shape != session.loop.state.shape or not np.all(np.isfinite(v)):
                        await ws.send_json(session.status(detail="bad command vector"))
                        continue
                    if lockstep:
                        frame = session.advance(command=v)
                        await ws.send_json(frame)
                    else:
                        session.mailbox = (v, session.loop.tick_index)
                elif isinstance(msg, schemas.EndMsg):
                    if not session.live:
                        await ws.send_json(session.status(detail="no live interaction"))
                        continue
                    if ticker:
                        session.mode = PAUSED  # stop the ticker before finishing
                        await ticker
                        ticker = None
                        session.mode = LIVE
                    await _finish_interaction(ws, session, lockstep)
                elif isinstance(msg, schemas.SetMethodMsg):
                    if session.live:
                        session.pending_method = msg.name
                        await ws.send_json(session.status(detail="method change queued for next start"))
                    else:
                        session.method = msg.name
                        await ws.send_json(session.status())
        except WebSocketDisconnect:
            pass
        finally:
            if ticker:
                session.mode = PAUSED
                ticker.cancel()
            sessions.pop(session.id, None)

    static = static_dir or os.path.join(os.path.dirname(__file__), "..", "..", "..", "frontend", "dist")
    if os.path.isdir(static):
        app.mount("/", StaticFiles(directory=static, html=True), name="ui")
    return app
