"""Live match service: websocket sessions against trained checkpoints.

One session loop per connection; sessions share only the read-only
checkpoint registry. The loop runs at tick_hz (scaled by the session's
time compression), latching the newest human action between ticks.
"""
from __future__ import annotations

import asyncio
import json
import secrets
import time
from pathlib import Path

from fastapi import FastAPI, WebSocket, WebSocketDisconnect
from fastapi.responses import JSONResponse, PlainTextResponse
from fastapi.staticfiles import StaticFiles
from pydantic import ValidationError

from ..config import RunConfig
from ..harness.baselines import NetPolicy
from ..rainbow.checkpoint import CheckpointError, load_checkpoint
from .session import MatchSession, Phase
from .wire import (
    ActionMsg,
    CheckpointInfo,
    ErrorMsg,
    JoinMsg,
    PingMsg,
    PongMsg,
    SessionInfo,
    inbound_adapter,
)


class CheckpointRegistry:
    """Read-only view of a directory of .ckpt files."""

    def __init__(self, directory: str | Path, cfg: RunConfig):
        self.directory = Path(directory)
        self.cfg = cfg
        self._cache: dict[str, NetPolicy] = {}

    def list(self) -> list[CheckpointInfo]:
        out = []
        if not self.directory.is_dir():
            return out
        for path in sorted(self.directory.glob("*.ckpt")):
            try:
                net = load_checkpoint(path, self.cfg.rainbow)
            except CheckpointError:
                continue
            out.append(CheckpointInfo(id=path.stem, path=str(path), atoms=net.atoms, actions=net.n_actions))
        return out

    def policy(self, checkpoint_id: str) -> NetPolicy | None:
        if checkpoint_id in self._cache:
            return self._cache[checkpoint_id]
        path = self.directory / f"{checkpoint_id}.ckpt"
        if not path.is_file():
            return None
        try:
            policy = NetPolicy.from_checkpoint(path, self.cfg, name=checkpoint_id)
        except CheckpointError:
            return None
        self._cache[checkpoint_id] = policy
        return policy


def create_app(cfg: RunConfig) -> FastAPI:
    app = FastAPI(title="bvrsim match service", version="1")
    service = cfg.service
    registry = CheckpointRegistry(service.checkpoint_dir, cfg)
    sessions: dict[str, MatchSession] = {}
    replay_dir = Path(service.replay_dir)
    app.state.registry = registry
    app.state.sessions = sessions

    @app.get("/health")
    def health():
        return {"status": "ok", "checkpoints": len(registry.list())}

    @app.get("/v1/checkpoints")
    def list_checkpoints() -> list[CheckpointInfo]:
        return registry.list()

    @app.get("/v1/sessions")
    def list_sessions() -> list[SessionInfo]:
        return [
            SessionInfo(
                session=s.session_id,
                phase=s.phase.value,
                tick=s.tick,
                checkpoint=s.checkpoint_id,
                outcome=s.outcome.value if s.outcome else None,
            )
            for s in sessions.values()
        ]

    @app.get("/v1/sessions/{session_id}")
    def session_info(session_id: str):
        s = sessions.get(session_id)
        if s is None:
            return JSONResponse(status_code=404, content={"code": "SESSION_NOT_FOUND"})
        return SessionInfo(
            session=s.session_id,
            phase=s.phase.value,
            tick=s.tick,
            checkpoint=s.checkpoint_id,
            outcome=s.outcome.value if s.outcome else None,
        )

    @app.get("/v1/sessions/{session_id}/replay")
    def session_replay(session_id: str):
        """Full-truth episode log, available once the session finished."""
        s = sessions.get(session_id)
        if s is None:
            path = replay_dir / f"{session_id}.replay.jsonl"
            if path.is_file():
                return PlainTextResponse(path.read_text(encoding="utf-8"), media_type="application/x-ndjson")
            return JSONResponse(status_code=404, content={"code": "SESSION_NOT_FOUND"})
        if s.phase != Phase.FINISHED:
            return JSONResponse(status_code=409, content={"code": "NOT_FINISHED"})
        return PlainTextResponse(s.log.text(), media_type="application/x-ndjson")

    @app.websocket("/ws")
    async def match_socket(ws: WebSocket):
        await ws.accept()
        session: MatchSession | None = None
        try:
            session = await _run_match(ws, cfg, registry, sessions)
        except WebSocketDisconnect:
            pass
        finally:
            if session is not None:
                if session.phase == Phase.RUNNING:
                    session.abandon()
                _persist(session, replay_dir)

    if service.static_dir and Path(service.static_dir).is_dir():
        app.mount("/", StaticFiles(directory=service.static_dir, html=True), name="ui")

    return app


async def _send(ws: WebSocket, session: MatchSession | None, model) -> None:
    payload = model.model_dump(by_alias=True)
    if session is not None:
        session.record("out", payload)
    await ws.send_text(json.dumps(payload, sort_keys=True))


async def _run_match(
    ws: WebSocket,
    cfg: RunConfig,
    registry: CheckpointRegistry,
    sessions: dict[str, MatchSession],
) -> MatchSession | None:
    service = cfg.service
    try:
        raw = await asyncio.wait_for(ws.receive_json(), timeout=service.client_timeout_s)
    except (asyncio.TimeoutError, json.JSONDecodeError):
        await _send(ws, None, ErrorMsg(code="BAD_JOIN", message="expected a join message"))
        await ws.close()
        return None

    try:
        join = inbound_adapter.validate_python(raw)
    except ValidationError as exc:
        await _send(ws, None, ErrorMsg(code="SCHEMA", message=str(exc.errors()[0]["msg"])))
        await ws.close()
        return None
    if not isinstance(join, JoinMsg):
        await _send(ws, None, ErrorMsg(code="BAD_JOIN", message="first message must be join"))
        await ws.close()
        return None

    policy = registry.policy(join.checkpoint)
    if policy is None:
        await _send(ws, None, ErrorMsg(code="CKPT_NOT_FOUND", message=f"unknown checkpoint {join.checkpoint!r}"))
        await ws.close()
        return None

    session = MatchSession(
        session_id=secrets.token_hex(8),
        cfg=cfg,
        checkpoint_id=join.checkpoint,
        seed=join.seed,
        human_side=join.side,
        agent_policy=policy,
        compression=join.compression or service.compression,
    )
    session.record("in", raw)
    sessions[session.session_id] = session
    await _send(ws, session, session.start())

    inbox: asyncio.Queue = asyncio.Queue()

    async def receiver():
        while True:
            inbox.put_nowait(await ws.receive_json())

    recv_task = asyncio.create_task(receiver())
    period = 1.0 / (service.tick_hz * session.compression)
    last_heard = time.monotonic()
    last_ping = time.monotonic()
    try:
        while session.phase == Phase.RUNNING:
            deadline = time.monotonic() + period
            while True:
                timeout = deadline - time.monotonic()
                if timeout <= 0:
                    break
                try:
                    raw = await asyncio.wait_for(inbox.get(), timeout=timeout)
                except asyncio.TimeoutError:
                    break
                last_heard = time.monotonic()
                session.record("in", raw if isinstance(raw, dict) else {"raw": str(raw)})
                try:
                    msg = inbound_adapter.validate_python(raw)
                except ValidationError as exc:
                    await _send(
                        ws, session, ErrorMsg(session=session.session_id, tick=session.tick,
                                              code="SCHEMA", message=str(exc.errors()[0]["msg"]))
                    )
                    continue
                if isinstance(msg, ActionMsg):
                    if msg.session != session.session_id:
                        await _send(
                            ws, session, ErrorMsg(session=session.session_id, tick=session.tick,
                                                  code="WRONG_SESSION", message="action for another session")
                        )
                    else:
                        session.latch(msg.action)
                elif isinstance(msg, JoinMsg):
                    await _send(
                        ws, session, ErrorMsg(session=session.session_id, tick=session.tick,
                                              code="ALREADY_JOINED", message="session already running")
                    )
                # PongMsg refreshes last_heard above

            if time.monotonic() - last_heard > service.client_timeout_s:
                session.abandon()
                break

            ack, state, result = session.advance_tick()
            await _send(ws, session, ack)
            await _send(ws, session, state)
            if result is not None:
                await _send(ws, session, result)
                break
            if time.monotonic() - last_ping >= service.ping_interval_s:
                last_ping = time.monotonic()
                await _send(ws, session, PingMsg(session=session.session_id, tick=session.tick))
    except (WebSocketDisconnect, RuntimeError):
        if session.phase == Phase.RUNNING:
            session.abandon()
    finally:
        recv_task.cancel()
    try:
        await ws.close()
    except (RuntimeError, WebSocketDisconnect):
        pass
    return session


def _persist(session: MatchSession, replay_dir: Path) -> None:
    replay_dir.mkdir(parents=True, exist_ok=True)
    if session.log is not None:
        (replay_dir / f"{session.session_id}.replay.jsonl").write_text(
            session.log.text(), encoding="utf-8"
        )
    transcript_path = replay_dir / f"{session.session_id}.transcript.jsonl"
    with open(transcript_path, "w", encoding="utf-8") as fh:
        for entry in session.transcript:
            fh.write(json.dumps(entry, sort_keys=True) + "\n")
