"""Episode logs: newline-delimited JSON, one object per decision tick.

The first line is a header (seed, sides, loadout); each following line
carries the full ground truth after that tick plus both sides' actions,
resolved commands, reward and mission index. Serialization is canonical
(sorted keys, shortest float repr), so identical runs produce identical
bytes and a log can be verified by re-simulation.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

from .config import RunConfig, episode_config_hash
from .mdp import BvrEnv, StepResult
from .simcore import (
    AircraftState,
    ControlCommand,
    MissileState,
    MissileWarning,
    RadarTrack,
    WorldState,
)
from .vec import Vec3

LOG_VERSION = 1


class ReplayError(ValueError):
    """Malformed log content; carries the offending line number."""

    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


def _vec(v: Vec3) -> list[float]:
    return [v.x, v.y, v.z]


def _aircraft_dict(ac: AircraftState) -> dict:
    return {
        "id": ac.id,
        "position": _vec(ac.position),
        "speed": ac.speed,
        "heading": ac.heading,
        "pitch": ac.pitch,
        "roll": ac.roll,
        "fuel": ac.fuel,
        "missiles": ac.missiles,
        "health": ac.health,
        "radar_on": ac.radar_on,
        "alive": ac.alive,
    }


def _missile_dict(m: MissileState) -> dict:
    return {
        "id": m.id,
        "shooter_id": m.shooter_id,
        "target_id": m.target_id,
        "position": _vec(m.position),
        "velocity": _vec(m.velocity),
        "time_of_flight": m.time_of_flight,
        "seeker_active": m.seeker_active,
        "supported": m.supported,
        "alive": m.alive,
    }


def _track_dict(t: RadarTrack) -> dict:
    return {"target_id": t.target_id, "position": _vec(t.position), "velocity": _vec(t.velocity), "age": t.age}


def _warning_dict(w: MissileWarning) -> dict:
    return {"missile_id": w.missile_id, "bearing": w.bearing, "range": w.range}


def _command_dict(cmd: ControlCommand) -> dict:
    return {
        "desired_heading": cmd.desired_heading,
        "desired_altitude": cmd.desired_altitude,
        "desired_speed": cmd.desired_speed,
        "fire": cmd.fire,
        "fire_target": cmd.fire_target,
        "radar_on": cmd.radar_on,
        "support_missiles": cmd.support_missiles,
        "provenance": list(cmd.provenance),
    }


def command_from_dict(d: dict) -> ControlCommand:
    return ControlCommand(
        desired_heading=d["desired_heading"],
        desired_altitude=d["desired_altitude"],
        desired_speed=d["desired_speed"],
        fire=d["fire"],
        fire_target=d["fire_target"],
        radar_on=d["radar_on"],
        support_missiles=d["support_missiles"],
        provenance=tuple(d["provenance"]),
    )


def tick_entry(world: WorldState, step: StepResult) -> dict:
    return {
        "type": "tick",
        "tick": world.tick,
        "sim_time": world.sim_time,
        "aircraft": [_aircraft_dict(ac) for ac in world.aircraft],
        "missiles": [_missile_dict(m) for m in world.missiles],
        "tracks": {str(k): [_track_dict(t) for t in v.values()] for k, v in world.tracks.items()},
        "warnings": {str(k): [_warning_dict(w) for w in v] for k, v in world.warnings.items()},
        "actions": {str(k): v for k, v in step.actions.items()},
        "commands": {str(k): _command_dict(v) for k, v in step.commands.items()},
        "reward": step.reward,
        "dca": step.phi,
        "outcome": step.outcome.value if step.done else None,
    }


def header_entry(
    cfg: RunConfig,
    seed: int,
    loadout: dict[int, int] | None,
    sides: dict[str, str],
    agent_side: int = 0,
) -> dict:
    return {
        "type": "header",
        "v": LOG_VERSION,
        "seed": seed,
        "loadout": {str(k): v for k, v in (loadout or {}).items()},
        "sides": sides,
        "agent_side": agent_side,
        "config_hash": episode_config_hash(cfg),
    }


def dumps_line(entry: dict) -> str:
    return json.dumps(entry, sort_keys=True, separators=(",", ":"))


class EpisodeLog:
    """In-memory builder for one episode's JSONL lines."""

    def __init__(
        self,
        cfg: RunConfig,
        seed: int,
        loadout: dict[int, int] | None,
        sides: dict[str, str],
        agent_side: int = 0,
    ):
        self.lines: list[str] = [dumps_line(header_entry(cfg, seed, loadout, sides, agent_side))]

    def append_tick(self, world: WorldState, step: StepResult) -> None:
        self.lines.append(dumps_line(tick_entry(world, step)))

    def text(self) -> str:
        return "\n".join(self.lines) + "\n"

    def write(self, path: str | Path) -> None:
        Path(path).write_text(self.text(), encoding="utf-8")


def parse_log(text: str) -> tuple[dict, list[dict]]:
    """Split a log into (header, ticks), raising ReplayError with the
    1-based line number on malformed content."""
    header = None
    ticks: list[dict] = []
    for i, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            entry = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ReplayError(f"bad JSON: {exc.msg}", i) from exc
        kind = entry.get("type")
        if kind == "header":
            if header is not None:
                raise ReplayError("duplicate header", i)
            header = entry
        elif kind == "tick":
            if header is None:
                raise ReplayError("tick before header", i)
            ticks.append(entry)
        else:
            raise ReplayError(f"unknown entry type {kind!r}", i)
    if header is None:
        raise ReplayError("missing header", 1)
    return header, ticks


@dataclass
class VerifyResult:
    ok: bool
    ticks: int
    first_diff_tick: int | None = None
    detail: str = ""


def resimulate(cfg: RunConfig, header: dict, ticks: list[dict]) -> list[str]:
    """Re-run an episode from its log.

    Ticks where both sides logged a tactic id are replayed through the
    tactic dispatcher (full decision-path check); sides that logged a raw
    command replay that command verbatim.
    """
    from .tactics import TacticAction

    env = BvrEnv(cfg)
    loadout = {int(k): v for k, v in (header.get("loadout") or {}).items()}
    agent_side = int(header.get("agent_side", 0))
    env.reset(header["seed"], opponent=None, loadout=loadout or None, agent_side=agent_side)

    lines = [dumps_line(header_entry(cfg, header["seed"], loadout or None, header["sides"], agent_side))]
    for entry in ticks:
        if env.done:
            break
        actions = entry["actions"]
        commands = entry["commands"]

        agent_key = str(agent_side)
        if actions.get(agent_key) is not None:
            agent_move: TacticAction | ControlCommand = TacticAction(actions[agent_key])
        else:
            agent_move = command_from_dict(commands[agent_key])

        opp_key = str(1 - agent_side)
        if opp_key in commands:
            if actions.get(opp_key) is not None:
                env.opponent = _OneShot(TacticAction(actions[opp_key]))
            else:
                env.opponent = _OneShot(command_from_dict(commands[opp_key]))
        else:
            env.opponent = None

        step = env.step(agent_move)
        lines.append(dumps_line(tick_entry(env.world, step)))
    return lines


class _OneShot:
    """Replays a single recorded move for the opponent side."""

    def __init__(self, move):
        self.move = move

    def act(self, world, side_id):
        return self.move


def verify_log(cfg: RunConfig, text: str) -> VerifyResult:
    """Re-simulate a log from its seed and action/command stream and diff
    byte-for-byte against the recorded lines."""
    header, ticks = parse_log(text)
    recorded = [line for line in text.splitlines() if line.strip()]
    resim = resimulate(cfg, header, ticks)
    if len(resim) != len(recorded):
        return VerifyResult(False, len(ticks), None, f"length mismatch: {len(recorded)} logged, {len(resim)} resimulated")
    for i, (a, b) in enumerate(zip(recorded, resim)):
        if a != b:
            tick = json.loads(a).get("tick") if i > 0 else -1
            return VerifyResult(False, len(ticks), tick, f"first divergence at log line {i + 1}")
    return VerifyResult(True, len(ticks))


def load_log_file(path: str | Path) -> str:
    return Path(path).read_text(encoding="utf-8")


def iter_lines(paths: Iterable[str | Path]):
    for p in paths:
        yield load_log_file(p)
