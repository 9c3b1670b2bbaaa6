"""Policies: scripted baselines and network-backed players.

Every policy exposes act(world, side_id) returning either a TacticAction
(resolved through the tactic dispatcher) or a raw ControlCommand (for
behaviors the six tactics cannot express, like flying a fixed heading).
"""
from __future__ import annotations

import numpy as np

from ..config import RunConfig
from ..mdp import build_observation
from ..rainbow.checkpoint import load_checkpoint
from ..rainbow.network import QNetwork
from ..simcore import WorldState, hold_command, _boresight_angle
from ..tactics import TacticAction
from ..vec import distance


class StraightFlier:
    """Unarmed target drone: holds its spawn heading and altitude."""

    name = "straight"
    spawn_missiles = 0

    def act(self, world: WorldState, side_id: int):
        return hold_command(world.aircraft_by_id(side_id))


class PureCap:
    """Flies the racetrack forever, never engages."""

    name = "cap"
    spawn_missiles = None

    def act(self, world: WorldState, side_id: int):
        return TacticAction.CAP


class AggressiveCommit:
    """Closes on any track, fires inside the envelope, supports its shots."""

    name = "commit"
    spawn_missiles = None

    def __init__(self, cfg: RunConfig):
        self.cfg = cfg

    def act(self, world: WorldState, side_id: int):
        actor = world.aircraft_by_id(side_id)
        pending = [m for m in world.missiles if m.alive and m.shooter_id == side_id and not m.seeker_active]
        if pending:
            return TacticAction.SUPPORT
        tracks = [t for t in world.tracks_for(side_id).values() if t.age <= world.params.track_timeout]
        if not tracks:
            return TacticAction.CAP
        nearest = min(tracks, key=lambda t: (distance(actor.position, t.position), t.target_id))
        in_envelope = (
            actor.missiles > 0
            and distance(actor.position, nearest.position) <= self.cfg.tactics.fire_max_range
            and _boresight_angle(actor, nearest.position) <= world.params.gimbal_limit
        )
        return TacticAction.FIRE if in_envelope else TacticAction.COMMIT


class NetPolicy:
    """Greedy zero-noise player over a value network (evaluation mode)."""

    spawn_missiles = None

    def __init__(self, net: QNetwork, cfg: RunConfig, name: str = "net"):
        self.net = net
        self.cfg = cfg
        self.name = name

    @classmethod
    def from_checkpoint(cls, path, cfg: RunConfig, name: str | None = None) -> "NetPolicy":
        net = load_checkpoint(path, cfg.rainbow)
        return cls(net, cfg, name or str(path))

    def act(self, world: WorldState, side_id: int):
        obs = build_observation(world, side_id, self.cfg.mdp)
        q = self.net.q_values(self.net.forward(obs, use_noise=False))[0]
        return TacticAction(int(np.argmax(q)))


BASELINE_NAMES = ("straight", "cap", "commit")


def make_baseline(name: str, cfg: RunConfig):
    if name == "straight":
        return StraightFlier()
    if name == "cap":
        return PureCap()
    if name == "commit":
        return AggressiveCommit(cfg)
    raise ValueError(f"unknown baseline {name!r}")
