"""Match session state: env stepping, fog-of-war filtering, transcripts."""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

from ..config import RunConfig
from ..mdp import BvrEnv, _nearest_fresh_track
from ..replaylog import EpisodeLog
from ..simcore import Outcome, WorldState
from ..tactics import TacticAction
from ..vec import angle_between, distance
from .wire import (
    AckMsg,
    JoinedMsg,
    Ownship,
    OwnMissileMsg,
    ResultMsg,
    StateMsg,
    StationMsg,
    Stores,
    TrackMsg,
    WarningMsg,
)


class Phase(str, Enum):
    LOBBY = "lobby"
    RUNNING = "running"
    FINISHED = "finished"


def filter_state(world: WorldState, human_side: int, session_id: str, cfg: RunConfig) -> StateMsg:
    """Fog-of-war state payload: the human side's truth, its sensor picture
    and its own missiles; never opponent ground truth."""
    ac = world.aircraft_by_id(human_side)
    vel = ac.velocity()
    track = _nearest_fresh_track(world, ac)
    if track is None:
        rel_d = rel_v = rel_a = None
    else:
        rel_d = distance(ac.position, track.position)
        rel_v = ac.speed - track.velocity.norm()
        rel_a = angle_between(vel, track.position - ac.position)

    tracks = [
        TrackMsg(
            target_id=t.target_id,
            x=t.position.x,
            y=t.position.y,
            z=t.position.z,
            vx=t.velocity.x,
            vy=t.velocity.y,
            vz=t.velocity.z,
            age=t.age,
        )
        for t in world.tracks_for(human_side).values()
    ]
    warnings = [
        WarningMsg(missile_id=w.missile_id, bearing=w.bearing, range=w.range)
        for w in world.warnings_for(human_side)
    ]
    own_missiles = [
        OwnMissileMsg(
            id=m.id,
            target_id=m.target_id,
            x=m.position.x,
            y=m.position.y,
            z=m.position.z,
            seeker_active=m.seeker_active,
            supported=m.supported,
        )
        for m in world.missiles
        if m.alive and m.shooter_id == human_side
    ]
    station = world.cap_station[human_side]
    return StateMsg(
        session=session_id,
        tick=world.tick // 10,
        sim_time=world.sim_time,
        ownship=Ownship(
            x=ac.position.x,
            y=ac.position.y,
            z=ac.position.z,
            vx=vel.x,
            vy=vel.y,
            vz=vel.z,
            roll=ac.roll,
            pitch=ac.pitch,
            yaw=ac.heading,
            rel_distance=rel_d,
            rel_speed=rel_v,
            rel_angle=rel_a,
            fuel=ac.fuel,
            missiles=ac.missiles,
            health=ac.health,
            sensor=ac.radar_on,
        ),
        tracks=tracks,
        warnings=warnings,
        own_missiles=own_missiles,
        stores=Stores(fuel=ac.fuel, missiles=ac.missiles),
        station=StationMsg(x=station.x, y=station.y, z=station.z),
    )


@dataclass
class MatchSession:
    """One human-vs-checkpoint engagement, stepped at the decision cadence.

    The human side's last action latches (default CAP) until replaced; the
    agent side plays the loaded checkpoint with zero exploration noise.
    """

    session_id: str
    cfg: RunConfig
    checkpoint_id: str
    seed: int
    human_side: int
    agent_policy: object
    compression: float = 1.0
    phase: Phase = Phase.LOBBY
    latched_action: TacticAction = TacticAction.CAP
    tick: int = 0
    outcome: Outcome | None = None
    final_return: float = 0.0
    final_dca: float = 0.0
    transcript: list[dict] = field(default_factory=list)
    human_actions: list[int] = field(default_factory=list)
    env: BvrEnv = None  # type: ignore[assignment]
    log: EpisodeLog = None  # type: ignore[assignment]

    def start(self) -> JoinedMsg:
        self.env = BvrEnv(self.cfg)
        human = _HumanLatch(self)
        # the human always flies side 1's seat in the world; the learning
        # agent convention keeps the checkpoint on side 0 unless swapped
        if self.human_side == 0:
            self.env.reset(self.seed, opponent=self.agent_policy)
        else:
            self.env.reset(self.seed, opponent=human)
        self.log = EpisodeLog(
            self.cfg,
            self.seed,
            None,
            {"0": "human" if self.human_side == 0 else self.checkpoint_id,
             "1": "human" if self.human_side == 1 else self.checkpoint_id},
        )
        self.phase = Phase.RUNNING
        service = self.cfg.service
        return JoinedMsg(
            session=self.session_id,
            tick=0,
            side=self.human_side,
            checkpoint=self.checkpoint_id,
            tick_hz=service.tick_hz,
            compression=self.compression,
            t_max=self.cfg.sim.t_max,
        )

    def latch(self, action: int) -> None:
        self.latched_action = TacticAction(action)

    def advance_tick(self) -> tuple[AckMsg, StateMsg, ResultMsg | None]:
        """Step one decision tick with the latched human action and the
        agent's greedy action; returns (ack, filtered state, result?)."""
        if self.phase != Phase.RUNNING:
            raise RuntimeError("session not running")
        env = self.env
        if self.human_side == 0:
            step = env.step(self.latched_action)
            human_cmd = step.commands.get(0)
        else:
            agent_move = self.agent_policy.act(env.world, 0)
            step = env.step(agent_move)
            human_cmd = step.commands.get(1)
        self.tick += 1
        self.human_actions.append(int(self.latched_action))
        self.final_return += step.reward if self.human_side == 0 else step.reward_opponent
        self.final_dca = step.phi if self.human_side == 0 else step.phi_opponent
        self.log.append_tick(env.world, step)

        ack = AckMsg(
            session=self.session_id,
            tick=self.tick,
            action=int(self.latched_action),
            provenance=list(human_cmd.provenance) if human_cmd else [],
        )
        state = filter_state(env.world, self.human_side, self.session_id, self.cfg)
        result = None
        if env.done:
            self.phase = Phase.FINISHED
            self.outcome = self._outcome_for_human(env.outcome)
            result = ResultMsg(
                session=self.session_id,
                tick=self.tick,
                outcome=self.outcome.value,
                dca_final=self.final_dca,
                **{"return": self.final_return},
            )
        return ack, state, result

    def abandon(self) -> None:
        """Client silence or disconnect: close the book as a draw."""
        self.phase = Phase.FINISHED
        self.outcome = Outcome.DRAW

    def _outcome_for_human(self, outcome: Outcome) -> Outcome:
        if self.human_side == 0:
            return outcome
        if outcome == Outcome.AGENT_WIN:
            return Outcome.AGENT_LOSS
        if outcome == Outcome.AGENT_LOSS:
            return Outcome.AGENT_WIN
        return outcome

    def record(self, direction: str, payload: dict) -> None:
        self.transcript.append({"dir": direction, "tick": self.tick, "msg": payload})


class _HumanLatch:
    """Policy adapter exposing the latched human action to the env."""

    name = "human"
    spawn_missiles = None

    def __init__(self, session: MatchSession):
        self.session = session

    def act(self, world, side_id):
        return self.session.latched_action
