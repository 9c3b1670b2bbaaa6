"""Agent-side contract: observation vector, mission-index reward, episodes.

The observation is a fixed 16-feature vector, every entry normalized to
[-1, 1]. The reward is the per-tick difference of a defensive-counter-air
success potential (survive, hold station, keep stores, deny the area)
plus a terminal win/loss bonus, so per-episode shaping telescopes.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .config import MdpConfig, RewardConfig, RunConfig
from .simcore import (
    AircraftState,
    ControlCommand,
    Outcome,
    WorldState,
    check_termination,
    radar_scan,
    world_step,
)
from .tactics import TacticAction, execute_tactic
from .vec import Vec3, angle_between, bearing_to, clamp, distance, horizontal_distance

OBS_DIM = 16
NO_TARGET_SENTINEL = (1.0, 0.0, 0.0)  # (rel_distance, rel_speed, rel_angle)


def _nearest_fresh_track(world: WorldState, agent: AircraftState):
    best = None
    best_key = None
    for track in world.tracks_for(agent.id).values():
        if track.age > world.params.track_timeout:
            continue
        key = (distance(agent.position, track.position), track.target_id)
        if best_key is None or key < best_key:
            best, best_key = track, key
    return best


def _stores_fractions(agent: AircraftState) -> tuple[float, float]:
    fuel_frac = agent.fuel / agent.initial_fuel if agent.initial_fuel > 0 else 0.0
    missiles_frac = agent.missiles / agent.initial_missiles if agent.initial_missiles > 0 else 0.0
    return fuel_frac, missiles_frac


def build_observation(world: WorldState, agent_id: int, mcfg: MdpConfig) -> np.ndarray:
    """The 16-feature agent state, normalized to [-1, 1].

    Order: p_x, p_y, p_z, v_x, v_y, v_z, roll, pitch, yaw, rel_distance,
    rel_speed, rel_angle, fuel_frac, missiles_frac, health, sensor_status.
    A dead agent reports zeroed motion, the no-target sentinel and -1
    health/sensor; with no fresh track the relative block is (1, 0, 0).
    """
    agent = world.aircraft_by_id(agent_id)
    if agent is None:
        raise ValueError(f"unknown agent {agent_id}")
    p = world.params
    fuel_frac, missiles_frac = _stores_fractions(agent)

    if not agent.alive:
        obs = np.zeros(OBS_DIM, dtype=np.float32)
        obs[9:12] = NO_TARGET_SENTINEL
        obs[12] = clamp(fuel_frac, 0.0, 1.0)
        obs[13] = clamp(missiles_frac, 0.0, 1.0)
        obs[14] = -1.0
        obs[15] = -1.0
        return obs

    half = mcfg.arena_half_extent
    vel = agent.velocity()
    track = _nearest_fresh_track(world, agent)
    if track is None:
        rel = NO_TARGET_SENTINEL
    else:
        rel_d = clamp(distance(agent.position, track.position) / mcfg.obs_distance_norm, 0.0, 1.0)
        rel_v = clamp((agent.speed - track.velocity.norm()) / p.v_max, -1.0, 1.0)
        rel_a = angle_between(vel, track.position - agent.position) / math.pi
        rel = (rel_d, rel_v, rel_a)

    obs = np.array(
        [
            clamp(agent.position.x / half, -1.0, 1.0),
            clamp(agent.position.y / half, -1.0, 1.0),
            clamp(agent.position.z / half, -1.0, 1.0),
            clamp(vel.x / p.v_max, -1.0, 1.0),
            clamp(vel.y / p.v_max, -1.0, 1.0),
            clamp(vel.z / p.v_max, -1.0, 1.0),
            clamp(agent.roll / math.pi, -1.0, 1.0),
            clamp(agent.pitch / (math.pi / 2.0), -1.0, 1.0),
            clamp(agent.heading / math.pi, -1.0, 1.0),
            rel[0],
            rel[1],
            rel[2],
            clamp(fuel_frac, 0.0, 1.0),
            clamp(missiles_frac, 0.0, 1.0),
            clamp(2.0 * agent.health - 1.0, -1.0, 1.0),
            1.0 if agent.radar_on else -1.0,
        ],
        dtype=np.float32,
    )
    return obs


def dca_index(world: WorldState, agent_id: int, cfg: RewardConfig) -> float:
    """Mission-success potential in [0, 1].

    Survival, station-holding and area-denial terms are gated on the agent
    being alive (a dead defender holds and denies nothing); weapon and fuel
    stores count regardless, matching the terminal bookkeeping.
    """
    agent = world.aircraft_by_id(agent_id)
    if agent is None:
        raise ValueError(f"unknown agent {agent_id}")
    station = world.cap_station[agent_id]
    fuel_frac, missiles_frac = _stores_fractions(agent)
    alive = 1.0 if agent.alive else 0.0

    d_station = horizontal_distance(agent.position, station)
    cap_term = math.exp(-(d_station * d_station) / (2.0 * cfg.station_sigma**2))

    presence = 0.0
    for opp in world.aircraft:
        if opp.id == agent_id or not opp.alive:
            continue
        d_opp = horizontal_distance(opp.position, station)
        if d_opp <= cfg.defended_radius:
            presence = 1.0
        else:
            over = d_opp - cfg.defended_radius
            presence = max(presence, math.exp(-(over * over) / (2.0 * cfg.station_sigma**2)))

    phi = (
        cfg.w_surv * alive
        + cfg.w_cap * cap_term * alive
        + cfg.w_wpn * clamp(missiles_frac, 0.0, 1.0)
        + cfg.w_fuel * clamp(fuel_frac, 0.0, 1.0)
        + cfg.w_threat * (1.0 - presence) * alive
    )
    return clamp(phi, 0.0, 1.0)


def terminal_bonus(outcome: Outcome, cfg: RewardConfig) -> float:
    if outcome == Outcome.AGENT_WIN:
        return cfg.terminal_win
    if outcome == Outcome.AGENT_LOSS:
        return cfg.terminal_loss
    return 0.0


def compute_reward(prev: WorldState, nxt: WorldState, agent_id: int, cfg: RewardConfig) -> float:
    """Potential difference plus the terminal bonus; |r| <= 2 per step."""
    r = dca_index(nxt, agent_id, cfg) - dca_index(prev, agent_id, cfg)
    outcome = check_termination(nxt, agent_id)
    if outcome != Outcome.ONGOING:
        r += terminal_bonus(outcome, cfg)
    return r


@dataclass
class StepResult:
    observation: np.ndarray
    reward: float
    done: bool
    outcome: Outcome
    phi: float
    actions: dict[int, int | None]
    commands: dict[int, ControlCommand]
    reward_opponent: float = 0.0
    phi_opponent: float = 0.0
    truncated: bool = False  # episode ended by the clock, not by a kill


class BvrEnv:
    """Episodic 1-v-1 engagement: reset spawns the geometry, step runs one
    decision tick (ten physics steps) for both sides.

    The agent side supplies a TacticAction per tick; the opponent policy is
    any object with act(world, side_id) returning a TacticAction or a raw
    ControlCommand. Fully deterministic in (seed, action stream, policy).
    """

    AGENT_ID = 0
    OPPONENT_ID = 1

    def __init__(self, cfg: RunConfig):
        self.cfg = cfg
        self.world: WorldState | None = None
        self.opponent = None
        self.done = True
        self.outcome = Outcome.ONGOING
        self.phi = 0.0
        self.seed = 0
        self.agent_id = self.AGENT_ID
        self.opponent_id = self.OPPONENT_ID

    def reset(
        self,
        seed: int,
        opponent=None,
        loadout: dict[int, int] | None = None,
        agent_side: int = 0,
    ) -> np.ndarray:
        """Spawn a fresh engagement, deterministic in the seed.

        Side 0 starts on its patrol station heading for the arena center;
        side 1 starts 70-90 km out at a randomized bearing, inbound. The
        learner's observations/rewards follow agent_side (0 = defender
        seat, 1 = attacker seat; the world itself is identical). loadout
        optionally overrides per-side missile counts.
        """
        m = self.cfg.mdp
        sim = self.cfg.sim
        rng = np.random.Generator(np.random.Philox(seed))

        spawn_distance = float(rng.uniform(m.spawn_distance_min, m.spawn_distance_max))
        bearing_offset = float(
            rng.uniform(-math.radians(m.spawn_bearing_spread_deg), math.radians(m.spawn_bearing_spread_deg))
        )
        agent_alt = float(rng.uniform(m.spawn_alt_min, m.spawn_alt_max))
        opp_alt = float(rng.uniform(m.spawn_alt_min, m.spawn_alt_max))

        station_z = 0.5 * (m.spawn_alt_min + m.spawn_alt_max)
        stations = {
            self.AGENT_ID: Vec3(-m.station_offset, 0.0, station_z),
            self.OPPONENT_ID: Vec3(m.station_offset, 0.0, station_z),
        }
        agent_pos = Vec3(-m.station_offset, 0.0, agent_alt)
        center = Vec3(0.0, 0.0, agent_alt)
        base_bearing = bearing_to(agent_pos, center)
        opp_bearing = base_bearing + bearing_offset
        opp_pos = Vec3(
            agent_pos.x + spawn_distance * math.cos(opp_bearing),
            agent_pos.y + spawn_distance * math.sin(opp_bearing),
            opp_alt,
        )

        loadout = loadout or {}
        aircraft = []
        for side, pos, alt in ((self.AGENT_ID, agent_pos, agent_alt), (self.OPPONENT_ID, opp_pos, opp_alt)):
            missiles = loadout.get(side, sim.initial_missiles)
            heading = bearing_to(pos, Vec3(0.0, 0.0, alt))
            aircraft.append(
                AircraftState(
                    id=side,
                    position=pos,
                    speed=m.spawn_speed,
                    heading=heading,
                    fuel=sim.fuel_initial,
                    missiles=missiles,
                    initial_fuel=sim.fuel_initial,
                    initial_missiles=missiles,
                )
            )

        world = WorldState(params=sim, aircraft=aircraft, cap_station=stations, rng_seed=seed)
        for ac in world.aircraft:
            detections, warnings = radar_scan(world, ac.id)
            store = world.tracks_for(ac.id)
            for trk in detections:
                store[trk.target_id] = trk
            world.warnings[ac.id] = warnings

        self.agent_id = int(agent_side)
        self.opponent_id = 1 - self.agent_id
        self.world = world
        self.opponent = opponent
        self.done = False
        self.outcome = Outcome.ONGOING
        self.phi = dca_index(world, self.agent_id, self.cfg.reward)
        self.phi_opponent = dca_index(world, self.opponent_id, self.cfg.reward)
        self.seed = seed
        if opponent is not None and hasattr(opponent, "reset"):
            opponent.reset(seed, self.opponent_id)
        return build_observation(world, self.agent_id, m)

    def step(self, agent_action: TacticAction | ControlCommand) -> StepResult:
        """One decision tick: resolve both commands, run the physics burst,
        score the transition. Raises if called after the episode ended."""
        if self.done or self.world is None:
            raise RuntimeError("step() after episode end; call reset()")
        world = self.world
        phi_prev = self.phi

        actions: dict[int, int | None] = {}
        commands: dict[int, ControlCommand] = {}

        if isinstance(agent_action, ControlCommand):
            actions[self.agent_id] = None
            commands[self.agent_id] = agent_action
        else:
            action = TacticAction(agent_action)
            actions[self.agent_id] = int(action)
            commands[self.agent_id] = execute_tactic(action, world, self.agent_id, self.cfg.tactics)

        opp = world.aircraft_by_id(self.opponent_id)
        if opp is not None and opp.alive and self.opponent is not None:
            chosen = self.opponent.act(world, self.opponent_id)
            if isinstance(chosen, ControlCommand):
                actions[self.opponent_id] = None
                commands[self.opponent_id] = chosen
            else:
                action = TacticAction(chosen)
                actions[self.opponent_id] = int(action)
                commands[self.opponent_id] = execute_tactic(action, world, self.opponent_id, self.cfg.tactics)

        self.advance_physics(world, commands, self.cfg.mdp.decision_substeps)

        self.outcome = check_termination(world, self.agent_id)
        self.done = self.outcome != Outcome.ONGOING
        phi_next = dca_index(world, self.agent_id, self.cfg.reward)
        reward = phi_next - phi_prev + (terminal_bonus(self.outcome, self.cfg.reward) if self.done else 0.0)
        self.phi = phi_next

        phi_opp_prev = self.phi_opponent
        phi_opp = dca_index(world, self.opponent_id, self.cfg.reward)
        reward_opp = phi_opp - phi_opp_prev
        if self.done:
            reward_opp += terminal_bonus(check_termination(world, self.opponent_id), self.cfg.reward)
        self.phi_opponent = phi_opp

        return StepResult(
            observation=build_observation(world, self.agent_id, self.cfg.mdp),
            reward=reward,
            done=self.done,
            outcome=self.outcome,
            phi=phi_next,
            actions=actions,
            commands=commands,
            reward_opponent=reward_opp,
            phi_opponent=phi_opp,
            truncated=self.outcome == Outcome.DRAW,
        )

    @staticmethod
    def advance_physics(world: WorldState, commands: dict[int, ControlCommand], substeps: int) -> None:
        """Hold the decision-tick commands through the physics burst; the
        fire flag is consumed by the first substep only."""
        held = dict(commands)
        for k in range(substeps):
            world_step(world, held)
            if k == 0:
                held = {
                    side: replace(cmd, fire=False, fire_target=None) if cmd.fire else cmd
                    for side, cmd in held.items()
                }
