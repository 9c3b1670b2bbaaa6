"""Deterministic engagement sandbox: aircraft dynamics, radar, missiles.

All state lives in plain dataclasses; the step functions are pure in the
sense that identical (seed, command sequence) inputs reproduce identical
state sequences bit for bit. Iteration order over entities is fixed, no
wall clock is consulted, and the physics itself draws no randomness.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum

from .config import G0, SimParams
from .vec import (
    Vec3,
    angle_between,
    bearing_to,
    clamp,
    distance,
    velocity_vector,
    wrap_pi,
)


class SimulationFault(RuntimeError):
    """Non-finite or structurally invalid input reached the physics."""


class Outcome(str, Enum):
    ONGOING = "ongoing"
    AGENT_WIN = "agent_win"
    AGENT_LOSS = "agent_loss"
    DRAW = "draw"


@dataclass(slots=True)
class AircraftState:
    id: int
    position: Vec3
    speed: float          # m/s true airspeed
    heading: float        # rad, [-pi, pi), 0 = north(+x)
    pitch: float = 0.0    # rad, [-pi/2, pi/2]
    roll: float = 0.0     # rad, bank implied by the commanded turn
    fuel: float = 3000.0  # kg
    missiles: int = 4
    health: float = 1.0
    radar_on: bool = True
    alive: bool = True
    initial_fuel: float = 3000.0
    initial_missiles: int = 4

    def velocity(self) -> Vec3:
        return velocity_vector(self.speed, self.heading, self.pitch)


@dataclass(slots=True)
class MissileState:
    id: int
    shooter_id: int
    target_id: int
    position: Vec3
    velocity: Vec3
    time_of_flight: float = 0.0
    seeker_active: bool = False
    supported: bool = True
    alive: bool = True


@dataclass(slots=True)
class RadarTrack:
    target_id: int
    position: Vec3
    velocity: Vec3
    age: float = 0.0


@dataclass(slots=True)
class MissileWarning:
    missile_id: int
    bearing: float   # rad from observer to missile
    range: float     # m


@dataclass(slots=True)
class ControlCommand:
    desired_heading: float
    desired_altitude: float
    desired_speed: float
    fire: bool = False
    fire_target: int | None = None
    radar_on: bool = True
    support_missiles: bool = False
    provenance: tuple[str, ...] = ()


@dataclass
class WorldState:
    params: SimParams
    aircraft: list[AircraftState]
    cap_station: dict[int, Vec3]
    rng_seed: int = 0
    tick: int = 0
    sim_time: float = 0.0
    missiles: list[MissileState] = field(default_factory=list)
    tracks: dict[int, dict[int, RadarTrack]] = field(default_factory=dict)
    warnings: dict[int, list[MissileWarning]] = field(default_factory=dict)
    missile_seq: int = 0
    launches: dict[int, int] = field(default_factory=dict)

    def aircraft_by_id(self, entity_id: int) -> AircraftState | None:
        for ac in self.aircraft:
            if ac.id == entity_id:
                return ac
        return None

    def live_missiles(self) -> list[MissileState]:
        return [m for m in self.missiles if m.alive]

    def tracks_for(self, observer_id: int) -> dict[int, RadarTrack]:
        return self.tracks.setdefault(observer_id, {})

    def warnings_for(self, observer_id: int) -> list[MissileWarning]:
        return self.warnings.get(observer_id, [])


def hold_command(state: AircraftState) -> ControlCommand:
    """Maintain current heading, altitude and speed."""
    return ControlCommand(
        desired_heading=state.heading,
        desired_altitude=state.position.z,
        desired_speed=state.speed,
        radar_on=state.radar_on,
    )


def integrate_aircraft(state: AircraftState, cmd: ControlCommand, dt: float, p: SimParams) -> AircraftState:
    """Advance one aircraft by dt under first-order command tracking.

    Heading slews at most n_max*g/speed rad/s, speed at a_max, altitude at
    climb_max with pitch set to match the achieved climb rate. Dead
    aircraft pass through unchanged.
    """
    if not state.alive:
        return state
    if not (
        state.position.is_finite()
        and math.isfinite(state.speed)
        and math.isfinite(state.heading)
        and math.isfinite(cmd.desired_heading)
        and math.isfinite(cmd.desired_altitude)
        and math.isfinite(cmd.desired_speed)
    ):
        raise SimulationFault(f"non-finite input for aircraft {state.id}")
    if dt <= 0.0:
        raise SimulationFault(f"non-positive dt {dt}")

    omega_max = p.n_max_g * G0 / state.speed
    d_heading = clamp(wrap_pi(cmd.desired_heading - state.heading), -omega_max * dt, omega_max * dt)
    heading = wrap_pi(state.heading + d_heading)
    turn_rate = d_heading / dt
    roll = wrap_pi(math.atan2(turn_rate * state.speed, G0)) if d_heading != 0.0 else 0.0

    target_speed = clamp(cmd.desired_speed, p.v_min, p.v_max)
    speed = state.speed + clamp(target_speed - state.speed, -p.a_max * dt, p.a_max * dt)
    speed = clamp(speed, p.v_min, p.v_max)

    target_alt = clamp(cmd.desired_altitude, p.alt_min, p.alt_max)
    dz = clamp(target_alt - state.position.z, -p.climb_max * dt, p.climb_max * dt)
    climb_rate = dz / dt
    pitch = math.asin(clamp(climb_rate / speed, -1.0, 1.0))

    cp = math.cos(pitch)
    position = Vec3(
        state.position.x + speed * cp * math.cos(heading) * dt,
        state.position.y + speed * cp * math.sin(heading) * dt,
        state.position.z + speed * math.sin(pitch) * dt,
    )

    burn = (p.fuel_burn_base + p.fuel_burn_per_speed * speed) * dt
    fuel = max(0.0, state.fuel - burn)
    alive = state.alive and fuel > 0.0 and state.health > 0.0

    return replace(
        state,
        position=position,
        speed=speed,
        heading=heading,
        pitch=pitch,
        roll=roll,
        fuel=fuel,
        radar_on=cmd.radar_on,
        alive=alive,
    )


def _boresight_angle(observer: AircraftState, target_pos: Vec3) -> float:
    """3-D angle between the observer's nose and the line of sight."""
    nose = velocity_vector(1.0, observer.heading, observer.pitch)
    return angle_between(nose, target_pos - observer.position)


def radar_scan(world: WorldState, observer_id: int) -> tuple[list[RadarTrack], list[MissileWarning]]:
    """Current radar detections plus the passive missile-warning picture.

    A target is detected iff the radar is on, within range and inside the
    gimbal cone. The warning receiver reports active-seeker missiles
    homing on the observer inside rwr_range regardless of radar state.
    """
    p = world.params
    observer = world.aircraft_by_id(observer_id)
    if observer is None or not observer.alive:
        return [], []

    detections: list[RadarTrack] = []
    if observer.radar_on:
        for target in world.aircraft:
            if target.id == observer_id or not target.alive:
                continue
            if distance(observer.position, target.position) > p.radar_range:
                continue
            if _boresight_angle(observer, target.position) > p.gimbal_limit:
                continue
            detections.append(
                RadarTrack(
                    target_id=target.id,
                    position=target.position.copy(),
                    velocity=target.velocity(),
                    age=0.0,
                )
            )

    warnings: list[MissileWarning] = []
    for m in world.missiles:
        if not (m.alive and m.seeker_active and m.target_id == observer_id):
            continue
        rng = distance(observer.position, m.position)
        if rng <= p.rwr_range:
            warnings.append(
                MissileWarning(
                    missile_id=m.id,
                    bearing=bearing_to(observer.position, m.position),
                    range=rng,
                )
            )
    return detections, warnings


def step_missile(m: MissileState, world: WorldState, dt: float, supported: bool) -> MissileState:
    """Advance one missile: support/seeker bookkeeping then pro-nav steering.

    The seeker latches active inside pitbull_range. A missile that is
    neither supported nor active dies, as does one that outlives its motor
    and battery (max time of flight) or loses its target.
    """
    if not m.alive:
        return m
    p = world.params
    target = world.aircraft_by_id(m.target_id)
    if target is None or not target.alive:
        return replace(m, alive=False, supported=False, time_of_flight=m.time_of_flight + dt)

    tof = m.time_of_flight + dt
    if tof > p.missile_max_tof:
        return replace(m, alive=False, supported=supported, time_of_flight=tof)

    seeker_active = m.seeker_active or distance(m.position, target.position) <= p.pitbull_range
    if not seeker_active and not supported:
        return replace(m, alive=False, supported=False, seeker_active=False, time_of_flight=tof)

    # proportional navigation: a = N * (omega x v), omega the LOS rotation rate
    los = target.position - m.position
    v_rel = target.velocity() - m.velocity
    r2 = los.dot(los)
    omega = los.cross(v_rel).scale(1.0 / r2) if r2 > 0.0 else Vec3()
    accel = omega.cross(m.velocity).scale(p.missile_nav_gain)
    a_norm = accel.norm()
    a_limit = p.missile_g_max * G0
    if a_norm > a_limit:
        accel = accel.scale(a_limit / a_norm)

    speed = max(p.missile_speed_floor, m.velocity.norm() - p.missile_speed_decay * dt)
    direction = (m.velocity + accel.scale(dt)).unit()
    velocity = direction.scale(speed)
    position = m.position + velocity.scale(dt)

    return replace(
        m,
        position=position,
        velocity=velocity,
        time_of_flight=tof,
        seeker_active=seeker_active,
        supported=supported,
    )


def _segment_min_distance(p_a0: Vec3, p_a1: Vec3, p_b0: Vec3, p_b1: Vec3) -> float:
    """Closest approach of two points moving linearly over one step."""
    rel0 = p_a0 - p_b0
    rel_step = (p_a1 - p_a0) - (p_b1 - p_b0)
    denom = rel_step.dot(rel_step)
    t = 0.0 if denom == 0.0 else clamp(-rel0.dot(rel_step) / denom, 0.0, 1.0)
    closest = rel0 + rel_step.scale(t)
    return closest.norm()


def _shooter_supports(world: WorldState, m: MissileState, commands: dict[int, ControlCommand]) -> bool:
    """Datalink support: shooter alive, commanding support, still tracking."""
    shooter = world.aircraft_by_id(m.shooter_id)
    if shooter is None or not shooter.alive:
        return False
    cmd = commands.get(m.shooter_id)
    if cmd is None or not cmd.support_missiles:
        return False
    track = world.tracks_for(m.shooter_id).get(m.target_id)
    return track is not None and track.age <= world.params.track_timeout


def world_step(world: WorldState, commands: dict[int, ControlCommand]) -> WorldState:
    """One physics step: aircraft, launches, missiles, hits, sensors.

    Mutates and returns the same WorldState. Commands addressed to dead or
    unknown aircraft are ignored; living aircraft without a command hold
    their current flight state.
    """
    p = world.params
    dt = p.dt_physics

    aircraft_prev = {ac.id: ac.position.copy() for ac in world.aircraft}
    for i, ac in enumerate(world.aircraft):
        if not ac.alive:
            continue
        cmd = commands.get(ac.id)
        if cmd is None:
            cmd = hold_command(ac)
        world.aircraft[i] = integrate_aircraft(ac, cmd, dt, p)

    for ac in world.aircraft:
        cmd = commands.get(ac.id)
        if cmd is None or not cmd.fire or not ac.alive or ac.missiles <= 0:
            continue
        target = world.aircraft_by_id(cmd.fire_target) if cmd.fire_target is not None else None
        if target is None or not target.alive or target.id == ac.id:
            continue
        direction = (target.position - ac.position).unit()
        world.missiles.append(
            MissileState(
                id=world.missile_seq,
                shooter_id=ac.id,
                target_id=target.id,
                position=ac.position.copy(),
                velocity=direction.scale(p.missile_speed_boost),
            )
        )
        world.missile_seq += 1
        ac.missiles -= 1
        world.launches[ac.id] = world.launches.get(ac.id, 0) + 1

    missile_prev = {m.id: m.position.copy() for m in world.missiles}
    for i, m in enumerate(world.missiles):
        if not m.alive:
            continue
        supported = m.time_of_flight == 0.0 or _shooter_supports(world, m, commands)
        world.missiles[i] = step_missile(m, world, dt, supported)

    # hits: closest approach over the step keeps fast closures from tunneling
    for i, m in enumerate(world.missiles):
        if not m.alive:
            continue
        target = world.aircraft_by_id(m.target_id)
        if target is None or not target.alive:
            continue
        m_prev = missile_prev.get(m.id, m.position)
        t_prev = aircraft_prev.get(target.id, target.position)
        if _segment_min_distance(m_prev, m.position, t_prev, target.position) <= p.kill_radius:
            target.health = 0.0
            target.alive = False
            world.missiles[i] = replace(m, alive=False)

    world.missiles = [m for m in world.missiles if m.alive]

    for ac in world.aircraft:
        store = world.tracks_for(ac.id)
        if not ac.alive:
            store.clear()
            world.warnings[ac.id] = []
            continue
        detections, warnings = radar_scan(world, ac.id)
        seen = {trk.target_id for trk in detections}
        for trk in detections:
            store[trk.target_id] = trk
        stale = []
        for target_id, trk in store.items():
            if target_id in seen:
                continue
            trk.age += dt
            target = world.aircraft_by_id(target_id)
            if trk.age > p.track_timeout or target is None or not target.alive:
                stale.append(target_id)
        for target_id in stale:
            del store[target_id]
        world.warnings[ac.id] = warnings

    world.tick += 1
    world.sim_time = world.tick * dt
    return world


def check_termination(world: WorldState, agent_id: int = 0) -> Outcome:
    """Episode outcome from the given side's perspective."""
    agent = world.aircraft_by_id(agent_id)
    if agent is None or not agent.alive:
        return Outcome.AGENT_LOSS
    opponents = [ac for ac in world.aircraft if ac.id != agent_id]
    if opponents and all(not ac.alive for ac in opponents):
        return Outcome.AGENT_WIN
    if world.sim_time >= world.params.t_max:
        return Outcome.DRAW
    return Outcome.ONGOING
