"""The six tactical actions, realized as deterministic maneuver controllers.

Each controller maps (state, geometry) to a ControlCommand. The dispatcher
guarantees totality: every action is legal in every state, with fallbacks
(Fire -> Commit -> CAP, Break -> Abort -> CAP, Support -> Commit/CAP)
recorded in the command provenance so logs show the effective tactic.
"""
from __future__ import annotations

import math
from enum import IntEnum

from .config import SimParams, TacticParams
from .simcore import (
    AircraftState,
    ControlCommand,
    MissileState,
    RadarTrack,
    WorldState,
    _boresight_angle,
    hold_command,
)
from .vec import Vec3, bearing_to, clamp, distance, horizontal_distance, wrap_pi


class TacticAction(IntEnum):
    CAP = 0
    COMMIT = 1
    ABORT = 2
    BREAK = 3
    FIRE = 4
    SUPPORT = 5


FIRE_REJECT_NO_WEAPONS = "NoWeapons"
FIRE_REJECT_NO_TRACK = "NoTrack"
FIRE_REJECT_OUT_OF_RANGE = "OutOfRange"
FIRE_REJECT_OFF_BORESIGHT = "OffBoresight"


def _clamped(cmd: ControlCommand, sim: SimParams) -> ControlCommand:
    cmd.desired_speed = clamp(cmd.desired_speed, sim.v_min, sim.v_max)
    cmd.desired_altitude = clamp(cmd.desired_altitude, sim.alt_min, sim.alt_max)
    cmd.desired_heading = wrap_pi(cmd.desired_heading)
    return cmd


def cap_command(actor: AircraftState, station: Vec3, p: TacticParams, sim: SimParams) -> ControlCommand:
    """Hold a clockwise racetrack of radius cap_radius around the station.

    Far from the station the controller homes straight in; at the station
    center (tangent undefined) it heads due north.
    """
    dist = horizontal_distance(actor.position, station)
    if dist > p.cap_radius:
        heading = bearing_to(actor.position, station)
    elif dist == 0.0:
        heading = 0.0
    else:
        heading = wrap_pi(bearing_to(actor.position, station) - math.pi / 2.0)
    return _clamped(
        ControlCommand(
            desired_heading=heading,
            desired_altitude=station.z,
            desired_speed=p.cap_speed,
            radar_on=True,
            provenance=("cap",),
        ),
        sim,
    )


def commit_command(actor: AircraftState, track: RadarTrack, sim: SimParams) -> ControlCommand:
    """Lead-pursuit intercept of a tracked target.

    One fixed-point refinement of the intercept time: aim at the target
    displaced by its velocity times the current-range flyout time.
    """
    t_go = distance(actor.position, track.position) / actor.speed
    predicted = track.position + track.velocity.scale(t_go)
    return _clamped(
        ControlCommand(
            desired_heading=bearing_to(actor.position, predicted),
            desired_altitude=track.position.z,
            desired_speed=sim.v_max,
            radar_on=True,
            provenance=("commit",),
        ),
        sim,
    )


def abort_command(actor: AircraftState, threat_position: Vec3, p: TacticParams, sim: SimParams) -> ControlCommand:
    """Turn tail-to-threat, extend at maximum speed, shed altitude."""
    heading = wrap_pi(bearing_to(actor.position, threat_position) + math.pi)
    return _clamped(
        ControlCommand(
            desired_heading=heading,
            desired_altitude=max(sim.alt_min, actor.position.z - p.abort_descend_to),
            desired_speed=sim.v_max,
            radar_on=True,
            provenance=("abort",),
        ),
        sim,
    )


def break_command(actor: AircraftState, missile_bearing: float, sim: SimParams) -> ControlCommand:
    """Beam an inbound missile: put it on the wingtip, descend hard.

    Of the two beam headings the one needing the smaller heading change
    wins; an exact tie breaks to the right (+pi/2).
    """
    right = wrap_pi(missile_bearing + math.pi / 2.0)
    left = wrap_pi(missile_bearing - math.pi / 2.0)
    d_right = abs(wrap_pi(right - actor.heading))
    d_left = abs(wrap_pi(left - actor.heading))
    heading = right if d_right <= d_left else left
    return _clamped(
        ControlCommand(
            desired_heading=heading,
            desired_altitude=max(sim.alt_min, actor.position.z - 3000.0),
            desired_speed=sim.v_max,
            radar_on=True,
            provenance=("break",),
        ),
        sim,
    )


def fire_decision(
    actor: AircraftState,
    track: RadarTrack | None,
    p: TacticParams,
    sim: SimParams,
    station: Vec3,
) -> ControlCommand:
    """Launch gate: weapons, fresh track, range and boresight checks.

    A passing gate yields a hold-current-flight command with the fire flag
    (the launch tick also supports the new missile). A failing gate falls
    back to Commit, or CAP when there is nothing to commit on; the
    rejection reason lands in the provenance chain.
    """
    reason = None
    if actor.missiles <= 0:
        reason = FIRE_REJECT_NO_WEAPONS
    elif track is None or track.age > sim.track_timeout:
        reason = FIRE_REJECT_NO_TRACK
    elif distance(actor.position, track.position) > p.fire_max_range:
        reason = FIRE_REJECT_OUT_OF_RANGE
    elif _boresight_angle(actor, track.position) > sim.gimbal_limit:
        reason = FIRE_REJECT_OFF_BORESIGHT

    if reason is None:
        cmd = hold_command(actor)
        cmd.fire = True
        cmd.fire_target = track.target_id
        cmd.support_missiles = True
        cmd.radar_on = True
        cmd.provenance = ("fire",)
        return _clamped(cmd, sim)

    prefix = (f"fire_rejected:{reason}",)
    if track is not None and track.age <= sim.track_timeout:
        cmd = commit_command(actor, track, sim)
    else:
        cmd = cap_command(actor, station, p, sim)
        cmd.provenance = ("commit_fallback:no_track",) + cmd.provenance
    cmd.provenance = prefix + cmd.provenance
    return cmd


def support_command(
    actor: AircraftState,
    missile: MissileState,
    track: RadarTrack,
    p: TacticParams,
    sim: SimParams,
) -> ControlCommand:
    """Keep guiding an own missile: hold the target offset the nose.

    The offset side preserves the current geometry (tie goes positive);
    speed drops to cruise to arrest closure while the datalink stays up.
    """
    bearing = bearing_to(actor.position, track.position)
    offset = wrap_pi(bearing - actor.heading)
    side = 1.0 if offset >= 0.0 else -1.0
    return _clamped(
        ControlCommand(
            desired_heading=wrap_pi(bearing - side * p.support_offset),
            desired_altitude=actor.position.z,
            desired_speed=0.6 * sim.v_max,
            radar_on=True,
            support_missiles=True,
            provenance=("support",),
        ),
        sim,
    )


def _fresh_tracks(world: WorldState, actor_id: int) -> list[RadarTrack]:
    actor = world.aircraft_by_id(actor_id)
    store = world.tracks_for(actor_id)
    fresh = [t for t in store.values() if t.age <= world.params.track_timeout]
    fresh.sort(key=lambda t: (distance(actor.position, t.position), t.target_id))
    return fresh


def execute_tactic(
    action: TacticAction,
    world: WorldState,
    actor_id: int,
    p: TacticParams,
) -> ControlCommand:
    """Route an action to its controller with deterministic target selection.

    Targets resolve to the nearest fresh track (3-D distance, ties to the
    lower id); threats to the nearest inbound missile warning, else the
    nearest track. Total over all six actions for any living actor.
    """
    sim = world.params
    actor = world.aircraft_by_id(actor_id)
    if actor is None or not actor.alive:
        raise ValueError(f"no living actor {actor_id}")

    station = world.cap_station[actor_id]
    tracks = _fresh_tracks(world, actor_id)
    nearest = tracks[0] if tracks else None
    warnings = sorted(world.warnings_for(actor_id), key=lambda w: (w.range, w.missile_id))
    warning = warnings[0] if warnings else None

    action = TacticAction(action)
    if action == TacticAction.CAP:
        return cap_command(actor, station, p, sim)

    if action == TacticAction.COMMIT:
        if nearest is not None:
            return commit_command(actor, nearest, sim)
        cmd = cap_command(actor, station, p, sim)
        cmd.provenance = ("commit_fallback:no_track",) + cmd.provenance
        return cmd

    if action == TacticAction.ABORT:
        threat = _nearest_threat_position(world, nearest, warning)
        if threat is not None:
            return abort_command(actor, threat, p, sim)
        cmd = cap_command(actor, station, p, sim)
        cmd.provenance = ("abort_fallback:no_threat",) + cmd.provenance
        return cmd

    if action == TacticAction.BREAK:
        if warning is not None:
            return break_command(actor, warning.bearing, sim)
        threat = _nearest_threat_position(world, nearest, None)
        if threat is not None:
            cmd = abort_command(actor, threat, p, sim)
        else:
            cmd = cap_command(actor, station, p, sim)
            cmd.provenance = ("abort_fallback:no_threat",) + cmd.provenance
        cmd.provenance = ("break_downgrade:no_warning",) + cmd.provenance
        return cmd

    if action == TacticAction.FIRE:
        return fire_decision(actor, nearest, p, sim, station)

    # SUPPORT
    own = [m for m in world.missiles if m.alive and m.shooter_id == actor_id]
    pending = [m for m in own if not m.seeker_active]
    if pending:
        missile = min(pending, key=lambda m: m.id)
        track = world.tracks_for(actor_id).get(missile.target_id)
        if track is not None and track.age <= sim.track_timeout:
            return support_command(actor, missile, track, p, sim)
        if nearest is not None:
            cmd = commit_command(actor, nearest, sim)
        else:
            cmd = cap_command(actor, station, p, sim)
        cmd.provenance = ("support_fallback:lost_track",) + cmd.provenance
        return cmd
    if own:
        cmd = cap_command(actor, station, p, sim)
        cmd.provenance = ("support_released",) + cmd.provenance
        return cmd
    if nearest is not None:
        cmd = commit_command(actor, nearest, sim)
    else:
        cmd = cap_command(actor, station, p, sim)
    cmd.provenance = ("support_fallback:no_missile",) + cmd.provenance
    return cmd


def _nearest_threat_position(
    world: WorldState,
    nearest_track: RadarTrack | None,
    warning,
) -> Vec3 | None:
    if warning is not None:
        for m in world.missiles:
            if m.id == warning.missile_id:
                return m.position
    if nearest_track is not None:
        return nearest_track.position
    return None
