import math

import pytest

from bvrsim.config import RunConfig, SimParams
from bvrsim.simcore import AircraftState, MissileState, RadarTrack, WorldState
from bvrsim.vec import Vec3


@pytest.fixture
def cfg() -> RunConfig:
    return RunConfig()


def make_aircraft(
    side: int,
    x: float = 0.0,
    y: float = 0.0,
    z: float = 9000.0,
    speed: float = 250.0,
    heading: float = 0.0,
    missiles: int = 4,
    fuel: float = 3000.0,
    radar_on: bool = True,
) -> AircraftState:
    return AircraftState(
        id=side,
        position=Vec3(x, y, z),
        speed=speed,
        heading=heading,
        fuel=fuel,
        missiles=missiles,
        radar_on=radar_on,
        initial_fuel=3000.0,
        initial_missiles=missiles if missiles > 0 else 4,
    )


def make_world(
    agent: AircraftState | None = None,
    opponent: AircraftState | None = None,
    params: SimParams | None = None,
) -> WorldState:
    params = params or SimParams()
    agent = agent or make_aircraft(0, x=-25000.0)
    opponent = opponent or make_aircraft(1, x=55000.0, heading=math.pi)
    stations = {0: Vec3(-25000.0, 0.0, 9000.0), 1: Vec3(25000.0, 0.0, 9000.0)}
    return WorldState(params=params, aircraft=[agent, opponent], cap_station=stations)


def add_track(world: WorldState, observer: int, target: int, age: float = 0.0) -> RadarTrack:
    tgt = world.aircraft_by_id(target)
    track = RadarTrack(target_id=target, position=tgt.position.copy(), velocity=tgt.velocity(), age=age)
    world.tracks_for(observer)[target] = track
    return track


def add_missile(
    world: WorldState,
    shooter: int,
    target: int,
    position: Vec3,
    velocity: Vec3,
    seeker_active: bool = False,
    tof: float = 1.0,
) -> MissileState:
    m = MissileState(
        id=world.missile_seq,
        shooter_id=shooter,
        target_id=target,
        position=position,
        velocity=velocity,
        seeker_active=seeker_active,
        time_of_flight=tof,
    )
    world.missile_seq += 1
    world.missiles.append(m)
    return m
