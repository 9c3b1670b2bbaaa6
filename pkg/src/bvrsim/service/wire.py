"""Versioned JSON wire schema for live match sessions.

Inbound: join, action, pong. Outbound: joined, state, ack, result, error,
ping. Every server message after join carries the session id and tick.
The state payload is fog-of-war filtered: ownship truth, own radar tracks,
own missile warnings and own missiles only.
"""
from __future__ import annotations

from typing import Annotated, Literal, Union

from pydantic import BaseModel, ConfigDict, Field, TypeAdapter

WIRE_VERSION = 1


class JoinMsg(BaseModel):
    model_config = ConfigDict(extra="forbid")
    type: Literal["join"]
    v: Literal[1]
    checkpoint: str
    seed: int = 0
    side: Literal[0, 1] = 0
    compression: float | None = Field(default=None, gt=0.0, le=64.0)


class ActionMsg(BaseModel):
    model_config = ConfigDict(extra="forbid")
    type: Literal["action"]
    session: str
    tick: int
    action: int = Field(ge=0, le=5)


class PongMsg(BaseModel):
    model_config = ConfigDict(extra="forbid")
    type: Literal["pong"]
    session: str
    tick: int


InboundMsg = Annotated[Union[JoinMsg, ActionMsg, PongMsg], Field(discriminator="type")]
inbound_adapter: TypeAdapter = TypeAdapter(InboundMsg)


class JoinedMsg(BaseModel):
    type: Literal["joined"] = "joined"
    v: int = WIRE_VERSION
    session: str
    tick: int
    side: int
    checkpoint: str
    tick_hz: float
    compression: float
    t_max: float


class Ownship(BaseModel):
    """Raw source values behind the 16-feature observation."""

    x: float
    y: float
    z: float
    vx: float
    vy: float
    vz: float
    roll: float
    pitch: float
    yaw: float
    rel_distance: float | None
    rel_speed: float | None
    rel_angle: float | None
    fuel: float
    missiles: int
    health: float
    sensor: bool


class TrackMsg(BaseModel):
    target_id: int
    x: float
    y: float
    z: float
    vx: float
    vy: float
    vz: float
    age: float


class WarningMsg(BaseModel):
    missile_id: int
    bearing: float
    range: float


class OwnMissileMsg(BaseModel):
    id: int
    target_id: int
    x: float
    y: float
    z: float
    seeker_active: bool
    supported: bool


class Stores(BaseModel):
    fuel: float
    missiles: int


class StationMsg(BaseModel):
    x: float
    y: float
    z: float


class StateMsg(BaseModel):
    type: Literal["state"] = "state"
    v: int = WIRE_VERSION
    session: str
    tick: int
    sim_time: float
    ownship: Ownship
    tracks: list[TrackMsg]
    warnings: list[WarningMsg]
    own_missiles: list[OwnMissileMsg]
    stores: Stores
    station: StationMsg


class AckMsg(BaseModel):
    type: Literal["ack"] = "ack"
    v: int = WIRE_VERSION
    session: str
    tick: int
    action: int
    provenance: list[str]


class ResultMsg(BaseModel):
    model_config = ConfigDict(populate_by_name=True)
    type: Literal["result"] = "result"
    v: int = WIRE_VERSION
    session: str
    tick: int
    outcome: str
    return_: float = Field(alias="return")
    dca_final: float


class ErrorMsg(BaseModel):
    type: Literal["error"] = "error"
    v: int = WIRE_VERSION
    session: str = ""
    tick: int = 0
    code: str
    message: str


class PingMsg(BaseModel):
    type: Literal["ping"] = "ping"
    v: int = WIRE_VERSION
    session: str
    tick: int


class CheckpointInfo(BaseModel):
    id: str
    path: str
    atoms: int
    actions: int


class SessionInfo(BaseModel):
    session: str
    phase: str
    tick: int
    checkpoint: str
    outcome: str | None
