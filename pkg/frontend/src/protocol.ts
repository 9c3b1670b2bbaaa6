// Wire schema (v1) shared with the match server, plus validation guards.
// Every outbound message passes validateOutbound() before send; inbound
// frames that fail parseServerMessage() are surfaced as protocol errors
// instead of reaching the session model.

export const WIRE_VERSION = 1;

export const TACTIC_NAMES = ["CAP", "COMMIT", "ABORT", "BREAK", "FIRE", "SUPPORT"] as const;
export type TacticId = 0 | 1 | 2 | 3 | 4 | 5;

export interface JoinMsg {
  type: "join";
  v: 1;
  checkpoint: string;
  seed: number;
  side: 0 | 1;
  compression?: number;
}

export interface ActionMsg {
  type: "action";
  session: string;
  tick: number;
  action: TacticId;
}

export interface PongMsg {
  type: "pong";
  session: string;
  tick: number;
}

export type OutboundMsg = JoinMsg | ActionMsg | PongMsg;

export interface Ownship {
  x: number;
  y: number;
  z: number;
  vx: number;
  vy: number;
  vz: number;
  roll: number;
  pitch: number;
  yaw: number;
  rel_distance: number | null;
  rel_speed: number | null;
  rel_angle: number | null;
  fuel: number;
  missiles: number;
  health: number;
  sensor: boolean;
}

export interface TrackMsg {
  target_id: number;
  x: number;
  y: number;
  z: number;
  vx: number;
  vy: number;
  vz: number;
  age: number;
}

export interface WarningMsg {
  missile_id: number;
  bearing: number;
  range: number;
}

export interface OwnMissileMsg {
  id: number;
  target_id: number;
  x: number;
  y: number;
  z: number;
  seeker_active: boolean;
  supported: boolean;
}

export interface StateMsg {
  type: "state";
  v: number;
  session: string;
  tick: number;
  sim_time: number;
  ownship: Ownship;
  tracks: TrackMsg[];
  warnings: WarningMsg[];
  own_missiles: OwnMissileMsg[];
  stores: { fuel: number; missiles: number };
  station: { x: number; y: number; z: number };
}

export interface JoinedMsg {
  type: "joined";
  v: number;
  session: string;
  tick: number;
  side: number;
  checkpoint: string;
  tick_hz: number;
  compression: number;
  t_max: number;
}

export interface AckMsg {
  type: "ack";
  v: number;
  session: string;
  tick: number;
  action: number;
  provenance: string[];
}

export interface ResultMsg {
  type: "result";
  v: number;
  session: string;
  tick: number;
  outcome: string;
  return: number;
  dca_final: number;
}

export interface ErrorMsg {
  type: "error";
  v: number;
  session: string;
  tick: number;
  code: string;
  message: string;
}

export interface PingMsg {
  type: "ping";
  v: number;
  session: string;
  tick: number;
}

export type ServerMsg = JoinedMsg | StateMsg | AckMsg | ResultMsg | ErrorMsg | PingMsg;

const isNum = (x: unknown): x is number => typeof x === "number" && Number.isFinite(x);
const isStr = (x: unknown): x is string => typeof x === "string";
const isBool = (x: unknown): x is boolean => typeof x === "boolean";
const isNumOrNull = (x: unknown): boolean => x === null || isNum(x);

export function isTacticId(x: unknown): x is TacticId {
  return isNum(x) && Number.isInteger(x) && x >= 0 && x <= 5;
}

export function validateOutbound(msg: OutboundMsg): string | null {
  // returns null when valid, else a reason; nothing invalid may be sent
  if (msg.type === "join") {
    if (msg.v !== WIRE_VERSION) return "join.v must be 1";
    if (!isStr(msg.checkpoint) || msg.checkpoint.length === 0) return "join.checkpoint required";
    if (!Number.isInteger(msg.seed)) return "join.seed must be an integer";
    if (msg.side !== 0 && msg.side !== 1) return "join.side must be 0 or 1";
    if (msg.compression !== undefined && !(isNum(msg.compression) && msg.compression > 0)) {
      return "join.compression must be positive";
    }
    return null;
  }
  if (msg.type === "action") {
    if (!isStr(msg.session) || msg.session.length === 0) return "action.session required";
    if (!Number.isInteger(msg.tick) || msg.tick < 0) return "action.tick must be a non-negative integer";
    if (!isTacticId(msg.action)) return "action.action must be 0..5";
    return null;
  }
  if (msg.type === "pong") {
    if (!isStr(msg.session) || msg.session.length === 0) return "pong.session required";
    if (!Number.isInteger(msg.tick) || msg.tick < 0) return "pong.tick must be a non-negative integer";
    return null;
  }
  return "unknown outbound type";
}

function validOwnship(o: any): boolean {
  return (
    o !== null &&
    typeof o === "object" &&
    ["x", "y", "z", "vx", "vy", "vz", "roll", "pitch", "yaw", "fuel", "health"].every((k) => isNum(o[k])) &&
    isNumOrNull(o.rel_distance) &&
    isNumOrNull(o.rel_speed) &&
    isNumOrNull(o.rel_angle) &&
    Number.isInteger(o.missiles) &&
    isBool(o.sensor)
  );
}

export function parseServerMessage(raw: string): ServerMsg {
  let data: any;
  try {
    data = JSON.parse(raw);
  } catch {
    throw new Error("frame is not JSON");
  }
  if (data === null || typeof data !== "object" || !isStr(data.type)) {
    throw new Error("frame has no type");
  }
  switch (data.type) {
    case "joined":
      if (!isStr(data.session) || !isNum(data.tick) || !isNum(data.tick_hz)) {
        throw new Error("bad joined frame");
      }
      return data as JoinedMsg;
    case "state": {
      if (!isStr(data.session) || !isNum(data.tick) || !validOwnship(data.ownship)) {
        throw new Error("bad state frame");
      }
      if (!Array.isArray(data.tracks) || !Array.isArray(data.warnings) || !Array.isArray(data.own_missiles)) {
        throw new Error("bad state frame arrays");
      }
      return data as StateMsg;
    }
    case "ack":
      if (!isStr(data.session) || !isNum(data.tick) || !isTacticId(data.action) || !Array.isArray(data.provenance)) {
        throw new Error("bad ack frame");
      }
      return data as AckMsg;
    case "result":
      if (!isStr(data.outcome) || !isNum(data.return) || !isNum(data.dca_final)) {
        throw new Error("bad result frame");
      }
      return data as ResultMsg;
    case "error":
      if (!isStr(data.code) || !isStr(data.message)) throw new Error("bad error frame");
      return data as ErrorMsg;
    case "ping":
      if (!isStr(data.session) || !isNum(data.tick)) throw new Error("bad ping frame");
      return data as PingMsg;
    default:
      throw new Error(`unknown frame type ${data.type}`);
  }
}
