import { describe, expect, it } from "vitest";

import { ClientSessionModel } from "../src/model.js";
import { AckMsg, JoinedMsg, ResultMsg, StateMsg } from "../src/protocol.js";

function joined(): JoinedMsg {
  return {
    type: "joined", v: 1, session: "abc", tick: 0, side: 0,
    checkpoint: "net", tick_hz: 1, compression: 2, t_max: 900,
  };
}

function state(tick: number, tracks: StateMsg["tracks"] = []): StateMsg {
  return {
    type: "state", v: 1, session: "abc", tick, sim_time: tick,
    ownship: {
      x: 0, y: 0, z: 9000, vx: 250, vy: 0, vz: 0, roll: 0, pitch: 0, yaw: 0,
      rel_distance: null, rel_speed: null, rel_angle: null,
      fuel: 2900, missiles: 4, health: 1, sensor: true,
    },
    tracks, warnings: [], own_missiles: [],
    stores: { fuel: 2900, missiles: 4 },
    station: { x: -25000, y: 0, z: 9000 },
  };
}

function ack(tick: number, action: number, provenance: string[] = []): AckMsg {
  return { type: "ack", v: 1, session: "abc", tick, action, provenance };
}

describe("session model", () => {
  it("latches actions through the ack round trip", () => {
    const m = new ClientSessionModel();
    m.handleServer(joined());
    m.handleServer(state(1));
    const msg = m.buildAction(4);
    expect(msg.tick).toBe(1);
    expect(m.pendingAction).toBe(4);
    expect(m.displayedAction()).toBe(4); // optimistic until acked
    m.handleServer(ack(2, 4, ["fire"]));
    expect(m.pendingAction).toBeNull();
    expect(m.latchedAction).toBe(4);
  });

  it("surfaces rejections in the event feed", () => {
    const m = new ClientSessionModel();
    m.handleServer(joined());
    m.handleServer(ack(3, 4, ["fire_rejected:NoTrack", "commit_fallback:no_track", "cap"]));
    const rejects = m.feed.filter((e) => e.kind === "reject");
    expect(rejects.length).toBe(1);
    expect(rejects[0].text).toContain("fire_rejected:NoTrack");
  });

  it("finishes on result and keeps the replay buffer", () => {
    const m = new ClientSessionModel();
    m.handleServer(joined());
    for (let t = 1; t <= 5; t++) m.handleServer(state(t));
    const result: ResultMsg = {
      type: "result", v: 1, session: "abc", tick: 5, outcome: "draw", return: -0.02, dca_final: 0.97,
    };
    m.handleServer(result);
    expect(m.phase).toBe("finished");
    expect(m.replayBuffer.length).toBe(5);
    expect(m.feed.at(-1)?.kind).toBe("result");
  });

  it("refuses to build out-of-range actions", () => {
    const m = new ClientSessionModel();
    m.handleServer(joined());
    m.handleServer(state(1));
    expect(() => m.buildAction(7 as any)).toThrow(/0\.\.5/);
  });

  it("flags the break affordance only while warned", () => {
    const m = new ClientSessionModel();
    m.handleServer(joined());
    m.handleServer(state(1));
    expect(m.hasWarning()).toBe(false);
    const warned = state(2);
    warned.warnings = [{ missile_id: 9, bearing: 0.4, range: 12000 }];
    m.handleServer(warned);
    expect(m.hasWarning()).toBe(true);
  });
});
