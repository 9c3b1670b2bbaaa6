// Client session model: the single mutable store behind the cockpit.
// It renders only what arrived in state messages (no client-side
// omniscience) and keeps a replay buffer of every received tick.

import {
  AckMsg,
  ActionMsg,
  ErrorMsg,
  JoinedMsg,
  OutboundMsg,
  PongMsg,
  ResultMsg,
  ServerMsg,
  StateMsg,
  TACTIC_NAMES,
  TacticId,
  validateOutbound,
} from "./protocol.js";

export type ConnectionPhase = "idle" | "joining" | "running" | "finished" | "error";

export interface FeedEvent {
  tick: number;
  kind: "ack" | "reject" | "result" | "error" | "info";
  text: string;
}

const FEED_LIMIT = 60;

export class ClientSessionModel {
  phase: ConnectionPhase = "idle";
  session = "";
  side: 0 | 1 = 0;
  tickHz = 1;
  compression = 1;
  latest: StateMsg | null = null;
  latestReceivedAt = 0; // performance.now() timestamp for dead reckoning
  pendingAction: TacticId | null = null; // clicked, not yet acked
  latchedAction: TacticId = 0; // what the server last confirmed
  result: ResultMsg | null = null;
  feed: FeedEvent[] = [];
  replayBuffer: StateMsg[] = [];
  lastError: string | null = null;

  handleServer(msg: ServerMsg, now: number = Date.now()): void {
    switch (msg.type) {
      case "joined":
        this.phase = "running";
        this.session = msg.session;
        this.side = msg.side === 1 ? 1 : 0;
        this.tickHz = msg.tick_hz;
        this.compression = msg.compression;
        this.pushFeed(msg.tick, "info", `joined as side ${msg.side} vs ${msg.checkpoint}`);
        break;
      case "state":
        this.latest = msg;
        this.latestReceivedAt = now;
        this.replayBuffer.push(msg);
        break;
      case "ack": {
        this.latchedAction = msg.action as TacticId;
        if (this.pendingAction === msg.action) this.pendingAction = null;
        const rejects = msg.provenance.filter((p) => p.includes("rejected") || p.includes("fallback") || p.includes("downgrade"));
        if (rejects.length > 0) {
          this.pushFeed(msg.tick, "reject", `${TACTIC_NAMES[msg.action]}: ${rejects.join(" → ")}`);
        }
        break;
      }
      case "result":
        this.phase = "finished";
        this.result = msg;
        this.pushFeed(msg.tick, "result", `match over: ${msg.outcome} (return ${msg.return.toFixed(3)})`);
        break;
      case "error":
        this.lastError = `${msg.code}: ${msg.message}`;
        this.pushFeed(msg.tick, "error", this.lastError);
        break;
      case "ping":
        break; // answered by the transport layer
    }
  }

  // Build (and validate) an outbound action for the latest known tick.
  buildAction(action: TacticId): ActionMsg {
    const msg: ActionMsg = {
      type: "action",
      session: this.session,
      tick: this.latest ? this.latest.tick : 0,
      action,
    };
    const problem = validateOutbound(msg);
    if (problem !== null) throw new Error(`refusing to send invalid action: ${problem}`);
    this.pendingAction = action;
    return msg;
  }

  buildPong(tick: number): PongMsg {
    const msg: PongMsg = { type: "pong", session: this.session, tick };
    const problem = validateOutbound(msg);
    if (problem !== null) throw new Error(`refusing to send invalid pong: ${problem}`);
    return msg;
  }

  hasWarning(): boolean {
    return this.latest !== null && this.latest.warnings.length > 0;
  }

  displayedAction(): TacticId {
    return this.pendingAction !== null ? this.pendingAction : this.latchedAction;
  }

  private pushFeed(tick: number, kind: FeedEvent["kind"], text: string): void {
    this.feed.push({ tick, kind, text });
    if (this.feed.length > FEED_LIMIT) this.feed.shift();
  }
}

export function safeSend(socket: { send(data: string): void }, msg: OutboundMsg): void {
  const problem = validateOutbound(msg);
  if (problem !== null) throw new Error(`invalid outbound message: ${problem}`);
  socket.send(JSON.stringify(msg));
}
