// WebSocket transport: validates outbound frames, parses inbound ones,
// answers pings, and feeds everything else to the session model.

import { ClientSessionModel, safeSend } from "./model.js";
import { JoinMsg, parseServerMessage, TacticId } from "./protocol.js";

export interface Connection {
  sendAction(action: TacticId): void;
  close(): void;
}

export function connect(
  url: string,
  join: Omit<JoinMsg, "type" | "v">,
  model: ClientSessionModel,
  onUpdate: () => void,
): Connection {
  const ws = new WebSocket(url);
  model.phase = "joining";

  ws.onopen = () => {
    safeSend(ws, { type: "join", v: 1, ...join });
    onUpdate();
  };

  ws.onmessage = (ev) => {
    let msg;
    try {
      msg = parseServerMessage(String(ev.data));
    } catch (err) {
      model.lastError = `protocol: ${(err as Error).message}`;
      onUpdate();
      return;
    }
    if (msg.type === "ping") {
      safeSend(ws, model.buildPong(msg.tick));
      return;
    }
    model.handleServer(msg, performance.now());
    onUpdate();
  };

  ws.onclose = () => {
    if (model.phase === "running" || model.phase === "joining") {
      model.phase = model.result !== null ? "finished" : "error";
      if (model.result === null) model.lastError = model.lastError ?? "connection closed";
    }
    onUpdate();
  };

  ws.onerror = () => {
    model.lastError = "websocket error";
    onUpdate();
  };

  return {
    sendAction(action: TacticId) {
      if (model.phase !== "running") return;
      safeSend(ws, model.buildAction(action));
      onUpdate();
    },
    close() {
      ws.close();
    },
  };
}
