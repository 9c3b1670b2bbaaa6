// Cockpit entry point: lobby, live scope, tactic buttons, event feed,
// and the after-action replay tab. Keyboard 1-6 mirrors the six tactics.

import { ClientSessionModel } from "./model.js";
import { connect, Connection } from "./net.js";
import { TACTIC_NAMES, TacticId } from "./protocol.js";
import { buildScene, drawScene, Viewport } from "./scope.js";
import { loadReplay, ReplayTimeline } from "./replay.js";
import { buildReplayScene } from "./replayscene.js";

const $ = <T extends HTMLElement>(id: string): T => {
  const el = document.getElementById(id);
  if (el === null) throw new Error(`missing #${id}`);
  return el as T;
};

const model = new ClientSessionModel();
let conn: Connection | null = null;
let replay: ReplayTimeline | null = null;
let lastReplayAdvance = 0;

const canvas = $("scope") as unknown as HTMLCanvasElement;
const ctx = canvas.getContext("2d")!;
const vp: Viewport = { width: canvas.width, height: canvas.height, metersAcross: 160_000 };

function wsUrl(): string {
  const proto = location.protocol === "https:" ? "wss" : "ws";
  return `${proto}://${location.host}/ws`;
}

async function fillCheckpoints(): Promise<void> {
  const select = $("checkpoint") as HTMLSelectElement;
  try {
    const resp = await fetch("/v1/checkpoints");
    const list: { id: string }[] = await resp.json();
    select.innerHTML = "";
    for (const c of list) {
      const opt = document.createElement("option");
      opt.value = c.id;
      opt.textContent = c.id;
      select.appendChild(opt);
    }
  } catch {
    $("status").textContent = "cannot reach the match service";
  }
}

function joinMatch(): void {
  const checkpoint = ($("checkpoint") as HTMLSelectElement).value;
  const seed = parseInt(($("seed") as HTMLInputElement).value, 10) || 0;
  const side = ($("side") as HTMLSelectElement).value === "1" ? 1 : 0;
  const compression = parseFloat(($("compression") as HTMLSelectElement).value) || 1;
  conn?.close();
  conn = connect(wsUrl(), { checkpoint, seed, side, compression }, model, refreshPanels);
}

function sendTactic(action: TacticId): void {
  if (model.phase === "running" && conn !== null) {
    conn.sendAction(action);
    refreshPanels();
  }
}

function refreshPanels(): void {
  $("status").textContent =
    model.phase === "error" ? `error: ${model.lastError}` : `${model.phase} ${model.session}`;
  const feed = $("feed");
  feed.innerHTML = "";
  for (const ev of model.feed.slice(-12).reverse()) {
    const li = document.createElement("li");
    li.className = ev.kind;
    li.textContent = `[t=${ev.tick}] ${ev.text}`;
    feed.appendChild(li);
  }
  const displayed = model.displayedAction();
  document.querySelectorAll<HTMLButtonElement>("#tactics button").forEach((btn, i) => {
    btn.classList.toggle("latched", i === displayed);
    btn.classList.toggle("alert", i === 3 && model.hasWarning()); // BREAK affordance
  });
  if (model.result !== null) {
    $("status").textContent = `finished: ${model.result.outcome} (return ${model.result.return.toFixed(3)})`;
  }
}

function renderHud(hud: ReturnType<typeof buildScene>["hud"]): void {
  $("hud-fuel").textContent = `${hud.fuel.toFixed(0)} kg`;
  $("hud-missiles").textContent = String(hud.missiles);
  $("hud-health").textContent = `${(hud.health * 100).toFixed(0)}%`;
  $("hud-tactic").textContent = hud.tactic;
  $("hud-time").textContent = `${hud.sim_time.toFixed(0)} s`;
  const numerics = $("numerics");
  if (($("toggle-numerics") as HTMLInputElement).checked) {
    numerics.hidden = false;
    const fmt = (v: number | null, unit: string) => (v === null ? "--" : `${v.toFixed(0)}${unit}`);
    numerics.textContent =
      `Δd ${fmt(hud.rel_distance, " m")}  ` +
      `Δv ${fmt(hud.rel_speed, " m/s")}  ` +
      `Δα ${hud.rel_angle === null ? "--" : ((hud.rel_angle * 180) / Math.PI).toFixed(0) + "°"}`;
  } else {
    numerics.hidden = true;
  }
}

function frame(now: number): void {
  const flashPhase = Math.floor(now / 250) % 2 === 0;
  const liveTab = !($("tab-replay") as HTMLInputElement).checked;
  if (liveTab && model.latest !== null) {
    const scene = buildScene(model.latest, vp, model.displayedAction(), {
      nowMs: now,
      stateAtMs: model.latestReceivedAt,
      compression: model.compression / model.tickHz,
      maxExtrapolateS: 2,
    });
    drawScene(ctx, scene, vp, flashPhase);
    renderHud(scene.hud);
  } else if (!liveTab && replay !== null) {
    if (replay.playing && now - lastReplayAdvance > 100) {
      lastReplayAdvance = now;
      if (replay.cursor >= replay.length - 1) replay.playing = false;
      else replay.stepBy(1);
      ($("scrub") as HTMLInputElement).value = String(replay.cursor);
    }
    const tick = replay.current();
    if (tick !== null) {
      const scene = buildReplayScene(tick, vp);
      drawScene(ctx, scene, vp, flashPhase);
      renderHud(scene.hud);
      const prov = Object.entries(tick.provenance)
        .map(([side, chain]) => `side ${side}: ${chain.join(" → ")}`)
        .join("   |   ");
      $("replay-info").textContent =
        `tick ${replay.cursor + 1}/${replay.length}  reward ${tick.reward.toFixed(4)}  ` +
        `index ${tick.dca.toFixed(3)}  ${tick.outcome ?? ""}   ${prov}`;
    }
  }
  requestAnimationFrame(frame);
}

function setupReplayTab(): void {
  ($("replay-file") as HTMLInputElement).addEventListener("change", async (ev) => {
    const input = ev.target as HTMLInputElement;
    const file = input.files?.[0];
    if (!file) return;
    try {
      replay = loadReplay(await file.text());
      const scrub = $("scrub") as HTMLInputElement;
      scrub.max = String(Math.max(0, replay.length - 1));
      scrub.value = "0";
      $("replay-info").textContent = `loaded ${replay.length} ticks (seed ${replay.header.seed})`;
    } catch (err) {
      $("replay-info").textContent = `load failed: ${(err as Error).message}`;
    }
  });
  ($("scrub") as HTMLInputElement).addEventListener("input", (ev) => {
    replay?.seek(parseInt((ev.target as HTMLInputElement).value, 10) || 0);
  });
  $("replay-play").addEventListener("click", () => replay?.togglePlay());
  $("replay-back").addEventListener("click", () => replay?.stepBy(-1));
  $("replay-fwd").addEventListener("click", () => replay?.stepBy(1));
}

function setupTactics(): void {
  const holder = $("tactics");
  TACTIC_NAMES.forEach((name, i) => {
    const btn = document.createElement("button");
    btn.textContent = `${i + 1} ${name}`;
    btn.addEventListener("click", () => sendTactic(i as TacticId));
    holder.appendChild(btn);
  });
  window.addEventListener("keydown", (ev) => {
    const n = parseInt(ev.key, 10);
    if (n >= 1 && n <= 6) sendTactic((n - 1) as TacticId);
  });
}

fillCheckpoints();
setupTactics();
setupReplayTab();
$("join").addEventListener("click", joinMatch);
requestAnimationFrame(frame);
