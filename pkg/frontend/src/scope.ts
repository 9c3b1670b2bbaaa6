// Tactical scope: pure scene computation plus a canvas renderer.
// The scene builder is DOM-free so tests can assert fog-of-war soundness:
// every glyph must come from the state payload that produced it.

import { StateMsg, TACTIC_NAMES, TacticId } from "./protocol.js";

export const RING_SPACING_M = 20_000;

export interface Viewport {
  width: number;
  height: number;
  metersAcross: number; // world meters mapped to the viewport width
}

export interface Glyph {
  kind: "ownship" | "station" | "track" | "warning" | "missile" | "ring" | "leader";
  x: number; // screen px
  y: number;
  label?: string;
  heading?: number; // screen-space rotation, radians clockwise from up
  radius?: number; // rings: screen px
  flash?: boolean;
  predicted?: boolean;
  source_id?: number;
}

export interface Scene {
  glyphs: Glyph[];
  hud: {
    fuel: number;
    missiles: number;
    health: number;
    sensor: boolean;
    tactic: string;
    sim_time: number;
    warning: boolean;
    rel_distance: number | null;
    rel_speed: number | null;
    rel_angle: number | null;
  };
}

// World frame: x = north, y = east. Screen: north up, east right.
export function worldToScreen(
  wx: number,
  wy: number,
  centerX: number,
  centerY: number,
  vp: Viewport,
): { x: number; y: number } {
  const scale = vp.width / vp.metersAcross;
  return {
    x: vp.width / 2 + (wy - centerY) * scale,
    y: vp.height / 2 - (wx - centerX) * scale,
  };
}

export interface DeadReckonOpts {
  nowMs: number;
  stateAtMs: number;
  compression: number; // sim seconds per wall second
  maxExtrapolateS: number;
}

// Linear extrapolation of ownship between data ticks; anything beyond the
// last received state is explicitly marked predicted.
export function deadReckonOwnship(
  state: StateMsg,
  opts: DeadReckonOpts,
): { x: number; y: number; z: number; predicted: boolean } {
  const dt = Math.max(0, Math.min(((opts.nowMs - opts.stateAtMs) / 1000) * opts.compression, opts.maxExtrapolateS));
  if (dt === 0) {
    return { x: state.ownship.x, y: state.ownship.y, z: state.ownship.z, predicted: false };
  }
  return {
    x: state.ownship.x + state.ownship.vx * dt,
    y: state.ownship.y + state.ownship.vy * dt,
    z: state.ownship.z + state.ownship.vz * dt,
    predicted: true,
  };
}

export function buildScene(
  state: StateMsg,
  vp: Viewport,
  latched: TacticId,
  reckon?: DeadReckonOpts,
): Scene {
  const own = reckon
    ? deadReckonOwnship(state, reckon)
    : { x: state.ownship.x, y: state.ownship.y, z: state.ownship.z, predicted: false };
  const cx = own.x;
  const cy = own.y;
  const scale = vp.width / vp.metersAcross;
  const glyphs: Glyph[] = [];

  const maxRadius = Math.hypot(vp.width, vp.height) / 2;
  for (let r = RING_SPACING_M; r * scale <= maxRadius; r += RING_SPACING_M) {
    glyphs.push({
      kind: "ring",
      x: vp.width / 2,
      y: vp.height / 2,
      radius: r * scale,
      label: `${Math.round(r / 1000)} km`,
    });
  }

  const station = worldToScreen(state.station.x, state.station.y, cx, cy, vp);
  glyphs.push({ kind: "station", x: station.x, y: station.y, label: "CAP" });

  for (const t of state.tracks) {
    const p = worldToScreen(t.x, t.y, cx, cy, vp);
    const speed = Math.hypot(t.vx, t.vy);
    glyphs.push({
      kind: "track",
      x: p.x,
      y: p.y,
      heading: Math.atan2(t.vy, t.vx),
      label: `T${t.target_id}`,
      source_id: t.target_id,
    });
    if (speed > 1) {
      const leaderS = 30; // seconds of travel shown by the velocity leader
      const tip = worldToScreen(t.x + t.vx * leaderS, t.y + t.vy * leaderS, cx, cy, vp);
      glyphs.push({ kind: "leader", x: tip.x, y: tip.y, source_id: t.target_id });
    }
  }

  for (const w of state.warnings) {
    // warnings arrive as bearing/range from ownship
    const wx = own.x + w.range * Math.cos(w.bearing);
    const wy = own.y + w.range * Math.sin(w.bearing);
    const p = worldToScreen(wx, wy, cx, cy, vp);
    glyphs.push({ kind: "warning", x: p.x, y: p.y, flash: true, label: "M!", source_id: w.missile_id });
  }

  for (const m of state.own_missiles) {
    const p = worldToScreen(m.x, m.y, cx, cy, vp);
    glyphs.push({
      kind: "missile",
      x: p.x,
      y: p.y,
      label: m.seeker_active ? "PITBULL" : m.supported ? "DL" : "??",
      source_id: m.id,
    });
  }

  glyphs.push({
    kind: "ownship",
    x: vp.width / 2,
    y: vp.height / 2,
    heading: state.ownship.yaw,
    predicted: own.predicted,
  });

  return {
    glyphs,
    hud: {
      fuel: state.stores.fuel,
      missiles: state.stores.missiles,
      health: state.ownship.health,
      sensor: state.ownship.sensor,
      tactic: TACTIC_NAMES[latched],
      sim_time: state.sim_time,
      warning: state.warnings.length > 0,
      rel_distance: state.ownship.rel_distance,
      rel_speed: state.ownship.rel_speed,
      rel_angle: state.ownship.rel_angle,
    },
  };
}

// --- canvas rendering -------------------------------------------------------

const COLORS: Record<Glyph["kind"], string> = {
  ring: "#1d3a2a",
  station: "#46c46e",
  track: "#ff5d5d",
  leader: "#ff9d9d",
  warning: "#ffd23c",
  missile: "#6db9ff",
  ownship: "#7dff9a",
};

export function drawScene(ctx: CanvasRenderingContext2D, scene: Scene, vp: Viewport, flashPhase: boolean): void {
  ctx.clearRect(0, 0, vp.width, vp.height);
  ctx.fillStyle = "#050b07";
  ctx.fillRect(0, 0, vp.width, vp.height);
  ctx.lineWidth = 1;
  ctx.font = "11px monospace";

  for (const g of scene.glyphs) {
    ctx.strokeStyle = COLORS[g.kind];
    ctx.fillStyle = COLORS[g.kind];
    switch (g.kind) {
      case "ring":
        ctx.beginPath();
        ctx.arc(g.x, g.y, g.radius ?? 0, 0, Math.PI * 2);
        ctx.stroke();
        if (g.label) ctx.fillText(g.label, g.x + (g.radius ?? 0) * 0.7071 + 4, g.y - (g.radius ?? 0) * 0.7071);
        break;
      case "station":
        ctx.strokeRect(g.x - 5, g.y - 5, 10, 10);
        if (g.label) ctx.fillText(g.label, g.x + 8, g.y + 4);
        break;
      case "track": {
        ctx.save();
        ctx.translate(g.x, g.y);
        ctx.rotate(g.heading ?? 0); // world heading 0 = north = screen up
        ctx.beginPath();
        ctx.moveTo(0, -6);
        ctx.lineTo(5, 6);
        ctx.lineTo(-5, 6);
        ctx.closePath();
        ctx.stroke();
        ctx.restore();
        if (g.label) ctx.fillText(g.label, g.x + 8, g.y - 8);
        break;
      }
      case "leader":
        ctx.beginPath();
        ctx.arc(g.x, g.y, 1.5, 0, Math.PI * 2);
        ctx.fill();
        break;
      case "warning":
        if (!g.flash || flashPhase) {
          ctx.beginPath();
          ctx.moveTo(g.x, g.y - 7);
          ctx.lineTo(g.x + 7, g.y + 6);
          ctx.lineTo(g.x - 7, g.y + 6);
          ctx.closePath();
          ctx.fill();
          if (g.label) ctx.fillText(g.label, g.x + 9, g.y);
        }
        break;
      case "missile":
        ctx.beginPath();
        ctx.arc(g.x, g.y, 3, 0, Math.PI * 2);
        ctx.fill();
        if (g.label) ctx.fillText(g.label, g.x + 6, g.y + 4);
        break;
      case "ownship": {
        ctx.save();
        ctx.translate(g.x, g.y);
        ctx.rotate(g.heading ?? 0); // yaw 0 = north = screen up
        ctx.beginPath();
        ctx.moveTo(0, -9);
        ctx.lineTo(6, 8);
        ctx.lineTo(0, 4);
        ctx.lineTo(-6, 8);
        ctx.closePath();
        if (g.predicted) ctx.setLineDash([3, 3]);
        ctx.stroke();
        ctx.restore();
        break;
      }
    }
  }
}
