// Scene construction for the after-action viewer: full truth, both sides.

import { Glyph, Scene, Viewport, worldToScreen } from "./scope.js";
import { ReplayTick } from "./replay.js";
import { TACTIC_NAMES } from "./protocol.js";

export function buildReplayScene(tick: ReplayTick, vp: Viewport): Scene {
  const own = tick.aircraft.find((a) => a.id === 0) ?? tick.aircraft[0];
  const cx = own.position[0];
  const cy = own.position[1];
  const glyphs: Glyph[] = [];

  const scale = vp.width / vp.metersAcross;
  const maxRadius = Math.hypot(vp.width, vp.height) / 2;
  for (let r = 20_000; r * scale <= maxRadius; r += 20_000) {
    glyphs.push({ kind: "ring", x: vp.width / 2, y: vp.height / 2, radius: r * scale, label: `${r / 1000} km` });
  }

  for (const ac of tick.aircraft) {
    if (!ac.alive) continue;
    const p = worldToScreen(ac.position[0], ac.position[1], cx, cy, vp);
    glyphs.push({
      kind: ac.id === own.id ? "ownship" : "track",
      x: p.x,
      y: p.y,
      heading: ac.heading,
      label: ac.id === own.id ? undefined : `AC${ac.id}`,
      source_id: ac.id,
    });
  }

  for (const m of tick.missiles) {
    if (!m.alive) continue;
    const p = worldToScreen(m.position[0], m.position[1], cx, cy, vp);
    glyphs.push({
      kind: "missile",
      x: p.x,
      y: p.y,
      label: m.seeker_active ? "PITBULL" : `M${m.id}`,
      source_id: m.id,
    });
  }

  const actionName = (side: string): string => {
    const a = tick.actions[side];
    return a === null || a === undefined ? "(scripted)" : TACTIC_NAMES[a] ?? "?";
  };

  return {
    glyphs,
    hud: {
      fuel: own.fuel,
      missiles: own.missiles,
      health: own.health,
      sensor: true,
      tactic: actionName("0"),
      sim_time: tick.sim_time,
      warning: false,
      rel_distance: null,
      rel_speed: null,
      rel_angle: null,
    },
  };
}
