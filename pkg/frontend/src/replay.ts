// After-action replay: parses the server's full-truth JSONL episode log
// and exposes a scrubbable timeline that reveals both sides.

export interface ReplayAircraft {
  id: number;
  position: [number, number, number];
  speed: number;
  heading: number;
  fuel: number;
  missiles: number;
  health: number;
  alive: boolean;
}

export interface ReplayMissile {
  id: number;
  shooter_id: number;
  target_id: number;
  position: [number, number, number];
  seeker_active: boolean;
  alive: boolean;
}

export interface ReplayTick {
  tick: number;
  sim_time: number;
  aircraft: ReplayAircraft[];
  missiles: ReplayMissile[];
  actions: Record<string, number | null>;
  provenance: Record<string, string[]>;
  reward: number;
  dca: number;
  outcome: string | null;
}

export interface ReplayHeader {
  v: number;
  seed: number;
  sides: Record<string, string>;
}

export class ReplayLoadError extends Error {
  constructor(message: string, readonly line: number) {
    super(`line ${line}: ${message}`);
  }
}

export function parseReplay(text: string): { header: ReplayHeader; ticks: ReplayTick[] } {
  let header: ReplayHeader | null = null;
  const ticks: ReplayTick[] = [];
  const lines = text.split("\n");
  for (let i = 0; i < lines.length; i++) {
    const line = lines[i].trim();
    if (line.length === 0) continue;
    let entry: any;
    try {
      entry = JSON.parse(line);
    } catch {
      throw new ReplayLoadError("not valid JSON", i + 1);
    }
    if (entry.type === "header") {
      if (header !== null) throw new ReplayLoadError("duplicate header", i + 1);
      header = { v: entry.v, seed: entry.seed, sides: entry.sides ?? {} };
    } else if (entry.type === "tick") {
      if (header === null) throw new ReplayLoadError("tick before header", i + 1);
      if (!Array.isArray(entry.aircraft) || typeof entry.tick !== "number") {
        throw new ReplayLoadError("malformed tick entry", i + 1);
      }
      ticks.push({
        tick: entry.tick,
        sim_time: entry.sim_time,
        aircraft: entry.aircraft,
        missiles: entry.missiles ?? [],
        actions: entry.actions ?? {},
        provenance: Object.fromEntries(
          Object.entries(entry.commands ?? {}).map(([side, cmd]: [string, any]) => [side, cmd.provenance ?? []]),
        ),
        reward: entry.reward,
        dca: entry.dca,
        outcome: entry.outcome ?? null,
      });
    } else {
      throw new ReplayLoadError(`unknown entry type ${String(entry.type)}`, i + 1);
    }
  }
  if (header === null) throw new ReplayLoadError("missing header", 1);
  return { header, ticks };
}

export class ReplayTimeline {
  cursor = 0;
  playing = false;

  constructor(
    readonly header: ReplayHeader,
    readonly ticks: ReplayTick[],
  ) {}

  get length(): number {
    return this.ticks.length;
  }

  current(): ReplayTick | null {
    return this.ticks.length > 0 ? this.ticks[this.cursor] : null;
  }

  seek(index: number): ReplayTick | null {
    if (this.ticks.length === 0) return null;
    this.cursor = Math.max(0, Math.min(index, this.ticks.length - 1));
    return this.ticks[this.cursor];
  }

  stepBy(delta: number): ReplayTick | null {
    return this.seek(this.cursor + delta);
  }

  togglePlay(): boolean {
    this.playing = !this.playing;
    return this.playing;
  }
}

export function loadReplay(text: string): ReplayTimeline {
  const { header, ticks } = parseReplay(text);
  return new ReplayTimeline(header, ticks);
}
