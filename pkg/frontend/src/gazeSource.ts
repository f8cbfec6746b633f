/**
 * Gaze sample sources: mouse emulation at the tracker rate, recorded-trace
 * replay at original timestamps, and a live pass-through. All three emit the
 * same GAZE wire messages, so the server cannot tell them apart.
 */
import type { GazeMsg } from "./protocol.js";

export type GazeSink = (msg: GazeMsg) => void;
export type GazeMode = "mouse" | "replay" | "live";

export interface Scheduler {
  setInterval(fn: () => void, ms: number): number;
  clearInterval(id: number): void;
  now(): number;
}

export const realScheduler: Scheduler = {
  setInterval: (fn, ms) => setInterval(fn, ms) as unknown as number,
  clearInterval: (id) => clearInterval(id),
  now: () => performance.now(),
};

export const SAMPLE_RATE_HZ = 120;
export const SAMPLE_PERIOD_MS = 1000 / SAMPLE_RATE_HZ;

/** Samples the last known cursor position ~120 times a second. */
export class MouseEmulator {
  private timer: number | null = null;
  private lastX = 0;
  private lastY = 0;
  private seen = false;
  private epoch = 0;

  constructor(private sink: GazeSink, private scheduler: Scheduler = realScheduler) {}

  moveTo(x: number, y: number): void {
    this.lastX = x;
    this.lastY = y;
    this.seen = true;
  }

  start(): void {
    if (this.timer !== null) return;
    this.epoch = this.scheduler.now();
    this.timer = this.scheduler.setInterval(() => this.tick(), SAMPLE_PERIOD_MS);
  }

  stop(): void {
    if (this.timer !== null) {
      this.scheduler.clearInterval(this.timer);
      this.timer = null;
    }
  }

  get running(): boolean {
    return this.timer !== null;
  }

  private tick(): void {
    if (!this.seen) return;
    this.sink({
      type: "GAZE",
      t_ms: this.scheduler.now() - this.epoch,
      x: this.lastX,
      y: this.lastY,
      lv: 1,
      rv: 1,
    });
  }
}

export interface TraceSample {
  t_ms: number;
  x: number;
  y: number;
  lv: 0 | 1;
  rv: 0 | 1;
}

export class TraceFormatError extends Error {}

/** Parse a `gaze/1` trace file (pupil/distance columns are not replayed). */
export function parseTrace(text: string): TraceSample[] {
  const lines = text.split(/\r?\n/);
  if ((lines[0] ?? "").trim() !== "gaze/1") {
    throw new TraceFormatError("line 1: expected format tag 'gaze/1'");
  }
  const samples: TraceSample[] = [];
  for (let i = 1; i < lines.length; i++) {
    const line = lines[i];
    if (!line.trim()) continue;
    const parts = line.split(",");
    if (parts.length !== 8) {
      throw new TraceFormatError(`line ${i + 1}: expected 8 fields, got ${parts.length}`);
    }
    const [t, x, y, lv, rv] = parts;
    const sample: TraceSample = {
      t_ms: Number(t),
      x: Number(x),
      y: Number(y),
      lv: lv === "1" ? 1 : 0,
      rv: rv === "1" ? 1 : 0,
    };
    if ([sample.t_ms, sample.x, sample.y].some((v) => Number.isNaN(v))) {
      throw new TraceFormatError(`line ${i + 1}: non-numeric coordinate`);
    }
    samples.push(sample);
  }
  return samples;
}

/**
 * Replays a parsed trace against a clock: each call to pump() emits every
 * sample whose recorded timestamp has come due.
 */
export class TraceReplayer {
  private index = 0;
  private started: number | null = null;

  constructor(
    private samples: TraceSample[],
    private sink: GazeSink,
    private scheduler: Scheduler = realScheduler,
  ) {}

  start(): void {
    this.started = this.scheduler.now();
  }

  get done(): boolean {
    return this.index >= this.samples.length;
  }

  pump(): number {
    if (this.started === null) return 0;
    const elapsed = this.scheduler.now() - this.started;
    let emitted = 0;
    while (this.index < this.samples.length
           && this.samples[this.index].t_ms <= elapsed) {
      const s = this.samples[this.index++];
      this.sink({ type: "GAZE", t_ms: s.t_ms, x: s.x, y: s.y, lv: s.lv, rv: s.rv });
      emitted++;
    }
    return emitted;
  }
}

/** Live pass-through: forward an external tracker's samples unchanged. */
export function passThrough(sink: GazeSink): GazeSink {
  return (msg) => sink(msg);
}
