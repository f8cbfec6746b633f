/**
 * Client-side display state. The model never invents visual state: it is
 * exactly the replay of the intervention commands received so far, and
 * clearing + replaying the log reproduces it.
 */
import type { DocJson, InterventionMsg } from "./protocol.js";

export type BarVisual =
  | { state: "plain" }
  | { state: "active"; outline: string; width: number }
  | { state: "desaturated"; outline: string; width: number };

export type RefState = "plain" | "active" | "desaturated";

export type Phase = "connecting" | "reading" | "questions" | "ratings" | "done";

export interface IgnoredCommand {
  message: InterventionMsg;
  reason: string;
}

export class DisplayModel {
  doc: DocJson | null = null;
  phase: Phase = "connecting";
  bars = new Map<string, BarVisual>();
  refs = new Map<string, RefState>();
  commandLog: InterventionMsg[] = [];
  ignored: IgnoredCommand[] = [];
  /** bars last commanded per reference (from HIGHLIGHT messages) */
  private refBars = new Map<string, string[]>();
  private lastWidth = new Map<string, number>();

  loadDocument(doc: DocJson): void {
    this.doc = doc;
    this.phase = "reading";
    this.bars = new Map(doc.chart.bars.map((b) => [b.id, { state: "plain" }]));
    this.refs = new Map(doc.references.map((r) => [r.id, "plain"]));
    this.refBars = new Map(doc.references.map((r) => [r.id, r.dataPoints]));
    this.lastWidth = new Map();
    this.commandLog = [];
    this.ignored = [];
  }

  /**
   * Apply one HIGHLIGHT / DESATURATE / REMOVE. Unknown bar or reference ids
   * are logged and ignored: the engine is authoritative and the display
   * never guesses.
   */
  applyCommand(msg: InterventionMsg): void {
    if (this.doc === null) {
      this.ignored.push({ message: msg, reason: "no document loaded" });
      return;
    }
    if (!this.refs.has(msg.refId)) {
      this.ignored.push({ message: msg, reason: `unknown reference '${msg.refId}'` });
      return;
    }
    if (msg.type === "HIGHLIGHT") {
      const missing = msg.barIds.filter((b) => !this.bars.has(b));
      if (missing.length > 0) {
        this.ignored.push({ message: msg, reason: `unknown bars ${missing.join(",")}` });
        return;
      }
      this.refBars.set(msg.refId, msg.barIds);
      this.lastWidth.set(msg.refId, msg.width);
      for (const barId of msg.barIds) {
        this.bars.set(barId, { state: "active", outline: msg.outline, width: msg.width });
      }
      this.refs.set(msg.refId, "active");
    } else if (msg.type === "DESATURATE") {
      const width = this.lastWidth.get(msg.refId) ?? 3;
      for (const barId of this.refBars.get(msg.refId) ?? []) {
        this.bars.set(barId, { state: "desaturated", outline: msg.outline, width });
      }
      this.refs.set(msg.refId, "desaturated");
    } else {
      for (const barId of this.refBars.get(msg.refId) ?? []) {
        this.bars.set(barId, { state: "plain" });
      }
      this.refs.set(msg.refId, "plain");
    }
    this.commandLog.push(msg);
  }

  /** Rebuild the visual state from scratch by replaying the command log. */
  replayLog(): DisplayModel {
    const fresh = new DisplayModel();
    if (this.doc !== null) {
      fresh.loadDocument(this.doc);
      for (const msg of this.commandLog) {
        fresh.applyCommand(msg);
      }
      fresh.phase = this.phase;
    }
    return fresh;
  }

  statesEqual(other: DisplayModel): boolean {
    if (this.bars.size !== other.bars.size || this.refs.size !== other.refs.size) {
      return false;
    }
    for (const [id, visual] of this.bars) {
      const o = other.bars.get(id);
      if (!o || JSON.stringify(o) !== JSON.stringify(visual)) return false;
    }
    for (const [id, state] of this.refs) {
      if (other.refs.get(id) !== state) return false;
    }
    return true;
  }
}
