import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";
import { describe, expect, it } from "vitest";

import { DisplayModel, RefState } from "../src/displayModel.js";
import type { DocJson, InterventionMsg } from "../src/protocol.js";

const here = dirname(fileURLToPath(import.meta.url));

interface DualReplayCase {
  docId: string;
  strategy: string;
  bars: Record<string, string[]>;
  messages: InterventionMsg[];
  expected: Record<string, string>;
}

const fixture: { cases: DualReplayCase[] } = JSON.parse(
  readFileSync(join(here, "fixtures", "dual_replay.json"), "utf-8"),
);

/** Minimal document matching a fixture case's references and bars. */
function docFor(c: DualReplayCase): DocJson {
  const barIds = [...new Set(Object.values(c.bars).flat())];
  return {
    format: "msnv/1",
    id: c.docId,
    title: "t",
    sentences: ["s"],
    references: Object.entries(c.bars).map(([id, dataPoints]) => ({
      id, sentences: [0], dataPoints,
    })),
    chart: {
      kind: "simple",
      bars: barIds.map((id) => ({ id, label: id, value: 1, color: "#888888" })),
    },
    layout: {
      aois: {},
      bars: Object.fromEntries(barIds.map((id, i) => [
        id, { x: 10 + 40 * i, y: 700, w: 30, h: 100 },
      ])),
      sentences: { "0": [{ x: 40, y: 60, w: 800, h: 28 }] },
    },
  };
}

const ENGINE_TO_CLIENT: Record<string, RefState> = {
  UNTRIGGERED: "plain",
  ACTIVE: "active",
  DESATURATED: "desaturated",
  REMOVED: "plain",
};

describe("dual replay against the engine status map", () => {
  it("matches on all recorded cases", () => {
    expect(fixture.cases.length).toBe(200);
    for (const c of fixture.cases) {
      const model = new DisplayModel();
      model.loadDocument(docFor(c));
      for (const msg of c.messages) {
        model.applyCommand(msg);
      }
      for (const [refId, engineState] of Object.entries(c.expected)) {
        expect(model.refs.get(refId), `${c.docId}/${c.strategy}/${refId}`)
          .toBe(ENGINE_TO_CLIENT[engineState]);
      }
      expect(model.ignored).toEqual([]);
      // bar-level view agrees with reference-level view
      for (const [refId, barIds] of Object.entries(c.bars)) {
        const want = model.refs.get(refId);
        for (const barId of barIds) {
          const visual = model.bars.get(barId)!;
          expect(visual.state).toBe(want);
        }
      }
    }
  });

  it("commands apply synchronously (within the same frame)", () => {
    const c = fixture.cases.find((x) => x.messages.length > 0)!;
    const model = new DisplayModel();
    model.loadDocument(docFor(c));
    const msg = c.messages[0];
    model.applyCommand(msg);
    expect(model.refs.get(msg.refId)).not.toBe("plain");
  });
});

describe("display model behavior", () => {
  const base = fixture.cases[0];

  function loaded(): DisplayModel {
    const model = new DisplayModel();
    model.loadDocument(docFor(base));
    return model;
  }

  function highlight(refId: string, barIds: string[]): InterventionMsg {
    return { type: "HIGHLIGHT", refId, barIds, outline: "#000000", width: 3 };
  }

  it("re-applying the last command changes nothing", () => {
    for (const c of fixture.cases.slice(0, 40)) {
      if (c.messages.length === 0) continue;
      const model = new DisplayModel();
      model.loadDocument(docFor(c));
      for (const msg of c.messages) model.applyCommand(msg);
      const again = model.replayLog();
      again.applyCommand(c.messages[c.messages.length - 1]);
      expect(again.statesEqual(model)).toBe(true);
    }
  });

  it("clearing and replaying the command log reproduces the screen", () => {
    for (const c of fixture.cases.slice(0, 60)) {
      const model = new DisplayModel();
      model.loadDocument(docFor(c));
      for (const msg of c.messages) model.applyCommand(msg);
      expect(model.replayLog().statesEqual(model)).toBe(true);
    }
  });

  it("unknown bar ids are logged and ignored", () => {
    const model = loaded();
    const before = model.replayLog();
    model.applyCommand(highlight(Object.keys(base.bars)[0], ["ghost-bar"]));
    expect(model.ignored.length).toBe(1);
    expect(model.statesEqual(before)).toBe(true);
  });

  it("unknown reference ids are logged and ignored", () => {
    const model = loaded();
    model.applyCommand({ type: "REMOVE", refId: "ghost" });
    expect(model.ignored.length).toBe(1);
  });

  it("REMOVE on a never-highlighted reference changes nothing visible", () => {
    const model = loaded();
    const refId = Object.keys(base.bars)[0];
    model.applyCommand({ type: "REMOVE", refId });
    for (const [, visual] of model.bars) {
      expect(visual.state).toBe("plain");
    }
  });

  it("desaturate keeps the highlighted width", () => {
    const model = loaded();
    const [refId, barIds] = Object.entries(base.bars)[0];
    model.applyCommand({ type: "HIGHLIGHT", refId, barIds, outline: "#000000", width: 5 });
    model.applyCommand({ type: "DESATURATE", refId, outline: "#808080" });
    const visual = model.bars.get(barIds[0])!;
    expect(visual).toEqual({ state: "desaturated", outline: "#808080", width: 5 });
  });
});
