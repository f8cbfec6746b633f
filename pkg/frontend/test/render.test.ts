import { describe, expect, it } from "vitest";

import { DisplayModel } from "../src/displayModel.js";
import type { DocJson } from "../src/protocol.js";
import { checkViewport, chartNode, renderPage, sentenceNodes, VNode } from "../src/render.js";

const doc: DocJson = {
  format: "msnv/1",
  id: "d0",
  title: "Title",
  sentences: ["alpha beta gamma delta", "second sentence words here"],
  references: [
    { id: "r0", sentences: [0], dataPoints: ["b0", "b1"] },
  ],
  chart: {
    kind: "grouped",
    bars: [
      { id: "b0", label: "A", series: "s1", value: 4, color: "#AABB22" },
      { id: "b1", label: "B", series: "s2", value: 7, color: "#22AABB" },
      { id: "b2", label: "C", series: "s1", value: 2, color: "#BB22AA" },
    ],
  },
  layout: {
    aois: { r0: [{ x: 40, y: 60, w: 800, h: 28 }] },
    bars: {
      b0: { x: 100.5, y: 700.25, w: 60, h: 200 },
      b1: { x: 200, y: 650, w: 60, h: 250 },
      b2: { x: 300, y: 750, w: 60, h: 150 },
    },
    sentences: {
      "0": [{ x: 40, y: 60, w: 800, h: 28 }],
      "1": [{ x: 40, y: 104, w: 800, h: 28 }, { x: 40, y: 148, w: 400, h: 28 }],
    },
  },
};

function collect(node: VNode, pred: (n: VNode) => boolean, out: VNode[] = []): VNode[] {
  if (pred(node)) out.push(node);
  node.children.forEach((c) => collect(c, pred, out));
  return out;
}

function styleRect(style: string) {
  const get = (key: string) => {
    const m = style.match(new RegExp(`${key}:([0-9.]+)px`));
    return m ? Number(m[1]) : NaN;
  };
  return { x: get("left"), y: get("top"), w: get("width"), h: get("height") };
}

describe("geometry fidelity", () => {
  it("renders every bar rect at its declared geometry (within 1px)", () => {
    const model = new DisplayModel();
    model.loadDocument(doc);
    const chart = chartNode(doc, model.bars, 1280, 1024);
    const rects = collect(chart, (n) => n.tag === "rect");
    expect(rects.length).toBe(3);
    for (const rect of rects) {
      const want = doc.layout.bars[rect.attrs["data-bar"]];
      expect(Math.abs(Number(rect.attrs.x) - want.x)).toBeLessThanOrEqual(1);
      expect(Math.abs(Number(rect.attrs.y) - want.y)).toBeLessThanOrEqual(1);
      expect(Math.abs(Number(rect.attrs.width) - want.w)).toBeLessThanOrEqual(1);
      expect(Math.abs(Number(rect.attrs.height) - want.h)).toBeLessThanOrEqual(1);
    }
  });

  it("renders every sentence line box at its declared geometry", () => {
    const lines = sentenceNodes(doc);
    expect(lines.length).toBe(3);
    for (const line of lines) {
      const idx = line.attrs["data-sentence"];
      const lineNo = Number(line.attrs["data-line"]);
      const want = doc.layout.sentences[idx][lineNo];
      const got = styleRect(line.attrs.style);
      expect(Math.abs(got.x - want.x)).toBeLessThanOrEqual(1);
      expect(Math.abs(got.y - want.y)).toBeLessThanOrEqual(1);
      expect(Math.abs(got.w - want.w)).toBeLessThanOrEqual(1);
      expect(Math.abs(got.h - want.h)).toBeLessThanOrEqual(1);
    }
  });

  it("splits wrapped sentences across their line boxes", () => {
    const lines = sentenceNodes(doc).filter((l) => l.attrs["data-sentence"] === "1");
    const joined = lines.map((l) => l.text).join(" ").trim();
    expect(joined).toBe(doc.sentences[1]);
  });

  it("one bar element per bar id", () => {
    const model = new DisplayModel();
    model.loadDocument(doc);
    const page = renderPage(doc, model.bars, 1280, 1024);
    const rects = collect(page, (n) => n.tag === "rect");
    expect(new Set(rects.map((r) => r.attrs["data-bar"])).size)
      .toBe(doc.chart.bars.length);
  });
});

describe("highlight styling", () => {
  it("applies commanded outline and width, never client constants", () => {
    const model = new DisplayModel();
    model.loadDocument(doc);
    model.applyCommand({ type: "HIGHLIGHT", refId: "r0", barIds: ["b0", "b1"],
                         outline: "#112233", width: 7 });
    const chart = chartNode(doc, model.bars, 1280, 1024);
    const byId = Object.fromEntries(
      collect(chart, (n) => n.tag === "rect").map((r) => [r.attrs["data-bar"], r]));
    expect(byId.b0.attrs.stroke).toBe("#112233");
    expect(byId.b0.attrs["stroke-width"]).toBe("7");
    expect(byId.b2.attrs.stroke).toBe("none");
  });
});

describe("viewport check", () => {
  it("accepts a viewport covering the declared geometry", () => {
    expect(checkViewport(doc, 1280, 1024).ok).toBe(true);
  });

  it("refuses to rescale into a small viewport", () => {
    const check = checkViewport(doc, 640, 480);
    expect(check.ok).toBe(false);
    expect(check.required.w).toBeGreaterThan(640);
  });
});
