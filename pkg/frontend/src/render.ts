/**
 * Document rendering as a plain node tree, mountable onto the real DOM.
 * Everything is positioned absolutely at the geometry the document declares;
 * there is no reflow and no rescaling, so a coordinate on the server maps
 * to the same pixel here.
 */
import type { BarVisual } from "./displayModel.js";
import type { DocJson, RectJson } from "./protocol.js";

export interface VNode {
  tag: string;
  ns?: "svg";
  attrs: Record<string, string>;
  children: VNode[];
  text?: string;
}

export function el(
  tag: string,
  attrs: Record<string, string> = {},
  children: VNode[] = [],
  text?: string,
  ns?: "svg",
): VNode {
  return { tag, attrs, children, text, ns };
}

function px(v: number): string {
  return `${v}px`;
}

function positioned(rect: RectJson): string {
  return `position:absolute;left:${px(rect.x)};top:${px(rect.y)};` +
    `width:${px(rect.w)};height:${px(rect.h)};`;
}

export interface ViewportCheck {
  ok: boolean;
  required: { w: number; h: number };
}

/** The page needs the full declared geometry; no silent rescale. */
export function checkViewport(doc: DocJson, viewW: number, viewH: number): ViewportCheck {
  let maxX = 0;
  let maxY = 0;
  const consider = (r: RectJson) => {
    maxX = Math.max(maxX, r.x + r.w);
    maxY = Math.max(maxY, r.y + r.h);
  };
  Object.values(doc.layout.sentences).forEach((rects) => rects.forEach(consider));
  Object.values(doc.layout.aois).forEach((rects) => rects.forEach(consider));
  Object.values(doc.layout.bars).forEach(consider);
  return { ok: viewW >= maxX && viewH >= maxY, required: { w: maxX, h: maxY } };
}

export function errorBanner(message: string): VNode {
  return el("div", { class: "banner error", role: "alert" }, [], message);
}

/**
 * Sentence text split across its layout line boxes: the i-th box of a
 * sentence shows the i-th slice of its words.
 */
export function sentenceNodes(doc: DocJson): VNode[] {
  const nodes: VNode[] = [];
  for (const [idx, boxes] of Object.entries(doc.layout.sentences)) {
    const text = doc.sentences[Number(idx)] ?? "";
    const words = text.split(" ");
    const perBox = Math.ceil(words.length / Math.max(boxes.length, 1));
    boxes.forEach((rect, line) => {
      const slice = words.slice(line * perBox, (line + 1) * perBox).join(" ");
      nodes.push(
        el("div", {
          class: "sentence-line",
          "data-sentence": idx,
          "data-line": String(line),
          style: positioned(rect),
        }, [], slice),
      );
    });
  }
  return nodes;
}

function barStyle(visual: BarVisual | undefined): { stroke: string; width: number } {
  if (!visual || visual.state === "plain") {
    return { stroke: "none", width: 0 };
  }
  return { stroke: visual.outline, width: visual.width };
}

/**
 * The chart as one absolutely positioned SVG; every bar is a rect at its
 * declared bounding box regardless of chart kind (the layout already encodes
 * simple/stacked/grouped placement).
 */
export function chartNode(
  doc: DocJson,
  barVisuals: Map<string, BarVisual>,
  viewW: number,
  viewH: number,
): VNode {
  const bars: VNode[] = doc.chart.bars.map((bar) => {
    const rect = doc.layout.bars[bar.id];
    const { stroke, width } = barStyle(barVisuals.get(bar.id));
    return el("rect", {
      "data-bar": bar.id,
      x: String(rect.x),
      y: String(rect.y),
      width: String(rect.w),
      height: String(rect.h),
      fill: bar.color,
      stroke,
      "stroke-width": String(width),
    }, [], undefined, "svg");
  });
  const labels: VNode[] = doc.chart.bars.map((bar) => {
    const rect = doc.layout.bars[bar.id];
    return el("text", {
      class: "bar-label",
      x: String(rect.x + rect.w / 2),
      y: String(Math.min(viewH - 4, rect.y + rect.h + 14)),
      "text-anchor": "middle",
    }, [], bar.label, "svg");
  });
  return el("svg", {
    class: "chart",
    width: String(viewW),
    height: String(viewH),
    style: "position:absolute;left:0;top:0;pointer-events:none;",
  }, [...bars, ...labels], undefined, "svg");
}

export function renderPage(
  doc: DocJson,
  barVisuals: Map<string, BarVisual>,
  viewW: number,
  viewH: number,
): VNode {
  return el("div", {
    class: "page",
    style: `position:relative;width:${px(viewW)};height:${px(viewH)};`,
  }, [
    el("h1", { class: "title", style: "position:absolute;left:40px;top:8px;" }, [], doc.title),
    ...sentenceNodes(doc),
    chartNode(doc, barVisuals, viewW, viewH),
  ]);
}

const SVG_NS = "http://www.w3.org/2000/svg";

/** Materialize a node tree onto the real DOM. */
export function mount(node: VNode, domDoc: Document): Element {
  const element = node.ns === "svg"
    ? domDoc.createElementNS(SVG_NS, node.tag)
    : domDoc.createElement(node.tag);
  for (const [key, value] of Object.entries(node.attrs)) {
    element.setAttribute(key, value);
  }
  if (node.text !== undefined) {
    element.textContent = node.text;
  }
  for (const child of node.children) {
    element.appendChild(mount(child, domDoc));
  }
  return element;
}
