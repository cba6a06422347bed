/** Shared figure scaffolding: frame, axes, legend. */

import { Domain, Scale, formatTick } from "./scales.js";
import { el, text } from "./svg.js";

export interface FrameSpec {
  width: number;
  height: number;
  margin: { top: number; right: number; bottom: number; left: number };
}

export const DEFAULT_FRAME: FrameSpec = {
  width: 640,
  height: 440,
  margin: { top: 40, right: 24, bottom: 52, left: 64 },
};

export interface Frame {
  spec: FrameSpec;
  xRange: [number, number];
  yRange: [number, number];
}

export function makeFrame(spec: FrameSpec = DEFAULT_FRAME): Frame {
  return {
    spec,
    xRange: [spec.margin.left, spec.width - spec.margin.right],
    yRange: [spec.height - spec.margin.bottom, spec.margin.top],
  };
}

export function frameBox(frame: Frame): string {
  const { xRange, yRange } = frame;
  return el("rect", {
    x: xRange[0],
    y: yRange[1],
    width: xRange[1] - xRange[0],
    height: yRange[0] - yRange[1],
    fill: "none",
    stroke: "#444",
    "stroke-width": 1,
  });
}

export function xAxis(
  frame: Frame,
  scale: Scale,
  ticks: number[],
  label: string,
): string[] {
  const y0 = frame.yRange[0];
  const parts: string[] = [];
  for (const t of ticks) {
    const x = scale(t);
    parts.push(el("line", { x1: x, y1: y0, x2: x, y2: y0 + 5, stroke: "#444" }));
    parts.push(text(x, y0 + 18, formatTick(t), { "text-anchor": "middle" }));
  }
  parts.push(
    text((frame.xRange[0] + frame.xRange[1]) / 2, frame.spec.height - 10, label, {
      "text-anchor": "middle",
      "font-size": 12,
    }),
  );
  return parts;
}

export function yAxis(
  frame: Frame,
  scale: Scale,
  ticks: number[],
  label: string,
): string[] {
  const x0 = frame.xRange[0];
  const parts: string[] = [];
  for (const t of ticks) {
    const y = scale(t);
    parts.push(el("line", { x1: x0 - 5, y1: y, x2: x0, y2: y, stroke: "#444" }));
    parts.push(
      text(x0 - 8, y + 4, formatTick(t), { "text-anchor": "end" }),
    );
  }
  parts.push(
    el("g", { transform: `translate(14 ${(frame.yRange[0] + frame.yRange[1]) / 2}) rotate(-90)` }, [
      text(0, 0, label, { "text-anchor": "middle", "font-size": 12 }),
    ]),
  );
  return parts;
}

export interface LegendEntry {
  label: string;
  color: string;
  marker?: boolean;
}

export function legend(frame: Frame, entries: LegendEntry[]): string[] {
  const x = frame.xRange[1] - 190;
  let y = frame.yRange[1] + 14;
  const parts: string[] = [];
  for (const entry of entries) {
    if (entry.marker) {
      parts.push(el("circle", { cx: x + 12, cy: y - 3, r: 3, fill: entry.color }));
    } else {
      parts.push(
        el("line", { x1: x, y1: y - 3, x2: x + 24, y2: y - 3, stroke: entry.color, "stroke-width": 2 }),
      );
    }
    parts.push(text(x + 30, y, entry.label));
    y += 16;
  }
  return parts;
}

export function title(frame: Frame, content: string): string {
  return text((frame.xRange[0] + frame.xRange[1]) / 2, 20, content, {
    "text-anchor": "middle",
    "font-size": 14,
  });
}

export function clampDomainValues(values: number[], domain: Domain): number[] {
  return values.map((v) => Math.min(Math.max(v, domain.min), domain.max));
}
