/** Empirical CDF figures with their model overlays.
 *
 * The input files already carry the overlay columns: the fluid
 * (exponential) and hard-core (half atom + exponential) laws for latency
 * files, and the Poisson / exclusion-ball references for
 * nearest-neighbor files. The script only draws. */

import { numericColumn, parseCsv, requireColumns } from "./csv.js";
import { linearScale, linearTicks, padDomain } from "./scales.js";
import {
  DEFAULT_FRAME,
  FrameSpec,
  frameBox,
  legend,
  makeFrame,
  title,
  xAxis,
  yAxis,
} from "./plot.js";
import { el, polyline, svgDocument } from "./svg.js";

export type CdfKind = "latency" | "nn";

const REQUIRED = ["value", "ecdf", "model_fluid", "model_hardcore"] as const;

const LABELS: Record<CdfKind, { x: string; title: string; fluid: string; hard: string }> = {
  latency: {
    x: "latency (s)",
    title: "latency distribution",
    fluid: "fluid (exponential)",
    hard: "hard-core (atom + exp)",
  },
  nn: {
    x: "nearest-neighbor distance (m)",
    title: "nearest-neighbor distance distribution",
    fluid: "Poisson reference",
    hard: "exclusion reference",
  },
};

function stepPoints(xs: number[], ys: number[]): Array<[number, number]> {
  const pts: Array<[number, number]> = [];
  let prevY = 0;
  for (let i = 0; i < xs.length; i += 1) {
    pts.push([xs[i], prevY]);
    pts.push([xs[i], ys[i]]);
    prevY = ys[i];
  }
  return pts;
}

export function buildCdfSvg(
  csvText: string,
  kind: CdfKind,
  spec: FrameSpec = DEFAULT_FRAME,
): string {
  const table = parseCsv(csvText);
  requireColumns(table, REQUIRED);
  const value = numericColumn(table, "value");
  const ecdf = numericColumn(table, "ecdf");
  const fluid = numericColumn(table, "model_fluid");
  const hard = numericColumn(table, "model_hardcore");

  const frame = makeFrame(spec);
  const xDom = padDomain([0, ...value]);
  const yDom = { min: 0, max: 1.04 };
  const x = linearScale(xDom, frame.xRange);
  const y = linearScale(yDom, frame.yRange);
  const labels = LABELS[kind];

  const children: string[] = [frameBox(frame)];
  children.push(...xAxis(frame, x, linearTicks(xDom), labels.x));
  children.push(...yAxis(frame, y, [0, 0.25, 0.5, 0.75, 1.0], "P(X <= x)"));
  children.push(title(frame, labels.title));

  children.push(
    el("g", { "data-series": "ecdf" }, [
      polyline(stepPoints(value, ecdf).map(([vx, vy]) => [x(vx), y(vy)]), {
        stroke: "#1f4e9c",
        "stroke-width": 2,
      }),
    ]),
  );
  children.push(
    el("g", { "data-series": "model_fluid" }, [
      polyline(value.map((v, i) => [x(v), y(fluid[i])]), {
        stroke: "#3a7d3a",
        "stroke-width": 1.5,
        "stroke-dasharray": "6 3",
      }),
    ]),
  );
  children.push(
    el("g", { "data-series": "model_hardcore" }, [
      polyline(value.map((v, i) => [x(v), y(hard[i])]), {
        stroke: "#a03535",
        "stroke-width": 1.5,
        "stroke-dasharray": "2 3",
      }),
    ]),
  );

  children.push(
    ...legend(frame, [
      { label: "empirical", color: "#1f4e9c" },
      { label: labels.fluid, color: "#3a7d3a" },
      { label: labels.hard, color: "#a03535" },
    ]),
  );
  return svgDocument(spec.width, spec.height, children);
}

/** Pick the figure kind from a file name when no flag is given. */
export function inferKind(path: string): CdfKind {
  return /(^|[\\/_])nn[_.]/.test(path) || path.includes("nn_cdf") ? "nn" : "latency";
}
