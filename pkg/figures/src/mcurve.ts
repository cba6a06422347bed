/** The slowdown-curve figure: measured M(N_f) with its error bars against
 * the flat fluid bound, the 1/N_f hard-core branch, and the fixed-point
 * interpolation, all on log-log axes. Input is the sweep table CSV. */

import { numericColumn, parseCsv, requireColumns } from "./csv.js";
import { decadeTicks, logScale, padDomain } from "./scales.js";
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

const REQUIRED = ["N_f", "M_sim", "stderr", "M_heuristic", "M_hardcore"] as const;

const COLORS = {
  simulated: "#1f4e9c",
  fluid: "#3a7d3a",
  hardcore: "#a03535",
  heuristic: "#c77d1f",
};

export function buildMCurveSvg(csvText: string, spec: FrameSpec = DEFAULT_FRAME): string {
  const table = parseCsv(csvText);
  requireColumns(table, REQUIRED);
  const order = numericColumn(table, "N_f")
    .map((v, i) => [v, i] as const)
    .sort((a, b) => a[0] - b[0])
    .map(([, i]) => i);
  const pick = (name: string) => {
    const col = numericColumn(table, name);
    return order.map((i) => col[i]);
  };
  const nf = pick("N_f");
  const mSim = pick("M_sim");
  const se = pick("stderr");
  const heuristic = pick("M_heuristic");
  const hardcore = pick("M_hardcore");

  const frame = makeFrame(spec);
  const xDom = padDomain(nf, true);
  const yValues = [
    1,
    ...mSim.map((m, i) => Math.max(m - 2 * se[i], 1e-3)),
    ...mSim.map((m, i) => m + 2 * se[i]),
    ...heuristic,
    ...hardcore,
  ];
  const yDom = padDomain(yValues, true);
  const x = logScale(xDom, frame.xRange);
  const y = logScale(yDom, frame.yRange);

  const children: string[] = [frameBox(frame)];
  // one tick per sampled working point (the grid is dyadic)
  children.push(...xAxis(frame, x, nf, "fluid neighbor count N_f"));
  children.push(...yAxis(frame, y, decadeTicks(yDom), "slowdown M = W / W_f"));
  children.push(title(frame, "latency slowdown vs neighbor count"));

  children.push(
    el("g", { "data-series": "fluid" }, [
      polyline(
        [
          [frame.xRange[0], y(1)],
          [frame.xRange[1], y(1)],
        ],
        { stroke: COLORS.fluid, "stroke-width": 1.5, "stroke-dasharray": "6 3" },
      ),
    ]),
  );
  children.push(
    el("g", { "data-series": "hardcore" }, [
      polyline(nf.map((v, i) => [x(v), y(hardcore[i])]), {
        stroke: COLORS.hardcore,
        "stroke-width": 1.5,
        "stroke-dasharray": "2 3",
      }),
    ]),
  );
  children.push(
    el("g", { "data-series": "heuristic" }, [
      polyline(nf.map((v, i) => [x(v), y(heuristic[i])]), {
        stroke: COLORS.heuristic,
        "stroke-width": 2,
      }),
    ]),
  );

  const markers: string[] = [];
  nf.forEach((v, i) => {
    const cx = x(v);
    const lo = y(Math.max(mSim[i] - 2 * se[i], yDom.min));
    const hi = y(mSim[i] + 2 * se[i]);
    markers.push(el("line", { x1: cx, y1: lo, x2: cx, y2: hi, stroke: COLORS.simulated }));
    markers.push(el("line", { x1: cx - 3, y1: lo, x2: cx + 3, y2: lo, stroke: COLORS.simulated }));
    markers.push(el("line", { x1: cx - 3, y1: hi, x2: cx + 3, y2: hi, stroke: COLORS.simulated }));
    markers.push(el("circle", { cx, cy: y(mSim[i]), r: 3, fill: COLORS.simulated }));
  });
  children.push(el("g", { "data-series": "simulated" }, markers));

  children.push(
    ...legend(frame, [
      { label: "simulated (±2 se)", color: COLORS.simulated, marker: true },
      { label: "fluid bound (1)", color: COLORS.fluid },
      { label: "hard-core (1/N_f)", color: COLORS.hardcore },
      { label: "fixed point", color: COLORS.heuristic },
    ]),
  );
  return svgDocument(spec.width, spec.height, children);
}
