/** Render the slowdown curve from a sweep CSV.
 *
 *   node dist/plot_m_curve.js --in sweep.csv --out m_curve.svg
 */

import { readFileSync, writeFileSync } from "node:fs";
import { pathToFileURL } from "node:url";

import { parseArgs } from "./args.js";
import { buildMCurveSvg } from "./mcurve.js";

export function main(argv: string[]): number {
  try {
    const args = parseArgs(argv);
    const svg = buildMCurveSvg(readFileSync(args.input, "utf8"));
    writeFileSync(args.output, svg);
    console.log(`wrote ${args.output}`);
    return 0;
  } catch (err) {
    console.error(err instanceof Error ? err.message : String(err));
    return 1;
  }
}

if (process.argv[1] && import.meta.url === pathToFileURL(process.argv[1]).href) {
  process.exit(main(process.argv.slice(2)));
}
