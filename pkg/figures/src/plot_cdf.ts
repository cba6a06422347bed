/** Render a latency or nearest-neighbor CDF figure from a CDF CSV.
 *
 *   node dist/plot_cdf.js --in latency_cdf_nf_64.csv --out fig.svg [--kind latency|nn]
 *
 * Without --kind the kind is inferred from the file name.
 */

import { readFileSync, writeFileSync } from "node:fs";
import { pathToFileURL } from "node:url";

import { parseArgs } from "./args.js";
import { buildCdfSvg, CdfKind, inferKind } from "./cdf.js";

export function main(argv: string[]): number {
  try {
    const args = parseArgs(argv, true);
    const kind = (args.kind as CdfKind | undefined) ?? inferKind(args.input);
    const svg = buildCdfSvg(readFileSync(args.input, "utf8"), kind);
    writeFileSync(args.output, svg);
    console.log(`wrote ${args.output} (${kind})`);
    return 0;
  } catch (err) {
    console.error(err instanceof Error ? err.message : String(err));
    return 1;
  }
}

if (process.argv[1] && import.meta.url === pathToFileURL(process.argv[1]).href) {
  process.exit(main(process.argv.slice(2)));
}
