/** Flag parsing shared by the two entry points. */

export interface CliArgs {
  input: string;
  output: string;
  kind?: string;
}

export function parseArgs(argv: string[], allowKind = false): CliArgs {
  let input: string | undefined;
  let output: string | undefined;
  let kind: string | undefined;
  for (let i = 0; i < argv.length; i += 1) {
    const flag = argv[i];
    const value = argv[i + 1];
    if (flag === "--in") {
      input = value;
      i += 1;
    } else if (flag === "--out") {
      output = value;
      i += 1;
    } else if (flag === "--kind" && allowKind) {
      kind = value;
      i += 1;
    } else {
      throw new Error(`unknown flag ${flag}`);
    }
  }
  if (!input || !output) {
    throw new Error("both --in and --out are required");
  }
  if (kind !== undefined && kind !== "latency" && kind !== "nn") {
    throw new Error(`--kind must be latency or nn, got ${kind}`);
  }
  return { input, output, kind };
}
