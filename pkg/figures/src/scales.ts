/** Axis scales and tick helpers. */

export type Scale = (x: number) => number;

export interface Domain {
  min: number;
  max: number;
}

/** Pad a possibly degenerate domain so single-point plots stay valid. */
export function padDomain(values: number[], log = false): Domain {
  if (values.length === 0) {
    throw new Error("no values to scale");
  }
  let min = Math.min(...values);
  let max = Math.max(...values);
  if (log) {
    if (min <= 0) {
      throw new Error(`log scale needs positive values, got ${min}`);
    }
    if (min === max) {
      return { min: min / 2, max: max * 2 };
    }
    const pad = Math.pow(max / min, 0.08);
    return { min: min / pad, max: max * pad };
  }
  if (min === max) {
    const pad = Math.abs(min) > 0 ? Math.abs(min) * 0.5 : 1;
    return { min: min - pad, max: max + pad };
  }
  const pad = (max - min) * 0.05;
  return { min: min - pad, max: max + pad };
}

export function linearScale(domain: Domain, range: [number, number]): Scale {
  const span = domain.max - domain.min;
  return (x) => range[0] + ((x - domain.min) / span) * (range[1] - range[0]);
}

export function logScale(domain: Domain, range: [number, number]): Scale {
  if (domain.min <= 0) {
    throw new Error("log scale over a non-positive domain");
  }
  const lo = Math.log(domain.min);
  const span = Math.log(domain.max) - lo;
  return (x) => {
    if (x <= 0) {
      throw new Error(`log scale applied to non-positive value ${x}`);
    }
    return range[0] + ((Math.log(x) - lo) / span) * (range[1] - range[0]);
  };
}

/** Round-number ticks covering a linear domain. */
export function linearTicks(domain: Domain, count = 6): number[] {
  const rawStep = (domain.max - domain.min) / count;
  const mag = Math.pow(10, Math.floor(Math.log10(rawStep)));
  const norm = rawStep / mag;
  const step = (norm >= 5 ? 5 : norm >= 2 ? 2 : 1) * mag;
  const first = Math.ceil(domain.min / step) * step;
  const ticks: number[] = [];
  for (let t = first; t <= domain.max + 1e-12 * step; t += step) {
    ticks.push(Number(t.toPrecision(12)));
  }
  return ticks;
}

/** Powers of ten inside a positive domain (always at least two ticks). */
export function decadeTicks(domain: Domain): number[] {
  const ticks: number[] = [];
  const lo = Math.ceil(Math.log10(domain.min) - 1e-9);
  const hi = Math.floor(Math.log10(domain.max) + 1e-9);
  for (let e = lo; e <= hi; e += 1) {
    ticks.push(Math.pow(10, e));
  }
  if (ticks.length < 2) {
    return [domain.min, domain.max];
  }
  return ticks;
}

/** Compact tick label: fractions for small dyadics, plain numbers otherwise. */
export function formatTick(x: number): string {
  if (x > 0 && x < 1) {
    const inv = 1 / x;
    if (Math.abs(inv - Math.round(inv)) < 1e-9) {
      return `1/${Math.round(inv)}`;
    }
  }
  if (Number.isInteger(x)) {
    return String(x);
  }
  const s = x.toPrecision(3);
  return String(Number(s));
}
