/** String-building SVG primitives; no DOM required. */

export function escapeText(s: string): string {
  return s
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

export type Attrs = Record<string, string | number>;

export function el(tag: string, attrs: Attrs, children: string[] = []): string {
  const attrText = Object.entries(attrs)
    .map(([k, v]) => `${k}="${typeof v === "number" ? fmt(v) : escapeText(v)}"`)
    .join(" ");
  if (children.length === 0) {
    return `<${tag} ${attrText}/>`;
  }
  return `<${tag} ${attrText}>${children.join("")}</${tag}>`;
}

export function text(x: number, y: number, content: string, attrs: Attrs = {}): string {
  const base: Attrs = { x, y, "font-size": 11, "font-family": "sans-serif", ...attrs };
  const attrText = Object.entries(base)
    .map(([k, v]) => `${k}="${typeof v === "number" ? fmt(v) : escapeText(v)}"`)
    .join(" ");
  return `<text ${attrText}>${escapeText(content)}</text>`;
}

export function fmt(v: number): string {
  return Number(v.toFixed(2)).toString();
}

export function polyline(points: Array<[number, number]>, attrs: Attrs): string {
  const pts = points.map(([x, y]) => `${fmt(x)},${fmt(y)}`).join(" ");
  return el("polyline", { points: pts, fill: "none", ...attrs });
}

export function svgDocument(width: number, height: number, children: string[]): string {
  return [
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" viewBox="0 0 ${width} ${height}">`,
    el("rect", { x: 0, y: 0, width, height, fill: "white" }),
    ...children,
    "</svg>",
  ].join("\n");
}
