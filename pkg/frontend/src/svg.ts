/** Deterministic SVG building blocks: scales, axes, paths, panels. */

const FMT_DIGITS = 3;

export function fmt(value: number): string {
  if (!Number.isFinite(value)) {
    throw new Error(`cannot place non-finite coordinate ${value}`);
  }
  return value.toFixed(FMT_DIGITS);
}

/** Short human label for tick values and legends. */
export function label(value: number): string {
  if (value === 0) return "0";
  const abs = Math.abs(value);
  if (abs >= 1000 || abs < 0.01) return value.toExponential(1);
  return parseFloat(value.toPrecision(3)).toString();
}

export interface Scale {
  (value: number): number;
  domain: [number, number];
  range: [number, number];
}

export function linearScale(domain: [number, number], range: [number, number]): Scale {
  let [d0, d1] = domain;
  if (d0 === d1) {
    d0 -= 0.5;
    d1 += 0.5;
  }
  const f = ((value: number) =>
    range[0] + ((value - d0) / (d1 - d0)) * (range[1] - range[0])) as Scale;
  f.domain = [d0, d1];
  f.range = range;
  return f;
}

export function ticks(domain: [number, number], count = 5): number[] {
  const [lo, hi] = domain;
  const span = hi - lo;
  const step = Math.pow(10, Math.floor(Math.log10(span / count)));
  const candidates = [step, 2 * step, 5 * step, 10 * step];
  const chosen = candidates.find((s) => span / s <= count) ?? 10 * step;
  const out: number[] = [];
  for (let v = Math.ceil(lo / chosen) * chosen; v <= hi + 1e-12; v += chosen) {
    out.push(parseFloat(v.toPrecision(12)));
  }
  return out;
}

export function esc(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

export function el(
  tag: string,
  attrs: Record<string, string | number>,
  children = "",
): string {
  const parts = Object.entries(attrs)
    .map(([key, value]) => `${key}="${typeof value === "number" ? fmt(value) : value}"`)
    .join(" ");
  return children === ""
    ? `<${tag} ${parts}/>`
    : `<${tag} ${parts}>${children}</${tag}>`;
}

export function polyline(points: Array<[number, number]>, attrs: Record<string, string>): string {
  const coords = points.map(([x, y]) => `${fmt(x)},${fmt(y)}`).join(" ");
  return el("polyline", { points: coords, fill: "none", ...attrs });
}

export function polygon(points: Array<[number, number]>, attrs: Record<string, string>): string {
  const coords = points.map(([x, y]) => `${fmt(x)},${fmt(y)}`).join(" ");
  return el("polygon", { points: coords, ...attrs });
}

/** Darker shade for larger rank (series ordering convention). */
export function seriesColor(rank: number, total: number): string {
  const t = total <= 1 ? 1 : rank / (total - 1);
  const lightness = Math.round(72 - 48 * t);
  return `hsl(270, 55%, ${lightness}%)`;
}

export const PALETTE = ["#5e3c99", "#e66101", "#1b9e77"]; // ours, baseline, pac-bayes

export interface PanelBox {
  x: number;
  y: number;
  width: number;
  height: number;
}

export interface Axes {
  sx: Scale;
  sy: Scale;
  body: string[];
}

/** Axes with ticks and labels inside a panel box; returns the data scales. */
export function axes(
  box: PanelBox,
  xDomain: [number, number],
  yDomain: [number, number],
  xLabel: string,
  yLabel: string,
  title: string,
): Axes {
  const margin = { left: 46, right: 8, top: 22, bottom: 32 };
  const inner: PanelBox = {
    x: box.x + margin.left,
    y: box.y + margin.top,
    width: box.width - margin.left - margin.right,
    height: box.height - margin.top - margin.bottom,
  };
  const sx = linearScale(xDomain, [inner.x, inner.x + inner.width]);
  const sy = linearScale(yDomain, [inner.y + inner.height, inner.y]);
  const body: string[] = [];
  body.push(
    el("rect", {
      x: inner.x,
      y: inner.y,
      width: inner.width,
      height: inner.height,
      fill: "none",
      stroke: "#444",
      "stroke-width": "1",
    }),
  );
  for (const t of ticks(sx.domain)) {
    const x = sx(t);
    body.push(
      el("line", { x1: x, y1: inner.y + inner.height, x2: x, y2: inner.y + inner.height + 4, stroke: "#444" }),
      el(
        "text",
        { x, y: inner.y + inner.height + 15, "text-anchor": "middle", "font-size": "9", class: "tick" },
        esc(label(t)),
      ),
    );
  }
  for (const t of ticks(sy.domain)) {
    const y = sy(t);
    body.push(
      el("line", { x1: inner.x - 4, y1: y, x2: inner.x, y2: y, stroke: "#444" }),
      el(
        "text",
        { x: inner.x - 6, y: y + 3, "text-anchor": "end", "font-size": "9", class: "tick" },
        esc(label(t)),
      ),
    );
  }
  body.push(
    el(
      "text",
      { x: inner.x + inner.width / 2, y: box.y + 12, "text-anchor": "middle", "font-size": "11", class: "panel-title" },
      esc(title),
    ),
    el(
      "text",
      { x: inner.x + inner.width / 2, y: inner.y + inner.height + 28, "text-anchor": "middle", "font-size": "10" },
      esc(xLabel),
    ),
    el(
      "text",
      {
        x: box.x + 12,
        y: inner.y + inner.height / 2,
        "text-anchor": "middle",
        "font-size": "10",
        transform: `rotate(-90 ${fmt(box.x + 12)} ${fmt(inner.y + inner.height / 2)})`,
      },
      esc(yLabel),
    ),
  );
  return { sx, sy, body };
}

export function noData(box: PanelBox): string {
  return el(
    "text",
    {
      x: box.x + box.width / 2,
      y: box.y + box.height / 2,
      "text-anchor": "middle",
      "font-size": "13",
      fill: "#999",
      class: "no-data",
    },
    "no data",
  );
}

export function document(width: number, height: number, body: string): string {
  return (
    `<?xml version="1.0" encoding="UTF-8"?>\n` +
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" ` +
    `viewBox="0 0 ${width} ${height}" font-family="sans-serif">\n` +
    body +
    "\n</svg>\n"
  );
}
