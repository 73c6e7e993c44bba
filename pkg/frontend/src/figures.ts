/** The three figure renderers over harness CSV contracts. */

import { readFileSync, writeFileSync } from "node:fs";
import { parseCsv, requireHeader } from "./csv.js";
import {
  PALETTE,
  PanelBox,
  axes,
  document as svgDocument,
  el,
  esc,
  label,
  noData,
  polygon,
  polyline,
  seriesColor,
} from "./svg.js";

export const RIDGE_SHIFT_HEADER = "beta,alpha,test_loss,kappa,seed";
export const SCATTER_HEADER = "model_id,kappa,ood_error,seed,l2,m";
export const SWEEP_HEADER =
  "sweep,param,worst_group_error,dtv,epsilon_hat,bound_robust,bound_zhao," +
  "bound_pacbayes,concentration_robust,concentration_zhao,overparam,seed";

export type FigureKind = "shift-curves" | "scatter" | "sweep-panels";

export interface FigureSpec {
  inputCsv: string;
  figure: FigureKind;
  output: string;
}

const WIDTH = 960;
const HEIGHT = 540;

function mean(values: number[]): number {
  return values.reduce((a, b) => a + b, 0) / values.length;
}

function variance(values: number[]): number {
  const m = mean(values);
  return mean(values.map((v) => (v - m) ** 2));
}

function extent(values: number[]): [number, number] {
  return [Math.min(...values), Math.max(...values)];
}

/** rows grouped by a numeric key, keys ascending */
function groupBy(rows: string[][], index: number): Map<number, string[][]> {
  const out = new Map<number, string[][]>();
  for (const row of rows) {
    const key = Number(row[index]);
    const bucket = out.get(key);
    if (bucket) bucket.push(row);
    else out.set(key, [row]);
  }
  return new Map([...out.entries()].sort((a, b) => a[0] - b[0]));
}

// ---------------------------------------------------------------------------
// shift curves
// ---------------------------------------------------------------------------

export function renderShiftCurves(csvText: string): string {
  const table = parseCsv(csvText);
  requireHeader(table, RIDGE_SHIFT_HEADER);
  const box: PanelBox = { x: 0, y: 16, width: WIDTH, height: HEIGHT - 16 };
  const parts: string[] = [
    el(
      "text",
      { x: WIDTH / 2, y: 14, "text-anchor": "middle", "font-size": "13", class: "title" },
      "Test loss along the distribution shift",
    ),
  ];
  if (table.rows.length === 0) {
    const frame = axes(box, [0, 1], [0, 1], "shift angle", "test loss", "");
    parts.push(...frame.body, noData(box));
    return svgDocument(WIDTH, HEIGHT, parts.join("\n"));
  }

  const byBeta = groupBy(table.rows, 0);
  type Curve = {
    beta: number;
    alphas: number[];
    means: number[];
    vars: number[];
    kappa: number;
  };
  const curves: Curve[] = [];
  for (const [beta, rows] of byBeta) {
    const byAlpha = groupBy(rows, 1);
    const alphas = [...byAlpha.keys()];
    const means: number[] = [];
    const vars: number[] = [];
    for (const [, sub] of byAlpha) {
      const losses = sub.map((r) => Number(r[2]));
      means.push(mean(losses));
      vars.push(variance(losses));
    }
    curves.push({ beta, alphas, means, vars, kappa: mean(rows.map((r) => Number(r[3]))) });
  }

  const allAlphas = curves.flatMap((c) => c.alphas);
  const upper = curves.flatMap((c) => c.means.map((m, i) => m + c.vars[i]));
  const frame = axes(box, extent(allAlphas), [0, Math.max(...upper)], "shift angle", "test loss", "");
  parts.push(...frame.body);

  curves.forEach((curve, rank) => {
    const color = seriesColor(rank, curves.length);
    const up: Array<[number, number]> = curve.alphas.map((a, i) => [
      frame.sx(a),
      frame.sy(curve.means[i] + curve.vars[i]),
    ]);
    const down: Array<[number, number]> = curve.alphas
      .map((a, i): [number, number] => [frame.sx(a), frame.sy(Math.max(0, curve.means[i] - curve.vars[i]))])
      .reverse();
    parts.push(
      polygon([...up, ...down], { fill: color, opacity: "0.18", stroke: "none", class: "band" }),
    );
    parts.push(
      polyline(
        curve.alphas.map((a, i) => [frame.sx(a), frame.sy(curve.means[i])]),
        { stroke: color, "stroke-width": "1.6", class: "series-line" },
      ),
    );
    const legendY = 40 + 16 * rank;
    parts.push(
      el("line", { x1: WIDTH - 230, y1: legendY - 4, x2: WIDTH - 206, y2: legendY - 4, stroke: color, "stroke-width": "2" }),
      el(
        "text",
        { x: WIDTH - 200, y: legendY, "font-size": "10", class: "legend" },
        esc(`beta=${label(curve.beta)} (kappa=${label(curve.kappa)})`),
      ),
    );
  });
  return svgDocument(WIDTH, HEIGHT, parts.join("\n"));
}

// ---------------------------------------------------------------------------
// sharpness scatter
// ---------------------------------------------------------------------------

export function renderScatter(csvText: string): string {
  const table = parseCsv(csvText);
  requireHeader(table, SCATTER_HEADER);
  const summary = table.rows.find((r) => r[0] === "spearman");
  const points = table.rows.filter((r) => r[0] !== "spearman");
  const title =
    summary === undefined
      ? "Sharpness vs OOD error (Spearman n/a)"
      : `Sharpness vs OOD error (Spearman rho = ${Number(summary[1]).toFixed(4)})`;
  const box: PanelBox = { x: 0, y: 16, width: WIDTH, height: HEIGHT - 16 };
  const parts: string[] = [
    el(
      "text",
      { x: WIDTH / 2, y: 14, "text-anchor": "middle", "font-size": "13", class: "title" },
      esc(title),
    ),
  ];
  if (points.length === 0) {
    const frame = axes(box, [0, 1], [0, 1], "sharpness", "worst-group error", "");
    parts.push(...frame.body, noData(box));
    return svgDocument(WIDTH, HEIGHT, parts.join("\n"));
  }
  const kappas = points.map((r) => Number(r[1]));
  const errors = points.map((r) => Number(r[2]));
  const frame = axes(
    box,
    extent(kappas),
    [0, Math.max(...errors) * 1.05],
    "sharpness",
    "worst-group error",
    "",
  );
  parts.push(...frame.body);
  points.forEach((row, i) => {
    parts.push(
      el("circle", {
        cx: frame.sx(kappas[i]),
        cy: frame.sy(errors[i]),
        r: "4",
        fill: PALETTE[0],
        opacity: "0.75",
        class: "point",
      }),
    );
  });
  return svgDocument(WIDTH, HEIGHT, parts.join("\n"));
}

// ---------------------------------------------------------------------------
// sweep panels (2 x 3 grid)
// ---------------------------------------------------------------------------

interface PanelSpec {
  sweep: string;
  title: string;
  yLabel: string;
  series: Array<{ column: string; name: string }>;
}

const PANELS: PanelSpec[] = [
  {
    sweep: "model-size",
    title: "(a) error vs model size",
    yLabel: "worst-group error",
    series: [{ column: "worst_group_error", name: "error" }],
  },
  {
    sweep: "model-size",
    title: "(b) concentration vs model size",
    yLabel: "concentration term",
    series: [
      { column: "concentration_robust", name: "ours" },
      { column: "concentration_zhao", name: "baseline" },
    ],
  },
  {
    sweep: "model-size",
    title: "(c) bounds vs model size",
    yLabel: "bound total",
    series: [
      { column: "bound_robust", name: "ours" },
      { column: "bound_zhao", name: "baseline" },
      { column: "bound_pacbayes", name: "pac-bayes" },
    ],
  },
  {
    sweep: "correlation",
    title: "(d) error vs correlation",
    yLabel: "worst-group error",
    series: [{ column: "worst_group_error", name: "error" }],
  },
  {
    sweep: "correlation",
    title: "(e) distance vs correlation",
    yLabel: "distance ingredient",
    series: [
      { column: "dtv", name: "partition TV" },
      { column: "epsilon_hat", name: "epsilon" },
    ],
  },
  {
    sweep: "correlation",
    title: "(f) bounds vs correlation",
    yLabel: "bound total",
    series: [
      { column: "bound_robust", name: "ours" },
      { column: "bound_zhao", name: "baseline" },
      { column: "bound_pacbayes", name: "pac-bayes" },
    ],
  },
];

export function renderSweepPanels(csvText: string): string {
  const table = parseCsv(csvText);
  requireHeader(table, SWEEP_HEADER);
  const parts: string[] = [];
  const cols = 3;
  const panelWidth = WIDTH / cols;
  const panelHeight = HEIGHT / 2;
  const xLabels: Record<string, string> = {
    "model-size": "model size",
    correlation: "correlation probability",
  };
  PANELS.forEach((panel, idx) => {
    const box: PanelBox = {
      x: (idx % cols) * panelWidth,
      y: Math.floor(idx / cols) * panelHeight,
      width: panelWidth,
      height: panelHeight,
    };
    const rows = table.rows.filter((r) => r[0] === panel.sweep);
    if (rows.length === 0) {
      const frame = axes(box, [0, 1], [0, 1], xLabels[panel.sweep], panel.yLabel, panel.title);
      parts.push(...frame.body, noData(box));
      return;
    }
    const colIndex = (name: string) => {
      const i = table.header.indexOf(name);
      if (i < 0) throw new Error(`missing column "${name}"`);
      return i;
    };
    const params = rows.map((r) => Number(r[1]));
    const valueIndices = panel.series.map((s) => colIndex(s.column));
    const allValues = rows.flatMap((r) => valueIndices.map((i) => Number(r[i])));
    const frame = axes(
      box,
      extent(params),
      [0, Math.max(...allValues) * 1.05],
      xLabels[panel.sweep],
      panel.yLabel,
      panel.title,
    );
    parts.push(...frame.body);
    panel.series.forEach((series, rank) => {
      const color = panel.series.length === 1 ? PALETTE[0] : PALETTE[rank % PALETTE.length];
      const vi = colIndex(series.column);
      for (const row of rows) {
        parts.push(
          el("circle", {
            cx: frame.sx(Number(row[1])),
            cy: frame.sy(Number(row[vi])),
            r: "2.4",
            fill: color,
            opacity: "0.55",
            class: "point",
          }),
        );
      }
      const byParam = groupBy(rows, 1);
      const line: Array<[number, number]> = [...byParam.entries()].map(([param, sub]) => [
        frame.sx(param),
        frame.sy(mean(sub.map((r) => Number(r[vi])))),
      ]);
      parts.push(
        polyline(line, { stroke: color, "stroke-width": "1.8", class: "series-line" }),
      );
      if (panel.series.length > 1) {
        const legendY = box.y + 30 + 12 * rank;
        parts.push(
          el("line", { x1: box.x + 52, y1: legendY - 3, x2: box.x + 68, y2: legendY - 3, stroke: color, "stroke-width": "2" }),
          el(
            "text",
            { x: box.x + 72, y: legendY, "font-size": "9", class: "legend" },
            esc(series.name),
          ),
        );
      }
    });
  });
  return svgDocument(WIDTH, HEIGHT, parts.join("\n"));
}

// ---------------------------------------------------------------------------
// dispatch
// ---------------------------------------------------------------------------

export function renderText(csvText: string, figure: FigureKind): string {
  switch (figure) {
    case "shift-curves":
      return renderShiftCurves(csvText);
    case "scatter":
      return renderScatter(csvText);
    case "sweep-panels":
      return renderSweepPanels(csvText);
    default:
      throw new Error(`unknown figure kind "${figure as string}"`);
  }
}

export function render(spec: FigureSpec): void {
  if (!spec.output.endsWith(".svg")) {
    throw new Error(`unsupported output format for "${spec.output}": only .svg is supported`);
  }
  const csvText = readFileSync(spec.inputCsv, "utf-8");
  const svg = renderText(csvText, spec.figure);
  writeFileSync(spec.output, svg, "utf-8");
}
