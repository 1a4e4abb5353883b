/**
 * The two concrete figures: extraction/efficiency rates against the CHSH
 * value, and the minimum CHSH with positive yield against the estimation
 * probability. CHSH axes span [2, 2*sqrt(2)], rate axes [0, 1].
 */

import { readFileSync, writeFileSync } from "fs";

import { booleanColumn, numericColumn, parseCsv } from "./csv.js";
import { renderFigure, sortStrictlyIncreasing } from "./figure.js";

export const SQRT8 = 2 * Math.sqrt(2);

const BLUE = "#1f77b4";
const ORANGE = "#d95f02";

export function ratesFigureSvg(csvText: string): string {
  const table = parseCsv(csvText);
  const chsh = numericColumn(table, "chsh");
  const rExt = numericColumn(table, "rExt");
  const rEff = numericColumn(table, "rEff");
  const { x, ys } = sortStrictlyIncreasing(chsh, [rExt, rEff]);
  return renderFigure([
    {
      title: "Extraction rate vs CHSH value",
      xLabel: "CHSH value",
      yLabel: "output bits per input bit",
      xDomain: [2, SQRT8],
      yDomain: [0, 1],
      series: [{ label: "rExt", x, y: ys[0], color: BLUE }],
    },
    {
      title: "Efficiency rate vs CHSH value",
      xLabel: "CHSH value",
      yLabel: "output bits per round",
      xDomain: [2, SQRT8],
      yDomain: [0, 1],
      series: [{ label: "rEff", x, y: ys[1], color: ORANGE }],
    },
  ]);
}

export function minChshFigureSvg(csvText: string): string {
  const table = parseCsv(csvText);
  const pE = numericColumn(table, "pE");
  const minChsh = numericColumn(table, "minCHSH");
  const feasible = booleanColumn(table, "feasible");
  const xs: number[] = [];
  const ys: number[] = [];
  for (let i = 0; i < pE.length; i++) {
    if (feasible[i] && Number.isFinite(minChsh[i])) {
      xs.push(pE[i]);
      ys.push(minChsh[i]);
    }
  }
  if (xs.length < 2) {
    throw new Error("need at least 2 feasible rows to draw the threshold curve");
  }
  const { x, ys: cols } = sortStrictlyIncreasing(xs, [ys]);
  return renderFigure([
    {
      title: "Minimum CHSH value with positive yield",
      xLabel: "estimation probability",
      yLabel: "CHSH value",
      xDomain: [0, 1],
      yDomain: [2, SQRT8],
      series: [{ label: "minCHSH", x, y: cols[0], color: BLUE }],
    },
  ]);
}

export type FigureKind = "rates" | "minchsh";

export function renderFile(kind: FigureKind, csvPath: string, outPath: string): void {
  const text = readFileSync(csvPath, "utf8");
  const svg = kind === "rates" ? ratesFigureSvg(text) : minChshFigureSvg(text);
  writeFileSync(outPath, svg);
}
