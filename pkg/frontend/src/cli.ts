/** Shared argv handling for the two plotting entry points. */

import { renderFile, type FigureKind } from "./figures.js";

export function runPlot(kind: FigureKind, argv: string[]): number {
  if (argv.length !== 2) {
    const name = kind === "rates" ? "plot-rates" : "plot-minchsh";
    process.stderr.write(`usage: ${name} <csv> <out.svg>\n`);
    return 2;
  }
  const [csvPath, outPath] = argv;
  try {
    renderFile(kind, csvPath, outPath);
  } catch (err) {
    process.stderr.write(`error: ${err instanceof Error ? err.message : String(err)}\n`);
    return 1;
  }
  return 0;
}
