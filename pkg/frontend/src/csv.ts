/**
 * Strict parser for the sweep CSVs: comma-separated, mandatory header,
 * no quoting. Numeric cells may be "nan"; booleans are "true"/"false".
 */

export interface Table {
  header: string[];
  rows: string[][];
}

export function parseCsv(text: string): Table {
  const lines = text
    .split(/\r?\n/)
    .map((line) => line.trim())
    .filter((line) => line.length > 0);
  if (lines.length === 0) {
    throw new Error("empty CSV");
  }
  const header = lines[0].split(",");
  const rows = lines.slice(1).map((line, i) => {
    const cells = line.split(",");
    if (cells.length !== header.length) {
      throw new Error(`row ${i + 1} has ${cells.length} cells, expected ${header.length}`);
    }
    return cells;
  });
  if (rows.length < 2) {
    throw new Error(`need at least 2 data rows, got ${rows.length}`);
  }
  return { header, rows };
}

export function columnIndex(table: Table, name: string): number {
  const idx = table.header.indexOf(name);
  if (idx < 0) {
    throw new Error(`missing column '${name}' (header: ${table.header.join(",")})`);
  }
  return idx;
}

export function numericColumn(table: Table, name: string): number[] {
  const idx = columnIndex(table, name);
  return table.rows.map((row) => Number(row[idx]));
}

export function booleanColumn(table: Table, name: string): boolean[] {
  const idx = columnIndex(table, name);
  return table.rows.map((row) => row[idx] === "true");
}
