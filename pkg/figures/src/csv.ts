/** Minimal strict reader for the simulator's plain numeric CSV files. */

export interface Table {
  columns: string[];
  rows: string[][];
}

export function parseCsv(text: string): Table {
  const lines = text
    .split(/\r?\n/)
    .map((l) => l.trim())
    .filter((l) => l.length > 0);
  if (lines.length === 0) {
    throw new Error("empty CSV document");
  }
  const columns = lines[0].split(",");
  const rows = lines.slice(1).map((line, i) => {
    const cells = line.split(",");
    if (cells.length !== columns.length) {
      throw new Error(
        `row ${i + 1} has ${cells.length} cells, header has ${columns.length}`,
      );
    }
    return cells;
  });
  return { columns, rows };
}

/** Abort with the names of every absent column (schema diagnostic). */
export function requireColumns(table: Table, names: readonly string[]): void {
  const missing = names.filter((n) => !table.columns.includes(n));
  if (missing.length > 0) {
    throw new Error(`missing column(s): ${missing.join(", ")}`);
  }
}

export function numericColumn(table: Table, name: string): number[] {
  requireColumns(table, [name]);
  const idx = table.columns.indexOf(name);
  return table.rows.map((row, i) => {
    const value = Number(row[idx]);
    if (!Number.isFinite(value)) {
      throw new Error(`column ${name}, row ${i + 1}: not a number: ${row[idx]}`);
    }
    return value;
  });
}
