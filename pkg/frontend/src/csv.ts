/** Minimal CSV handling for the harness output contracts. */

export interface Table {
  header: string[];
  rows: string[][];
}

/** Split one CSV line, honoring double-quoted fields. */
function splitLine(line: string): string[] {
  const fields: string[] = [];
  let current = "";
  let quoted = false;
  for (let i = 0; i < line.length; i++) {
    const ch = line[i];
    if (quoted) {
      if (ch === '"') {
        if (line[i + 1] === '"') {
          current += '"';
          i++;
        } else {
          quoted = false;
        }
      } else {
        current += ch;
      }
    } else if (ch === '"') {
      quoted = true;
    } else if (ch === ",") {
      fields.push(current);
      current = "";
    } else {
      current += ch;
    }
  }
  fields.push(current);
  return fields;
}

export function parseCsv(text: string): Table {
  const lines = text.split(/\r?\n/).filter((line) => line.length > 0);
  if (lines.length === 0) {
    throw new Error("empty CSV: no header row");
  }
  const header = splitLine(lines[0]);
  const rows = lines.slice(1).map(splitLine);
  return { header, rows };
}

/** Throw with the expected header echoed when the contract is not met. */
export function requireHeader(table: Table, expected: string): void {
  const got = table.header.join(",");
  if (got !== expected) {
    throw new Error(`header mismatch: expected "${expected}" but the CSV has "${got}"`);
  }
}

export function column(table: Table, name: string): string[] {
  const idx = table.header.indexOf(name);
  if (idx < 0) {
    throw new Error(`missing column "${name}"`);
  }
  return table.rows.map((row) => row[idx]);
}

export function numericColumn(table: Table, name: string): number[] {
  return column(table, name).map(Number);
}
