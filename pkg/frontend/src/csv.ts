/**
 * Reader for the matlasso CSV artifacts.
 *
 * Files start with `#`-prefixed comment lines (schema marker and the resolved
 * config as JSON), then a header row, then data rows.  The sweep schema also
 * carries per-rank aggregate rows whose `trial` column holds "mean"/"median";
 * those are kept separate from the data rows.
 */

export const SWEEP_COLUMNS = [
  'r',
  'trial',
  'seed',
  'final_error',
  'final_objective',
  'grad_norm',
  'hess_min_eig',
  'certified',
  'wall_ms',
] as const;

export const THRESHOLD_COLUMNS = [
  'kappa_sp',
  'r_sp',
  'r_star',
  'kappa_crit',
  'hess_min_eig',
  'grad_norm',
  'certified',
] as const;

export interface SweepRow {
  r: number;
  trial: number;
  seed: number;
  finalError: number;
  finalObjective: number;
  gradNorm: number;
  hessMinEig: number;
  certified: boolean;
  wallMs: number;
}

export interface SweepAggregateRow {
  r: number;
  kind: 'mean' | 'median';
  finalError: number;
}

export interface ThresholdRow {
  kappaSp: number;
  rSp: number;
  rStar: number;
  kappaCrit: number;
  hessMinEig: number;
  gradNorm: number;
  certified: boolean;
}

export interface ParsedCsv {
  comments: string[];
  header: string[];
  rows: string[][];
}

export class SchemaError extends Error {}

export function parseCsv(text: string): ParsedCsv {
  const comments: string[] = [];
  const table: string[][] = [];
  for (const raw of text.split('\n')) {
    const line = raw.trimEnd();
    if (line.length === 0) continue;
    if (line.startsWith('#')) {
      comments.push(line);
      continue;
    }
    table.push(line.split(',').map((tok) => tok.trim()));
  }
  if (table.length === 0) {
    throw new SchemaError('no header row found');
  }
  const [header, ...rows] = table;
  return { comments, header, rows };
}

function checkColumns(header: string[], expected: readonly string[]): void {
  if (header.length === expected.length && expected.every((c, i) => header[i] === c)) return;
  const missing = expected.filter((c) => !header.includes(c));
  const extra = header.filter((c) => !(expected as readonly string[]).includes(c));
  throw new SchemaError(
    `column mismatch: expected [${expected.join(', ')}], got [${header.join(', ')}]` +
      (missing.length ? `; missing: ${missing.join(', ')}` : '') +
      (extra.length ? `; unexpected: ${extra.join(', ')}` : ''),
  );
}

function num(token: string, column: string): number {
  const value = Number(token);
  if (token === '' || Number.isNaN(value)) {
    throw new SchemaError(`cannot parse ${column} value ${JSON.stringify(token)} as a number`);
  }
  return value;
}

export function readSweep(text: string): {
  comments: string[];
  data: SweepRow[];
  aggregates: SweepAggregateRow[];
} {
  const { comments, header, rows } = parseCsv(text);
  checkColumns(header, SWEEP_COLUMNS);
  const data: SweepRow[] = [];
  const aggregates: SweepAggregateRow[] = [];
  for (const row of rows) {
    if (row[1] === 'mean' || row[1] === 'median') {
      aggregates.push({
        r: num(row[0], 'r'),
        kind: row[1],
        finalError: num(row[3], 'final_error'),
      });
      continue;
    }
    data.push({
      r: num(row[0], 'r'),
      trial: num(row[1], 'trial'),
      seed: num(row[2], 'seed'),
      finalError: num(row[3], 'final_error'),
      finalObjective: num(row[4], 'final_objective'),
      gradNorm: num(row[5], 'grad_norm'),
      hessMinEig: num(row[6], 'hess_min_eig'),
      certified: row[7] === 'true',
      wallMs: num(row[8], 'wall_ms'),
    });
  }
  if (data.length === 0) {
    throw new SchemaError('sweep file has no data rows');
  }
  return { comments, data, aggregates };
}

export function readThreshold(text: string): { comments: string[]; data: ThresholdRow[] } {
  const { comments, header, rows } = parseCsv(text);
  checkColumns(header, THRESHOLD_COLUMNS);
  const data = rows.map((row) => ({
    kappaSp: num(row[0], 'kappa_sp'),
    rSp: num(row[1], 'r_sp'),
    rStar: num(row[2], 'r_star'),
    kappaCrit: num(row[3], 'kappa_crit'),
    hessMinEig: num(row[4], 'hess_min_eig'),
    gradNorm: num(row[5], 'grad_norm'),
    certified: row[6] === 'true',
  }));
  if (data.length === 0) {
    throw new SchemaError('threshold file has no data rows');
  }
  return { comments, data };
}
