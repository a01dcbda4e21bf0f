/**
 * Deterministic SVG renderers.
 *
 * Every figure embeds a `<metadata id="plot-data">` JSON block carrying the
 * exact plotted values and the affine axis scales, so a consumer (or a test)
 * can extract the data without rasterizing.  Rendering is a pure function of
 * the parsed rows: same input, same bytes.
 */

import type { RankSummary, SignChange } from './aggregate.js';
import type { SweepRow, ThresholdRow } from './csv.js';

export const WIDTH = 640;
export const HEIGHT = 420;
export const MARGIN = { left: 64, right: 20, top: 28, bottom: 48 } as const;

export interface LinearScale {
  domain: [number, number];
  range: [number, number];
  log: boolean;
}

export function applyScale(scale: LinearScale, value: number): number {
  const v = scale.log ? Math.log10(value) : value;
  const [d0, d1] = scale.log ? [Math.log10(scale.domain[0]), Math.log10(scale.domain[1])] : scale.domain;
  const t = d1 === d0 ? 0.5 : (v - d0) / (d1 - d0);
  return scale.range[0] + t * (scale.range[1] - scale.range[0]);
}

export function invertScale(scale: LinearScale, coord: number): number {
  const [d0, d1] = scale.log ? [Math.log10(scale.domain[0]), Math.log10(scale.domain[1])] : scale.domain;
  const t =
    scale.range[1] === scale.range[0] ? 0.5 : (coord - scale.range[0]) / (scale.range[1] - scale.range[0]);
  const v = d0 + t * (d1 - d0);
  return scale.log ? 10 ** v : v;
}

function fmt(value: number): string {
  return Number.isFinite(value) ? String(value) : '0';
}

function makeScale(values: number[], range: [number, number], log: boolean): LinearScale {
  let lo = Math.min(...values);
  let hi = Math.max(...values);
  if (log) {
    const positive = values.filter((v) => v > 0);
    lo = positive.length ? Math.min(...positive) : 1e-12;
    hi = positive.length ? Math.max(...positive) : 1;
  }
  if (lo === hi) {
    lo -= 0.5;
    hi += 0.5;
    if (log) {
      lo = Math.max(lo, hi / 10);
    }
  }
  return { domain: [lo, hi], range, log };
}

function ticks(scale: LinearScale, count = 6): number[] {
  const [d0, d1] = scale.domain;
  if (scale.log) {
    const lo = Math.ceil(Math.log10(d0));
    const hi = Math.floor(Math.log10(d1));
    const out: number[] = [];
    for (let e = lo; e <= hi; e += 1) out.push(10 ** e);
    return out.length ? out : [d0, d1];
  }
  const step = (d1 - d0) / (count - 1);
  return Array.from({ length: count }, (_, i) => d0 + i * step);
}

function tickLabel(value: number): string {
  if (value === 0) return '0';
  const abs = Math.abs(value);
  if (abs >= 0.01 && abs < 10000) return String(Number(value.toPrecision(4)));
  return value.toExponential(1);
}

function axes(x: LinearScale, y: LinearScale, xLabel: string, yLabel: string): string {
  const parts: string[] = [];
  const x0 = MARGIN.left;
  const x1 = WIDTH - MARGIN.right;
  const y0 = HEIGHT - MARGIN.bottom;
  const y1 = MARGIN.top;
  parts.push(`<line x1="${x0}" y1="${y0}" x2="${x1}" y2="${y0}" stroke="black"/>`);
  parts.push(`<line x1="${x0}" y1="${y0}" x2="${x0}" y2="${y1}" stroke="black"/>`);
  for (const t of ticks(x)) {
    const px = applyScale(x, t);
    parts.push(`<line x1="${fmt(px)}" y1="${y0}" x2="${fmt(px)}" y2="${y0 + 5}" stroke="black"/>`);
    parts.push(
      `<text x="${fmt(px)}" y="${y0 + 20}" text-anchor="middle" font-size="11">${tickLabel(t)}</text>`,
    );
  }
  for (const t of ticks(y)) {
    const py = applyScale(y, t);
    parts.push(`<line x1="${x0 - 5}" y1="${fmt(py)}" x2="${x0}" y2="${fmt(py)}" stroke="black"/>`);
    parts.push(
      `<text x="${x0 - 8}" y="${fmt(py + 4)}" text-anchor="end" font-size="11">${tickLabel(t)}</text>`,
    );
  }
  parts.push(
    `<text x="${(x0 + x1) / 2}" y="${HEIGHT - 10}" text-anchor="middle" font-size="13">${xLabel}</text>`,
  );
  parts.push(
    `<text x="16" y="${(y0 + y1) / 2}" text-anchor="middle" font-size="13" transform="rotate(-90 16 ${
      (y0 + y1) / 2
    })">${yLabel}</text>`,
  );
  return parts.join('\n');
}

function document(body: string, metadata: object): string {
  const meta = JSON.stringify(metadata);
  return [
    `<svg xmlns="http://www.w3.org/2000/svg" width="${WIDTH}" height="${HEIGHT}" viewBox="0 0 ${WIDTH} ${HEIGHT}">`,
    `<metadata id="plot-data">${meta}</metadata>`,
    `<rect width="${WIDTH}" height="${HEIGHT}" fill="white"/>`,
    body,
    '</svg>',
    '',
  ].join('\n');
}

export function renderRankSweep(data: SweepRow[], summary: RankSummary[], logY: boolean): string {
  const xRange: [number, number] = [MARGIN.left, WIDTH - MARGIN.right];
  const yRange: [number, number] = [HEIGHT - MARGIN.bottom, MARGIN.top];
  const errors = data.map((row) => row.finalError).concat(summary.map((s) => s.meanError));
  const x = makeScale(data.map((row) => row.r), xRange, false);
  const y = makeScale(errors, yRange, logY);
  const parts: string[] = [axes(x, y, 'search rank r', 'recovery error')];
  const clampY = (v: number): number => (y.log ? Math.max(v, y.domain[0]) : v);
  parts.push('<g id="trials">');
  for (const row of data) {
    parts.push(
      `<circle cx="${fmt(applyScale(x, row.r))}" cy="${fmt(applyScale(y, clampY(row.finalError)))}" ` +
        'r="2.5" fill="#9aa7b1" fill-opacity="0.7"/>',
    );
  }
  parts.push('</g>');
  const path = summary
    .map((s, i) => `${i === 0 ? 'M' : 'L'}${fmt(applyScale(x, s.r))},${fmt(applyScale(y, clampY(s.meanError)))}`)
    .join(' ');
  parts.push(`<path id="mean-curve" d="${path}" fill="none" stroke="#1f5fbf" stroke-width="2"/>`);
  parts.push('<g id="mean-points">');
  for (const s of summary) {
    parts.push(
      `<circle cx="${fmt(applyScale(x, s.r))}" cy="${fmt(applyScale(y, clampY(s.meanError)))}" r="4" fill="#1f5fbf"/>`,
    );
  }
  parts.push('</g>');
  return document(parts.join('\n'), {
    kind: 'rank-sweep',
    logY,
    x,
    y,
    meanPoints: summary.map((s) => ({ r: s.r, meanError: s.meanError, count: s.count })),
    trialPoints: data.map((row) => ({ r: row.r, error: row.finalError })),
  });
}

export function renderThreshold(data: ThresholdRow[], signChange: SignChange | null): string {
  const xRange: [number, number] = [MARGIN.left, WIDTH - MARGIN.right];
  const yRange: [number, number] = [HEIGHT - MARGIN.bottom, MARGIN.top];
  const sorted = [...data].sort((a, b) => a.kappaSp - b.kappaSp);
  const x = makeScale(sorted.map((row) => row.kappaSp), xRange, false);
  const eigs = sorted.map((row) => row.hessMinEig);
  const y = makeScale(eigs.concat([0]), yRange, false);
  const parts: string[] = [axes(x, y, 'condition number', 'smallest Hessian eigenvalue')];
  const zero = applyScale(y, 0);
  parts.push(
    `<line x1="${MARGIN.left}" y1="${fmt(zero)}" x2="${WIDTH - MARGIN.right}" y2="${fmt(zero)}" ` +
      'stroke="#888" stroke-dasharray="4 3"/>',
  );
  const kc = sorted[0].kappaCrit;
  const kcx = applyScale(x, kc);
  parts.push(
    `<line id="kappa-crit" x1="${fmt(kcx)}" y1="${MARGIN.top}" x2="${fmt(kcx)}" ` +
      `y2="${HEIGHT - MARGIN.bottom}" stroke="#b03a2e" stroke-width="1.5"/>`,
  );
  if (signChange) {
    const sx = applyScale(x, signChange.kappa);
    parts.push(
      `<line id="sign-change" x1="${fmt(sx)}" y1="${MARGIN.top}" x2="${fmt(sx)}" ` +
        `y2="${HEIGHT - MARGIN.bottom}" stroke="#1e8449" stroke-width="1.5" stroke-dasharray="6 3"/>`,
    );
  }
  parts.push('<g id="eig-points">');
  for (const row of sorted) {
    const color = row.hessMinEig >= -1e-8 ? '#1e8449' : '#b03a2e';
    parts.push(
      `<circle cx="${fmt(applyScale(x, row.kappaSp))}" cy="${fmt(applyScale(y, row.hessMinEig))}" ` +
        `r="3.5" fill="${color}"/>`,
    );
  }
  parts.push('</g>');
  return document(parts.join('\n'), {
    kind: 'threshold',
    x,
    y,
    kappaCrit: kc,
    signChange,
    points: sorted.map((row) => ({ kappaSp: row.kappaSp, hessMinEig: row.hessMinEig })),
  });
}

/** Pull the embedded JSON block back out of a rendered figure. */
export function extractMetadata(svg: string): any {
  const match = svg.match(/<metadata id="plot-data">(.*?)<\/metadata>/s);
  if (!match) {
    throw new Error('figure carries no plot-data metadata block');
  }
  return JSON.parse(match[1]);
}
