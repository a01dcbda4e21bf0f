import { readFileSync } from 'fs';
import { dirname, join } from 'path';
import { fileURLToPath } from 'url';

import { describe, expect, it } from 'vitest';

import { aggregateByRank, findSignChange } from '../src/aggregate.js';
import { SchemaError, readSweep, readThreshold } from '../src/csv.js';
import { renderToString } from '../src/render.js';
import { applyScale, extractMetadata, invertScale } from '../src/svg.js';

const here = dirname(fileURLToPath(import.meta.url));
const sweepText = readFileSync(join(here, 'fixtures', 'sweep_small.csv'), 'utf8');
const thresholdText = readFileSync(join(here, 'fixtures', 'threshold_small.csv'), 'utf8');

describe('csv reader', () => {
  it('separates data rows from aggregate rows', () => {
    const { comments, data, aggregates } = readSweep(sweepText);
    expect(comments.some((c) => c.startsWith('# config:'))).toBe(true);
    expect(data).toHaveLength(9);
    expect(aggregates).toHaveLength(6);
    expect(new Set(aggregates.map((a) => a.kind))).toEqual(new Set(['mean', 'median']));
  });

  it('rejects a column mismatch with a diff', () => {
    const broken = sweepText.replace('final_error', 'err');
    expect(() => readSweep(broken)).toThrowError(SchemaError);
    expect(() => readSweep(broken)).toThrowError(/missing: final_error/);
  });

  it('rejects files with no data rows', () => {
    const headerOnly = sweepText
      .split('\n')
      .filter((line) => line.startsWith('#') || line.startsWith('r,'))
      .join('\n');
    expect(() => readSweep(headerOnly)).toThrowError(/no data rows/);
  });
});

describe('rank-sweep figure', () => {
  it('plots exactly the CSV aggregation', () => {
    const { data, aggregates } = readSweep(sweepText);
    const svg = renderToString(sweepText, 'rank-sweep', false);
    const meta = extractMetadata(svg);
    const expected = aggregateByRank(data);
    // the plotted mean points are the aggregation, value for value
    expect(meta.meanPoints.map((p: any) => [p.r, p.meanError])).toEqual(
      expected.map((s) => [s.r, s.meanError]),
    );
    // and agree with the aggregate rows the producer embedded in the CSV
    for (const agg of aggregates.filter((a) => a.kind === 'mean')) {
      const mine = expected.find((s) => s.r === agg.r)!;
      expect(Math.abs(mine.meanError - agg.finalError)).toBeLessThan(1e-12);
    }
    // every per-trial point is drawn
    expect(meta.trialPoints).toHaveLength(data.length);
  });

  it('draws mean markers at coordinates that invert back to the data', () => {
    const { data } = readSweep(sweepText);
    const svg = renderToString(sweepText, 'rank-sweep', false);
    const meta = extractMetadata(svg);
    const circles = [...svg.matchAll(/<circle cx="([^"]+)" cy="([^"]+)" r="4"/g)];
    expect(circles).toHaveLength(meta.meanPoints.length);
    const expected = aggregateByRank(data);
    circles.forEach((match, i) => {
      const r = invertScale(meta.x, Number(match[1]));
      const err = invertScale(meta.y, Number(match[2]));
      expect(Math.abs(r - expected[i].r)).toBeLessThan(1e-9);
      expect(Math.abs(err - expected[i].meanError)).toBeLessThan(1e-9);
    });
  });

  it('is a pure function of the input bytes', () => {
    const a = renderToString(sweepText, 'rank-sweep', false);
    const b = renderToString(sweepText, 'rank-sweep', false);
    expect(a).toBe(b);
  });

  it('supports a log y axis', () => {
    const svg = renderToString(sweepText, 'rank-sweep', true);
    const meta = extractMetadata(svg);
    expect(meta.y.log).toBe(true);
    const pt = meta.meanPoints[0];
    const cy = applyScale(meta.y, pt.meanError);
    expect(Math.abs(invertScale(meta.y, cy) - pt.meanError)).toBeLessThan(1e-12 * pt.meanError);
  });
});

describe('threshold figure', () => {
  it('places the sign-change marker within one grid step of the critical value', () => {
    const { data } = readThreshold(thresholdText);
    const change = findSignChange(data);
    expect(change).not.toBeNull();
    expect(Math.abs(change!.kappa - change!.kappaCrit)).toBeLessThanOrEqual(change!.gridStep);
    const svg = renderToString(thresholdText, 'threshold', false);
    const meta = extractMetadata(svg);
    expect(meta.signChange.kappa).toBe(change!.kappa);
    expect(svg).toContain('id="sign-change"');
    expect(svg).toContain('id="kappa-crit"');
  });

  it('colors eigenvalue points by sign', () => {
    const { data } = readThreshold(thresholdText);
    const svg = renderToString(thresholdText, 'threshold', false);
    const negative = data.filter((row) => row.hessMinEig < -1e-8).length;
    const green = (svg.match(/fill="#1e8449"/g) ?? []).length;
    const red = (svg.match(/fill="#b03a2e"/g) ?? []).length;
    expect(red).toBe(negative);
    expect(green).toBe(data.length - negative);
  });
});
