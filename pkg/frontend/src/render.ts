import { readFileSync, writeFileSync } from 'fs';

import { aggregateByRank, findSignChange } from './aggregate.js';
import { readSweep, readThreshold } from './csv.js';
import { renderRankSweep, renderThreshold } from './svg.js';

export type PlotKind = 'rank-sweep' | 'threshold';

export interface PlotSpec {
  inputCsv: string;
  outputImage: string;
  kind: PlotKind;
  logY: boolean;
}

export function renderToString(text: string, kind: PlotKind, logY: boolean): string {
  if (kind === 'rank-sweep') {
    const { data } = readSweep(text);
    return renderRankSweep(data, aggregateByRank(data), logY);
  }
  const { data } = readThreshold(text);
  return renderThreshold(data, findSignChange(data));
}

export function render(spec: PlotSpec): void {
  const text = readFileSync(spec.inputCsv, 'utf8');
  const svg = renderToString(text, spec.kind, spec.logY);
  writeFileSync(spec.outputImage, svg);
}
