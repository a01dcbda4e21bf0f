import type { SweepRow, ThresholdRow } from './csv.js';

export interface RankSummary {
  r: number;
  meanError: number;
  count: number;
}

/** Mean final error per search rank, ascending in r, from the data rows. */
export function aggregateByRank(rows: SweepRow[]): RankSummary[] {
  const byRank = new Map<number, number[]>();
  for (const row of rows) {
    const list = byRank.get(row.r) ?? [];
    list.push(row.finalError);
    byRank.set(row.r, list);
  }
  return [...byRank.entries()]
    .map(([r, errors]) => ({
      r,
      meanError: errors.reduce((acc, v) => acc + v, 0) / errors.length,
      count: errors.length,
    }))
    .sort((a, b) => a.r - b.r);
}

export interface SignChange {
  /** Midpoint of the grid interval where hess_min_eig turns non-negative. */
  kappa: number;
  gridStep: number;
  kappaCrit: number;
}

/**
 * Locate where the smallest Hessian eigenvalue changes sign along the kappa
 * grid.  Eigenvalues within `tol` of zero count as non-negative (the PSD side
 * sits numerically at zero).
 */
export function findSignChange(rows: ThresholdRow[], tol = 1e-8): SignChange | null {
  const sorted = [...rows].sort((a, b) => a.kappaSp - b.kappaSp);
  const nonNegative = sorted.map((row) => row.hessMinEig >= -tol);
  for (let i = 0; i + 1 < sorted.length; i += 1) {
    if (!nonNegative[i] && nonNegative[i + 1]) {
      return {
        kappa: 0.5 * (sorted[i].kappaSp + sorted[i + 1].kappaSp),
        gridStep: sorted[i + 1].kappaSp - sorted[i].kappaSp,
        kappaCrit: sorted[i].kappaCrit,
      };
    }
  }
  return null;
}
