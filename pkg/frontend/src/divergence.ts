/**
 * Order-1/2 Renyi divergence between Bernoulli rates, and the recovery
 * boundary n * I(p, q) = 2 log n traced through the (q, p) plane.
 *
 * This is the one quantity the plotting side recomputes: the boundary curve
 * overlaid on the heatmap.
 */

export function renyiHalfDivergence(p: number, q: number): number {
  if (!(p > 0 && p < 1 && q > 0 && q < 1)) {
    throw new Error(`rates must lie strictly in (0, 1); got p=${p}, q=${q}`);
  }
  return -2 * Math.log(Math.sqrt(p * q) + Math.sqrt((1 - p) * (1 - q)));
}

export interface BoundaryPoint {
  p: number;
  q: number;
}

/**
 * For each p on a fine grid, find the q < p where n * I(p, q) equals the
 * exact-recovery threshold 2 log n. Rows whose divergence never reaches the
 * threshold (even as q -> 0) contribute no point.
 */
export function recoveryBoundary(
  n: number,
  pMin: number,
  pMax: number,
  qMin: number,
  steps = 120,
): BoundaryPoint[] {
  const threshold = (2 * Math.log(n)) / n;
  const points: BoundaryPoint[] = [];
  const qFloor = Math.min(qMin, 1e-9);
  for (let i = 0; i <= steps; i++) {
    const p = pMin + ((pMax - pMin) * i) / steps;
    if (p <= qFloor) continue;
    if (renyiHalfDivergence(p, qFloor) < threshold) continue;
    if (renyiHalfDivergence(p, Math.min(p * (1 - 1e-9), 1 - 1e-9)) > threshold) {
      continue; // threshold sits above the q < p wedge for this p
    }
    let lo = qFloor;
    let hi = p * (1 - 1e-9);
    for (let iter = 0; iter < 200; iter++) {
      const mid = 0.5 * (lo + hi);
      if (renyiHalfDivergence(p, mid) > threshold) {
        lo = mid; // divergence decreases as q approaches p
      } else {
        hi = mid;
      }
    }
    points.push({ p, q: 0.5 * (lo + hi) });
  }
  return points;
}
