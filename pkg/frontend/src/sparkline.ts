/** Geometry for the bankroll history sparkline (an SVG polyline). */

const round2 = (n: number) => Math.round(n * 100) / 100;

/**
 * Map a series of bankroll values onto `points` for an SVG polyline in a
 * `width` x `height` viewBox. A flat series draws along the midline; a
 * single value becomes one centered point.
 */
export function sparklinePoints(
  values: readonly number[],
  width: number,
  height: number,
  pad = 2,
): string {
  if (values.length === 0) return "";
  const lo = Math.min(...values);
  const hi = Math.max(...values);
  const span = hi - lo;
  const innerW = width - 2 * pad;
  const innerH = height - 2 * pad;
  const xStep = values.length > 1 ? innerW / (values.length - 1) : 0;
  return values
    .map((v, i) => {
      const x = pad + (values.length > 1 ? i * xStep : innerW / 2);
      const frac = span === 0 ? 0.5 : (v - lo) / span;
      const y = pad + (1 - frac) * innerH;
      return `${round2(x)},${round2(y)}`;
    })
    .join(" ");
}
