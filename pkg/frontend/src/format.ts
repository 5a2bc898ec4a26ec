// Display formatting; values themselves are never recomputed client-side.

export function fmt(value: number | null | undefined, digits = 4): string {
  if (value === null || value === undefined || Number.isNaN(value)) return "-";
  if (!Number.isFinite(value)) return value > 0 ? "inf" : "-inf";
  return value.toFixed(digits);
}

export function fmtKappa(value: number | null | undefined): string {
  return fmt(value, 4);
}

export function pct(value: number | null | undefined): string {
  if (value === null || value === undefined || !Number.isFinite(value)) return "-";
  return `${(100 * value).toFixed(2)}%`;
}
