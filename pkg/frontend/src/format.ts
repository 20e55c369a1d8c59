// All numbers shown in the UI pass through these formatters, applied
// directly to server-sent values; the client never derives numbers itself.

export function fmtValue(v: number): string {
  return v.toFixed(2);
}

export function fmtEpsilon(v: number): string {
  return v.toFixed(4);
}
