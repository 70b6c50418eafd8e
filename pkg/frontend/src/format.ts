import type { Value } from "./types.js";

export function formatValue(value: Value): string {
  if (value === null) return "NULL";
  if (typeof value === "object") return value.dec;
  return String(value);
}

export function creatorLabel(xid: number | null, stmt: number | null): string {
  if (xid === null) return "";
  const base = xid === 0 ? "load" : `T${xid}`;
  return stmt === null ? base : `${base}/${stmt}`;
}

/** Parse an edited cell back into a typed value for the column kind. */
export function parseEdited(text: string, kind: string): Value {
  const trimmed = text.trim();
  if (trimmed.toUpperCase() === "NULL") return null;
  if (kind === "INT") {
    const n = Number(trimmed);
    if (!Number.isInteger(n)) throw new Error(`not an integer: ${trimmed}`);
    return n;
  }
  if (kind === "DEC") {
    if (!/^-?\d+(\.\d{1,2})?$/.test(trimmed)) {
      throw new Error(`not a decimal: ${trimmed}`);
    }
    const [whole, frac = ""] = trimmed.split(".");
    return { dec: `${whole}.${frac.padEnd(2, "0")}` };
  }
  return trimmed;
}

export function sameValue(a: Value, b: Value): boolean {
  return formatValue(a) === formatValue(b);
}
