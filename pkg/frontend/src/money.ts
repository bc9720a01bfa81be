/** Dollar formatting and bet-amount parsing. All arithmetic is integer cents. */

export function formatDollars(cents: number): string {
  const sign = cents < 0 ? "-" : "";
  const abs = Math.abs(cents);
  const dollars = Math.floor(abs / 100).toLocaleString("en-US");
  const rem = String(abs % 100).padStart(2, "0");
  return `${sign}$${dollars}.${rem}`;
}

export type ParsedAmount =
  | { ok: true; cents: number }
  | { ok: false; error: string };

const AMOUNT_RE = /^\$?\s*(\d*)(?:\.(\d*))?$/;

/**
 * Parse a wager typed by the player into whole cents.
 *
 * Rejects anything that is not plain dollars-and-cents: sub-cent precision,
 * negative amounts, and amounts below the one-cent minimum all fail here,
 * before any request is made.
 */
export function parseAmount(raw: string): ParsedAmount {
  const text = raw.trim();
  const m = AMOUNT_RE.exec(text);
  if (!m || (!m[1] && !m[2])) {
    return { ok: false, error: "enter a dollar amount" };
  }
  const frac = m[2] ?? "";
  if (frac.length > 2) {
    return { ok: false, error: "no fractions of a cent" };
  }
  const cents = Number(m[1] || "0") * 100 + Number((frac + "00").slice(0, 2));
  if (!Number.isSafeInteger(cents)) {
    return { ok: false, error: "amount too large" };
  }
  if (cents < 1) {
    return { ok: false, error: "minimum bet is $0.01" };
  }
  return { ok: true, cents };
}

/** Re-check a parsed wager against the last server-confirmed bankroll. */
export function validateAgainstBankroll(
  cents: number,
  bankrollCents: number,
): string | null {
  if (cents > bankrollCents) return "bet exceeds your bankroll";
  return null;
}
