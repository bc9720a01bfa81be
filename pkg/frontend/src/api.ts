/** Typed client for the betting-table HTTP API. */

export type Side = "heads" | "tails";
export type SessionStatus = "active" | "finished" | "ruined";

export interface SessionState {
  session_id: string;
  status: SessionStatus;
  bankroll_cents: number;
  flips_done: number;
  flips_remaining: number;
  max_flips: number;
  min_bet_cents: number;
  p_heads: number;
  start_cents: number;
  cap_hit: boolean;
  cap_cents: number | null;
  deadline_ms: number | null;
  server_now_ms: number;
  payout_cents: number | null;
}

export interface BetOutcome {
  seq: number;
  outcome: Side;
  won: boolean;
  bankroll_after_cents: number;
  flips_done: number;
  flips_remaining: number;
  status: SessionStatus;
  cap_reached_now: boolean;
  cap_cents: number | null;
}

export interface FinishResult {
  session_id: string;
  payout_cents: number;
}

export interface AnswerRecorded {
  session_id: string;
  question_id: string;
  recorded: boolean;
}

export interface Question {
  id: string;
  prompt: string;
  kind: "boolean" | "number" | "text";
  phase: "pre" | "post";
}

export interface SessionEvent {
  session_id: string;
  seq: number;
  ts_ms: number;
  kind: string;
  payload: Record<string, unknown>;
}

export interface CreateSessionOverrides {
  p_heads?: number;
  start_cents?: number;
  cap_cents?: number;
  max_flips?: number;
  session_seconds?: number;
  min_bet_cents?: number;
  cap_disclosure?: "hidden" | "shown";
  seed?: number;
}

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly tag: string,
    message: string,
  ) {
    super(message);
    this.name = "ApiError";
  }

  /** Transport failure or 5xx: the table is unreachable, not refusing. */
  get isServerFault(): boolean {
    return this.status === 0 || this.status >= 500;
  }
}

async function toApiError(res: Response): Promise<ApiError> {
  let tag = `http_${res.status}`;
  let message = res.statusText || `request failed (${res.status})`;
  try {
    const body: unknown = await res.json();
    const detail = (body as { detail?: unknown }).detail;
    if (detail && typeof detail === "object") {
      const d = detail as { error?: unknown; detail?: unknown };
      if (typeof d.error === "string") tag = d.error;
      if (typeof d.detail === "string") message = d.detail;
    } else if (typeof detail === "string") {
      message = detail;
    }
  } catch {
    // non-JSON body; keep the HTTP status text
  }
  return new ApiError(res.status, tag, message);
}

export class ApiClient {
  constructor(
    private readonly base: string = "",
    private readonly fetchFn: typeof fetch = (...args) =>
      globalThis.fetch(...args),
  ) {}

  private async request<T>(
    method: string,
    path: string,
    body?: unknown,
  ): Promise<T> {
    let res: Response;
    try {
      res = await this.fetchFn(this.base + path, {
        method,
        headers:
          body === undefined ? undefined : { "content-type": "application/json" },
        body: body === undefined ? undefined : JSON.stringify(body),
      });
    } catch (err) {
      const message = err instanceof Error ? err.message : "network failure";
      throw new ApiError(0, "network", message);
    }
    if (!res.ok) throw await toApiError(res);
    return (await res.json()) as T;
  }

  createSession(overrides: CreateSessionOverrides = {}): Promise<SessionState> {
    return this.request<SessionState>("POST", "/api/sessions", overrides);
  }

  getState(sessionId: string): Promise<SessionState> {
    return this.request<SessionState>("GET", `/api/sessions/${sessionId}`);
  }

  placeBet(
    sessionId: string,
    side: Side,
    amountCents: number,
  ): Promise<BetOutcome> {
    return this.request<BetOutcome>("POST", `/api/sessions/${sessionId}/bets`, {
      side,
      amount_cents: amountCents,
    });
  }

  finish(sessionId: string): Promise<FinishResult> {
    return this.request<FinishResult>(
      "POST",
      `/api/sessions/${sessionId}/finish`,
    );
  }

  answer(
    sessionId: string,
    questionId: string,
    value: unknown,
  ): Promise<AnswerRecorded> {
    return this.request<AnswerRecorded>(
      "POST",
      `/api/sessions/${sessionId}/answers`,
      { question_id: questionId, value },
    );
  }

  questionnaire(): Promise<Question[]> {
    return this.request<Question[]>("GET", "/api/questionnaire");
  }

  events(sessionId: string): Promise<SessionEvent[]> {
    return this.request<SessionEvent[]>(
      "GET",
      `/api/sessions/${sessionId}/events`,
    );
  }
}
