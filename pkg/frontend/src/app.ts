/**
 * Single-page flow for the timed coin-betting table.
 *
 * Screens: pre-game questionnaire -> play -> results, with a retry screen
 * for an unreachable server. Every displayed number is a server-confirmed
 * value; the client never invents an outcome and never shows an optimistic
 * bankroll.
 */

import {
  ApiClient,
  ApiError,
  BetOutcome,
  Question,
  SessionState,
  Side,
} from "./api.js";
import { Countdown, formatClock } from "./countdown.js";
import { FlipMachine } from "./machine.js";
import { formatDollars, parseAmount, validateAgainstBankroll } from "./money.js";
import { sparklinePoints } from "./sparkline.js";

/** Minimum time the coin spins before an outcome may be revealed. */
export const REVEAL_HOLD_MS = 4000;
/** How long the revealed outcome lingers before the form re-enables. */
export const REVEAL_DWELL_MS = 1200;

const SPARK_WIDTH = 240;
const SPARK_HEIGHT = 48;

const delay = (ms: number) => new Promise<void>((r) => setTimeout(r, ms));

export function sessionIdFromFragment(hash: string): string | null {
  const m = /^#s=([A-Za-z0-9_-]{1,64})$/.exec(hash);
  return m ? m[1]! : null;
}

type ScreenName = "start" | "retry" | "play" | "results";

type PendingAnswer = { question_id: string; value: unknown };

interface Elements {
  screens: Record<ScreenName, HTMLElement>;
  preQuestions: HTMLElement;
  startBegin: HTMLButtonElement;
  startSkip: HTMLButtonElement;
  retryMessage: HTMLElement;
  retryBtn: HTMLButtonElement;
  bankroll: HTMLElement;
  countdown: HTMLElement;
  coin: HTMLElement;
  flipResult: HTMLElement;
  sideHeads: HTMLButtonElement;
  sideTails: HTMLButtonElement;
  betAmount: HTMLInputElement;
  betSubmit: HTMLButtonElement;
  betError: HTMLElement;
  capBanner: HTMLElement;
  sparkPath: SVGPolylineElement;
  flipCount: HTMLElement;
  finishBtn: HTMLButtonElement;
  resultsTitle: HTMLElement;
  payout: HTMLElement;
  resultsMessage: HTMLElement;
  postQuestions: HTMLElement;
  postSubmit: HTMLButtonElement;
  postStatus: HTMLElement;
}

export class App {
  readonly machine = new FlipMachine();

  private readonly win: Window;
  private els!: Elements;
  private session: SessionState | null = null;
  private history: number[] = [];
  private side: Side = "heads";
  private countdown: Countdown | null = null;
  private questions: Question[] = [];
  private expired = false;
  private finishing = false;
  private retryAction: (() => Promise<void>) | null = null;

  constructor(
    private readonly doc: Document,
    private readonly api: ApiClient,
  ) {
    const win = doc.defaultView;
    if (!win) throw new Error("document is not attached to a window");
    this.win = win;
  }

  async start(): Promise<void> {
    this.wire();
    const sid = sessionIdFromFragment(this.win.location.hash);
    if (sid) {
      await this.resume(sid);
      return;
    }
    await this.showStart();
  }

  // ------------------------------------------------------------ wiring

  private wire(): void {
    const byId = <T extends HTMLElement>(id: string): T => {
      const el = this.doc.getElementById(id);
      if (!el) throw new Error(`missing element #${id}`);
      return el as T;
    };
    this.els = {
      screens: {
        start: byId("screen-start"),
        retry: byId("screen-retry"),
        play: byId("screen-play"),
        results: byId("screen-results"),
      },
      preQuestions: byId("pre-questions"),
      startBegin: byId("start-begin"),
      startSkip: byId("start-skip"),
      retryMessage: byId("retry-message"),
      retryBtn: byId("retry-btn"),
      bankroll: byId("bankroll"),
      countdown: byId("countdown"),
      coin: byId("coin"),
      flipResult: byId("flip-result"),
      sideHeads: byId("side-heads"),
      sideTails: byId("side-tails"),
      betAmount: byId("bet-amount"),
      betSubmit: byId("bet-submit"),
      betError: byId("bet-error"),
      capBanner: byId("cap-banner"),
      sparkPath: byId("spark-path") as unknown as SVGPolylineElement,
      flipCount: byId("flip-count"),
      finishBtn: byId("finish-btn"),
      resultsTitle: byId("results-title"),
      payout: byId("payout"),
      resultsMessage: byId("results-message"),
      postQuestions: byId("post-questions"),
      postSubmit: byId("post-submit"),
      postStatus: byId("post-status"),
    };

    this.els.startBegin.addEventListener("click", () => {
      void this.beginSession(true);
    });
    this.els.startSkip.addEventListener("click", () => {
      void this.beginSession(false);
    });
    this.els.retryBtn.addEventListener("click", () => {
      const action = this.retryAction;
      this.retryAction = null;
      if (action) void action();
    });
    this.els.sideHeads.addEventListener("click", () => this.pickSide("heads"));
    this.els.sideTails.addEventListener("click", () => this.pickSide("tails"));
    this.els.betSubmit.addEventListener("click", () => {
      void this.submitBet();
    });
    this.els.betAmount.addEventListener("keydown", (ev) => {
      if ((ev as KeyboardEvent).key === "Enter") {
        ev.preventDefault();
        void this.submitBet();
      }
    });
    this.els.finishBtn.addEventListener("click", () => {
      void this.finishFlow();
    });
    this.els.postSubmit.addEventListener("click", () => {
      void this.submitPostAnswers();
    });
  }

  private showScreen(name: ScreenName): void {
    for (const [key, el] of Object.entries(this.els.screens)) {
      el.hidden = key !== name;
    }
  }

  // ------------------------------------------------------------ start flow

  private async showStart(): Promise<void> {
    try {
      this.questions = await this.api.questionnaire();
    } catch (err) {
      this.showRetry(describe(err), () => this.showStart());
      return;
    }
    renderQuestions(this.doc, this.els.preQuestions, this.questions, "pre");
    this.showScreen("start");
  }

  private async beginSession(includeAnswers: boolean): Promise<void> {
    const answers = includeAnswers
      ? collectAnswers(this.els.preQuestions)
      : [];
    let state: SessionState;
    try {
      state = await this.api.createSession({});
    } catch (err) {
      // Creation failed, so no session was consumed; offer a retry.
      this.showRetry(describe(err), () => this.beginSession(includeAnswers));
      return;
    }
    this.adopt(state, [state.bankroll_cents]);
    this.win.location.hash = `s=${state.session_id}`;
    for (const a of answers) {
      try {
        await this.api.answer(state.session_id, a.question_id, a.value);
      } catch {
        // Losing a questionnaire answer must not block play.
      }
    }
    this.enterPlay();
  }

  private async resume(sid: string): Promise<void> {
    let state: SessionState;
    try {
      state = await this.api.getState(sid);
    } catch (err) {
      if (err instanceof ApiError && err.status === 404) {
        this.win.location.hash = "";
        await this.showStart();
        return;
      }
      this.showRetry(describe(err), () => this.resume(sid));
      return;
    }
    let history = [state.bankroll_cents];
    try {
      const events = await this.api.events(sid);
      history = [state.start_cents];
      for (const e of events) {
        if (e.kind === "flip_resolved") {
          history.push(e.payload["bankroll_after_cents"] as number);
        }
      }
    } catch {
      // The sparkline falls back to the current bankroll alone.
    }
    this.adopt(state, history);
    if (state.status !== "active") {
      void this.loadQuestionsQuietly();
      this.showResults(state.payout_cents ?? 0, state.status === "ruined");
      return;
    }
    void this.loadQuestionsQuietly();
    this.enterPlay();
  }

  private async loadQuestionsQuietly(): Promise<void> {
    if (this.questions.length > 0) return;
    try {
      this.questions = await this.api.questionnaire();
      if (!this.els.screens.results.hidden) {
        renderQuestions(
          this.doc,
          this.els.postQuestions,
          this.questions,
          "post",
        );
      }
    } catch {
      // Questions are optional; play works without them.
    }
  }

  private adopt(state: SessionState, history: number[]): void {
    this.session = state;
    this.history = history;
  }

  private showRetry(message: string, action: () => Promise<void>): void {
    this.retryAction = action;
    this.els.retryMessage.textContent = message;
    this.showScreen("retry");
  }

  // ------------------------------------------------------------ play

  private enterPlay(): void {
    const sess = this.session;
    if (!sess) return;
    this.showScreen("play");
    this.setCoin("idle");
    this.renderHud();
    this.syncControls();
    this.countdown?.stop();
    if (sess.deadline_ms !== null) {
      this.countdown = new Countdown(sess.deadline_ms, sess.server_now_ms);
      this.countdown.start(
        (msLeft) => {
          this.els.countdown.textContent = formatClock(msLeft);
        },
        () => this.onDeadline(),
      );
    } else {
      this.els.countdown.textContent = "--:--";
    }
  }

  private pickSide(side: Side): void {
    if (this.machine.busy) return;
    this.side = side;
    const heads = side === "heads";
    this.els.sideHeads.classList.toggle("selected", heads);
    this.els.sideTails.classList.toggle("selected", !heads);
    this.els.sideHeads.setAttribute("aria-pressed", String(heads));
    this.els.sideTails.setAttribute("aria-pressed", String(!heads));
  }

  private async submitBet(): Promise<void> {
    const sess = this.session;
    if (!sess || this.machine.busy || this.finishing) return;
    if (sess.status !== "active" || this.expired) return;

    const parsed = parseAmount(this.els.betAmount.value);
    if (!parsed.ok) {
      this.setBetError(parsed.error);
      return;
    }
    const tooBig = validateAgainstBankroll(parsed.cents, sess.bankroll_cents);
    if (tooBig) {
      this.setBetError(tooBig);
      return;
    }

    this.setBetError("");
    this.machine.to("flipping");
    this.setCoin("flipping");
    this.syncControls();

    const startedAt = Date.now();
    let bet: BetOutcome;
    try {
      bet = await this.api.placeBet(sess.session_id, this.side, parsed.cents);
    } catch (err) {
      // Nothing to reveal: abort the animation and surface the refusal.
      this.machine.to("idle");
      this.setCoin("idle");
      await this.handleBetError(err);
      this.syncControls();
      return;
    }

    const hold = REVEAL_HOLD_MS - (Date.now() - startedAt);
    if (hold > 0) await delay(hold);
    this.reveal(bet, parsed.cents);
    await delay(REVEAL_DWELL_MS);
    this.machine.to("idle");
    this.setCoin("idle", bet.outcome);
    if (bet.status !== "active" || this.expired) {
      await this.finishFlow();
      return;
    }
    this.syncControls();
  }

  private reveal(bet: BetOutcome, amountCents: number): void {
    const sess = this.session;
    if (!sess) return;
    this.machine.to("revealed");
    sess.bankroll_cents = bet.bankroll_after_cents;
    sess.flips_done = bet.flips_done;
    sess.flips_remaining = bet.flips_remaining;
    sess.status = bet.status;
    if (bet.cap_cents !== null) sess.cap_cents = bet.cap_cents;
    if (bet.cap_reached_now) sess.cap_hit = true;
    this.history.push(bet.bankroll_after_cents);
    this.setCoin("revealed", bet.outcome);
    const outcome = bet.outcome === "heads" ? "Heads" : "Tails";
    const verb = bet.won ? "won" : "lost";
    this.els.flipResult.textContent = `${outcome} — you ${verb} ${formatDollars(amountCents)}`;
    this.renderHud();
  }

  private async handleBetError(err: unknown): Promise<void> {
    if (!(err instanceof ApiError)) throw err;
    if (err.status === 409) {
      // The session ended while the bet was in flight.
      await this.refreshState();
      await this.finishFlow();
      return;
    }
    if (err.status === 429) {
      this.setBetError("bets are rate-limited — give it a second");
      return;
    }
    if (err.status >= 400 && err.status < 500) {
      this.setBetError(err.message);
      return;
    }
    // Transport trouble: the bet may or may not have landed. Re-confirm.
    await this.refreshState();
    this.setBetError("connection hiccup — bankroll refreshed");
    if (this.session && this.session.status !== "active") {
      await this.finishFlow();
    }
  }

  private async refreshState(): Promise<void> {
    const sess = this.session;
    if (!sess) return;
    try {
      const fresh = await this.api.getState(sess.session_id);
      if (fresh.flips_done > sess.flips_done) {
        this.history.push(fresh.bankroll_cents);
      }
      this.session = fresh;
      this.renderHud();
    } catch {
      // Leave the last confirmed state on screen.
    }
  }

  private onDeadline(): void {
    this.expired = true;
    this.els.countdown.textContent = formatClock(0);
    this.syncControls();
    if (!this.machine.busy && !this.finishing) {
      // Mid-animation expiry waits: the reveal completes, then results.
      void this.finishFlow();
    }
  }

  // ------------------------------------------------------------ finish

  private async finishFlow(): Promise<void> {
    const sess = this.session;
    if (!sess || this.finishing) return;
    this.finishing = true;
    this.syncControls();
    this.countdown?.stop();
    try {
      const fin = await this.api.finish(sess.session_id);
      sess.payout_cents = fin.payout_cents;
      this.showResults(fin.payout_cents, sess.status === "ruined");
    } catch (err) {
      this.finishing = false;
      this.showRetry(describe(err), () => this.finishFlow());
    }
  }

  private showResults(payoutCents: number, ruined: boolean): void {
    this.countdown?.stop();
    this.els.resultsTitle.textContent = ruined ? "Game over" : "Session complete";
    this.els.payout.textContent = formatDollars(payoutCents);
    this.els.resultsMessage.textContent = ruined
      ? "You lost the whole bankroll — the payout is $0.00."
      : "Your payout is the final bankroll, up to the table cap.";
    renderQuestions(this.doc, this.els.postQuestions, this.questions, "post");
    this.showScreen("results");
  }

  private async submitPostAnswers(): Promise<void> {
    const sess = this.session;
    if (!sess) return;
    const answers = collectAnswers(this.els.postQuestions);
    this.els.postSubmit.disabled = true;
    let recorded = 0;
    for (const a of answers) {
      try {
        await this.api.answer(sess.session_id, a.question_id, a.value);
        recorded += 1;
      } catch {
        // Tolerated: the payout already happened.
      }
    }
    this.els.postStatus.textContent =
      answers.length === 0
        ? "No answers to send."
        : `Recorded ${recorded} answer${recorded === 1 ? "" : "s"} — thanks.`;
  }

  // ------------------------------------------------------------ rendering

  private renderHud(): void {
    const sess = this.session;
    if (!sess) return;
    this.els.bankroll.textContent = formatDollars(sess.bankroll_cents);
    this.els.flipCount.textContent = `flip ${sess.flips_done} of ${sess.max_flips}`;
    this.els.sparkPath.setAttribute(
      "points",
      sparklinePoints(this.history, SPARK_WIDTH, SPARK_HEIGHT),
    );
    if (sess.cap_hit && sess.cap_cents !== null) {
      this.els.capBanner.textContent = `Payout cap reached — payouts top out at ${formatDollars(sess.cap_cents)}.`;
      this.els.capBanner.hidden = false;
    }
  }

  private setCoin(phase: "idle" | "flipping" | "revealed", side?: Side): void {
    this.els.coin.dataset["phase"] = phase;
    this.els.coin.className = `coin ${phase}${side ? ` ${side}` : ""}`;
    if (phase === "flipping") {
      this.els.flipResult.textContent = "Flipping…";
    }
  }

  private setBetError(message: string): void {
    this.els.betError.textContent = message;
  }

  private syncControls(): void {
    const sess = this.session;
    const canAct =
      !!sess &&
      sess.status === "active" &&
      !this.expired &&
      !this.finishing &&
      !this.machine.busy;
    this.els.betAmount.disabled = !canAct;
    this.els.betSubmit.disabled = !canAct;
    this.els.sideHeads.disabled = !canAct;
    this.els.sideTails.disabled = !canAct;
    this.els.finishBtn.disabled = !canAct;
  }
}

// ------------------------------------------------------------ questionnaire

function renderQuestions(
  doc: Document,
  container: HTMLElement,
  questions: readonly Question[],
  phase: "pre" | "post",
): void {
  container.innerHTML = "";
  for (const q of questions.filter((q) => q.phase === phase)) {
    const row = doc.createElement("div");
    row.className = "question";
    const label = doc.createElement("label");
    label.htmlFor = `q-${q.id}`;
    label.textContent = q.prompt;
    row.appendChild(label);
    row.appendChild(fieldFor(doc, q));
    container.appendChild(row);
  }
}

function fieldFor(doc: Document, q: Question): HTMLElement {
  if (q.kind === "boolean") {
    const select = doc.createElement("select");
    select.id = `q-${q.id}`;
    select.dataset["qid"] = q.id;
    select.dataset["kind"] = q.kind;
    for (const [value, text] of [
      ["", "(skip)"],
      ["yes", "Yes"],
      ["no", "No"],
    ] as const) {
      const opt = doc.createElement("option");
      opt.value = value;
      opt.textContent = text;
      select.appendChild(opt);
    }
    return select;
  }
  const input = doc.createElement("input");
  input.id = `q-${q.id}`;
  input.dataset["qid"] = q.id;
  input.dataset["kind"] = q.kind;
  input.type = q.kind === "number" ? "number" : "text";
  return input;
}

function collectAnswers(container: HTMLElement): PendingAnswer[] {
  const out: PendingAnswer[] = [];
  const fields = container.querySelectorAll<HTMLElement>("[data-qid]");
  for (const el of Array.from(fields)) {
    const qid = el.dataset["qid"]!;
    const kind = el.dataset["kind"];
    const raw = (el as HTMLInputElement | HTMLSelectElement).value.trim();
    if (raw === "") continue;
    if (kind === "boolean") {
      out.push({ question_id: qid, value: raw === "yes" });
    } else if (kind === "number") {
      const num = Number(raw);
      if (Number.isFinite(num)) out.push({ question_id: qid, value: num });
    } else {
      out.push({ question_id: qid, value: raw });
    }
  }
  return out;
}

function describe(err: unknown): string {
  if (err instanceof ApiError) {
    return err.isServerFault
      ? "The table is not responding. Nothing was started — try again."
      : err.message;
  }
  return "Something went wrong — try again.";
}
