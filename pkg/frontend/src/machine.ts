/**
 * Flip-cycle state machine. One bet is in flight at a time: the form can
 * only submit from `idle`, the animation holds in `flipping`, and the
 * outcome dwell in `revealed` returns to `idle`.
 */

export type FlipPhase = "idle" | "flipping" | "revealed";

const VALID_TRANSITIONS: Record<FlipPhase, readonly FlipPhase[]> = {
  idle: ["flipping"],
  // `flipping -> idle` is the abort edge: the server refused the bet, so
  // there is no outcome to reveal.
  flipping: ["revealed", "idle"],
  revealed: ["idle"],
};

export class FlipMachine {
  private phase: FlipPhase = "idle";
  private listeners = new Set<(phase: FlipPhase) => void>();

  get state(): FlipPhase {
    return this.phase;
  }

  /** True whenever a flip is underway and the bet form must stay inert. */
  get busy(): boolean {
    return this.phase !== "idle";
  }

  to(next: FlipPhase): void {
    if (!VALID_TRANSITIONS[this.phase].includes(next)) {
      throw new Error(`invalid transition ${this.phase} -> ${next}`);
    }
    this.phase = next;
    for (const fn of this.listeners) fn(next);
  }

  subscribe(fn: (phase: FlipPhase) => void): () => void {
    this.listeners.add(fn);
    return () => this.listeners.delete(fn);
  }
}
