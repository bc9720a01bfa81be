/** Session countdown driven by the server's deadline, not a local timer. */

export function formatClock(msRemaining: number): string {
  const totalSeconds = Math.max(0, Math.ceil(msRemaining / 1000));
  const mm = String(Math.floor(totalSeconds / 60)).padStart(2, "0");
  const ss = String(totalSeconds % 60).padStart(2, "0");
  return `${mm}:${ss}`;
}

/**
 * Ticks down to a server-issued epoch deadline.
 *
 * The server reports its own clock alongside the deadline; the difference
 * from the local clock is applied to every reading, so a reloaded page or a
 * skewed client still counts down to the same real moment the server will
 * enforce.
 */
export class Countdown {
  private readonly skewMs: number;
  private timer: ReturnType<typeof setInterval> | null = null;
  private expired = false;

  constructor(
    private readonly deadlineMs: number,
    serverNowMs: number,
    localNowMs: number = Date.now(),
  ) {
    this.skewMs = serverNowMs - localNowMs;
  }

  remainingMs(localNowMs: number = Date.now()): number {
    return this.deadlineMs - (localNowMs + this.skewMs);
  }

  start(
    onTick: (msLeft: number) => void,
    onExpire: () => void,
    periodMs = 250,
  ): void {
    this.stop();
    const fire = () => {
      const left = this.remainingMs();
      onTick(Math.max(0, left));
      if (left <= 0 && !this.expired) {
        this.expired = true;
        this.stop();
        onExpire();
      }
    };
    this.timer = setInterval(fire, periodMs);
    fire();
  }

  stop(): void {
    if (this.timer !== null) {
      clearInterval(this.timer);
      this.timer = null;
    }
  }
}
