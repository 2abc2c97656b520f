/** Debounced latest-wins request scheduling.
 *
 * Gizmo drags and beta scrubs fire far faster than the service should be
 * asked to solve, so requests are coalesced to one per interval, at most
 * one is in flight, and responses that arrive out of order are dropped.
 */

export interface ScheduledSend<T, R> {
  (arg: T, signal: AbortSignal): Promise<R>;
}

export class DebouncedRequester<T, R> {
  private timer: ReturnType<typeof setTimeout> | null = null;
  private pending: T | null = null;
  private inFlight: AbortController | null = null;
  private nextSeq = 0;
  private appliedSeq = -1;

  constructor(
    private send: ScheduledSend<T, R>,
    private apply: (result: R, arg: T) => void,
    private onError: (err: unknown) => void = () => {},
    private intervalMs = 100,
  ) {}

  /** Queue a request; earlier queued values are replaced (last one wins). */
  request(arg: T): void {
    this.pending = arg;
    if (this.timer === null) {
      this.timer = setTimeout(() => {
        this.timer = null;
        this.fire();
      }, this.intervalMs);
    }
  }

  /** Number of requests actually dispatched (for tests and diagnostics). */
  dispatched = 0;

  private fire(): void {
    if (this.pending === null) return;
    const arg = this.pending;
    this.pending = null;
    const seq = this.nextSeq++;

    // Latest wins: a newer request cancels whatever is still in flight.
    if (this.inFlight) this.inFlight.abort();
    const controller = new AbortController();
    this.inFlight = controller;
    this.dispatched++;

    this.send(arg, controller.signal).then(
      (result) => {
        if (controller.signal.aborted || seq <= this.appliedSeq) return;
        this.appliedSeq = seq;
        if (this.inFlight === controller) this.inFlight = null;
        this.apply(result, arg);
      },
      (err) => {
        if (this.inFlight === controller) this.inFlight = null;
        if (!controller.signal.aborted) this.onError(err);
      },
    );
  }
}
