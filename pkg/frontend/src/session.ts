/** Session state and the results poller.
 *
 * Polling uses a timer chain (schedule the next tick only after the previous
 * response lands), so there is never more than one in-flight poll per
 * inquiry, and it stops on its own once the inquiry is classified or failed.
 */

import type { ServiceClient } from './api.js';
import type { ResultsResponse } from './types.js';

export const DEFAULT_POLL_INTERVAL_MS = 1000;

export interface SessionState {
  inquiryId: string | null;
  pollIntervalMs: number;
  /** from the last feedback response; null until the first decision */
  decisionsUntilRetrain: number | null;
}

export function initialSession(pollIntervalMs = DEFAULT_POLL_INTERVAL_MS): SessionState {
  return { inquiryId: null, pollIntervalMs, decisionsUntilRetrain: null };
}

/** Header text for the retrain countdown; empty before any feedback. */
export function countdownText(remaining: number | null): string {
  return remaining === null ? '' : `retrain in ${remaining} decisions`;
}

const TERMINAL = new Set(['classified', 'failed']);

type Scheduler = (fn: () => void, ms: number) => ReturnType<typeof setTimeout>;

export interface PollerOptions {
  intervalMs?: number;
  schedule?: Scheduler;
  cancel?: (handle: ReturnType<typeof setTimeout>) => void;
}

export class InquiryPoller {
  private readonly intervalMs: number;
  private readonly schedule: Scheduler;
  private readonly cancel: (handle: ReturnType<typeof setTimeout>) => void;
  private timer: ReturnType<typeof setTimeout> | null = null;
  private generation = 0;
  private inFlight = false;

  constructor(private readonly client: ServiceClient, options: PollerOptions = {}) {
    this.intervalMs = options.intervalMs ?? DEFAULT_POLL_INTERVAL_MS;
    this.schedule = options.schedule ?? ((fn, ms) => setTimeout(fn, ms));
    this.cancel = options.cancel ?? ((handle) => clearTimeout(handle));
  }

  /** Poll until the inquiry reaches a terminal status. Starting a new poll
   * cancels the previous one. */
  start(
    inquiryId: string,
    onUpdate: (response: ResultsResponse) => void,
    onError: (error: unknown) => void = () => {},
  ): void {
    this.stop();
    const generation = ++this.generation;
    const tick = async (): Promise<void> => {
      if (generation !== this.generation) return;
      this.timer = null;
      this.inFlight = true;
      try {
        const response = await this.client.getResults(inquiryId);
        if (generation !== this.generation) return;
        onUpdate(response);
        if (TERMINAL.has(response.status)) return;
      } catch (error) {
        if (generation !== this.generation) return;
        onError(error);
      } finally {
        this.inFlight = false;
      }
      this.timer = this.schedule(() => void tick(), this.intervalMs);
    };
    void tick();
  }

  get polling(): boolean {
    return this.inFlight || this.timer !== null;
  }

  stop(): void {
    this.generation++;
    if (this.timer !== null) {
      this.cancel(this.timer);
      this.timer = null;
    }
  }
}
