/** FIFO feedback submission with click de-duplication.
 *
 * Every accepted click turns into exactly one POST; a second click on the
 * same snippet is ignored while its first submission is still queued or in
 * flight (so double-clicks cannot double-post). Failed submissions leave the
 * snippet clickable again so the operator can retry; nothing is dropped
 * silently.
 */

import type { ServiceClient } from './api.js';
import type { FeedbackChoice, FeedbackResponse } from './types.js';

interface Job {
  snippetId: string;
  choice: FeedbackChoice;
  resolve: (outcome: SubmissionResult) => void;
}

export type SubmissionResult =
  | { kind: 'ok'; response: FeedbackResponse }
  | { kind: 'error'; error: unknown }
  | { kind: 'duplicate' };

export class FeedbackSubmitter {
  private readonly queue: Job[] = [];
  private readonly pending = new Set<string>();
  private draining = false;

  constructor(
    private readonly client: ServiceClient,
    private readonly operatorId: string = 'operator',
  ) {}

  /** Resolves 'duplicate' (and sends nothing) when the snippet already has a
   * submission queued or in flight. */
  submit(snippetId: string, choice: FeedbackChoice): Promise<SubmissionResult> {
    if (this.pending.has(snippetId)) {
      return Promise.resolve({ kind: 'duplicate' });
    }
    this.pending.add(snippetId);
    return new Promise<SubmissionResult>((resolve) => {
      this.queue.push({ snippetId, choice, resolve });
      void this.drain();
    });
  }

  get pendingCount(): number {
    return this.queue.length + (this.draining ? 1 : 0);
  }

  private async drain(): Promise<void> {
    if (this.draining) return;
    this.draining = true;
    try {
      for (let job = this.queue.shift(); job; job = this.queue.shift()) {
        try {
          const response = await this.client.postFeedback(job.snippetId, job.choice, this.operatorId);
          this.pending.delete(job.snippetId);
          job.resolve({ kind: 'ok', response });
        } catch (error) {
          this.pending.delete(job.snippetId);
          job.resolve({ kind: 'error', error });
        }
      }
    } finally {
      this.draining = false;
    }
  }
}
