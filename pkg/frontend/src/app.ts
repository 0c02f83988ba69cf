/** DOM glue for the operator console. All decision logic lives in the
 * viewModel / session / feedbackQueue modules; this file only renders state
 * and forwards clicks. */

import { ApiError, ServiceClient } from './api.js';
import { FeedbackSubmitter } from './feedbackQueue.js';
import { InquiryPoller, countdownText, initialSession } from './session.js';
import type { FeedbackChoice, ResultViewModel, ResultsResponse } from './types.js';
import { feedbackOutcome, toViewModels } from './viewModel.js';

export class ConsoleApp {
  private readonly session = initialSession();
  private readonly poller: InquiryPoller;
  private readonly submitter: FeedbackSubmitter;
  private items: ResultViewModel[] = [];
  private status = 'idle';
  private collapseGreen = false; // default expanded

  private readonly statusLine: HTMLElement;
  private readonly countdown: HTMLElement;
  private readonly list: HTMLElement;
  private readonly toasts: HTMLElement;

  constructor(private readonly root: HTMLElement, private readonly client: ServiceClient) {
    this.poller = new InquiryPoller(client);
    this.submitter = new FeedbackSubmitter(client);
    this.root.innerHTML = `
      <header class="bar">
        <h1>webtriage console</h1>
        <span data-role="countdown" class="countdown" hidden></span>
      </header>
      <form data-role="inquiry-form" class="inquiry">
        <input data-role="inquiry-text" type="text" placeholder="Type an inquiry..." autocomplete="off">
        <button type="submit">Search</button>
        <label class="collapse"><input data-role="collapse-green" type="checkbox"> collapse green</label>
      </form>
      <p data-role="status" class="status"></p>
      <ol data-role="results" class="results"></ol>
      <div data-role="toasts" class="toasts"></div>`;
    this.statusLine = this.require('status');
    this.countdown = this.require('countdown');
    this.list = this.require('results');
    this.toasts = this.require('toasts');

    this.require<HTMLFormElement>('inquiry-form').addEventListener('submit', (event) => {
      event.preventDefault();
      const input = this.require<HTMLInputElement>('inquiry-text');
      void this.startInquiry(input.value);
    });
    this.require<HTMLInputElement>('collapse-green').addEventListener('change', (event) => {
      this.collapseGreen = (event.target as HTMLInputElement).checked;
      this.renderResults();
    });
  }

  private require<T extends HTMLElement>(role: string): T {
    const el = this.root.querySelector<T>(`[data-role="${role}"]`);
    if (!el) throw new Error(`missing element with data-role ${role}`);
    return el;
  }

  async startInquiry(text: string): Promise<void> {
    if (!text.trim()) {
      this.toast('Type an inquiry first.');
      return;
    }
    this.items = [];
    this.renderResults();
    this.setStatus('submitting...');
    try {
      const inquiryId = await this.client.submitInquiry(text);
      this.session.inquiryId = inquiryId;
      this.setStatus('collecting...');
      this.poller.start(
        inquiryId,
        (response) => this.onResults(response),
        (error) => this.toast(`polling failed: ${describe(error)} (retrying)`),
      );
    } catch (error) {
      this.setStatus('failed');
      this.toast(describe(error));
    }
  }

  private onResults(response: ResultsResponse): void {
    this.setStatus(response.status);
    if (response.status === 'classified') {
      this.items = toViewModels(response);
      this.renderResults();
    } else if (response.status === 'failed') {
      this.toast(response.error ?? 'inquiry failed');
    }
  }

  private setStatus(text: string): void {
    this.status = text;
    this.statusLine.textContent = text;
  }

  private renderCountdown(): void {
    const remaining = this.session.decisionsUntilRetrain;
    this.countdown.hidden = remaining === null;
    this.countdown.textContent = countdownText(remaining);
  }

  /** Renders items in served order; collapsing green only hides rows. */
  private renderResults(): void {
    this.list.textContent = '';
    for (const item of this.items) {
      this.list.appendChild(this.renderItem(item));
    }
  }

  private renderItem(item: ResultViewModel): HTMLElement {
    const row = document.createElement('li');
    row.className = `result ${item.color}`;
    row.dataset.id = item.id;
    if (this.collapseGreen && item.color === 'green') row.classList.add('hidden');

    const badge = document.createElement('span');
    badge.className = `badge badge-${item.color}`;
    badge.textContent = item.color === 'error' ? '?' : item.percent;
    row.appendChild(badge);

    const body = document.createElement('div');
    body.className = 'body';
    const title = document.createElement('a');
    title.href = item.url;
    title.target = '_blank';
    title.rel = 'noopener';
    title.textContent = item.title || item.url;
    const text = document.createElement('p');
    text.textContent = item.text;
    body.append(title, text);
    row.appendChild(body);

    const actions = document.createElement('div');
    actions.className = 'actions';
    if (item.feedback === 'none' && item.color !== 'error') {
      for (const choice of ['criminal', 'non_criminal'] as FeedbackChoice[]) {
        const button = document.createElement('button');
        button.textContent = choice === 'criminal' ? 'criminal' : 'non-criminal';
        button.addEventListener('click', () => void this.sendFeedback(item, choice, button));
        actions.appendChild(button);
      }
    } else if (item.feedback !== 'none') {
      const state = document.createElement('span');
      state.className = `state ${item.feedback}`;
      state.textContent = item.feedback;
      actions.appendChild(state);
    }
    row.appendChild(actions);
    return row;
  }

  private async sendFeedback(item: ResultViewModel, choice: FeedbackChoice,
                             button: HTMLButtonElement): Promise<void> {
    button.disabled = true;
    const outcome = await this.submitter.submit(item.id, choice);
    if (outcome.kind === 'duplicate') return;
    if (outcome.kind === 'error') {
      button.disabled = false; // retry affordance: the click is not lost for good
      const status = outcome.error instanceof ApiError ? outcome.error.status : null;
      this.toast(status === 404
        ? `unknown snippet ${item.id}`
        : `feedback for ${item.id} failed: ${describe(outcome.error)} - click to retry`);
      return;
    }
    item.feedback = feedbackOutcome(item.color, choice);
    this.session.decisionsUntilRetrain = outcome.response.remaining;
    if (outcome.response.retrain_started) this.toast('retraining started');
    this.renderCountdown();
    this.renderResults();
  }

  private toast(message: string): void {
    const note = document.createElement('div');
    note.className = 'toast';
    note.textContent = message;
    this.toasts.appendChild(note);
    setTimeout(() => note.remove(), 6000);
  }
}

function describe(error: unknown): string {
  return error instanceof Error ? error.message : String(error);
}

export function mount(root: HTMLElement, baseUrl = ''): ConsoleApp {
  return new ConsoleApp(root, new ServiceClient(baseUrl));
}

const rootElement = typeof document !== 'undefined' ? document.getElementById('app') : null;
if (rootElement) {
  mount(rootElement);
}
