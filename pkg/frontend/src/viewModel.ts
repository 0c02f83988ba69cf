/** Mapping from served result items to what the operator sees. The server
 * decides verdicts and order; the console never re-sorts, filters, or
 * recomputes colors. */

import type {
  BadgeColor, FeedbackChoice, FeedbackState, ResultViewModel, ResultsResponse,
  ServiceResultItem,
} from './types.js';

/** Bijection over the three semaphore verdicts; anything else is 'error'. */
const VERDICT_TO_COLOR: Readonly<Record<string, BadgeColor>> = {
  red: 'red',
  yellow: 'yellow',
  green: 'green',
};

export function verdictColor(verdict: string): BadgeColor {
  return VERDICT_TO_COLOR[verdict] ?? 'error';
}

export function formatPercent(p: number): string {
  return `${Math.round(p * 100)}%`;
}

export function toViewModel(item: ServiceResultItem, modelVersion = ''): ResultViewModel {
  return {
    id: item.id,
    title: item.title,
    text: item.snippet_text,
    url: item.url,
    probability: item.p,
    percent: formatPercent(item.p),
    color: verdictColor(item.verdict),
    feedback: 'none',
    modelVersion,
  };
}

/** List order is exactly the served order; unrecognized verdicts become
 * error badges but are never dropped. */
export function toViewModels(response: ResultsResponse): ResultViewModel[] {
  const version = response.model_version ?? '';
  return (response.items ?? []).map((item) => toViewModel(item, version));
}

/** An operator click confirms the classifier when the choice agrees with the
 * served band: criminal matches red/yellow, non-criminal matches green. */
export function feedbackOutcome(color: BadgeColor, choice: FeedbackChoice): FeedbackState {
  const agrees = choice === 'criminal' ? color === 'red' || color === 'yellow' : color === 'green';
  return agrees ? 'confirmed' : 'contradicted';
}
