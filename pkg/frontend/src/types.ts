/** Wire types of the triage service HTTP contract. */

export interface ServiceResultItem {
  id: string;
  query: string;
  engine: string;
  url: string;
  title: string;
  snippet_text: string;
  theme: string | null;
  p: number;
  verdict: string;
}

export interface ResultsResponse {
  status: 'queued' | 'collecting' | 'classified' | 'failed' | string;
  model_version?: string;
  items?: ServiceResultItem[];
  error?: string;
}

export interface FeedbackResponse {
  remaining: number;
  retrain_started: boolean;
}

export type FeedbackChoice = 'criminal' | 'non_criminal';

/** Semaphore colors as served; 'error' is the neutral badge for anything
 * the console does not recognize. */
export type BadgeColor = 'red' | 'yellow' | 'green' | 'error';

export type FeedbackState = 'none' | 'confirmed' | 'contradicted';

export interface ResultViewModel {
  id: string;
  title: string;
  text: string;
  url: string;
  probability: number;
  /** probability rendered for the operator, e.g. "91%" */
  percent: string;
  /** derives only from the served verdict field, never recomputed locally */
  color: BadgeColor;
  feedback: FeedbackState;
  modelVersion: string;
}
