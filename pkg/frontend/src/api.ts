/** Thin typed client over the service HTTP contract. The transport is
 * injectable so tests can count and script requests. */

import type { FeedbackChoice, FeedbackResponse, ResultsResponse } from './types.js';

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(readonly status: number, message: string) {
    super(message);
    this.name = 'ApiError';
  }
}

async function errorDetail(response: Response): Promise<string> {
  try {
    const body = (await response.json()) as { detail?: unknown };
    if (typeof body.detail === 'string') return body.detail;
  } catch {
    /* non-JSON error body */
  }
  return `request failed with status ${response.status}`;
}

export class ServiceClient {
  constructor(
    private readonly baseUrl: string = '',
    private readonly fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchFn(this.baseUrl + path, init);
    if (!response.ok) {
      throw new ApiError(response.status, await errorDetail(response));
    }
    return (await response.json()) as T;
  }

  async submitInquiry(text: string): Promise<string> {
    const body = await this.request<{ id: string }>('/inquiries', {
      method: 'POST',
      headers: { 'content-type': 'application/json' },
      body: JSON.stringify({ text }),
    });
    return body.id;
  }

  getResults(inquiryId: string): Promise<ResultsResponse> {
    return this.request<ResultsResponse>(`/inquiries/${encodeURIComponent(inquiryId)}/results`);
  }

  postFeedback(snippetId: string, label: FeedbackChoice, operatorId: string): Promise<FeedbackResponse> {
    return this.request<FeedbackResponse>('/feedback', {
      method: 'POST',
      headers: { 'content-type': 'application/json' },
      body: JSON.stringify({ snippet_id: snippetId, label, operator_id: operatorId }),
    });
  }
}
