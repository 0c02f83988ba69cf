import { describe, expect, it } from 'vitest';

import { ApiError, ServiceClient } from '../src/api.js';
import type { FetchLike } from '../src/api.js';

function jsonResponse(status: number, body: unknown): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { 'content-type': 'application/json' },
  });
}

function scripted(handler: (input: string, init?: RequestInit) => Response) {
  const calls: Array<{ input: string; init?: RequestInit }> = [];
  const fetchFn: FetchLike = async (input, init) => {
    calls.push({ input, init });
    return handler(input, init);
  };
  return { calls, fetchFn };
}

describe('ServiceClient', () => {
  it('posts inquiries and unwraps the id', async () => {
    const { calls, fetchFn } = scripted(() => jsonResponse(202, { id: 'abc123' }));
    const client = new ServiceClient('http://svc', fetchFn);
    expect(await client.submitInquiry('kup wino')).toBe('abc123');
    expect(calls[0]!.input).toBe('http://svc/inquiries');
    expect(calls[0]!.init?.method).toBe('POST');
    expect(JSON.parse(calls[0]!.init?.body as string)).toEqual({ text: 'kup wino' });
  });

  it('fetches results by inquiry id', async () => {
    const { calls, fetchFn } = scripted(() => jsonResponse(200, { status: 'collecting' }));
    const client = new ServiceClient('', fetchFn);
    expect(await client.getResults('xyz')).toEqual({ status: 'collecting' });
    expect(calls[0]!.input).toBe('/inquiries/xyz/results');
  });

  it('posts feedback with the wire field names', async () => {
    const { calls, fetchFn } = scripted(() =>
      jsonResponse(200, { remaining: 499, retrain_started: false }));
    const client = new ServiceClient('', fetchFn);
    const body = await client.postFeedback('snip-9', 'non_criminal', 'op1');
    expect(body.remaining).toBe(499);
    expect(JSON.parse(calls[0]!.init?.body as string)).toEqual({
      snippet_id: 'snip-9', label: 'non_criminal', operator_id: 'op1',
    });
  });

  it('surfaces HTTP errors as ApiError with the status and detail', async () => {
    const { fetchFn } = scripted(() => jsonResponse(404, { detail: "unknown snippet id 'ghost'" }));
    const client = new ServiceClient('', fetchFn);
    const error = await client.postFeedback('ghost', 'criminal', 'op1').catch((e) => e);
    expect(error).toBeInstanceOf(ApiError);
    expect(error.status).toBe(404);
    expect(error.message).toContain('ghost');
  });
});
