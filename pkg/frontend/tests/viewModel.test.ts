import { describe, expect, it } from 'vitest';

import type { ResultsResponse, ServiceResultItem } from '../src/types.js';
import { feedbackOutcome, formatPercent, toViewModel, toViewModels, verdictColor } from '../src/viewModel.js';

function item(overrides: Partial<ServiceResultItem> = {}): ServiceResultItem {
  return {
    id: 'snip-1', query: 'q', engine: 'fx', url: 'https://x.y/a', title: 'Result',
    snippet_text: 'some text', theme: null, p: 0.5, verdict: 'yellow',
    ...overrides,
  };
}

describe('verdict to color mapping', () => {
  it('is a bijection over the three semaphore verdicts', () => {
    const colors = ['red', 'yellow', 'green'].map(verdictColor);
    expect(colors).toEqual(['red', 'yellow', 'green']);
    expect(new Set(colors).size).toBe(3);
  });

  it('maps anything unknown to the neutral error badge', () => {
    expect(verdictColor('purple')).toBe('error');
    expect(verdictColor('')).toBe('error');
    expect(verdictColor('RED')).toBe('error'); // wire verdicts are lowercase
  });

  it('never drops an item with an unknown verdict', () => {
    const response: ResultsResponse = {
      status: 'classified',
      model_version: 'v1',
      items: [item({ verdict: 'purple', id: 'weird' })],
    };
    const models = toViewModels(response);
    expect(models).toHaveLength(1);
    expect(models[0]!.color).toBe('error');
    expect(models[0]!.id).toBe('weird');
  });
});

describe('probability rendering', () => {
  it('shows p = 0.91 as "91%"', () => {
    const model = toViewModel(item({ verdict: 'red', p: 0.91 }));
    expect(model.color).toBe('red');
    expect(model.percent).toBe('91%');
  });

  it.each([
    [0, '0%'], [1, '100%'], [0.005, '1%'], [0.499, '50%'], [0.7, '70%'],
  ])('formats %f as %s', (p, expected) => {
    expect(formatPercent(p)).toBe(expected);
  });
});

describe('served order preservation', () => {
  it('keeps the exact server order even when probabilities disagree', () => {
    const response: ResultsResponse = {
      status: 'classified',
      model_version: 'model-7',
      items: [
        item({ id: 'a', verdict: 'red', p: 0.71 }),
        item({ id: 'b', verdict: 'yellow', p: 0.95 }), // would sort first by p
        item({ id: 'c', verdict: 'green', p: 0.05 }),
      ],
    };
    const models = toViewModels(response);
    expect(models.map((m) => m.id)).toEqual(['a', 'b', 'c']);
    expect(models.map((m) => m.color)).toEqual(['red', 'yellow', 'green']);
    expect(models.every((m) => m.modelVersion === 'model-7')).toBe(true);
  });

  it('yields an empty list while the inquiry is still collecting', () => {
    expect(toViewModels({ status: 'collecting' })).toEqual([]);
  });
});

describe('feedback outcome derivation', () => {
  it('criminal on red or yellow confirms the classifier', () => {
    expect(feedbackOutcome('red', 'criminal')).toBe('confirmed');
    expect(feedbackOutcome('yellow', 'criminal')).toBe('confirmed');
  });

  it('non-criminal on red contradicts it', () => {
    expect(feedbackOutcome('red', 'non_criminal')).toBe('contradicted');
    expect(feedbackOutcome('yellow', 'non_criminal')).toBe('contradicted');
  });

  it('green agrees with non-criminal only', () => {
    expect(feedbackOutcome('green', 'non_criminal')).toBe('confirmed');
    expect(feedbackOutcome('green', 'criminal')).toBe('contradicted');
  });
});
