"""Numpy fallback for the training hot loops. Mirrors _ckernels exactly."""

from __future__ import annotations

import numpy as np


def predict_probs(indptr: np.ndarray, indices: np.ndarray, data: np.ndarray,
                  theta: np.ndarray) -> np.ndarray:
    """Sigmoid of w.x+b per CSR row; numerically stable for |z| up to ~1e3.

    indptr may be a window of a larger batch: its values are absolute
    offsets into indices/data."""
    n = len(indptr) - 1
    window = slice(indptr[0], indptr[-1])
    contrib = data[window] * theta[indices[window]]
    row_ids = np.repeat(np.arange(n), np.diff(indptr))
    z = np.bincount(row_ids, weights=contrib, minlength=n) + theta[-1]
    probs = np.empty(n, dtype=np.float64)
    pos = z >= 0.0
    probs[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    probs[~pos] = ez / (1.0 + ez)
    return probs


def accumulate_gradient(indptr: np.ndarray, indices: np.ndarray, data: np.ndarray,
                        y: np.ndarray, sample_weight: np.ndarray,
                        probs: np.ndarray, out_grad: np.ndarray) -> None:
    """Mean weighted log-loss gradient: per sample i, w_i*(p_i-y_i)*x_i for the
    feature slots and w_i*(p_i-y_i) for the bias slot. Overwrites out_grad.
    Like predict_probs, indptr may be a window of a larger batch."""
    n = len(y)
    coef = sample_weight * (probs - y) / n
    window = slice(indptr[0], indptr[-1])
    row_ids = np.repeat(np.arange(n), np.diff(indptr))
    contrib = data[window] * coef[row_ids]
    out_grad[:-1] = np.bincount(indices[window], weights=contrib,
                                minlength=len(out_grad) - 1)
    out_grad[-1] = coef.sum()


def adam_update(theta: np.ndarray, m: np.ndarray, v: np.ndarray, grad: np.ndarray,
                t: int, lr: float, beta1: float, beta2: float, eps: float) -> None:
    """One bias-corrected Adam step in place; t is the 1-based step count."""
    m *= beta1
    m += (1.0 - beta1) * grad
    v *= beta2
    v += (1.0 - beta2) * grad * grad
    m_hat = m / (1.0 - beta1 ** t)
    v_hat = v / (1.0 - beta2 ** t)
    theta -= lr * m_hat / (np.sqrt(v_hat) + eps)
