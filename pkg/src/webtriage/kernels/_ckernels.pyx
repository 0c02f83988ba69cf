# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled training hot loops. Mirrors _pykernels exactly; see the package
docstring for the contract."""

from libc.math cimport exp, pow, sqrt
from libc.stdint cimport int64_t

import numpy as np


cdef inline double _sigmoid(double z) nogil:
    cdef double e
    if z >= 0.0:
        return 1.0 / (1.0 + exp(-z))
    e = exp(z)
    return e / (1.0 + e)


def predict_probs(const int64_t[::1] indptr, const int64_t[::1] indices,
                  const double[::1] data, const double[::1] theta):
    cdef Py_ssize_t n = indptr.shape[0] - 1
    cdef Py_ssize_t bias_slot = theta.shape[0] - 1
    out_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef Py_ssize_t i
    cdef int64_t k
    cdef double z
    with nogil:
        for i in range(n):
            z = theta[bias_slot]
            for k in range(indptr[i], indptr[i + 1]):
                z += data[k] * theta[indices[k]]
            out[i] = _sigmoid(z)
    return out_arr


def accumulate_gradient(const int64_t[::1] indptr, const int64_t[::1] indices,
                        const double[::1] data, const double[::1] y,
                        const double[::1] sample_weight, const double[::1] probs,
                        double[::1] out_grad):
    cdef Py_ssize_t n = y.shape[0]
    cdef Py_ssize_t bias_slot = out_grad.shape[0] - 1
    cdef Py_ssize_t i, j
    cdef int64_t k
    cdef double coef, bias_grad = 0.0
    with nogil:
        for j in range(out_grad.shape[0]):
            out_grad[j] = 0.0
        for i in range(n):
            coef = sample_weight[i] * (probs[i] - y[i]) / n
            for k in range(indptr[i], indptr[i + 1]):
                out_grad[indices[k]] += coef * data[k]
            bias_grad += coef
        out_grad[bias_slot] = bias_grad


def adam_update(double[::1] theta, double[::1] m, double[::1] v,
                const double[::1] grad, int t, double lr,
                double beta1, double beta2, double eps):
    cdef Py_ssize_t j
    cdef double bc1 = 1.0 - pow(beta1, t)
    cdef double bc2 = 1.0 - pow(beta2, t)
    cdef double g
    with nogil:
        for j in range(theta.shape[0]):
            g = grad[j]
            m[j] = beta1 * m[j] + (1.0 - beta1) * g
            v[j] = beta2 * v[j] + (1.0 - beta2) * g * g
            theta[j] -= lr * (m[j] / bc1) / (sqrt(v[j] / bc2) + eps)
