# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled Gibbs sweep kernels.

Arithmetic (expression order, operand types) mirrors ``_gibbs_py.py``
exactly; see that module for the contract. Keep the two in lockstep.
"""

import numpy as np

cimport numpy as cnp


def fit_sweep(cnp.int64_t[::1] word_ids, cnp.int64_t[::1] doc_of, cnp.int64_t[::1] z,
              cnp.int64_t[:, ::1] n_dk, cnp.int64_t[:, ::1] n_kw, cnp.int64_t[::1] n_k,
              double alpha, double beta, double[::1] uniforms):
    """One collapsed-Gibbs pass over all tokens; counts updated in place."""
    cdef Py_ssize_t n_tokens = word_ids.shape[0]
    cdef Py_ssize_t topics = n_kw.shape[0]
    cdef double vbeta = n_kw.shape[1] * beta
    cdef double[::1] weights = np.empty(topics, dtype=np.float64)
    cdef Py_ssize_t t, k, k_new
    cdef cnp.int64_t w, d, k_old
    cdef double total, threshold, acc, wt

    for t in range(n_tokens):
        w = word_ids[t]
        d = doc_of[t]
        k_old = z[t]
        n_dk[d, k_old] -= 1
        n_kw[k_old, w] -= 1
        n_k[k_old] -= 1

        total = 0.0
        for k in range(topics):
            wt = (n_dk[d, k] + alpha) * (n_kw[k, w] + beta) / (n_k[k] + vbeta)
            weights[k] = wt
            total += wt
        threshold = uniforms[t] * total
        acc = 0.0
        k_new = topics - 1
        for k in range(topics):
            acc += weights[k]
            if acc > threshold:
                k_new = k
                break

        n_dk[d, k_new] += 1
        n_kw[k_new, w] += 1
        n_k[k_new] += 1
        z[t] = k_new


def infer_sweep(cnp.int64_t[::1] word_ids, cnp.int64_t[::1] z, cnp.int64_t[::1] c_k,
                double[:, ::1] phi, double alpha, double[::1] uniforms):
    """One Gibbs pass for a single document with topic-word rows held fixed."""
    cdef Py_ssize_t n_tokens = word_ids.shape[0]
    cdef Py_ssize_t topics = phi.shape[0]
    cdef double[::1] weights = np.empty(topics, dtype=np.float64)
    cdef Py_ssize_t t, k, k_new
    cdef cnp.int64_t w, k_old
    cdef double total, threshold, acc, wt

    for t in range(n_tokens):
        w = word_ids[t]
        k_old = z[t]
        c_k[k_old] -= 1

        total = 0.0
        for k in range(topics):
            wt = (c_k[k] + alpha) * phi[k, w]
            weights[k] = wt
            total += wt
        threshold = uniforms[t] * total
        acc = 0.0
        k_new = topics - 1
        for k in range(topics):
            acc += weights[k]
            if acc > threshold:
                k_new = k
                break

        c_k[k_new] += 1
        z[t] = k_new
