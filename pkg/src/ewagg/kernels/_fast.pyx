# cython: boundscheck=False, wraparound=False, cdivision=True
"""Fused C implementation of the per-replication diagonal-family kernel.

Single pass over the M x n weight table: member risks, realized losses,
posterior weights and the aggregated filter, without M x n temporaries.
Semantics identical to ewagg.kernels._ref.diag_family_pass.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport exp

cnp.import_array()

BACKEND = "cython"


def diag_family_pass(W, y, double sigma2, double n_samples, double beta,
                     log_prior, theta_f=None):
    cdef cnp.ndarray[cnp.float64_t, ndim=2] w = np.ascontiguousarray(W, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] yv = np.ascontiguousarray(y, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] lp = np.ascontiguousarray(log_prior, dtype=np.float64)
    cdef Py_ssize_t m = w.shape[0]
    cdef Py_ssize_t n = w.shape[1]
    cdef bint want_losses = theta_f is not None
    cdef cnp.ndarray[cnp.float64_t, ndim=1] tf
    if want_losses:
        tf = np.ascontiguousarray(theta_f, dtype=np.float64)
    else:
        tf = np.zeros(0)

    cdef cnp.ndarray[cnp.float64_t, ndim=1] risks = np.empty(m)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] losses = np.empty(m if want_losses else 0)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] post = np.empty(m)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] abar = np.zeros(n)

    cdef Py_ssize_t i, j
    cdef double resid, wsum, loss, d, a, tf2 = 0.0
    if want_losses:
        for j in range(n):
            tf2 += tf[j] * tf[j]

    for i in range(m):
        resid = 0.0
        wsum = 0.0
        loss = 0.0
        if want_losses:
            for j in range(n):
                a = w[i, j]
                d = (1.0 - a) * yv[j]
                resid += d * d
                wsum += a
                loss += a * yv[j] * (a * yv[j] - 2.0 * tf[j])
            losses[i] = loss + tf2
        else:
            for j in range(n):
                a = w[i, j]
                d = (1.0 - a) * yv[j]
                resid += d * d
                wsum += a
        risks[i] = resid + (2.0 * sigma2 / n_samples) * wsum - sigma2

    cdef double shift = lp[0] - (n_samples / beta) * risks[0]
    cdef double logit, total = 0.0
    for i in range(m):
        logit = lp[i] - (n_samples / beta) * risks[i]
        if logit > shift:
            shift = logit
    for i in range(m):
        post[i] = exp(lp[i] - (n_samples / beta) * risks[i] - shift)
        total += post[i]
    for i in range(m):
        post[i] /= total
        for j in range(n):
            abar[j] += post[i] * w[i, j]

    return risks, (losses if want_losses else None), post, abar
