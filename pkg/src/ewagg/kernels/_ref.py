"""Pure-numpy reference implementation of the hot per-replication kernel.

Given a family of M diagonal filters (stacked weights W, shape M x n) acting
on the coefficient vector y of an observation with i.i.d. coefficient noise,
one call produces everything a Monte Carlo replication needs:

  risks[m]   = sum_j (1 - W[m,j])^2 y_j^2 + (2 sigma2 / n) sum_j W[m,j] - sigma2
  losses[m]  = sum_j (W[m,j] y_j - theta_f[j])^2          (only if theta_f given)
  post[m]    = softmax(log_prior - n * risks / beta)
  abar[j]    = sum_m post[m] W[m,j]

The compiled twin in ``_fast`` fuses these loops; this module is the
reference the benchmark and the tests compare against.
"""

import numpy as np

BACKEND = "numpy"


def diag_family_pass(W, y, sigma2, n, beta, log_prior, theta_f=None):
    W = np.asarray(W, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    y2 = y * y
    risks = ((1.0 - W) ** 2) @ y2 + (2.0 * sigma2 / n) * W.sum(axis=1) - sigma2
    losses = None
    if theta_f is not None:
        theta_f = np.asarray(theta_f, dtype=np.float64)
        losses = (W * W) @ y2 - 2.0 * (W @ (y * theta_f)) + float(theta_f @ theta_f)
    logits = log_prior - (n / beta) * risks
    logits -= logits.max()
    post = np.exp(logits)
    post /= post.sum()
    abar = post @ W
    return risks, losses, post, abar
