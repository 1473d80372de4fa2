"""Exact risk of an affine estimator and its Stein-based estimates.

The three quantities, for f_hat = A Y + b and noise covariance Sigma:

  exact     ||(A - I) f + b||_n^2 + Tr(A Sigma A^T) / n
  unbiased  ||Y - f_hat||_n^2 + (2/n) Tr(Sigma_hat A) - (1/n) Tr(Sigma_hat)
  adjusted  unbiased + (1/n) Y^T (A - A^2) Y

Diagonal filters with scalar (or basis-aligned diagonal) noise take an
O(n) path; the dense path is the reference the tests compare against.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .estimators import AffineEstimator
from .signals import CovarianceEstimate, Signal, dct_forward, empirical_norm_sq


@dataclass(frozen=True)
class RiskEstimate:
    kind: str  # exact | unbiased | adjusted
    value: float

    def __post_init__(self):
        if self.kind not in ("exact", "unbiased", "adjusted"):
            raise ValueError(f"unknown risk kind {self.kind!r}")
        if self.kind == "exact" and self.value < 0:
            raise ValueError("exact risk cannot be negative")


def _as_matrix(sigma, n: int | None = None) -> np.ndarray:
    """Normalize the accepted covariance spellings to a dense matrix.

    Scalars are noise standard deviations, 1-D arrays per-coordinate
    variances, 2-D arrays full covariance matrices.
    """
    if isinstance(sigma, CovarianceEstimate):
        return sigma.matrix
    if hasattr(sigma, "covariance"):
        return sigma.covariance
    sigma = np.asarray(sigma, dtype=float)
    if sigma.ndim == 0:
        if n is None:
            raise ValueError("scalar sigma needs the problem size")
        return float(sigma) ** 2 * np.eye(n)
    if sigma.ndim == 1:
        return np.diag(sigma)
    return sigma


def _scalar_variance(sigma_mat: np.ndarray) -> float | None:
    """sigma^2 if Sigma == sigma^2 * I, else None."""
    d = np.diag(sigma_mat)
    if np.allclose(sigma_mat, np.diag(d), atol=1e-14) and np.ptp(d) <= 1e-14 * max(
        1.0, abs(d[0])
    ):
        return float(d[0])
    return None


def _trace_sigma_a(est: AffineEstimator, sigma_mat: np.ndarray) -> float:
    """Tr(Sigma A), using the diagonal fast path when both are aligned."""
    if est.is_diagonal:
        s2 = _scalar_variance(sigma_mat)
        if s2 is not None:
            return s2 * float(np.sum(est.weights))
        if est.basis == "identity":
            return float(np.dot(np.diag(sigma_mat), est.weights))
    a = est.dense_matrix()
    return float(np.einsum("ij,ji->", sigma_mat, a))


def exact_risk(est: AffineEstimator, f: Signal | np.ndarray, sigma) -> float:
    """E ||f_hat - f||_n^2 for the affine estimator, given the true covariance."""
    values = f.values if isinstance(f, Signal) else np.asarray(f, dtype=float)
    sigma_mat = _as_matrix(sigma, values.size)
    bias = empirical_norm_sq(est.apply(values) - values)
    n = values.size
    if est.is_diagonal:
        s2 = _scalar_variance(sigma_mat)
        if s2 is not None:
            return bias + s2 * float(np.sum(est.weights**2)) / n
        if est.basis == "identity":
            return bias + float(np.dot(np.diag(sigma_mat), est.weights**2)) / n
    a = est.dense_matrix()
    return bias + float(np.einsum("ij,jk,ik->", a, sigma_mat, a)) / n


def unbiased_risk(est: AffineEstimator, Y: np.ndarray, sigma_hat) -> float:
    """Stein unbiased estimate of the risk (may be negative)."""
    Y = np.asarray(Y, dtype=float)
    sigma_mat = _as_matrix(sigma_hat, Y.size)
    n = Y.size
    resid = empirical_norm_sq(Y - est.apply(Y))
    return resid + (2.0 / n) * _trace_sigma_a(est, sigma_mat) - float(
        np.trace(sigma_mat)
    ) / n


def risk_correction(est: AffineEstimator, Y: np.ndarray) -> float:
    """(1/n) Y^T (A - A^2) Y, the adjusted-risk correction term."""
    Y = np.asarray(Y, dtype=float)
    n = Y.size
    if est.is_diagonal:
        a = est.weights
        theta = Y if est.basis == "identity" else dct_forward(Y)
        # Y^T A Y = n * sum(a * theta^2) under the (1/n)-scaled transform.
        return float(np.sum((a - a * a) * theta**2))
    a = est.matrix
    ay = a @ Y
    return float(Y @ ay - Y @ (a @ ay)) / n


def adjusted_risk(est: AffineEstimator, Y: np.ndarray, sigma_hat) -> float:
    """Unbiased risk plus the quadratic correction (1/n) Y^T (A - A^2) Y."""
    return unbiased_risk(est, Y, sigma_hat) + risk_correction(est, Y)


def family_unbiased_risks(family, Y: np.ndarray, sigma_hat) -> np.ndarray:
    """Unbiased risks of every member, vectorized over common diagonal families."""
    Y = np.asarray(Y, dtype=float)
    sigma_mat = _as_matrix(sigma_hat, Y.size)
    basis = family.common_diagonal_basis()
    s2 = _scalar_variance(sigma_mat)
    if basis is not None and s2 is not None:
        n = Y.size
        theta = Y if basis == "identity" else dct_forward(Y)
        w = family.weights_matrix()
        resid = ((1.0 - w) ** 2) @ (theta**2)
        return resid + (2.0 * s2 / n) * w.sum(axis=1) - s2
    return np.array([unbiased_risk(m, Y, sigma_mat) for m in family])


def family_adjusted_risks(family, Y: np.ndarray, sigma_hat) -> np.ndarray:
    base = family_unbiased_risks(family, Y, sigma_hat)
    return base + np.array([risk_correction(m, np.asarray(Y, dtype=float)) for m in family])
