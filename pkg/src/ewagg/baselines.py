"""Competitor denoising methods and the within-family oracle.

Soft thresholding and blockwise James--Stein operate on the DCT coefficients
of the observation.  Under the (1/n)-scaled transform the coefficient noise
is i.i.d. with variance sigma^2 / n, so that is the scale entering the SURE
objective and the shrinkage factors; the data-driven threshold scan makes the
soft-thresholding routine invariant to this choice of scale.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .risk import family_unbiased_risks
from .signals import dct_forward, dct_inverse, empirical_norm_sq

BJS_LAMBDA = 4.50524  # root of x - log x = 3, Cai's blockwise-shrinkage constant


@dataclass
class MethodResult:
    estimate: np.ndarray
    selected_params: dict = field(default_factory=dict)
    mse: float | None = None


def sure_soft_threshold_objective(coeffs: np.ndarray, noise_sd: float, thresholds: np.ndarray) -> np.ndarray:
    """SURE for soft thresholding at each threshold:
    sum_k [ s^2 - 2 s^2 1(|c_k| <= t) + min(c_k^2, t^2) ].
    """
    c2 = np.sort(coeffs * coeffs)
    n = c2.size
    cum = np.concatenate([[0.0], np.cumsum(c2)])
    t2 = thresholds * thresholds
    # number of coefficients with c_k^2 <= t^2
    below = np.searchsorted(c2, t2, side="right")
    s2 = noise_sd * noise_sd
    min_sum = cum[below] + t2 * (n - below)
    return n * s2 - 2.0 * s2 * below + min_sum


def soft_threshold_sure(Y: np.ndarray, sigma: float) -> MethodResult:
    """Soft thresholding in the DCT domain with a SURE-minimizing threshold."""
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    Y = np.asarray(Y, dtype=float)
    n = Y.size
    theta = dct_forward(Y)
    noise_sd = sigma / np.sqrt(n)
    candidates = np.concatenate([[0.0], np.abs(theta) / noise_sd])
    sure = sure_soft_threshold_objective(theta, noise_sd, candidates * noise_sd)
    best = int(np.argmin(sure))
    t = float(candidates[best])
    lam = noise_sd * t
    shrunk = np.sign(theta) * np.clip(np.abs(theta) - lam, 0.0, None)
    return MethodResult(
        estimate=dct_inverse(shrunk),
        selected_params={"threshold": t, "sure": float(sure[best])},
    )


def bjs_blocks(n: int) -> list:
    """Contiguous index blocks: N = floor(n / log n) blocks, sizes differing <= 1."""
    n_blocks = max(1, int(np.floor(n / np.log(n))))
    return np.array_split(np.arange(n), n_blocks)


def block_james_stein(Y: np.ndarray, sigma: float) -> MethodResult:
    """Blockwise James--Stein shrinkage of the DCT coefficients."""
    Y = np.asarray(Y, dtype=float)
    n = Y.size
    if n < 8:
        raise ValueError("n must be >= 8")
    theta = dct_forward(Y)
    var_c = sigma * sigma / n
    shrunk = np.empty_like(theta)
    factors = []
    for block in bjs_blocks(n):
        s2 = float(np.dot(theta[block], theta[block]))
        size = block.size
        factor = max(0.0, 1.0 - BJS_LAMBDA * size * var_c / s2) if s2 > 0 else 0.0
        shrunk[block] = factor * theta[block]
        factors.append(factor)
    return MethodResult(
        estimate=dct_inverse(shrunk), selected_params={"factors": factors}
    )


def ure_select(family, Y: np.ndarray, sigma_hat) -> MethodResult:
    """The member minimizing the unbiased risk estimate (ties: lowest index)."""
    Y = np.asarray(Y, dtype=float)
    risks = family_unbiased_risks(family, Y, sigma_hat)
    best = int(np.argmin(risks))
    member = family[best]
    return MethodResult(
        estimate=member.apply(Y),
        selected_params={"index": best, "label": member.label, "risk": float(risks[best])},
    )


def oracle_select(family, Y: np.ndarray, f: np.ndarray) -> MethodResult:
    """The member minimizing the realized squared error against the truth."""
    Y = np.asarray(Y, dtype=float)
    truth = np.asarray(getattr(f, "values", f), dtype=float)
    losses = np.array(
        [empirical_norm_sq(member.apply(Y) - truth) for member in family]
    )
    best = int(np.argmin(losses))
    member = family[best]
    return MethodResult(
        estimate=member.apply(Y),
        selected_params={"index": best, "label": member.label},
        mse=float(losses[best]),
    )
