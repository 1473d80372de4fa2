"""EWA, SEWA and GEWA aggregation: priors, temperatures, partitions, KL.

The posterior puts weight theta(lambda) proportional to
pi(lambda) * exp(-n r_hat(lambda) / beta) on member lambda; the aggregate is
the posterior mean of the member estimates.  SEWA aggregates the symmetrized
members A + A^T - A^T A; GEWA runs one posterior per coordinate block with a
per-block temperature.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass

import numpy as np

from .estimators import AffineEstimator, EstimatorFamily
from .risk import (
    _as_matrix,
    exact_risk,
    family_adjusted_risks,
    family_unbiased_risks,
)
from .signals import (
    NoiseModel,
    Signal,
    empirical_norm_sq,
    replication_seed,
    sample_observation,
)

logger = logging.getLogger(__name__)

_NORM_TOL = 1e-12


class DegeneratePosteriorError(ValueError):
    """All prior mass sits on members with infinite risk."""


@dataclass(frozen=True)
class Prior:
    """A probability measure over the member index set."""

    weights: np.ndarray
    kind: str = "DiscreteWeighted"

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if w.ndim != 1 or w.size == 0:
            raise ValueError("prior weights must be a non-empty vector")
        if (w < 0).any():
            raise ValueError("prior weights must be nonnegative")
        total = w.sum()
        if total <= 0:
            raise ValueError("prior weights must have positive mass")
        object.__setattr__(self, "weights", w / total)

    def __len__(self) -> int:
        return self.weights.size

    @classmethod
    def uniform(cls, m: int) -> "Prior":
        return cls(weights=np.full(m, 1.0 / m), kind="DiscreteUniform")

    @classmethod
    def weighted(cls, weights) -> "Prior":
        return cls(weights=np.asarray(weights, dtype=float), kind="DiscreteWeighted")

    @classmethod
    def sparsity(cls, grid: np.ndarray, tau: float) -> "Prior":
        """Heavy-tailed product density prod_m (1 + |lambda_m / tau|^2)^{-2},
        discretized on the given grid of points (shape: npoints x M)."""
        pts = np.atleast_2d(np.asarray(grid, dtype=float))
        if tau <= 0:
            raise ValueError("tau must be positive")
        dens = np.prod(1.0 / (1.0 + (pts / tau) ** 2) ** 2, axis=1)
        return cls(weights=dens, kind="Sparsity")

    @classmethod
    def pinsker_density(
        cls, grid, n_effective: float, gamma: float | None = None
    ) -> "Prior":
        """Density 2 c(alpha) / (1 + c(alpha) w)^3 * exp(-alpha) over (alpha, w)
        grid points, with c(alpha) = n_eff^{-alpha/(2 alpha + 1)} in the
        direct problem and n_eff^{-alpha/(2 alpha + 2 gamma + 1)} in the
        mildly ill-posed one."""
        pts = np.atleast_2d(np.asarray(grid, dtype=float))
        if pts.shape[1] != 2:
            raise ValueError("grid points must be (alpha, w) pairs")
        alpha, w = pts[:, 0], pts[:, 1]
        if gamma is None:
            expo = -alpha / (2 * alpha + 1)
        else:
            expo = -alpha / (2 * alpha + 2 * gamma + 1)
        c = n_effective**expo
        dens = 2.0 * c / (1.0 + c * w) ** 3 * np.exp(-alpha)
        return cls(weights=dens, kind="PinskerDensity")


@dataclass(frozen=True)
class PosteriorWeights:
    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if abs(w.sum() - 1.0) > _NORM_TOL:
            raise ValueError("posterior weights must sum to 1")
        object.__setattr__(self, "weights", w)

    def __len__(self) -> int:
        return self.weights.size


@dataclass(frozen=True)
class BlockPartition:
    """Coordinate blocks B_j = {T_j + 1, ..., T_{j+1}} with T_1 = 0, T_{J+1} = n."""

    boundaries: tuple

    def __post_init__(self):
        t = tuple(int(x) for x in self.boundaries)
        if len(t) < 2 or t[0] != 0:
            raise ValueError("boundaries must start at 0")
        if any(b >= c for b, c in zip(t, t[1:])):
            raise ValueError("boundaries must be strictly increasing")
        object.__setattr__(self, "boundaries", t)

    @property
    def n(self) -> int:
        return self.boundaries[-1]

    @property
    def n_blocks(self) -> int:
        return len(self.boundaries) - 1

    def slices(self):
        return [
            slice(lo, hi) for lo, hi in zip(self.boundaries, self.boundaries[1:])
        ]


def strict_floor(x: float) -> int:
    """Largest integer strictly smaller than x (so strict_floor(2) == 1)."""
    return int(np.ceil(x)) - 1


def build_partition(n: int, nu: int) -> BlockPartition:
    """Weakly geometrically increasing blocks with rho = nu^{-1/3}.

    T_1 = 0, T_2 = nu, then T_j grows by the strict floor of
    nu * rho * (1 + rho)^{j-3}; the increment is kept >= 1 so that the
    blocks always partition {1, ..., n}.  The sequence stops at the first
    T_j >= n, and the final boundary is redefined to n.
    """
    if nu < 1:
        raise ValueError("nu must be a positive integer")
    if n < 2:
        raise ValueError("n must be >= 2")
    rho = float(nu) ** (-1.0 / 3.0)
    bounds = [0, nu]
    j = 3
    while bounds[-1] < n:
        step = max(1, strict_floor(nu * rho * (1.0 + rho) ** (j - 3)))
        bounds.append(bounds[-1] + step)
        j += 1
    # First boundary >= n is clamped to n.
    cut = next(i for i, t in enumerate(bounds) if t >= n)
    bounds = bounds[:cut] + [n]
    return BlockPartition(boundaries=tuple(bounds))


def min_temperature(sigma, setting: int) -> float:
    """8 |||Sigma||| under setting 1, 4 |||Sigma||| under setting 2."""
    if setting not in (1, 2):
        raise ValueError("setting must be 1 or 2")
    if np.ndim(sigma) == 0 and not hasattr(sigma, "covariance") and not hasattr(sigma, "matrix"):
        norm = float(sigma) ** 2
    else:
        mat = _as_matrix(sigma)
        norm = float(np.abs(np.linalg.eigvalsh(mat)).max()) if mat.size else 0.0
    return (8.0 if setting == 1 else 4.0) * norm


def _check_temperature(beta: float, sigma, setting: int, context: str) -> None:
    floor = min_temperature(sigma, setting)
    if beta < floor:
        warnings.warn(
            f"{context}: temperature beta={beta:g} is below the sufficient "
            f"level {floor:g} for setting {setting}; the oracle-inequality "
            "guarantee does not apply",
            RuntimeWarning,
            stacklevel=3,
        )


def ewa_weights(
    risks: np.ndarray, beta: float, prior: Prior, n: int
) -> PosteriorWeights:
    """Posterior theta_k proportional to pi_k exp(-n r_k / beta), max-shifted."""
    if beta <= 0:
        raise ValueError("beta must be positive")
    risks = np.asarray(risks, dtype=float)
    if risks.size != len(prior):
        raise ValueError("risks and prior sizes disagree")
    with np.errstate(divide="ignore"):
        log_pi = np.log(prior.weights)
    logits = np.where(np.isfinite(risks), log_pi - (n / beta) * risks, -np.inf)
    logits[prior.weights == 0] = -np.inf
    top = logits.max()
    if not np.isfinite(top):
        raise DegeneratePosteriorError(
            "all prior mass lies on members with infinite risk"
        )
    w = np.exp(logits - top)
    return PosteriorWeights(weights=w / w.sum())


def _family_risks(family, Y, sigma_hat, risk_kind: str) -> np.ndarray:
    if risk_kind == "unbiased":
        return family_unbiased_risks(family, Y, sigma_hat)
    if risk_kind == "adjusted":
        return family_adjusted_risks(family, Y, sigma_hat)
    raise ValueError(f"unknown risk kind {risk_kind!r}")


def _aggregate_members(family, Y, post: np.ndarray) -> np.ndarray:
    basis = family.common_diagonal_basis()
    if basis is not None:
        abar = post @ family.weights_matrix()
        return AffineEstimator(weights=abar, basis=basis).apply(Y)
    out = np.zeros(family.n)
    for w, member in zip(post, family):
        if w > 0:
            out += w * member.apply(Y)
    return out


def ewa_aggregate(
    family: EstimatorFamily,
    Y: np.ndarray,
    beta: float,
    prior: Prior,
    risk_kind: str = "unbiased",
    sigma_hat=None,
) -> tuple[np.ndarray, PosteriorWeights]:
    """Exponentially weighted aggregate of the family members.

    ``risk_kind`` selects the unbiased (setting-1) or adjusted (setting-2)
    risk estimate driving the weights.  A temperature below the sufficient
    level triggers a warning, not an error.
    """
    Y = np.asarray(Y, dtype=float)
    if sigma_hat is None:
        raise ValueError("sigma_hat is required")
    setting = 1 if risk_kind == "unbiased" else 2
    _check_temperature(beta, sigma_hat, setting, "ewa_aggregate")
    risks = _family_risks(family, Y, sigma_hat, risk_kind)
    post = ewa_weights(risks, beta, prior, Y.size)
    return _aggregate_members(family, Y, post.weights), post


def sewa_aggregate(
    family: EstimatorFamily,
    Y: np.ndarray,
    beta: float,
    prior: Prior,
    sigma_hat=None,
    risk_from: str = "symmetrized",
) -> tuple[np.ndarray, PosteriorWeights]:
    """EWA over the symmetrized members A + A^T - A^T A.

    The weights use the unbiased risk of the symmetrized members by default;
    ``risk_from="original"`` scores the original members instead; both
    conventions appear in the literature.
    """
    Y = np.asarray(Y, dtype=float)
    if sigma_hat is None:
        raise ValueError("sigma_hat is required")
    if risk_from not in ("symmetrized", "original"):
        raise ValueError(f"unknown risk_from {risk_from!r}")
    for member in family:
        b = member.offset()
        if b.any():
            a = member.dense_matrix()
            if np.abs(a @ b).max() > 1e-8 or np.abs(a.T @ b).max() > 1e-8:
                logger.warning(
                    "sewa_aggregate: member %r violates A b = A^T b = 0",
                    member.label,
                )
    _check_temperature(beta, sigma_hat, 2, "sewa_aggregate")
    sym_family = family.symmetrized()
    scored = sym_family if risk_from == "symmetrized" else family
    risks = family_unbiased_risks(scored, Y, sigma_hat)
    post = ewa_weights(risks, beta, prior, Y.size)
    return _aggregate_members(sym_family, Y, post.weights), post


def _block_views(est: AffineEstimator, partition: BlockPartition):
    """Per-block matrices of a block-diagonal member, or raise."""
    if est.is_diagonal and est.basis == "identity":
        return [("diag", est.weights[s]) for s in partition.slices()]
    a = est.dense_matrix()
    blocks = []
    mask = np.ones_like(a, dtype=bool)
    for s in partition.slices():
        mask[s, s] = False
    if np.abs(a[mask]).max(initial=0.0) > 1e-10:
        raise ValueError(
            f"member {est.label!r} is not block-diagonal w.r.t. the partition"
        )
    for s in partition.slices():
        blocks.append(("dense", a[s, s]))
    return blocks


def gewa_aggregate(
    family: EstimatorFamily,
    Y: np.ndarray,
    partition: BlockPartition,
    beta_vec,
    prior: Prior,
    setting: int = 1,
    sigma_hat=None,
) -> tuple[np.ndarray, list]:
    """Grouped EWA: one posterior per block, per-block temperatures.

    Members, Sigma and Sigma_hat must be block-diagonal w.r.t. the partition
    (coordinate blocks; use identity-basis diagonal filters for sequence-space
    problems).  Per-block unbiased risks keep the global 1/n normalization so
    they sum to the full unbiased risk.
    """
    Y = np.asarray(Y, dtype=float)
    n = Y.size
    if partition.n != n:
        raise ValueError("partition does not cover the observation")
    if sigma_hat is None:
        raise ValueError("sigma_hat is required")
    sigma_mat = _as_matrix(sigma_hat, n)
    beta_vec = np.broadcast_to(
        np.asarray(beta_vec, dtype=float), (partition.n_blocks,)
    )
    slices = partition.slices()
    mask = np.ones_like(sigma_mat, dtype=bool)
    for s in slices:
        mask[s, s] = False
    if np.abs(sigma_mat[mask]).max(initial=0.0) > 1e-10:
        raise ValueError("sigma_hat is not block-diagonal w.r.t. the partition")

    member_blocks = [_block_views(m, partition) for m in family]
    if setting == 2:
        agg_blocks = [
            _block_views(m, partition) for m in family.symmetrized()
        ]
    else:
        agg_blocks = member_blocks

    out = np.zeros(n)
    posteriors = []
    for j, s in enumerate(slices):
        yj = Y[s]
        sj = sigma_mat[s, s]
        _check_temperature(beta_vec[j], sj, setting, f"gewa_aggregate block {j}")
        tr_sj = float(np.trace(sj))
        risks = np.empty(len(family))
        for k, blocks in enumerate(member_blocks):
            kind, aj = blocks[j]
            if kind == "diag":
                fj = aj * yj
                tr_sa = float(np.dot(np.diag(sj), aj))
            else:
                fj = aj @ yj
                tr_sa = float(np.einsum("ij,ji->", sj, aj))
            resid = yj - fj
            risks[k] = (resid @ resid + 2.0 * tr_sa - tr_sj) / n
        post = ewa_weights(risks, beta_vec[j], prior, n)
        posteriors.append(post)
        block_out = np.zeros(yj.size)
        for k, blocks in enumerate(agg_blocks):
            w = post.weights[k]
            if w == 0:
                continue
            kind, aj = blocks[j]
            block_out += w * (aj * yj if kind == "diag" else aj @ yj)
        out[s] = block_out
    return out, posteriors


def kl_divergence(p, q) -> float:
    """KL(p, q) over a common index set; +inf when p charges a q-null atom."""
    pw = p.weights if hasattr(p, "weights") else np.asarray(p, dtype=float)
    qw = q.weights if hasattr(q, "weights") else np.asarray(q, dtype=float)
    if pw.size != qw.size:
        raise ValueError("supports disagree")
    live = pw > 0
    if (qw[live] == 0).any():
        return float("inf")
    return float(np.sum(pw[live] * np.log(pw[live] / qw[live])))


@dataclass(frozen=True)
class OracleBoundReport:
    lhs: float
    lhs_se: float
    rhs: float
    margin: float
    passed: bool
    verified_regime: bool
    n_mc: int


def oracle_bound_check(
    family: EstimatorFamily,
    f: Signal,
    noise: NoiseModel,
    beta: float,
    prior: Prior,
    n_mc: int,
    base_seed: int = 0,
    risk_kind: str = "unbiased",
) -> OracleBoundReport:
    """Monte Carlo check of the discrete oracle inequality.

    LHS: empirical mean of ||f_EWA - f||_n^2 over n_mc replications.
    RHS: min over supported members of exact risk + beta log(1/pi_l) / n.
    """
    values = f.values if isinstance(f, Signal) else np.asarray(f, dtype=float)
    n = values.size
    setting = 1 if risk_kind == "unbiased" else 2
    verified = beta >= min_temperature(noise, setting)
    sigma_hat = noise.covariance

    losses = np.empty(n_mc)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        for r in range(n_mc):
            Y = sample_observation(values, noise, replication_seed(base_seed, r))
            est, _ = ewa_aggregate(family, Y, beta, prior, risk_kind, sigma_hat)
            losses[r] = empirical_norm_sq(est - values)
    lhs = float(losses.mean())
    lhs_se = float(losses.std(ddof=1) / np.sqrt(n_mc)) if n_mc > 1 else 0.0

    rhs = np.inf
    for k, member in enumerate(family):
        pi_k = prior.weights[k]
        if pi_k == 0:
            continue
        rhs = min(rhs, exact_risk(member, values, noise) + beta * np.log(1 / pi_k) / n)
    return OracleBoundReport(
        lhs=lhs,
        lhs_se=lhs_se,
        rhs=float(rhs),
        margin=float(rhs - lhs),
        passed=lhs <= rhs + 3 * lhs_se,
        verified_regime=verified,
        n_mc=n_mc,
    )
