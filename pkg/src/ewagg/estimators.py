"""Affine estimators f_hat = A Y + b, filter families and hypothesis validators.

Diagonal filters store only the n filter weights plus a basis tag; the dense
matrix is materialized only for cross-validation tests and validators.  In the
``dct`` basis the dense form is A = O^T diag(a) O with O the *orthonormal* DCT
matrix (O = sqrt(n) D for the D of :mod:`ewagg.signals`), so the filter weights
are exactly the eigenvalues of A.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .signals import dct_forward, dct_inverse, dct_matrix

VALIDATOR_TOL = 1e-8


@dataclass(frozen=True)
class AffineEstimator:
    """f_hat = A Y + b, stored dense or as a diagonal filter in a named basis."""

    matrix: np.ndarray | None = None
    weights: np.ndarray | None = None
    basis: str = "identity"
    b: np.ndarray | None = None
    label: str = ""

    def __post_init__(self):
        if (self.matrix is None) == (self.weights is None):
            raise ValueError("provide exactly one of matrix / weights")
        if self.matrix is not None:
            m = np.asarray(self.matrix, dtype=float)
            if m.ndim != 2 or m.shape[0] != m.shape[1]:
                raise ValueError("matrix must be square")
            object.__setattr__(self, "matrix", m)
        else:
            w = np.asarray(self.weights, dtype=float)
            if w.ndim != 1:
                raise ValueError("weights must be a vector")
            object.__setattr__(self, "weights", w)
        if self.basis not in ("identity", "dct"):
            raise ValueError(f"unknown basis {self.basis!r}")
        if self.b is not None:
            object.__setattr__(self, "b", np.asarray(self.b, dtype=float))

    @property
    def n(self) -> int:
        return self.matrix.shape[0] if self.matrix is not None else self.weights.size

    @property
    def is_diagonal(self) -> bool:
        return self.weights is not None

    def offset(self) -> np.ndarray:
        return self.b if self.b is not None else np.zeros(self.n)

    def apply(self, Y: np.ndarray) -> np.ndarray:
        """A Y + b (diagonal form never materializes A)."""
        Y = np.asarray(Y, dtype=float)
        if Y.size != self.n:
            raise ValueError("dimension mismatch")
        if self.matrix is not None:
            out = self.matrix @ Y
        elif self.basis == "identity":
            out = self.weights * Y
        else:
            out = dct_inverse(self.weights * dct_forward(Y))
        if self.b is not None:
            out = out + self.b
        return out

    def dense_matrix(self) -> np.ndarray:
        """Dense expansion of A (for tests and validators)."""
        if self.matrix is not None:
            return self.matrix
        if self.basis == "identity":
            return np.diag(self.weights)
        o = np.sqrt(self.n) * dct_matrix(self.n)
        return o.T @ (self.weights[:, None] * o)

    def symmetrized(self) -> "AffineEstimator":
        """A~ = A + A^T - A^T A, same offset.  A~ is symmetric and A~ <= I."""
        if self.is_diagonal:
            a = self.weights
            return AffineEstimator(
                weights=2 * a - a * a, basis=self.basis, b=self.b,
                label=self.label + "~",
            )
        a = self.matrix
        return AffineEstimator(
            matrix=a + a.T - a.T @ a, b=self.b, label=self.label + "~"
        )


def apply(est: AffineEstimator, Y: np.ndarray) -> np.ndarray:
    return est.apply(Y)


def symmetrize(est: AffineEstimator) -> AffineEstimator:
    return est.symmetrized()


@dataclass(frozen=True)
class EstimatorFamily:
    """An ordered, non-empty family of constituent estimators."""

    members: tuple
    index_descriptor: tuple = ()

    def __post_init__(self):
        members = tuple(self.members)
        if not members:
            raise ValueError("family must be non-empty")
        n = members[0].n
        if any(m.n != n for m in members):
            raise ValueError("all members must share n")
        object.__setattr__(self, "members", members)
        desc = tuple(self.index_descriptor) or tuple(m.label for m in members)
        object.__setattr__(self, "index_descriptor", desc)

    def __len__(self) -> int:
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    def __getitem__(self, i: int) -> AffineEstimator:
        return self.members[i]

    @property
    def n(self) -> int:
        return self.members[0].n

    def common_diagonal_basis(self) -> str | None:
        """The shared basis if every member is a zero-offset diagonal filter."""
        bases = {m.basis for m in self.members}
        if len(bases) == 1 and all(
            m.is_diagonal and (m.b is None or not m.b.any()) for m in self.members
        ):
            return bases.pop()
        return None

    def weights_matrix(self) -> np.ndarray:
        """Stacked filter weights, shape (M, n).  Requires a common diagonal basis."""
        if self.common_diagonal_basis() is None:
            raise ValueError("family is not diagonal in a common basis")
        return np.stack([m.weights for m in self.members])

    def symmetrized(self) -> "EstimatorFamily":
        return EstimatorFamily(
            members=tuple(m.symmetrized() for m in self.members),
            index_descriptor=self.index_descriptor,
        )


def geometric_grid(lo: float, hi: float, num: int) -> np.ndarray:
    return np.geomspace(lo, hi, num)


def pinsker_filter(n: int, alpha: float, w: float) -> AffineEstimator:
    """Diagonal filter a_k = (1 - k^alpha / w)_+ in the dct basis."""
    k = np.arange(1, n + 1)
    # large alpha overflows k**alpha to inf; the clip maps that to 0 as wanted
    with np.errstate(over="ignore"):
        a = np.clip(1.0 - k**alpha / w, 0.0, None)
    return AffineEstimator(weights=a, basis="dct", label=f"pinsker(a={alpha:g},w={w:g})")


def pinsker_family(
    n: int,
    alpha_grid: np.ndarray | None = None,
    w_grid: np.ndarray | None = None,
) -> EstimatorFamily:
    """Pinsker filters over a grid of (alpha, w).

    Defaults: 30-point geometric grids, alpha in [0.1, 100] and w in [1, n].
    """
    if alpha_grid is None:
        alpha_grid = geometric_grid(0.1, 100.0, 30)
    if w_grid is None:
        w_grid = geometric_grid(1.0, float(n), 30)
    alpha_grid = np.asarray(alpha_grid, dtype=float)
    w_grid = np.asarray(w_grid, dtype=float)
    if alpha_grid.size == 0 or w_grid.size == 0:
        raise ValueError("grids must be non-empty")
    if (alpha_grid <= 0).any() or (w_grid <= 0).any():
        raise ValueError("grids must be positive")
    pairs = list(itertools.product(alpha_grid, w_grid))
    members = tuple(pinsker_filter(n, a, w) for a, w in pairs)
    return EstimatorFamily(members=members, index_descriptor=tuple(pairs))


def spectral_cutoff(n: int, k: int) -> AffineEstimator:
    """Ordered projection a_j = 1_(j <= k)."""
    if not 1 <= k <= n:
        raise ValueError(f"k must be in 1..{n}, got {k}")
    a = (np.arange(1, n + 1) <= k).astype(float)
    return AffineEstimator(weights=a, basis="dct", label=f"cutoff(k={k})")


def block_projection(n: int, boundaries, bits) -> AffineEstimator:
    """Block projection: keep coefficients below the first boundary, then keep
    block j iff bits[j] is set.

    ``boundaries`` are increasing indices w_1 < ... < w_m <= n; block j spans
    coefficients (w_j, w_{j+1}] and the last block extends to n.
    """
    boundaries = list(boundaries)
    bits = list(bits)
    if not boundaries or boundaries != sorted(set(boundaries)):
        raise ValueError("boundaries must be non-empty and strictly increasing")
    if boundaries[0] < 1 or boundaries[-1] > n:
        raise ValueError("boundaries out of range")
    if len(bits) != len(boundaries):
        raise ValueError("need one bit per block")
    edges = boundaries + [n]
    a = np.zeros(n)
    a[: boundaries[0]] = 1.0
    for j, bit in enumerate(bits):
        if bit:
            a[edges[j] : edges[j + 1]] = 1.0
    return AffineEstimator(weights=a, basis="dct", label=f"blockproj({bits})")


def tikhonov_philipps(n: int, w: float, alpha: float) -> AffineEstimator:
    """Tikhonov--Philipps filter a_k = 1 / (1 + (k/w)^alpha)."""
    if w <= 0 or alpha <= 0:
        raise ValueError("w and alpha must be positive")
    k = np.arange(1, n + 1)
    a = 1.0 / (1.0 + (k / w) ** alpha)
    return AffineEstimator(weights=a, basis="dct", label=f"tikhonov(w={w:g},a={alpha:g})")


def kernel_ridge(K: np.ndarray, lam: float) -> AffineEstimator:
    """A = K (K + n*lam*I)^{-1} with b = 0."""
    K = np.asarray(K, dtype=float)
    n = K.shape[0]
    if lam <= 0:
        raise ValueError("lam must be positive")
    A = np.linalg.solve((K + n * lam * np.eye(n)).T, K.T).T
    return AffineEstimator(matrix=A, label=f"ridge(lam={lam:g})")


def moving_average(adjacency) -> AffineEstimator:
    """Row-stochastic neighborhood average a_ij = 1_{V_i}(j) / |V_i|."""
    n = len(adjacency)
    A = np.zeros((n, n))
    for i, neigh in enumerate(adjacency):
        neigh = list(neigh)
        if not neigh:
            raise ValueError(f"empty neighborhood at node {i}")
        A[i, neigh] = 1.0 / len(neigh)
    return AffineEstimator(matrix=A, label="moving-average")


def two_block_shrinkage_family(n: int, a_grid, b_grid, k_grid) -> EstimatorFamily:
    """Two-level shrinkage a*1(i<=k) + b*1(i>k) over a grid of (a, b, k)."""
    idx = np.arange(1, n + 1)
    members = []
    descriptor = []
    for a, b, k in itertools.product(a_grid, b_grid, k_grid):
        w = np.where(idx <= k, float(a), float(b))
        members.append(
            AffineEstimator(weights=w, basis="dct", label=f"2block(a={a:g},b={b:g},k={k})")
        )
        descriptor.append((float(a), float(b), int(k)))
    return EstimatorFamily(members=tuple(members), index_descriptor=tuple(descriptor))


@dataclass(frozen=True)
class ValidationReport:
    """Boolean verdict with the worst violation magnitudes, never raised."""

    passed: bool
    worst: dict = field(default_factory=dict)
    per_member: tuple = ()

    def __bool__(self) -> bool:
        return self.passed


def _spectral_norm(m: np.ndarray) -> float:
    return float(np.linalg.norm(m, 2))


def validate_setting1(family: EstimatorFamily, sigma: np.ndarray) -> ValidationReport:
    """Checks for the commuting-family hypothesis: symmetric A, pairwise
    commutation, A Sigma + Sigma A >= 0, and b = 0."""
    sigma = np.asarray(sigma, dtype=float)
    if sigma.ndim == 1:
        sigma = np.diag(sigma)
    mats = [m.dense_matrix() for m in family]
    worst_comm = 0.0
    # Diagonal filters in a common basis commute by construction.
    if family.common_diagonal_basis() is None:
        for a, b in itertools.combinations(mats, 2):
            worst_comm = max(worst_comm, _spectral_norm(a @ b - b @ a))
    worst_asym = max(_spectral_norm(a - a.T) for a in mats)
    worst_eig = min(
        float(np.linalg.eigvalsh(a @ sigma + sigma @ a).min()) for a in mats
    )
    worst_offset = max(float(np.abs(m.offset()).max()) for m in family)
    passed = (
        worst_comm <= VALIDATOR_TOL
        and worst_asym <= VALIDATOR_TOL
        and worst_eig >= -VALIDATOR_TOL
        and worst_offset <= VALIDATOR_TOL
    )
    return ValidationReport(
        passed=passed,
        worst={
            "commutator_norm": worst_comm,
            "asymmetry_norm": worst_asym,
            "min_eigenvalue_A_Sigma": worst_eig,
            "max_offset": worst_offset,
        },
    )


def validate_setting2(family: EstimatorFamily) -> ValidationReport:
    """Checks A <= I and A b = 0 for every member."""
    per_member = []
    for m in family:
        a = m.dense_matrix()
        sym = 0.5 * (a + a.T)
        excess = float(np.linalg.eigvalsh(sym).max()) - 1.0
        ab = float(np.abs(a @ m.offset()).max())
        per_member.append({"eigenvalue_excess": excess, "A_b_norm": ab})
    worst_excess = max(d["eigenvalue_excess"] for d in per_member)
    worst_ab = max(d["A_b_norm"] for d in per_member)
    passed = worst_excess <= VALIDATOR_TOL and worst_ab <= VALIDATOR_TOL
    return ValidationReport(
        passed=passed,
        worst={"eigenvalue_excess": worst_excess, "A_b_norm": worst_ab},
        per_member=tuple(per_member),
    )


def check_condition_C(family: EstimatorFamily, sigma_hat: np.ndarray) -> ValidationReport:
    """Trace condition Tr(Sigma_hat A) <= Tr(Sigma_hat A^T A) per member."""
    sigma_hat = np.asarray(sigma_hat, dtype=float)
    if sigma_hat.ndim == 1:
        sigma_hat = np.diag(sigma_hat)
    gaps = []
    for m in family:
        a = m.dense_matrix()
        gaps.append(float(np.trace(sigma_hat @ a) - np.trace(sigma_hat @ a.T @ a)))
    worst = max(gaps)
    return ValidationReport(
        passed=worst <= VALIDATOR_TOL,
        worst={"trace_gap": worst},
        per_member=tuple(gaps),
    )


def nearly_idempotent_defect(family: EstimatorFamily) -> float:
    """max over members of Tr(A - A^2), the near-idempotence defect."""
    worst = -np.inf
    for m in family:
        if m.is_diagonal:
            a = m.weights
            worst = max(worst, float(np.sum(a - a * a)))
        else:
            a = m.matrix
            worst = max(worst, float(np.trace(a - a @ a)))
    return worst
