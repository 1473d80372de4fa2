"""Test signals, the orthogonal transform convention, noise synthesis and norms.

The transform used throughout is a DCT-II scaled so that the forward matrix D
satisfies D D^T = D^T D = (1/n) I.  With this convention the coefficient
vector of v has squared Euclidean norm equal to the empirical norm
``(1/n) sum v_i**2`` of v, so losses can be computed in either domain.

Test signal formulas follow the classical WaveLab ``MakeSignal`` definitions
(Blocks, Doppler, HeaviSine, Ramp, Piece-Regular, Piece-Polynomial), sampled
at t_i = i/n and normalized to unit empirical norm.  Step discontinuities are
realized with the right-continuous indicator ``t >= t0`` so that piecewise
constant signals take at most one value per plateau even when a breakpoint
falls exactly on the grid.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.fft

SIGNAL_NAMES = (
    "Blocks",
    "Doppler",
    "HeaviSine",
    "Ramp",
    "PieceRegular",
    "PiecePolynomial",
)

_SYM_TOL = 1e-12
_EIG_TOL = 1e-10


def empirical_norm_sq(v: np.ndarray) -> float:
    """(1/n) * sum(v_i^2)."""
    v = np.asarray(v, dtype=float)
    return float(np.dot(v, v) / v.size)


def dct_forward(v: np.ndarray) -> np.ndarray:
    """Coefficients theta = D v with D D^T = (1/n) I.

    Parseval under this scaling: ||theta||_2^2 == empirical_norm_sq(v).
    """
    v = np.asarray(v, dtype=float)
    return scipy.fft.dct(v, type=2, norm="ortho") / np.sqrt(v.size)


def dct_inverse(theta: np.ndarray) -> np.ndarray:
    """Exact left inverse of :func:`dct_forward`."""
    theta = np.asarray(theta, dtype=float)
    return scipy.fft.idct(theta * np.sqrt(theta.size), type=2, norm="ortho")


def dct_matrix(n: int) -> np.ndarray:
    """Dense forward-transform matrix D (rows are scaled DCT-II basis vectors)."""
    return scipy.fft.dct(np.eye(n), type=2, norm="ortho", axis=0) / np.sqrt(n)


@dataclass(frozen=True)
class Signal:
    """A sampled ground-truth signal with unit empirical norm."""

    values: np.ndarray
    name: str

    def __post_init__(self):
        object.__setattr__(self, "values", np.asarray(self.values, dtype=float))

    @property
    def n(self) -> int:
        return self.values.size


def _grid(n: int) -> np.ndarray:
    return np.arange(1, n + 1) / n


def _bumps(t: np.ndarray) -> np.ndarray:
    pos = [0.1, 0.13, 0.15, 0.23, 0.25, 0.4, 0.44, 0.65, 0.76, 0.78, 0.81]
    hgt = [4, 5, 3, 4, 5, 4.2, 2.1, 4.3, 3.1, 5.1, 4.2]
    wth = [0.005, 0.005, 0.006, 0.01, 0.01, 0.03, 0.01, 0.01, 0.005, 0.008, 0.005]
    f = np.zeros_like(t)
    for p, h, w in zip(pos, hgt, wth):
        f += h / (1 + np.abs((t - p) / w)) ** 4
    return f


def _blocks(t: np.ndarray) -> np.ndarray:
    pos = [0.1, 0.13, 0.15, 0.23, 0.25, 0.4, 0.44, 0.65, 0.76, 0.78, 0.81]
    hgt = [4, -5, 3, -4, 5, -4.2, 2.1, 4.3, -3.1, 2.1, -4.2]
    f = np.zeros_like(t)
    for p, h in zip(pos, hgt):
        f += h * (t >= p)
    return f


def _heavisine(t: np.ndarray) -> np.ndarray:
    return 4 * np.sin(4 * np.pi * t) - np.sign(t - 0.3) - np.sign(0.72 - t)


def _doppler(t: np.ndarray) -> np.ndarray:
    return np.sqrt(t * (1 - t)) * np.sin(2 * np.pi * 1.05 / (t + 0.05))


def _ramp(t: np.ndarray) -> np.ndarray:
    return t - (t >= 0.37)


def _piece_regular(t: np.ndarray) -> np.ndarray:
    n = t.size
    f = np.zeros(n)
    n_12 = int(np.fix(n / 12))
    n_7 = int(np.fix(n / 7))
    n_5 = int(np.fix(n / 5))
    n_3 = int(np.fix(n / 3))
    n_2 = int(np.fix(n / 2))
    n_20 = int(np.fix(n / 20))
    f1 = -15 * _bumps(t)
    tt = np.arange(1, n_12 + 1) / n_12
    f2 = -np.exp(4 * tt)
    tt = np.arange(1, n_7 + 1) / n_7
    f5 = np.exp(4 * tt) - np.exp(4)
    tt = np.arange(1, n_3 + 1) / n_3
    fma = 6 / 40
    f6 = -70 * np.exp(-((tt - 0.5) ** 2) / (2 * fma**2))
    f[:n_7] = f6[:n_7]
    f[n_7:n_5] = 0.5 * f6[n_7:n_5]
    f[n_5:n_3] = f6[n_5:n_3]
    f[n_3:n_2] = f1[n_3:n_2]
    f[n_2 : n_2 + n_12] = f2
    f[n_2 + 2 * n_12 - 1 : n_2 + n_12 - 1 : -1] = f2
    f[n_2 + 2 * n_12 + n_20 : n_2 + 2 * n_12 + 3 * n_20] = -25.0
    k = n_2 + 2 * n_12 + 3 * n_20
    f[k : k + n_7] = f5
    diff = n - 5 * n_5
    f[5 * n_5 : n] = f[diff - 1 :: -1]
    return np.sum(f) / n - f


def _piece_polynomial(t: np.ndarray) -> np.ndarray:
    n = t.size
    f = np.zeros(n)
    n_5 = int(np.fix(n / 5))
    n_10 = int(np.fix(n / 10))
    n_20 = int(np.fix(n / 20))
    tt = np.arange(1, n_5 + 1) / n_5
    f1 = 20 * (tt**3 + tt**2 + 4)
    f3 = 40 * (2 * tt**3 + tt) + 100
    f2 = 10 * tt**3 + 45
    f4 = 16 * tt**2 + 8 * tt + 16
    f5 = 20 * (tt + 4)
    f[:n_5] = f1
    f[2 * n_5 - 1 : n_5 - 1 : -1] = f2
    f[2 * n_5 : 3 * n_5] = f3
    f[3 * n_5 : 4 * n_5] = f4
    f[4 * n_5 : 5 * n_5] = f5[n_5::-1][: n_5]
    diff = n - 5 * n_5
    f[5 * n_5 : n] = f[diff - 1 :: -1]
    f[n_20 : n_20 + n_10] = 10.0
    f[n - n_10 : n + n_20 - n_10] = 150.0
    return f - np.sum(f) / n


_GENERATORS = {
    "blocks": _blocks,
    "doppler": _doppler,
    "heavisine": _heavisine,
    "ramp": _ramp,
    "pieceregular": _piece_regular,
    "piece-regular": _piece_regular,
    "piecepolynomial": _piece_polynomial,
    "piece-polynomial": _piece_polynomial,
}


def make_test_signal(name: str, n: int, smooth: bool = False) -> Signal:
    """Standard Donoho--Johnstone test signal, normalized to ||f||_n = 1.

    With ``smooth`` set, the discrete antiderivative (cumulative sum times
    1/n) is taken before normalization.
    """
    if n < 8:
        raise ValueError(f"n must be >= 8, got {n}")
    key = name.lower()
    if key not in _GENERATORS:
        raise ValueError(f"unknown signal name {name!r}; choose from {SIGNAL_NAMES}")
    f = _GENERATORS[key](_grid(n))
    if smooth:
        f = np.cumsum(f) / n
    norm = np.sqrt(empirical_norm_sq(f))
    if norm == 0:
        raise ValueError(f"signal {name!r} is identically zero at n={n}")
    return Signal(values=f / norm, name=name + ("-smooth" if smooth else ""))


@dataclass(frozen=True)
class NoiseModel:
    """Centered Gaussian noise with covariance Sigma (diagonal fast path)."""

    covariance: np.ndarray
    spectral_norm_bound: float = 0.0
    diagonal: np.ndarray | None = field(default=None)

    def __post_init__(self):
        cov = np.asarray(self.covariance, dtype=float)
        if cov.ndim != 2 or cov.shape[0] != cov.shape[1]:
            raise ValueError("covariance must be a square matrix")
        if np.max(np.abs(cov - cov.T), initial=0.0) > _SYM_TOL:
            raise ValueError("covariance must be symmetric")
        evals = np.linalg.eigvalsh(cov)
        if evals.min() < -_EIG_TOL:
            raise ValueError(f"covariance has negative eigenvalue {evals.min():g}")
        object.__setattr__(self, "covariance", cov)
        bound = max(self.spectral_norm_bound, float(evals.max()))
        object.__setattr__(self, "spectral_norm_bound", bound)
        off = cov - np.diag(np.diag(cov))
        if np.max(np.abs(off), initial=0.0) <= _SYM_TOL:
            object.__setattr__(self, "diagonal", np.clip(np.diag(cov), 0.0, None))

    @classmethod
    def iid(cls, sigma: float, n: int) -> "NoiseModel":
        return cls(covariance=sigma**2 * np.eye(n))

    @classmethod
    def from_diagonal(cls, variances: np.ndarray) -> "NoiseModel":
        return cls(covariance=np.diag(np.asarray(variances, dtype=float)))

    @property
    def n(self) -> int:
        return self.covariance.shape[0]

    @property
    def spectral_norm(self) -> float:
        return float(np.linalg.eigvalsh(self.covariance).max())

    def sqrt_apply(self, z: np.ndarray) -> np.ndarray:
        """Sigma^{1/2} z."""
        if self.diagonal is not None:
            return np.sqrt(self.diagonal) * z
        evals, vecs = np.linalg.eigh(self.covariance)
        evals = np.clip(evals, 0.0, None)
        return vecs @ (np.sqrt(evals) * (vecs.T @ z))


@dataclass(frozen=True)
class CovarianceEstimate:
    """An (unbiased) estimate of the noise covariance matrix."""

    matrix: np.ndarray
    provenance: str = "exact"

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("matrix must be square")
        if np.max(np.abs(m - m.T), initial=0.0) > _SYM_TOL:
            raise ValueError("matrix must be symmetric")
        object.__setattr__(self, "matrix", m)

    @classmethod
    def exact(cls, noise: NoiseModel) -> "CovarianceEstimate":
        return cls(matrix=noise.covariance, provenance="exact")

    @classmethod
    def replicate_averaged(cls, replicates: np.ndarray) -> "CovarianceEstimate":
        """Unbiased estimate from N >= 2 i.i.d. recordings of the same signal.

        ``replicates`` has shape (N, n).  The estimate targets the covariance
        of the averaged observation Y = mean(Z_i), i.e. Sigma_Z / N.
        """
        z = np.asarray(replicates, dtype=float)
        n_rep = z.shape[0]
        if n_rep < 2:
            raise ValueError("need at least two replicates")
        mean = z.mean(axis=0)
        dev = z - mean
        sigma_z = dev.T @ dev / (n_rep - 1)
        return cls(matrix=sigma_z / n_rep, provenance="replicate-averaged")

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    @property
    def diagonal(self) -> np.ndarray | None:
        off = self.matrix - np.diag(np.diag(self.matrix))
        if np.max(np.abs(off), initial=0.0) <= _SYM_TOL:
            return np.diag(self.matrix)
        return None

    @property
    def spectral_norm(self) -> float:
        return float(np.abs(np.linalg.eigvalsh(self.matrix)).max())

    def trace(self) -> float:
        return float(np.trace(self.matrix))


def replication_seed(base_seed: int, replication_index: int) -> np.random.SeedSequence:
    """Portable per-replication seed so serial and parallel runs agree."""
    return np.random.SeedSequence(entropy=base_seed, spawn_key=(replication_index,))


def sample_observation(f: Signal | np.ndarray, noise: NoiseModel, seed) -> np.ndarray:
    """Draw Y = f + Sigma^{1/2} z with z standard normal, deterministically."""
    values = f.values if isinstance(f, Signal) else np.asarray(f, dtype=float)
    if values.size != noise.n:
        raise ValueError("signal and noise dimensions disagree")
    rng = np.random.default_rng(seed)
    z = rng.standard_normal(values.size)
    return values + noise.sqrt_apply(z)
