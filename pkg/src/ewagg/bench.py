"""Monte Carlo experiment runner reproducing the benchmark tables.

For each replication r the runner draws Y = f + sigma * z with a seed derived
from (base_seed, r), runs every configured method, and records
n * (MSE_method - MSE_oracle) where the oracle is the family member with the
smallest realized squared error for that same Y.  Raw per-replication values
are stored by replication index, so serial and parallel execution produce
bit-identical reports.
"""

from __future__ import annotations

import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from . import baselines, kernels
from .aggregate import Prior, ewa_weights
from .estimators import geometric_grid, pinsker_family
from .signals import (
    SIGNAL_NAMES,
    dct_forward,
    make_test_signal,
    replication_seed,
)

SCHEMA_VERSION = 1
DEFAULT_METHODS = ("ewa", "ure", "bjs", "st")
ALLOWED_SIZES = (2**8, 2**9, 2**10, 2**11, 64, 128)


@dataclass(frozen=True)
class ExperimentConfig:
    signal: str
    n: int = 256
    sigma: float = 0.33
    smooth: bool = False
    replications: int = 1000
    base_seed: int = 0
    methods: tuple = DEFAULT_METHODS
    grid_alpha: int = 30
    grid_w: int = 30

    def __post_init__(self):
        if self.replications < 1:
            raise ValueError("replications must be >= 1")
        if self.sigma <= 0:
            raise ValueError("sigma must be positive")
        if self.n not in ALLOWED_SIZES:
            raise ValueError(f"n must be one of {ALLOWED_SIZES}")
        if self.signal not in SIGNAL_NAMES:
            raise ValueError(f"unknown signal {self.signal!r}; choose from {SIGNAL_NAMES}")
        bad = set(self.methods) - set(DEFAULT_METHODS)
        if bad:
            raise ValueError(f"unknown methods: {sorted(bad)}")
        object.__setattr__(self, "methods", tuple(self.methods))

    @property
    def beta(self) -> float:
        # Setting-1 temperature for homoscedastic noise: 8 sigma^2.
        return 8.0 * self.sigma**2


@dataclass
class ExperimentReport:
    config: dict
    statistics: dict  # method -> {"mean": .., "sd": .., "raw": [..]}
    oracle_mse_mean: float
    backend: str
    schema_version: int = SCHEMA_VERSION

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2)

    @classmethod
    def from_json(cls, text: str) -> "ExperimentReport":
        data = json.loads(text)
        config = data.get("config", {})
        if "methods" in config:
            config["methods"] = tuple(config["methods"])
        return cls(**data)

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.to_json())

    @classmethod
    def load(cls, path) -> "ExperimentReport":
        with open(path, encoding="utf-8") as fh:
            return cls.from_json(fh.read())


def _pinsker_weight_table(config: ExperimentConfig) -> np.ndarray:
    family = pinsker_family(
        config.n,
        geometric_grid(0.1, 100.0, config.grid_alpha),
        geometric_grid(1.0, float(config.n), config.grid_w),
    )
    return family.weights_matrix()


def _run_replication(
    rep: int,
    config: ExperimentConfig,
    W: np.ndarray,
    theta_f: np.ndarray,
    log_prior: np.ndarray,
) -> dict:
    n = config.n
    sigma2 = config.sigma**2
    rng = np.random.default_rng(replication_seed(config.base_seed, rep))
    # Homoscedastic noise is invariant under the orthonormal change of basis,
    # so the replication can live entirely in the coefficient domain.
    y = theta_f + (config.sigma / np.sqrt(n)) * rng.standard_normal(n)

    risks, losses, post, abar = kernels.diag_family_pass(
        W, y, sigma2, n, config.beta, log_prior, theta_f
    )
    oracle_mse = float(losses.min())
    out = {"oracle": oracle_mse}
    for method in config.methods:
        if method == "ewa":
            coef = abar * y
        elif method == "ure":
            coef = W[int(np.argmin(risks))] * y
        elif method == "bjs":
            coef = _bjs_coefficients(y, config.sigma, n)
        elif method == "st":
            coef = _st_coefficients(y, config.sigma, n)
        diff = coef - theta_f
        out[method] = float(diff @ diff)
    return out


def _bjs_coefficients(theta: np.ndarray, sigma: float, n: int) -> np.ndarray:
    var_c = sigma * sigma / n
    shrunk = np.empty_like(theta)
    for block in baselines.bjs_blocks(n):
        s2 = float(np.dot(theta[block], theta[block]))
        factor = (
            max(0.0, 1.0 - baselines.BJS_LAMBDA * block.size * var_c / s2)
            if s2 > 0
            else 0.0
        )
        shrunk[block] = factor * theta[block]
    return shrunk


def _st_coefficients(theta: np.ndarray, sigma: float, n: int) -> np.ndarray:
    noise_sd = sigma / np.sqrt(n)
    thresholds = np.concatenate([[0.0], np.abs(theta)])
    sure = baselines.sure_soft_threshold_objective(theta, noise_sd, thresholds)
    lam = float(thresholds[int(np.argmin(sure))])
    return np.sign(theta) * np.clip(np.abs(theta) - lam, 0.0, None)


def _replication_range(args):
    lo, hi, config, W, theta_f, log_prior = args
    return [
        _run_replication(r, config, W, theta_f, log_prior) for r in range(lo, hi)
    ]


def run_experiment(config: ExperimentConfig, workers: int = 0) -> ExperimentReport:
    """Run the Monte Carlo experiment; deterministic given the config."""
    signal = make_test_signal(config.signal, config.n, config.smooth)
    theta_f = dct_forward(signal.values)
    W = _pinsker_weight_table(config)
    prior = Prior.uniform(W.shape[0])
    log_prior = np.log(prior.weights)

    reps = config.replications
    if workers and workers > 1 and reps > 1:
        edges = np.linspace(0, reps, workers + 1, dtype=int)
        chunks = [
            (int(lo), int(hi), config, W, theta_f, log_prior)
            for lo, hi in zip(edges, edges[1:])
            if hi > lo
        ]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = [r for chunk in pool.map(_replication_range, chunks) for r in chunk]
    else:
        results = [
            _run_replication(r, config, W, theta_f, log_prior) for r in range(reps)
        ]

    statistics = {}
    oracle_mse = np.array([r["oracle"] for r in results])
    for method in config.methods:
        raw = config.n * (np.array([r[method] for r in results]) - oracle_mse)
        statistics[method] = {
            "mean": float(raw.mean()),
            "sd": float(raw.std(ddof=1)) if reps > 1 else 0.0,
            "raw": raw.tolist(),
        }
    return ExperimentReport(
        config=asdict(config),
        statistics=statistics,
        oracle_mse_mean=float(oracle_mse.mean()),
        backend=kernels.backend_name(),
    )


def emit_table(report: ExperimentReport, format: str = "markdown") -> str:
    """Render per-method mean (sd) statistics as markdown or csv."""
    methods = list(report.statistics)
    if format == "markdown":
        header = "| n | " + " | ".join(m.upper() for m in methods) + " |"
        rule = "|---" * (len(methods) + 1) + "|"
        cells = [
            f"{report.statistics[m]['mean']:.3f} ({report.statistics[m]['sd']:.2f})"
            for m in methods
        ]
        row = f"| {report.config['n']} | " + " | ".join(cells) + " |"
        return "\n".join([header, rule, row]) if methods else "\n".join([header, rule])
    if format == "csv":
        lines = ["method,mean,sd"]
        for m in methods:
            s = report.statistics[m]
            lines.append(f"{m},{s['mean']!r},{s['sd']!r}")
        return "\n".join(lines)
    raise ValueError(f"unknown format {format!r}")


def emit_signal_data(n: int = 256, smooth: bool = False) -> str:
    """CSV of the test signals sampled on x = i/n (one column per signal)."""
    x = np.arange(1, n + 1) / n
    columns = {name: make_test_signal(name, n, smooth).values for name in SIGNAL_NAMES}
    lines = ["x," + ",".join(SIGNAL_NAMES)]
    for i in range(n):
        vals = ",".join(f"{columns[name][i]!r}" for name in SIGNAL_NAMES)
        lines.append(f"{x[i]!r},{vals}")
    return "\n".join(lines)


def emit_histogram_data(report: ExperimentReport, bins: int = 30) -> str:
    """CSV histogram of the per-replication statistics, one section per method."""
    lines = ["method,bin_left,bin_right,count"]
    for method, stats in report.statistics.items():
        raw = np.asarray(stats["raw"])
        counts, edges = np.histogram(raw, bins=bins)
        for c, lo, hi in zip(counts, edges, edges[1:]):
            lines.append(f"{method},{lo!r},{hi!r},{int(c)}")
    return "\n".join(lines)
