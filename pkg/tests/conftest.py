"""Shared fixtures and cached Monte Carlo runs for the test suite."""
from __future__ import annotations

from functools import lru_cache

import numpy as np
import pytest

from ewagg.bench import ExperimentConfig, ExperimentReport, run_experiment


@lru_cache(maxsize=None)
def cached_experiment(signal: str, n: int, smooth: bool = False,
                      replications: int = 1000, base_seed: int = 42) -> ExperimentReport:
    """Run (once) and memoize a benchmark cell used by several tests."""
    config = ExperimentConfig(signal=signal, n=n, smooth=smooth,
                              replications=replications, base_seed=base_seed)
    return run_experiment(config)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
