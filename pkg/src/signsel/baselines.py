"""Reference sign selectors: exhaustive optimum, SLM, uncoded and random."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import CapacityError, ConfigurationError
from .metrics import MetricFn, MetricValue
from .ofdm import SignalParams, modulate

_CHUNK_BITS = 12


@dataclass(frozen=True)
class BaselineConfig:
    S: int = 1000
    max_exhaustive_N: int = 20

    def __post_init__(self):
        if self.S < 1:
            raise ConfigurationError(f"SLM candidate count must be >= 1, got {self.S}")


def _signs_from_index(idx: np.ndarray, m: int) -> np.ndarray:
    bits = (idx[:, None] >> np.arange(m - 1, -1, -1)[None, :]) & 1
    return 1 - 2 * bits


def exhaustive_min(b, metric_fn: MetricFn, params: SignalParams, max_N: int = 20):
    """Global minimum over all 2^N sign vectors.

    Sign vectors are enumerated lexicographically (+1 before -1), and the
    first minimizer in that order wins ties, so the all-+1 vector is
    preferred whenever it is optimal.
    """
    N = params.N
    if N > max_N:
        raise CapacityError(f"exhaustive search over N={N} exceeds cap {max_N}")
    b = np.asarray(b)
    chunk = 1 << min(N, _CHUNK_BITS)
    best_val, best_idx = np.inf, 0
    for start in range(0, 1 << N, chunk):
        idx = np.arange(start, start + chunk)
        values = np.asarray(metric_fn(modulate(b, _signs_from_index(idx, N), params)))
        k = int(np.argmin(values))
        if values[k] < best_val:
            best_val, best_idx = float(values[k]), start + k
    signs = _signs_from_index(np.array([best_idx]), N)[0]
    return signs, MetricValue(best_val)


def slm(b, S: int, metric_fn: MetricFn, params: SignalParams, rng: np.random.Generator):
    """Best of S sign vectors: all +1 first, then S-1 uniform random ones."""
    if S < 1:
        raise ConfigurationError(f"S must be >= 1, got {S}")
    N = params.N
    candidates = np.ones((S, N), dtype=int)
    if S > 1:
        candidates[1:] = 1 - 2 * rng.integers(0, 2, size=(S - 1, N))
    values = np.asarray(metric_fn(modulate(np.asarray(b), candidates, params)))
    k = int(np.argmin(values))
    return candidates[k].copy(), MetricValue(float(values[k]))


def uncoded(b, metric_fn: MetricFn, params: SignalParams):
    signs = np.ones(params.N, dtype=int)
    return signs, MetricValue(float(metric_fn(modulate(np.asarray(b), signs, params))))


def random_signs(b, metric_fn: MetricFn, params: SignalParams, rng: np.random.Generator):
    signs = 1 - 2 * rng.integers(0, 2, size=params.N)
    return signs, MetricValue(float(metric_fn(modulate(np.asarray(b), signs, params))))
