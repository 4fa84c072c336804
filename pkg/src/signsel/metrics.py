"""Peak metrics of an oversampled OFDM symbol.

Every function reduces over the last axis, so a stack of signals yields an
array of metric values.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import partial
from typing import Callable

import numpy as np

from .errors import ArgumentError, ConfigurationError

MetricFn = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class MetricValue:
    linear: float

    def __post_init__(self):
        if not self.linear >= 0:
            raise ArgumentError(f"metric value must be nonnegative, got {self.linear}")

    @property
    def db(self) -> float:
        if self.linear <= 0:
            raise ArgumentError("dB undefined for a zero metric value")
        return to_db(self.linear)


def to_db(linear):
    return 10.0 * np.log10(linear)


def _power(signal) -> np.ndarray:
    signal = np.asarray(signal)
    if signal.size == 0 or signal.shape[-1] == 0:
        raise ArgumentError("empty signal")
    return signal.real**2 + signal.imag**2


def papr(signal) -> np.ndarray:
    """Peak instantaneous power (signals are normalized to unit mean power)."""
    return np.max(_power(signal), axis=-1)


def crest_factor(signal) -> np.ndarray:
    return np.sqrt(papr(signal))


def log_sum_exp_metric(signal, kappa: float = 10.0) -> np.ndarray:
    """ln sum_n exp(kappa |s(n)|^2), max-shifted so kappa=10 cannot overflow."""
    if kappa < 1:
        raise ConfigurationError(f"kappa must be >= 1, got {kappa}")
    z = kappa * _power(signal)
    peak = np.max(z, axis=-1)
    return peak + np.log(np.sum(np.exp(z - peak[..., None]), axis=-1))


def srcm(signal) -> np.ndarray:
    """Symbol raw cubic metric: mean of |s(n)|^6."""
    return np.mean(_power(signal) ** 3, axis=-1)


def rcm(srcm_values) -> MetricValue:
    """Raw cubic metric of a symbol stream: the mean of its per-symbol SRCM."""
    values = np.asarray(srcm_values, dtype=float).ravel()
    if values.size == 0:
        raise ArgumentError("rcm needs at least one SRCM value")
    return MetricValue(float(np.mean(values)))


def get_metric(name: str, kappa: float = 10.0) -> MetricFn:
    """Look up a metric by its CLI name."""
    if name == "papr":
        return papr
    if name == "cf":
        return crest_factor
    if name == "se":
        return partial(log_sum_exp_metric, kappa=kappa)
    if name == "srcm":
        return srcm
    raise ConfigurationError(f"unknown metric {name!r}")


def metric_db(name: str, values, kappa: float = 10.0):
    """Report values in dB on the PAPR power scale.

    CF is an amplitude ratio (20 log10); the log-SE value is divided by
    kappa first, which puts it on the PAPR scale it brackets.
    """
    values = np.asarray(values, dtype=float)
    if name == "cf":
        return 20.0 * np.log10(values)
    if name == "se":
        return to_db(values / kappa)
    return to_db(values)
