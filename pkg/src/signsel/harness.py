"""Monte Carlo driver: per-trial selection, CCDF estimation and result files.

Trial ``t`` draws all of its randomness from a generator seeded with
``(seed, t)``, so results do not depend on how trials are split across
worker processes.
"""

from __future__ import annotations

import csv
import json
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import baselines, engine
from .errors import ArgumentError, CapacityError, ConfigurationError
from .metrics import get_metric, metric_db
from .ofdm import SignalParams, build_constellation, draw_symbols, modulate

log = logging.getLogger(__name__)

METHODS = ("none", "ce-exact", "ce-cf", "ce-se", "ce-srcm", "slm", "exhaustive")
METRICS = ("papr", "cf", "se", "srcm")
EFFECTIVE_LEVEL = 1e-3
MIN_EFFECTIVE_TRIALS = 10_000
CHUNK = 128


@dataclass(frozen=True)
class SimConfig:
    metric: str = "papr"
    method: str = "none"
    N: int = 64
    constellation: str = "qam16"
    L: int = 4
    trials: int | None = None
    seed: int = 0
    Q: int = 100
    kappa: float = 10.0
    N_e: int | None = None
    N_f: int = 0
    rule: str = "normalized"
    slm_S: int = 1000
    workers: int = 1
    out: str | None = None

    def __post_init__(self):
        if self.metric not in METRICS:
            raise ConfigurationError(f"metric must be one of {METRICS}, got {self.metric!r}")
        if self.method not in METHODS:
            raise ConfigurationError(f"method must be one of {METHODS}, got {self.method!r}")
        if self.trials is None:
            # tail quantiles need 1e5 samples, means of SRCM are fine with 1e4
            object.__setattr__(self, "trials", 10_000 if self.metric == "srcm" else 100_000)
        if self.trials < 1:
            raise ConfigurationError(f"trials must be >= 1, got {self.trials}")
        if self.workers < 1:
            raise ConfigurationError(f"workers must be >= 1, got {self.workers}")
        # construct nested configs once so bad values fail here
        SignalParams(self.N, self.L)
        build_constellation(self.constellation)
        if self.method.startswith("ce-") and self.method != "ce-exact":
            self.ce_config().validate(self.N)
        baselines.BaselineConfig(self.slm_S)

    def ce_config(self) -> engine.CeConfig:
        metric = {"ce-cf": "cf", "ce-se": "se", "ce-srcm": "srcm"}.get(self.method, "cf")
        return engine.CeConfig(metric=metric, Q=self.Q, kappa=self.kappa, N_e=self.N_e,
                               N_f=self.N_f, rule=self.rule, seed=self.seed)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class CcdfCurve:
    """Distinct sample values with P(value > v), plus the sample count."""

    values: np.ndarray
    exceedance: np.ndarray
    n: int


@dataclass
class RunResult:
    curve: CcdfCurve
    effective_db: float | None
    mean_linear: float
    mean_db: float
    wall_time: float
    config: dict
    values: np.ndarray = field(repr=False, default=None)

    def scalars(self) -> dict:
        return {
            "effective_db": self.effective_db,
            "effective_level": EFFECTIVE_LEVEL,
            "mean_linear": self.mean_linear,
            "mean_db": self.mean_db,
            "trials": int(self.curve.n),
            "wall_time": self.wall_time,
            "config": self.config,
        }


def ccdf(values) -> CcdfCurve:
    """Empirical exceedance curve: for each distinct v, the fraction of samples > v."""
    values = np.asarray(values, dtype=float).ravel()
    if values.size == 0:
        raise ArgumentError("ccdf needs at least one value")
    ordered = np.sort(values)
    distinct = np.unique(ordered)
    above = values.size - np.searchsorted(ordered, distinct, side="right")
    return CcdfCurve(distinct, above / values.size, values.size)


def effective_value(curve: CcdfCurve, level: float = EFFECTIVE_LEVEL,
                    min_samples: int = MIN_EFFECTIVE_TRIALS) -> float:
    """Value where the CCDF crosses ``level``.

    Interpolates linearly between neighbouring curve points in
    (value, log10 exceedance) coordinates.
    """
    if curve.n < min_samples:
        raise CapacityError(f"effective value needs >= {min_samples} samples, got {curve.n}")
    v, p = curve.values, curve.exceedance
    if level >= p[0]:
        return float(v[0])
    i = int(np.argmax(p <= level))
    if p[i] == level or p[i] == 0:
        return float(v[i])
    lo, hi = np.log10(p[i - 1]), np.log10(p[i])
    frac = (np.log10(level) - lo) / (hi - lo)
    return float(v[i - 1] + frac * (v[i] - v[i - 1]))


def select(config: SimConfig, b: np.ndarray, params: SignalParams, rng: np.random.Generator):
    """Apply ``config.method`` to one data vector; returns the sign vector."""
    method = config.method
    objective = get_metric(config.metric, config.kappa)
    if method == "none":
        return np.ones(params.N, dtype=int)
    if method == "ce-exact":
        return engine.select_signs_exact(b, objective, params, config.N_f)[0]
    if method in ("ce-cf", "ce-se", "ce-srcm"):
        return engine.select_signs(b, config.ce_config(), params, rng)[0]
    if method == "slm":
        return baselines.slm(b, config.slm_S, objective, params, rng)[0]
    return baselines.exhaustive_min(b, objective, params)[0]


def trial_generator(seed: int, trial: int) -> np.random.Generator:
    return np.random.default_rng([seed, trial])


def _run_chunk(config: SimConfig, start: int, stop: int) -> np.ndarray:
    constellation = build_constellation(config.constellation)
    params = SignalParams(config.N, config.L, constellation.sigma_b)
    measure = get_metric(config.metric, config.kappa)
    out = np.empty(stop - start)
    for i, t in enumerate(range(start, stop)):
        rng = trial_generator(config.seed, t)
        b = draw_symbols(constellation, config.N, rng)
        signs = select(config, b, params, rng)
        out[i] = measure(modulate(b, signs, params))
    return out


def _chunks(trials: int):
    return [(s, min(s + CHUNK, trials)) for s in range(0, trials, CHUNK)]


def run_values(config: SimConfig) -> np.ndarray:
    """Linear metric value of every trial, in trial order."""
    chunks = _chunks(config.trials)
    if config.workers == 1:
        parts = [_run_chunk(config, s, e) for s, e in chunks]
    else:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            futures = [pool.submit(_run_chunk, config, s, e) for s, e in chunks]
            parts = [f.result() for f in futures]
    return np.concatenate(parts)


def run_experiment(config: SimConfig) -> RunResult:
    """Run all trials and summarize them as a CCDF in dB."""
    t0 = time.perf_counter()
    values = run_values(config)
    db = metric_db(config.metric, values, config.kappa)
    curve = ccdf(db)
    effective = effective_value(curve) if config.trials >= MIN_EFFECTIVE_TRIALS else None
    mean = float(np.mean(values))
    wall = time.perf_counter() - t0
    log.info("%s/%s N=%d: %d trials in %.1fs", config.method, config.metric, config.N,
             config.trials, wall)
    return RunResult(curve, effective, mean, float(metric_db(config.metric, mean, config.kappa)),
                     wall, config.to_dict(), values)


def emit_results(result: RunResult, path) -> Path:
    """Write the CCDF as CSV plus a ``<path>.meta.json`` sidecar.

    Floats are written with ``repr`` so that reading the CSV back gives the
    exact curve.
    """
    path = Path(path)
    meta = path.with_name(path.name + ".meta.json")
    try:
        with open(path, "w", newline="") as fh:
            fh.write("metric_db,ccdf\n")
            for v, p in zip(result.curve.values, result.curve.exceedance):
                fh.write(f"{float(v)!r},{float(p)!r}\n")
        with open(meta, "w") as fh:
            json.dump(result.scalars(), fh, indent=2)
    except OSError as exc:
        raise OSError(f"cannot write results to {path}: {exc}") from exc
    return path


def read_curve(path) -> tuple[np.ndarray, np.ndarray]:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    return (np.array([float(r["metric_db"]) for r in rows]),
            np.array([float(r["ccdf"]) for r in rows]))
