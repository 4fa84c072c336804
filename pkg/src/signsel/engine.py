"""Sign selection by the method of conditional expectations.

Signs are fixed one subcarrier at a time. At index ``j`` the two
conditional expectations ``g+`` and ``g-`` of the objective (signs before
``j`` decided, sign ``j`` set to +1 / -1, later signs uniform) are compared
and the smaller one wins; an exact tie keeps +1. The first ``N_f`` signs
are not selected: they carry data and stay +1.

Four ways of obtaining ``g+ - g-`` are provided:

* exact enumeration of all remaining sign tails (small problems only),
* an empirical average over ``Q`` random tails (any metric; used for CF),
* the closed form for the Sum-Exp surrogate,
* the closed form for SRCM, in normalized or literal-raw scaling.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache, partial

import numpy as np

from . import _kernels
from .errors import CapacityError, ConfigurationError, DomainError, StateError
from .metrics import MetricFn, crest_factor, log_sum_exp_metric, papr, srcm
from .ofdm import PrefixState, SignalParams, modulate, tone

MAX_EXACT_FREE = 14
SINGULAR_TOL = 1e-9
# global negation makes the first unconstrained decision an exact tie in
# real arithmetic; summation order must not break it
TIE_RTOL = 1e-12


class Rule(str, Enum):
    NORMALIZED = "normalized"
    RAW = "raw"


@dataclass(frozen=True)
class CeConfig:
    """Knobs of the CE selectors.

    ``N_e`` is the number of trailing signs decided by the tail-sampling
    estimator instead of a closed form; ``None`` picks the per-metric
    default (10 for SE, 0 otherwise).
    """

    metric: str = "cf"
    Q: int = 100
    kappa: float = 10.0
    N_e: int | None = None
    N_f: int = 0
    rule: Rule = Rule.NORMALIZED
    seed: int | None = None

    def __post_init__(self):
        if self.metric not in ("cf", "se", "srcm"):
            raise ConfigurationError(f"CE metric must be cf, se or srcm, got {self.metric!r}")
        if self.Q < 1:
            raise ConfigurationError(f"Q must be >= 1, got {self.Q}")
        if self.kappa < 1:
            raise ConfigurationError(f"kappa must be >= 1, got {self.kappa}")
        object.__setattr__(self, "rule", Rule(self.rule))

    @property
    def n_estimated(self) -> int:
        if self.N_e is not None:
            return self.N_e
        return 10 if self.metric == "se" else 0

    def validate(self, N: int) -> None:
        if not 0 <= self.N_f <= N:
            raise ConfigurationError(f"N_f={self.N_f} outside [0, {N}]")
        if not 0 <= self.n_estimated <= N - self.N_f:
            raise ConfigurationError(f"N_e={self.n_estimated} outside [0, {N - self.N_f}]")


@dataclass(frozen=True)
class DecisionContext:
    """Per-index quantities of the Gaussian approximation.

    ``delta_sq`` is the limiting per-component variance (1 - j/N) / 2 of the
    signal given the decided prefix; ``beta`` is the MGF argument mapping
    used by the SE rule.
    """

    j: int
    N: int
    kappa: float = 10.0

    @property
    def rho(self) -> float:
        return self.j / self.N

    @property
    def delta_sq(self) -> float:
        return 0.5 * (1.0 - self.rho)

    @property
    def singular(self) -> bool:
        return abs(1.0 - 2.0 * self.kappa * self.delta_sq) < SINGULAR_TOL

    @property
    def beta(self) -> float:
        k = self.kappa * self.delta_sq
        if self.singular:
            return np.inf
        return k / (1.0 - 2.0 * k)


@dataclass
class DecisionTrace:
    """Per-index record of a selection run.

    ``rule`` is one of "fixed", "exact", "estimator", "closed-form".
    ``statistic`` holds g+ - g- (or the closed-form equivalent); a positive
    value selects -1. ``expectations`` is only filled by the exact
    selector: the initial expectation followed by the conditional
    expectation after each selected sign.
    """

    signs: np.ndarray
    statistic: np.ndarray
    rule: list[str]
    expectations: np.ndarray | None = field(default=None)

    @classmethod
    def empty(cls, N: int, N_f: int) -> "DecisionTrace":
        rule = ["fixed"] * N_f + [""] * (N - N_f)
        stat = np.full(N, np.nan)
        return cls(np.ones(N, dtype=int), stat, rule)

    def to_dict(self) -> dict:
        out = {
            "signs": self.signs.tolist(),
            "statistic": [None if np.isnan(v) else float(v) for v in self.statistic],
            "rule": list(self.rule),
        }
        if self.expectations is not None:
            out["expectations"] = self.expectations.tolist()
        return out


def _decide(stat: float) -> int:
    return -1 if stat > 0 else 1


def _compare(g_plus: float, g_minus: float) -> float:
    """g+ - g-, with rounding-level differences collapsed to an exact tie."""
    stat = g_plus - g_minus
    if abs(stat) <= TIE_RTOL * (abs(g_plus) + abs(g_minus)):
        return 0.0
    return stat


def _sign_table(m: int) -> np.ndarray:
    """All 2^m sign vectors, lexicographic with +1 before -1 per position."""
    idx = np.arange(2**m)[:, None]
    bits = (idx >> np.arange(m - 1, -1, -1)[None, :]) & 1
    return 1 - 2 * bits


def _fixed_prefix_table(b: np.ndarray, N_f: int, params: SignalParams, metric_fn: MetricFn):
    m = params.N - N_f
    if m > MAX_EXACT_FREE:
        raise CapacityError(f"exact enumeration over {m} free signs exceeds {MAX_EXACT_FREE}")
    table = np.ones((2**m, params.N), dtype=int)
    table[:, N_f:] = _sign_table(m)
    return table, np.asarray(metric_fn(modulate(b, table, params)), dtype=float)


def select_signs_exact(b, metric_fn: MetricFn, params: SignalParams, N_f: int = 0):
    """CE selection with conditional expectations computed by full enumeration.

    The metric is evaluated once for every completion; since the table is
    ordered lexicographically, fixing the next sign halves the block of
    consistent completions and ``g+``/``g-`` are the means of the halves.
    """
    b = np.asarray(b)
    N = params.N
    if not 0 <= N_f <= N:
        raise ConfigurationError(f"N_f={N_f} outside [0, {N}]")
    _, values = _fixed_prefix_table(b, N_f, params, metric_fn)
    trace = DecisionTrace.empty(N, N_f)
    expectations = [float(values.mean())]
    block = values
    for j in range(N_f, N):
        half = len(block) // 2
        stat = _compare(block[:half].mean(), block[half:].mean())
        x = _decide(stat)
        trace.signs[j] = x
        trace.statistic[j] = stat
        trace.rule[j] = "exact"
        block = block[:half] if x == 1 else block[half:]
        expectations.append(float(block.mean()))
    trace.expectations = np.array(expectations)
    return trace.signs.copy(), trace


def initial_expectation(b, metric_fn: MetricFn, params: SignalParams, Q: int = 100,
                        rng: np.random.Generator | None = None, exact: bool | None = None) -> float:
    """Average of the metric over uniformly random sign vectors.

    Exact enumeration is used when ``N <= 14`` unless ``exact`` says
    otherwise; the sampled variant draws ``Q`` sign vectors.
    """
    if Q < 1:
        raise ConfigurationError(f"Q must be >= 1, got {Q}")
    b = np.asarray(b)
    if exact is None:
        exact = params.N <= MAX_EXACT_FREE
    if exact:
        _, values = _fixed_prefix_table(b, 0, params, metric_fn)
        return float(values.mean())
    rng = np.random.default_rng() if rng is None else rng
    signs = 1 - 2 * rng.integers(0, 2, size=(Q, params.N))
    return float(np.mean(metric_fn(modulate(b, signs, params))))


@lru_cache(maxsize=16)
def _tone_rows(N: int, L: int) -> np.ndarray:
    LN = N * L
    k = np.arange(N)[:, None]
    n = np.arange(LN)[None, :]
    return np.exp(2j * np.pi * ((k * n) % LN) / LN)


@lru_cache(maxsize=16)
def _tone_table(LN: int) -> np.ndarray:
    return np.exp(2j * np.pi * np.arange(LN) / LN)


class _TailSampler:
    """Evaluates g+/- estimates for one data vector.

    Tail sums are formed as a real (Q x m) by (m x 2LN) product against the
    interleaved real/imag view of the per-subcarrier rows.
    """

    def __init__(self, b: np.ndarray, params: SignalParams, lo: int):
        self.params = params
        rows = _tone_rows(params.N, params.L)[lo:] * np.asarray(b)[lo:, None]
        self.lo = lo
        self.rows = np.ascontiguousarray(rows)
        self.rows_real = self.rows.view(float)

    def statistic(self, h: np.ndarray, j: int, tails: np.ndarray, metric_fn: MetricFn) -> float:
        a = self.rows[j - self.lo]
        m = tails.shape[1]
        base = h[None, :]
        if m:
            tail_sum = (tails @ self.rows_real[j + 1 - self.lo:]).view(complex)
            base = base + tail_sum
        scale = self.params.scale
        if metric_fn is crest_factor or metric_fn is papr:
            base = np.ascontiguousarray(np.broadcast_to(base, (tails.shape[0], len(a))))
            peak_p = np.empty(len(base))
            peak_m = np.empty(len(base))
            _kernels.branch_peaks(base, a, peak_p, peak_m)
            if metric_fn is crest_factor:
                peak_p, peak_m = np.sqrt(peak_p), np.sqrt(peak_m)
                return scale * _compare(float(np.mean(peak_p)), float(np.mean(peak_m)))
            return scale**2 * _compare(float(np.mean(peak_p)), float(np.mean(peak_m)))
        g_plus = float(np.mean(metric_fn((base + a) * scale)))
        g_minus = float(np.mean(metric_fn((base - a) * scale)))
        return _compare(g_plus, g_minus)


def _draw_tails(rng: np.random.Generator, Q: int, m: int, enumerate_tails: bool) -> np.ndarray:
    if enumerate_tails:
        return _sign_table(m).astype(float)
    if m == 0:
        return np.ones((1, 0))
    return (1 - 2 * rng.integers(0, 2, size=(Q, m))).astype(float)


def _estimator_steps(b, params, h, trace, j0, j1, Q, rng, metric_fn, sampler=None,
                     enumerate_tails=False):
    sampler = sampler or _TailSampler(b, params, j0)
    N = params.N
    for j in range(j0, j1):
        tails = _draw_tails(rng, Q, N - j - 1, enumerate_tails)
        stat = sampler.statistic(h, j, tails, metric_fn)
        x = _decide(stat)
        trace.signs[j] = x
        trace.statistic[j] = stat
        trace.rule[j] = "estimator"
        h += x * sampler.rows[j - sampler.lo]


def _fixed_prefix(b, params: SignalParams, N_f: int) -> np.ndarray:
    if N_f == 0:
        return np.zeros(params.n_samples, dtype=complex)
    return _tone_rows(params.N, params.L)[:N_f].T @ np.asarray(b[:N_f], dtype=complex)


def _resolve_rng(config: CeConfig, rng):
    return np.random.default_rng(config.seed) if rng is None else rng


def select_signs_estimator(b, metric_fn: MetricFn, params: SignalParams, Q: int = 100,
                           N_f: int = 0, rng: np.random.Generator | None = None,
                           enumerate_tails: bool = False):
    """CE selection where every g+/g- is an average over Q random tails.

    The same Q tail realizations serve both branches of a decision. With
    ``enumerate_tails`` all 2^(N-j-1) tails are used instead, which makes
    the estimate exact.
    """
    b = np.asarray(b, dtype=complex)
    N = params.N
    if not 0 <= N_f <= N:
        raise ConfigurationError(f"N_f={N_f} outside [0, {N}]")
    if enumerate_tails and N - N_f > MAX_EXACT_FREE + 1:
        raise CapacityError("tail enumeration needs N - N_f <= 15")
    rng = np.random.default_rng() if rng is None else rng
    trace = DecisionTrace.empty(N, N_f)
    h = _fixed_prefix(b, params, N_f)
    _estimator_steps(b, params, h, trace, N_f, N, Q, rng, metric_fn,
                     enumerate_tails=enumerate_tails)
    return trace.signs.copy(), trace


def select_signs_cf_estimator(b, config: CeConfig, params: SignalParams,
                              rng: np.random.Generator | None = None,
                              enumerate_tails: bool = False):
    """CE selection on the crest factor with Q-shot tail averages."""
    config.validate(params.N)
    return select_signs_estimator(b, crest_factor, params, config.Q, config.N_f,
                                  _resolve_rng(config, rng), enumerate_tails)


def noncentrality(prefix: PrefixState, b_j: complex, j: int):
    """Noncentrality parameters of |s(n)|^2 / delta_j^2 for both branches.

    Returns ``(lam_plus, lam_minus)`` over all LN samples.
    """
    params = prefix.params
    if prefix.decided != j:
        raise StateError(f"prefix holds {prefix.decided} decided terms, expected {j}")
    if j >= params.N:
        raise DomainError("delta_j vanishes at j = N")
    ctx = DecisionContext(j, params.N)
    a = b_j * tone(j, params)
    c = params.scale**2 / ctx.delta_sq
    p = prefix.partial + a
    m = prefix.partial - a
    return c * (p.real**2 + p.imag**2), c * (m.real**2 + m.imag**2)


def srcm_poly(lam):
    return lam**3 + 18.0 * lam**2 + 72.0 * lam


def srcm_expectation(prefix: PrefixState, b_j: complex, j: int):
    """Closed-form E[SRCM] of both branches under the Gaussian approximation.

    Uses the third moment of a two-degree-of-freedom noncentral chi-square,
    scaled back by delta_j^6.
    """
    lam_p, lam_m = noncentrality(prefix, b_j, j)
    d6 = DecisionContext(j, prefix.params.N).delta_sq ** 3
    return (d6 * float(np.mean(srcm_poly(lam_p) + 48.0)),
            d6 * float(np.mean(srcm_poly(lam_m) + 48.0)))


def _sweep_buffers(params):
    return _tone_table(params.n_samples)


def select_signs_srcm(b, config: CeConfig, params: SignalParams,
                      rng: np.random.Generator | None = None):
    """CE selection on SRCM with the closed-form cubic-polynomial rule.

    ``Rule.NORMALIZED`` evaluates the polynomial on the noncentralities;
    ``Rule.RAW`` applies it to the raw partial-sum powers |h +/- b_j e_j|^2
    with no per-index scaling, updated incrementally. The last
    ``N_e`` signs use the tail-sampling estimator on SRCM.
    """
    b = np.ascontiguousarray(b, dtype=complex)
    N = params.N
    config.validate(N)
    N_f, N_e = config.N_f, config.n_estimated
    trace = DecisionTrace.empty(N, N_f)
    h = _fixed_prefix(b, params, N_f)
    j_stop = N - N_e
    if j_stop > N_f:
        stats = np.full(N, np.nan)
        signs = trace.signs
        _kernels.srcm_sweep(h, b, _sweep_buffers(params), N_f, j_stop, N, params.sigma_b,
                            config.rule is Rule.RAW, TIE_RTOL, signs, stats)
        trace.statistic[N_f:j_stop] = stats[N_f:j_stop]
        trace.rule[N_f:j_stop] = ["closed-form"] * (j_stop - N_f)
    if N_e:
        _estimator_steps(b, params, h, trace, max(j_stop, N_f), N, config.Q,
                         _resolve_rng(config, rng), srcm)
    return trace.signs.copy(), trace


def select_signs_se(b, config: CeConfig, params: SignalParams,
                    rng: np.random.Generator | None = None):
    """CE selection on the Sum-Exp surrogate.

    Indices before ``N - N_e`` use the closed-form rule, with a max-shift on
    the exponents; the trailing ``N_e`` indices, and any index where
    ``2 kappa delta_j^2 = 1`` makes beta singular, use Q-shot tail averages
    of ln SE.
    """
    b = np.ascontiguousarray(b, dtype=complex)
    N = params.N
    config.validate(N)
    N_f, N_e = config.N_f, config.n_estimated
    rng = _resolve_rng(config, rng)
    trace = DecisionTrace.empty(N, N_f)
    h = _fixed_prefix(b, params, N_f)
    metric_fn = partial(log_sum_exp_metric, kappa=config.kappa)
    j_stop = N - N_e
    stats = np.full(N, np.nan)
    ex_p = np.empty(params.n_samples)
    ex_m = np.empty(params.n_samples)
    sampler = None
    j = N_f
    while j < j_stop:
        nxt = _kernels.se_sweep(h, b, _sweep_buffers(params), j, j_stop, N, params.sigma_b,
                                config.kappa, SINGULAR_TOL, TIE_RTOL, trace.signs, stats, ex_p, ex_m)
        trace.statistic[j:nxt] = stats[j:nxt]
        trace.rule[j:nxt] = ["closed-form"] * (nxt - j)
        j = nxt
        if j < j_stop:
            sampler = sampler or _TailSampler(b, params, N_f)
            _estimator_steps(b, params, h, trace, j, j + 1, config.Q, rng, metric_fn, sampler)
            j += 1
    if N_e:
        _estimator_steps(b, params, h, trace, max(j_stop, N_f), N, config.Q, rng, metric_fn,
                         sampler)
    return trace.signs.copy(), trace


def select_signs(b, config: CeConfig, params: SignalParams,
                 rng: np.random.Generator | None = None):
    """Dispatch on ``config.metric``."""
    if config.metric == "cf":
        return select_signs_cf_estimator(b, config, params, rng)
    if config.metric == "se":
        return select_signs_se(b, config, params, rng)
    return select_signs_srcm(b, config, params, rng)
