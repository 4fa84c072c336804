"""Analytic bounds and limit covariances for CE sign selection."""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .errors import DomainError
from .metrics import MetricValue
from .ofdm import Constellation

EULER_GAMMA = 0.5772156649015329
# K = ln(pi/3) / 2 + gamma
PAPR_BOUND_OFFSET = 0.5 * np.log(np.pi / 3.0) + EULER_GAMMA
SRCM_LIMIT = 6.0


@dataclass(frozen=True)
class BoundReport:
    name: str
    inputs: dict
    linear: float
    db: float | None = None

    def to_dict(self) -> dict:
        return asdict(self)


def papr_upper_bound(N: int) -> MetricValue:
    """Worst-case reduced PAPR: ln N + ln(ln N) / 2 + K."""
    if N < 3:
        raise DomainError(f"PAPR bound needs N >= 3, got {N}")
    return MetricValue(float(np.log(N) + 0.5 * np.log(np.log(N)) + PAPR_BOUND_OFFSET))


def srcm_upper_bound() -> MetricValue:
    """Limit of the mean uncoded SRCM, which caps every CE-reduced SRCM."""
    return MetricValue(SRCM_LIMIT)


def bounded_difference(constellation: Constellation) -> float:
    """d = 2 max|x| / sigma_b."""
    return 2.0 * constellation.max_magnitude / constellation.sigma_b


def mcdiarmid_deviation_bound(eps: float, Q: int, N: int, j: int,
                              constellation: Constellation) -> float:
    """Bound on P(|g_hat - g| >= eps) for the Q-shot crest-factor estimate.

    Returns the raw value 2 exp(-2 eps^2 Q N / (d^2 (N - j - 1))), which may
    exceed 1.
    """
    if eps < 0:
        raise DomainError(f"eps must be >= 0, got {eps}")
    if Q < 1:
        raise DomainError(f"Q must be >= 1, got {Q}")
    if not 0 <= j <= N - 2:
        raise DomainError(f"need 0 <= j <= N - 2, got j={j}, N={N}")
    d = bounded_difference(constellation)
    return float(2.0 * np.exp(-2.0 * eps**2 * Q / d**2 * N / (N - j - 1)))


def q_lower_bound(p: float, eps: float, constellation: Constellation, rho: float) -> float:
    """Shots needed for deviation probability below p, with (1 - rho) remaining."""
    if not 0 < p < 2:
        raise DomainError(f"p must lie in (0, 2), got {p}")
    if eps <= 0:
        raise DomainError(f"eps must be > 0, got {eps}")
    if not 0 <= rho <= 1:
        raise DomainError(f"rho must lie in [0, 1], got {rho}")
    d = bounded_difference(constellation)
    return float(-(d**2) * np.log(p / 2.0) / (2.0 * eps**2) * (1.0 - rho))


def limit_covariances(tau, rho: float, F_s: float = 1.0, sigma_b: float = 1.0):
    """Limit (N -> inf) covariances of the signal with the first rho*N signs fixed.

    Returns ``(R_rr, R_ri)``; ``R_ii`` equals ``R_rr``. ``tau`` is the lag
    in the time units of ``1 / F_s``; for the discrete model a lag of
    ``dn`` samples is ``F_s * tau = dn / L``.
    """
    if not 0 <= rho <= 1:
        raise DomainError(f"rho must lie in [0, 1], got {rho}")
    x = 2.0 * F_s * np.asarray(tau, dtype=float)
    r_rr = 0.5 * sigma_b**2 * (np.sinc(x) - rho * np.sinc(x * rho))
    w = np.pi * x
    with np.errstate(divide="ignore", invalid="ignore"):
        r_ri = 0.25 * sigma_b**2 * (np.cos(w * rho) - np.cos(w)) / (np.pi * F_s * np.asarray(tau))
    r_ri = np.where(x == 0, 0.0, r_ri)
    if np.ndim(tau) == 0:
        return float(r_rr), float(r_ri)
    return r_rr, r_ri


def bound_report(N: int, constellation: Constellation | None = None,
                 eps: float = 0.1, Q: int = 100, p: float = 0.01) -> list[BoundReport]:
    """Bounds for an N-subcarrier system, as printed by the ``bounds`` command."""
    reports = []
    if N >= 3:
        v = papr_upper_bound(N)
        reports.append(BoundReport("papr_upper_bound", {"N": N}, v.linear, v.db))
    v = srcm_upper_bound()
    reports.append(BoundReport("srcm_upper_bound", {}, v.linear, v.db))
    if constellation is not None and N >= 2:
        inputs = {"eps": eps, "Q": Q, "N": N, "j": 0, "constellation": constellation.kind.value}
        dev = mcdiarmid_deviation_bound(eps, Q, N, 0, constellation)
        reports.append(BoundReport("mcdiarmid_deviation_bound", inputs, min(dev, 1.0)))
        q0 = q_lower_bound(p, eps, constellation, 0.0)
        reports.append(BoundReport("q_lower_bound",
                                   {"p": p, "eps": eps, "rho": 0.0,
                                    "constellation": constellation.kind.value}, q0))
    return reports

