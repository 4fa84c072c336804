"""Constellations, bit mapping and oversampled OFDM symbol synthesis.

Signals follow the discrete-time model

    s(n) = 1 / (sigma_b * sqrt(N)) * sum_k b_k x_k exp(i 2 pi k n / (L N)),

for n = 0 .. LN-1, computed with a zero-padded inverse DFT of size LN.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import ArgumentError, ConfigurationError, DecodeError, StateError


class Kind(str, Enum):
    QPSK = "qpsk"
    QAM16 = "qam16"
    QAM64 = "qam64"


_ORDERS = {Kind.QPSK: 4, Kind.QAM16: 16, Kind.QAM64: 64}


@dataclass(frozen=True)
class Constellation:
    """Symmetric square QAM alphabet with a fixed half-set.

    ``points`` is the full alphabet, ``half_set`` holds one point of every
    ``{y, -y}`` pair (the one with positive real part; positive imaginary
    part on the imaginary axis). ``sigma_b`` is the RMS symbol magnitude.
    """

    kind: Kind
    points: np.ndarray
    half_set: np.ndarray
    sigma_b: float

    @property
    def order(self) -> int:
        return len(self.points)

    @property
    def bits_per_symbol(self) -> int:
        return int(np.log2(self.order))

    @property
    def max_magnitude(self) -> float:
        return float(np.max(np.abs(self.points)))


def _in_half_plane(y: complex) -> bool:
    if y.real > 0:
        return True
    return y.real == 0 and y.imag > 0


def build_constellation(kind: str | Kind, normalize: bool = True) -> Constellation:
    """Build a square QAM constellation.

    With ``normalize=False`` the points sit on the odd-integer grid
    (e.g. {±1, ±3}² for 16-QAM, sigma_b² = 10); otherwise they are scaled to
    unit average power.
    """
    try:
        kind = Kind(kind)
    except ValueError:
        raise ConfigurationError(f"unsupported constellation kind: {kind!r}") from None
    side = int(round(np.sqrt(_ORDERS[kind])))
    levels = np.arange(-(side - 1), side, 2, dtype=float)
    points = (levels[:, None] + 1j * levels[None, :]).ravel()
    # analytic: mean of re^2 + im^2 over the grid
    sigma_b = float(np.sqrt(2.0 * np.mean(levels**2)))
    if normalize:
        points = points / sigma_b
        sigma_b = 1.0
    half = np.array([y for y in points if _in_half_plane(y)])
    return Constellation(kind, points, half, sigma_b)


@dataclass(frozen=True)
class SignalParams:
    N: int
    L: int = 4
    sigma_b: float = 1.0

    def __post_init__(self):
        if self.N < 1:
            raise ConfigurationError(f"N must be >= 1, got {self.N}")
        if self.L < 2:
            raise ConfigurationError(f"oversampling factor must be >= 2, got {self.L}")
        if self.sigma_b <= 0:
            raise ConfigurationError("sigma_b must be positive")

    @property
    def n_samples(self) -> int:
        return self.L * self.N

    @property
    def scale(self) -> float:
        """Normalization 1 / (sigma_b sqrt(N)) applied to raw subcarrier sums."""
        return 1.0 / (self.sigma_b * np.sqrt(self.N))


def draw_symbols(constellation: Constellation, N: int, rng: np.random.Generator) -> np.ndarray:
    """I.i.d. uniform symbols from the full constellation."""
    if N < 1:
        raise ArgumentError(f"N must be >= 1, got {N}")
    return constellation.points[rng.integers(0, constellation.order, size=N)]


def raw_synthesis(coeffs: np.ndarray, L: int) -> np.ndarray:
    """Unnormalized sum_k c_k exp(i 2 pi k n / (L N)) along the last axis."""
    coeffs = np.asarray(coeffs, dtype=complex)
    N = coeffs.shape[-1]
    padded = np.zeros(coeffs.shape[:-1] + (L * N,), dtype=complex)
    padded[..., :N] = coeffs
    return np.fft.ifft(padded, axis=-1) * (L * N)


def modulate(b: np.ndarray, signs: np.ndarray | None, params: SignalParams) -> np.ndarray:
    """Oversampled OFDM symbol(s) for data ``b`` with sign vector ``signs``.

    Leading axes of ``b`` and ``signs`` broadcast, so a batch of sign
    vectors can be applied to one data vector.
    """
    b = np.asarray(b)
    if b.shape[-1] != params.N:
        raise ArgumentError(f"expected {params.N} symbols, got {b.shape[-1]}")
    if signs is not None:
        signs = np.asarray(signs)
        if signs.shape[-1] != params.N:
            raise ArgumentError(f"expected {params.N} signs, got {signs.shape[-1]}")
        b = b * signs
    return raw_synthesis(b, params.L) * params.scale


def tone(j: int, params: SignalParams) -> np.ndarray:
    """exp(i 2 pi j n / (L N)) for n = 0 .. LN-1, using exact integer phases."""
    LN = params.n_samples
    n = np.arange(LN)
    return np.exp(2j * np.pi * ((j * n) % LN) / LN)


@dataclass
class PrefixState:
    """Unnormalized partial sum over the first ``decided`` subcarriers."""

    params: SignalParams
    partial: np.ndarray = field(default=None)
    decided: int = 0

    def __post_init__(self):
        if self.partial is None:
            self.partial = np.zeros(self.params.n_samples, dtype=complex)

    def signal(self) -> np.ndarray:
        return self.partial * self.params.scale


def prefix_extend(state: PrefixState, b_j: complex, j: int, sign: int) -> PrefixState:
    """Return a new state with ``sign * b_j`` added on subcarrier ``j``."""
    if j != state.decided:
        raise StateError(f"expected subcarrier {state.decided}, got {j}")
    if j >= state.params.N:
        raise StateError(f"subcarrier {j} out of range for N={state.params.N}")
    if sign not in (1, -1):
        raise ArgumentError(f"sign must be +1 or -1, got {sign}")
    partial = state.partial + sign * b_j * tone(j, state.params)
    return PrefixState(state.params, partial, j + 1)


def prefix_from_scratch(b: np.ndarray, signs: np.ndarray, params: SignalParams) -> PrefixState:
    """Direct evaluation of the partial sum over ``len(signs)`` leading subcarriers."""
    j = len(signs)
    coeffs = np.zeros(params.N, dtype=complex)
    coeffs[:j] = np.asarray(b[:j]) * np.asarray(signs)
    return PrefixState(params, raw_synthesis(coeffs, params.L), j)


def _bits_to_int(bits: np.ndarray) -> int:
    value = 0
    for bit in bits:
        value = (value << 1) | int(bit)
    return value


def _int_to_bits(value: int, width: int) -> list[int]:
    return [(value >> (width - 1 - i)) & 1 for i in range(width)]


def encode_bits(bits, constellation: Constellation, N: int, N_f: int) -> np.ndarray:
    """Map a bit stream to N symbols.

    The first ``N_f`` symbols take full ``log2|M|``-bit blocks (leading bit
    is the sign, the rest index the half-set). The remaining symbols take
    ``log2|M| - 1`` bits each and land in the half-set; their sign is left
    for sign selection.
    """
    bits = np.asarray(bits, dtype=int).ravel()
    if not 0 <= N_f <= N:
        raise ArgumentError(f"N_f={N_f} outside [0, {N}]")
    if np.any((bits != 0) & (bits != 1)):
        raise ArgumentError("bits must be 0 or 1")
    m = constellation.bits_per_symbol
    expected = N_f * m + (N - N_f) * (m - 1)
    if bits.size != expected:
        raise ArgumentError(f"expected {expected} bits, got {bits.size}")
    out = np.empty(N, dtype=complex)
    pos = 0
    for k in range(N):
        if k < N_f:
            sign = -1.0 if bits[pos] else 1.0
            pos += 1
        else:
            sign = 1.0
        idx = _bits_to_int(bits[pos:pos + m - 1])
        pos += m - 1
        out[k] = sign * constellation.half_set[idx]
    return out


def decode_symbols(received, constellation: Constellation, N: int, N_f: int) -> np.ndarray:
    """Invert :func:`encode_bits`; signs of symbols at index >= N_f are ignored."""
    received = np.asarray(received, dtype=complex).ravel()
    if received.size != N:
        raise ArgumentError(f"expected {N} symbols, got {received.size}")
    m = constellation.bits_per_symbol
    half = constellation.half_set
    tol = 1e-9 * constellation.max_magnitude
    bits: list[int] = []
    for k, r in enumerate(received):
        plus = np.abs(half - r) <= tol
        minus = np.abs(half + r) <= tol
        if plus.any():
            idx, sign_bit = int(np.argmax(plus)), 0
        elif minus.any():
            idx, sign_bit = int(np.argmax(minus)), 1
        else:
            raise DecodeError(f"symbol {r!r} at index {k} is not a constellation point")
        if k < N_f:
            bits.append(sign_bit)
        bits.extend(_int_to_bits(idx, m - 1))
    return np.array(bits, dtype=int)


def rate_loss(N_s: int, N: int, M_size: int) -> float:
    """Fraction of transmitted bits spent on sign selection."""
    if N < 1 or not 0 <= N_s <= N:
        raise ArgumentError(f"need 0 <= N_s <= N, got N_s={N_s}, N={N}")
    if M_size < 4 or M_size & (M_size - 1):
        raise ArgumentError(f"M_size must be a power of two >= 4, got {M_size}")
    return N_s / (N * np.log2(M_size))
