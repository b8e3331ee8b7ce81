"""Complex baseband building blocks for the OFDM link.

Power convention: ``|sample|**2`` is instantaneous power in watts, so a constant
amplitude of ``sqrt(1e-3)`` is 0 dBm.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from fdsic.errors import InvalidInputError

#: Gray labelling of one 16-QAM rail: two bits -> amplitude level.
_GRAY_LEVELS = {(0, 0): -3, (0, 1): -1, (1, 1): 1, (1, 0): 3}
_QAM16_SCALE = 1.0 / np.sqrt(10.0)


def dbm_to_watts(p_dbm):
    return 1e-3 * 10.0 ** (np.asarray(p_dbm, dtype=float) / 10.0)


def watts_to_dbm(p_w):
    with np.errstate(divide="ignore"):
        return 10.0 * np.log10(np.asarray(p_w, dtype=float) / 1e-3)


@dataclass(frozen=True, eq=False)
class ComplexSignal:
    """Complex baseband samples tagged with their sample rate.

    The sample array is copied to ``complex128`` and made read-only, so a
    ``ComplexSignal`` can be shared freely.
    """

    samples: np.ndarray
    sample_rate_hz: float

    def __post_init__(self):
        s = np.array(self.samples, dtype=np.complex128).reshape(-1)
        if not np.all(np.isfinite(s)):
            raise InvalidInputError("signal contains NaN or Inf samples")
        if not self.sample_rate_hz > 0:
            raise InvalidInputError(f"sample rate must be positive, got {self.sample_rate_hz}")
        s.flags.writeable = False
        object.__setattr__(self, "samples", s)
        object.__setattr__(self, "sample_rate_hz", float(self.sample_rate_hz))

    def __len__(self):
        return self.samples.size

    def with_samples(self, samples) -> "ComplexSignal":
        return ComplexSignal(samples, self.sample_rate_hz)

    @property
    def power_w(self) -> float:
        if self.samples.size == 0:
            return 0.0
        return float(np.mean(np.abs(self.samples) ** 2))


class Constellation(str, Enum):
    QAM16 = "QAM16"


@dataclass(frozen=True)
class OfdmConfig:
    """OFDM numerology. ``cp_len_samples`` is counted at the base rate."""

    n_subcarriers: int = 64
    n_data_subcarriers: int = 48
    cp_len_samples: int = 16
    oversampling: int = 4
    constellation: Constellation = Constellation.QAM16
    base_rate_hz: float = 20e6

    def __post_init__(self):
        if self.n_subcarriers < 1 or self.n_data_subcarriers < 1:
            raise InvalidInputError("subcarrier counts must be positive")
        if self.n_data_subcarriers > self.n_subcarriers - 1:
            # one bin is reserved for the DC null
            raise InvalidInputError("n_data_subcarriers must leave room for the DC null")
        if self.n_data_subcarriers % 2:
            raise InvalidInputError("n_data_subcarriers must be even (symmetric around DC)")
        if self.cp_len_samples < 0:
            raise InvalidInputError("cp_len_samples must be non-negative")
        if self.oversampling < 1:
            raise InvalidInputError("oversampling must be >= 1")
        if not self.base_rate_hz > 0:
            raise InvalidInputError("base_rate_hz must be positive")
        object.__setattr__(self, "constellation", Constellation(self.constellation))

    @property
    def fft_size(self) -> int:
        return self.n_subcarriers * self.oversampling

    @property
    def cp_len(self) -> int:
        """Cyclic prefix length at the oversampled rate."""
        return self.cp_len_samples * self.oversampling

    @property
    def symbol_len(self) -> int:
        """Samples per OFDM symbol at the oversampled rate, cyclic prefix included."""
        return self.fft_size + self.cp_len

    @property
    def sample_rate_hz(self) -> float:
        return self.base_rate_hz * self.oversampling

    @property
    def data_bins(self) -> np.ndarray:
        """FFT bin indices of the active subcarriers, lowest frequency first, DC excluded."""
        half = self.n_data_subcarriers // 2
        neg = np.arange(self.fft_size - half, self.fft_size)
        pos = np.arange(1, half + 1)
        return np.concatenate([neg, pos])

    @property
    def _scale(self) -> float:
        # unit-power symbols -> unit average power over the FFT body
        return self.fft_size / np.sqrt(self.n_data_subcarriers)


def qam16_map(bits) -> np.ndarray:
    """Map bits to Gray-labelled 16-QAM symbols with unit average power.

    Each group of four bits ``b0 b1 b2 b3`` selects the in-phase level from
    ``b0 b1`` and the quadrature level from ``b2 b3``; ``0000`` is the corner
    ``(-3 - 3j) / sqrt(10)``.
    """
    b = np.asarray(bits, dtype=np.int64).reshape(-1)
    if b.size % 4:
        raise InvalidInputError(f"bit count {b.size} is not a multiple of 4")
    if np.any((b != 0) & (b != 1)):
        raise InvalidInputError("bits must be 0 or 1")
    groups = b.reshape(-1, 4)
    lut = np.zeros((2, 2))
    for (hi, lo), level in _GRAY_LEVELS.items():
        lut[hi, lo] = level
    i = lut[groups[:, 0], groups[:, 1]]
    q = lut[groups[:, 2], groups[:, 3]]
    return (i + 1j * q) * _QAM16_SCALE


def random_qam16(n_symbols: int, rng: np.random.Generator) -> np.ndarray:
    return qam16_map(rng.integers(0, 2, size=4 * n_symbols))


def ofdm_modulate(symbols, cfg: OfdmConfig) -> ComplexSignal:
    """Modulate data symbols onto consecutive OFDM symbols with cyclic prefix.

    A fixed scale is applied so that unit-power data yields unit average power
    over each FFT body; this keeps the transform exactly invertible by
    :func:`ofdm_demodulate`.
    """
    d = np.asarray(symbols, dtype=np.complex128).reshape(-1)
    if d.size % cfg.n_data_subcarriers:
        raise InvalidInputError(
            f"{d.size} symbols is not a multiple of {cfg.n_data_subcarriers} data subcarriers"
        )
    n_sym = d.size // cfg.n_data_subcarriers
    grid = np.zeros((n_sym, cfg.fft_size), dtype=np.complex128)
    grid[:, cfg.data_bins] = d.reshape(n_sym, cfg.n_data_subcarriers) * cfg._scale
    body = np.fft.ifft(grid, axis=1)
    if cfg.cp_len:
        body = np.concatenate([body[:, -cfg.cp_len:], body], axis=1)
    return ComplexSignal(body.reshape(-1), cfg.sample_rate_hz)


def ofdm_demodulate(sig: ComplexSignal, cfg: OfdmConfig) -> np.ndarray:
    x = sig.samples
    if x.size % cfg.symbol_len:
        raise InvalidInputError(
            f"signal length {x.size} is not a multiple of the OFDM symbol length {cfg.symbol_len}"
        )
    blocks = x.reshape(-1, cfg.symbol_len)[:, cfg.cp_len:]
    grid = np.fft.fft(blocks, axis=1)
    return (grid[:, cfg.data_bins] / cfg._scale).reshape(-1)


def random_ofdm(n_symbols: int, cfg: OfdmConfig, rng: np.random.Generator) -> ComplexSignal:
    """OFDM waveform carrying ``n_symbols`` OFDM symbols of random 16-QAM data."""
    return ofdm_modulate(random_qam16(n_symbols * cfg.n_data_subcarriers, rng), cfg)


def fir_filter(x: ComplexSignal, h) -> ComplexSignal:
    """Linear convolution with zero pre-history, truncated to the input length."""
    taps = np.asarray(h, dtype=np.complex128).reshape(-1)
    if taps.size == 0:
        raise InvalidInputError("filter taps must be non-empty")
    y = np.convolve(x.samples, taps)[: len(x)]
    return x.with_samples(y)


def measure_power_dbm(x: ComplexSignal) -> float:
    """Mean power in dBm; ``-inf`` for an all-zero signal."""
    if len(x) == 0:
        raise InvalidInputError("cannot measure the power of an empty signal")
    return float(watts_to_dbm(x.power_w))


def set_power_dbm(x: ComplexSignal, target_dbm: float) -> ComplexSignal:
    p = x.power_w
    if p <= 0:
        raise InvalidInputError("cannot scale a zero-power signal")
    return x.with_samples(x.samples * np.sqrt(dbm_to_watts(target_dbm) / p))


def papr_db(x: ComplexSignal) -> float:
    p = x.power_w
    if p <= 0:
        raise InvalidInputError("PAPR undefined for a zero-power signal")
    return float(10.0 * np.log10(np.max(np.abs(x.samples) ** 2) / p))
