"""Analog transmitter and receiver impairments used as simulation ground truth."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from fdsic.dsp import ComplexSignal, dbm_to_watts, fir_filter, watts_to_dbm
from fdsic.errors import ConfigurationError, InvalidInputError

#: Energy outside the first tap of the PA memory filter. Kept small: the
#: canceller spans only five taps, and the PA memory convolves with the SI
#: channel.
DEFAULT_MEMORY_TAIL_ENERGY = 5e-4
_MEMORY_DECAY = 0.5
_ONE_DB = 10.0 ** (-1.0 / 20.0)


@dataclass(frozen=True)
class PAParams:
    """PA figures of merit.

    ``iip3_dbm`` is input referred. ``p1db_dbm`` is quoted at the output, so
    the input-referred compression point is ``p1db_dbm - gain_db``.
    """

    gain_db: float = 20.0
    iip3_dbm: float = 15.0
    p1db_dbm: float = 24.5
    memory_len: int = 6

    def __post_init__(self):
        if self.memory_len < 1:
            raise InvalidInputError("memory_len must be >= 1")

    @property
    def input_p1db_dbm(self) -> float:
        return self.p1db_dbm - self.gain_db


@dataclass(frozen=True, eq=False)
class WienerPA:
    """Memory FIR followed by ``a1*u + a3*|u|^2*u + a5*|u|^4*u``.

    The polynomial is applied as is at every drive level. Past the peak of
    its AM/AM curve (``saturation_input_w``) the output folds back.
    """

    memory_fir: np.ndarray
    poly_coeffs: tuple

    def __post_init__(self):
        fir = np.array(self.memory_fir, dtype=np.complex128).reshape(-1)
        fir.flags.writeable = False
        object.__setattr__(self, "memory_fir", fir)
        object.__setattr__(self, "poly_coeffs", tuple(complex(a) for a in self.poly_coeffs))
        if len(self.poly_coeffs) != 3:
            raise InvalidInputError("poly_coeffs must be (a1, a3, a5)")
        if self.poly_coeffs[0] == 0:
            raise InvalidInputError("a1 must be non-zero")

    @property
    def saturation_input_w(self) -> float:
        """Envelope power where the output amplitude peaks; ``inf`` if it never does."""
        a1, a3, a5 = self.poly_coeffs
        # |y|^2 = A*|G(A)|^2 with G(A) = a1 + a3*A + a5*A^2; find its first stationary point
        c = [abs(a1) ** 2, 2 * (a1 * a3.conjugate()).real,
             abs(a3) ** 2 + 2 * (a1 * a5.conjugate()).real,
             2 * (a3 * a5.conjugate()).real, abs(a5) ** 2]
        deriv = [(k + 1) * ck for k, ck in enumerate(c)]
        roots = np.roots(deriv[::-1])
        real = roots[(np.abs(roots.imag) < 1e-9 * np.abs(roots)) & (roots.real > 0)].real
        return float(real.min()) if real.size else np.inf

    def polynomial(self, u: np.ndarray) -> np.ndarray:
        a1, a3, a5 = self.poly_coeffs
        m2 = np.abs(u) ** 2
        return u * (a1 + m2 * (a3 + a5 * m2))


def _memory_fir(memory_len: int, seed: int, tail_energy: float) -> np.ndarray:
    if memory_len == 1:
        return np.ones(1, dtype=np.complex128)
    rng = np.random.default_rng(seed)
    k = np.arange(1, memory_len)
    mag = _MEMORY_DECAY ** k * (1.0 + 0.3 * np.abs(rng.standard_normal(k.size)))
    tail = mag * np.exp(1j * 0.3 * rng.standard_normal(k.size))
    tail *= np.sqrt(tail_energy / np.sum(np.abs(tail) ** 2))
    g = np.concatenate([[np.sqrt(1.0 - tail_energy)], tail])
    # reflect any zero outside the unit circle to make the filter minimum phase
    zeros = np.roots(g)
    outside = np.abs(zeros) >= 1.0
    if np.any(outside):
        zeros[outside] = 1.0 / np.conj(zeros[outside])
        g = np.poly(zeros) * g[0]
        g /= np.linalg.norm(g)
    return g


def design_pa(p: PAParams, seed: int, tail_energy: float = DEFAULT_MEMORY_TAIL_ENERGY) -> WienerPA:
    """Realize a Wiener PA hitting the requested gain, IIP3 and 1 dB compression.

    The third-order coefficient follows from the two-tone relation
    ``IIP3 = |a1 / a3|`` (per-tone input power in watts). The fifth-order
    coefficient is solved so the single-tone gain is 1 dB below ``a1`` exactly
    at the input-referred compression power.
    """
    if not 0.0 <= tail_energy < 0.1:
        raise ConfigurationError("memory tail energy must lie in [0, 0.1)")
    a1 = 10.0 ** (p.gain_db / 20.0)
    a3 = -a1 / dbm_to_watts(p.iip3_dbm)
    a_sq = dbm_to_watts(p.input_p1db_dbm)

    def gain_error(a5):
        # real coefficients: the signed gain ratio keeps the root bracketed
        return (a1 + a3 * a_sq + a5 * a_sq**2) / a1 - _ONE_DB

    span = 100.0 * a1 / a_sq**2
    try:
        a5 = brentq(gain_error, -span, span, xtol=1e-15 * span, rtol=1e-14)
    except ValueError:
        raise ConfigurationError(
            f"no fifth-order term realizes IIP3={p.iip3_dbm} dBm with P1dB={p.p1db_dbm} dBm"
        ) from None

    # the compression must be reached monotonically, not after a gain bump
    grid = np.linspace(0.0, a_sq, 2001)[:-1]
    ratio = np.abs(a1 + a3 * grid + a5 * grid**2) / a1
    if np.any(ratio <= _ONE_DB) or np.any(np.diff(ratio) > 0):
        raise ConfigurationError(
            f"infeasible PA: (IIP3={p.iip3_dbm} dBm, P1dB={p.p1db_dbm} dBm) gives non-monotone compression"
        )
    return WienerPA(_memory_fir(p.memory_len, seed, tail_energy), (a1, a3, a5))


def pa_apply(pa: WienerPA, x: ComplexSignal) -> ComplexSignal:
    u = fir_filter(x, pa.memory_fir).samples
    return x.with_samples(pa.polynomial(u))


def measure_two_tone_iip3_dbm(poly, tone_dbm=(-40.0, -35.0, -30.0), n_fft: int = 1024) -> float:
    """Input-referred IIP3 of a memoryless complex nonlinearity by a two-tone test.

    Two equal tones sit on FFT bins; the fundamental (slope 1) and lower IM3
    product (slope 3) are fitted in dB against per-tone input power and
    intersected.
    """
    b1, b2 = 40, 45
    n = np.arange(n_fft)
    p_in, p_fund, p_im3 = [], [], []
    for level in tone_dbm:
        amp = np.sqrt(dbm_to_watts(level))
        u = amp * (np.exp(2j * np.pi * b1 * n / n_fft) + np.exp(2j * np.pi * b2 * n / n_fft))
        spec = np.fft.fft(poly(u)) / n_fft
        p_in.append(level)
        p_fund.append(watts_to_dbm(abs(spec[b1]) ** 2))
        p_im3.append(watts_to_dbm(abs(spec[2 * b1 - b2]) ** 2))
    p_in = np.asarray(p_in)
    # intercepts of the fixed-slope lines
    c1 = np.mean(np.asarray(p_fund) - p_in)
    c3 = np.mean(np.asarray(p_im3) - 3.0 * p_in)
    return float((c1 - c3) / 2.0)


def measure_input_p1db_dbm(poly, lo_dbm: float = -30.0, hi_dbm: float = 20.0, step_db: float = 0.01) -> float:
    """Input power where the single-tone AM/AM gain first falls 1 dB below small-signal gain."""
    levels = np.arange(lo_dbm, hi_dbm + step_db, step_db)
    n = np.arange(64)
    tone = np.exp(2j * np.pi * 3 * n / 64)
    gains = []
    for level in levels:
        amp = np.sqrt(dbm_to_watts(level))
        y = poly(amp * tone)
        gains.append(20.0 * np.log10(np.sqrt(np.mean(np.abs(y) ** 2)) / amp))
    gains = np.asarray(gains)
    drop = gains[0] - gains
    idx = np.flatnonzero(drop >= 1.0)
    if idx.size == 0:
        raise ValueError("no 1 dB compression inside the sweep range")
    i = idx[0]
    # linear interpolation between the bracketing sweep points
    frac = (1.0 - drop[i - 1]) / (drop[i] - drop[i - 1])
    return float(levels[i - 1] + frac * step_db)


def awgn(x: ComplexSignal, noise_dbm: float, seed: int) -> ComplexSignal:
    """Add circularly-symmetric white Gaussian noise of total power ``noise_dbm``."""
    rng = np.random.default_rng(seed)
    sigma = np.sqrt(dbm_to_watts(noise_dbm) / 2.0)
    w = sigma * (rng.standard_normal(len(x)) + 1j * rng.standard_normal(len(x)))
    return x.with_samples(x.samples + w)


@dataclass(frozen=True)
class AdcParams:
    bits: int = 12
    vrange: float = 4.5

    def __post_init__(self):
        if self.bits < 1:
            raise InvalidInputError("ADC needs at least one bit")
        if not self.vrange > 0:
            raise InvalidInputError("ADC voltage range must be positive")

    @property
    def step(self) -> float:
        return self.vrange / 2**self.bits

    @property
    def full_scale(self) -> float:
        return self.vrange / 2.0


def agc_gain(x: ComplexSignal, adc: AdcParams, papr_db: float) -> float:
    """Linear gain mapping the expected waveform peak (rms plus PAPR) to ADC full scale."""
    p = x.power_w
    if p <= 0:
        raise InvalidInputError("AGC needs a signal with non-zero power")
    return float(adc.full_scale / (np.sqrt(p) * 10.0 ** (papr_db / 20.0)))


def _quantize_rail(v: np.ndarray, adc: AdcParams) -> np.ndarray:
    step = adc.step
    top = adc.full_scale - step / 2.0
    q = step * (np.floor(v / step) + 0.5)
    return np.clip(q, -top, top)


def adc_quantize(x: ComplexSignal, adc: AdcParams) -> ComplexSignal:
    """Mid-rise uniform quantizer on I and Q, saturating at full scale."""
    s = x.samples
    return x.with_samples(_quantize_rail(s.real, adc) + 1j * _quantize_rail(s.imag, adc))
