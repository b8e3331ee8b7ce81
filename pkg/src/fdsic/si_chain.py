"""Analog self-interference path: multipath TX->RX coupling channel and RF canceller."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from fdsic.dsp import ComplexSignal, fir_filter
from fdsic.errors import ConfigurationError, InvalidInputError


@dataclass(frozen=True)
class SIChannelSpec:
    """Coupling channel description.

    ``k_factor_db`` is the main-tap to multipath power ratio; ``inf`` gives a
    single-path channel. ``antenna_separation_db`` is the total path loss.
    """

    n_taps: int = 5
    k_factor_db: float = 35.8
    antenna_separation_db: float = 40.0
    seed: int = 0

    def __post_init__(self):
        if self.n_taps < 1:
            raise InvalidInputError("n_taps must be >= 1")
        if not self.antenna_separation_db > 0:
            raise InvalidInputError("antenna separation must be positive")


@dataclass(frozen=True, eq=False)
class SIChannel:
    h: np.ndarray
    a: np.ndarray

    def __post_init__(self):
        h = np.array(self.h, dtype=np.complex128).reshape(-1)
        a = np.array(self.a, dtype=np.complex128).reshape(-1)
        if h.shape != a.shape:
            raise InvalidInputError("channel and canceller must have the same number of taps")
        h.flags.writeable = False
        a.flags.writeable = False
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "a", a)

    @property
    def effective(self) -> np.ndarray:
        """Net coupling response after RF cancellation, ``h - a``."""
        return self.h - self.a

    @property
    def k_factor_db(self) -> float:
        multipath = np.sum(np.abs(self.h[1:]) ** 2)
        with np.errstate(divide="ignore"):
            return float(10 * np.log10(abs(self.h[0]) ** 2 / multipath))

    def rf_reduction_db(self) -> float:
        return float(10 * np.log10(np.sum(np.abs(self.h) ** 2) / np.sum(np.abs(self.effective) ** 2)))


def gen_si_channel(spec: SIChannelSpec) -> SIChannel:
    """Draw a coupling channel with exact K-factor and total power.

    The main tap is real and positive; the remaining taps are i.i.d. circular
    Gaussian draws rescaled as a group.
    """
    single_path = math.isinf(spec.k_factor_db) and spec.k_factor_db > 0
    if spec.n_taps == 1 and not single_path:
        raise ConfigurationError("a one-tap channel cannot have a finite K-factor")
    total = 10.0 ** (-spec.antenna_separation_db / 10.0)
    h = np.zeros(spec.n_taps, dtype=np.complex128)
    if single_path:
        h[0] = np.sqrt(total)
        return SIChannel(h, np.zeros_like(h))
    k_lin = 10.0 ** (spec.k_factor_db / 10.0)
    main = total * k_lin / (1.0 + k_lin)
    rng = np.random.default_rng(spec.seed)
    draws = rng.standard_normal(spec.n_taps - 1) + 1j * rng.standard_normal(spec.n_taps - 1)
    draws *= np.sqrt((total - main) / np.sum(np.abs(draws) ** 2))
    h[0] = np.sqrt(main)
    h[1:] = draws
    return SIChannel(h, np.zeros_like(h))


def max_rf_reduction_db(ch: SIChannel) -> float:
    """Best reduction a main-tap-only canceller can reach: the multipath floor."""
    multipath = np.sum(np.abs(ch.h[1:]) ** 2)
    if multipath == 0:
        return math.inf
    return float(10 * np.log10(np.sum(np.abs(ch.h) ** 2) / multipath))


def tune_rf_canceller(ch: SIChannel, target_reduction_db: float) -> SIChannel:
    """Set ``a0 = (1 - delta) * h0`` so total SI power drops by ``target_reduction_db``.

    ``delta`` is the residual amplitude mismatch on the main tap and is found
    by bracketed root search on the achieved reduction.
    """
    if target_reduction_db < 0:
        raise InvalidInputError("RF cancellation target must be non-negative")
    limit = max_rf_reduction_db(ch)
    if target_reduction_db >= limit:
        raise ConfigurationError(
            f"RF cancellation of {target_reduction_db} dB is not reachable by main-tap "
            f"cancellation; the multipath floor allows at most {limit:.2f} dB"
        )
    a = np.zeros_like(ch.h)
    if target_reduction_db == 0:
        return SIChannel(ch.h, a)
    total = np.sum(np.abs(ch.h) ** 2)
    multipath = total - abs(ch.h[0]) ** 2

    def reduction_error(delta):
        residual = (delta * abs(ch.h[0])) ** 2 + multipath
        return 10 * np.log10(total / residual) - target_reduction_db

    delta = brentq(reduction_error, 0.0, 1.0, xtol=1e-15, rtol=1e-15)
    a[0] = (1.0 - delta) * ch.h[0]
    return SIChannel(ch.h, a)


def si_path_apply(ch: SIChannel, x_pa: ComplexSignal) -> ComplexSignal:
    """SI after the RF canceller: ``(h - a) * x_pa`` with the bulk delay removed."""
    return fir_filter(x_pa, ch.effective)
