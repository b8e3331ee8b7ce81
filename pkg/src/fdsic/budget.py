"""Closed-form receiver power budget at the detector input versus transmit power."""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from fdsic.dsp import dbm_to_watts, watts_to_dbm
from fdsic.errors import InvalidInputError

THERMAL_DENSITY_DBM_HZ = -174.0


class DigitalLinearPolicy(str, Enum):
    TRACK_NOISE_FLOOR = "track-noise-floor"


@dataclass(frozen=True)
class BudgetParams:
    bandwidth_hz: float = 12.5e6
    noise_figure_db: float = 4.1
    snr_requirement_db: float = 10.0
    received_signal_power_dbm: float = -83.9
    antenna_separation_db: float = 40.0
    rf_cancellation_db: float = 30.0
    pa_gain_db: float = 20.0
    pa_iip3_dbm: float = 15.0
    adc_bits: int = 12
    papr_db: float = 10.0
    digital_linear_cancellation_policy: DigitalLinearPolicy = DigitalLinearPolicy.TRACK_NOISE_FLOOR

    def __post_init__(self):
        if not self.bandwidth_hz > 0:
            raise InvalidInputError("bandwidth must be positive")
        for name in ("noise_figure_db", "snr_requirement_db", "received_signal_power_dbm",
                     "antenna_separation_db", "rf_cancellation_db", "pa_gain_db", "pa_iip3_dbm", "papr_db"):
            if not math.isfinite(getattr(self, name)):
                raise InvalidInputError(f"{name} must be finite")
        object.__setattr__(
            self, "digital_linear_cancellation_policy",
            DigitalLinearPolicy(self.digital_linear_cancellation_policy),
        )

    @property
    def sensitivity_dbm(self) -> float:
        return noise_floor_dbm(self.bandwidth_hz, self.noise_figure_db) + self.snr_requirement_db


@dataclass(frozen=True)
class PowerLevels:
    soi_dbm: float
    linear_si_dbm: float
    nonlinear_si_dbm: float
    thermal_noise_dbm: float
    quantization_noise_dbm: float

    def as_row(self):
        return (self.soi_dbm, self.linear_si_dbm, self.nonlinear_si_dbm,
                self.thermal_noise_dbm, self.quantization_noise_dbm)


def noise_floor_dbm(bandwidth_hz: float, noise_figure_db: float) -> float:
    if not bandwidth_hz > 0:
        raise InvalidInputError("bandwidth must be positive")
    return THERMAL_DENSITY_DBM_HZ + 10.0 * math.log10(bandwidth_hz) + noise_figure_db


def sqnr_db(adc_bits: int, papr_db: float) -> float:
    """Quantization SNR of a full-scale-loaded uniform quantizer for a waveform of the given PAPR."""
    return 6.02 * adc_bits + 1.76 - papr_db


def compute_levels(p_tx_dbm: float, params: BudgetParams) -> PowerLevels:
    """Signal and interference powers at the detector input.

    Analog stages (antenna separation, RF cancellation) attenuate linear and
    nonlinear SI equally. The PA third-order product uses the two-tone
    relation referred to the PA input. Digital linear cancellation removes
    just enough linear SI to sit at the thermal floor.
    """
    p = params
    analog = p.antenna_separation_db + p.rf_cancellation_db
    thermal = noise_floor_dbm(p.bandwidth_hz, p.noise_figure_db)

    linear_pre_digital = p_tx_dbm - analog
    linear = min(linear_pre_digital, thermal)

    p_in = p_tx_dbm - p.pa_gain_db
    im3_out = 3.0 * p_in - 2.0 * p.pa_iip3_dbm + p.pa_gain_db
    nonlinear = im3_out - analog

    # AGC loads the ADC with everything present before digital cancellation
    total_w = dbm_to_watts([p.received_signal_power_dbm, linear_pre_digital, nonlinear, thermal]).sum()
    quant = float(watts_to_dbm(total_w)) - sqnr_db(p.adc_bits, p.papr_db)
    return PowerLevels(
        soi_dbm=p.received_signal_power_dbm,
        linear_si_dbm=linear,
        nonlinear_si_dbm=nonlinear,
        thermal_noise_dbm=thermal,
        quantization_noise_dbm=quant,
    )


def budget_table(tx_dbm, params: BudgetParams) -> np.ndarray:
    """One row per transmit power: ``tx, soi, linear_si, nonlinear_si, thermal, quantization``."""
    return np.array([(t, *compute_levels(t, params).as_row()) for t in np.asarray(tx_dbm, dtype=float)])


def nonlinear_crossover_dbm(params: BudgetParams) -> float:
    """Transmit power where the PA third-order SI reaches the thermal floor."""
    thermal = noise_floor_dbm(params.bandwidth_hz, params.noise_figure_db)
    analog = params.antenna_separation_db + params.rf_cancellation_db
    # thermal = 3*(tx - G) - 2*IIP3 + G - analog, solved for tx
    return (thermal + analog + 2.0 * params.pa_iip3_dbm + 2.0 * params.pa_gain_db) / 3.0
