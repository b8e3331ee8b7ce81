"""Monte Carlo simulation of the full-duplex link and its parameter sweeps."""
from __future__ import annotations

import configparser
import csv
import dataclasses
import functools
import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from enum import Enum

import numpy as np

from fdsic.budget import BudgetParams, budget_table, noise_floor_dbm
from fdsic.canceller import PHConfig, fit_canceller
from fdsic.dsp import ComplexSignal, OfdmConfig, random_ofdm, set_power_dbm, watts_to_dbm
from fdsic.errors import ConfigurationError, InvalidInputError
from fdsic.impairments import (
    DEFAULT_MEMORY_TAIL_ENERGY,
    AdcParams,
    PAParams,
    WienerPA,
    adc_quantize,
    agc_gain,
    awgn,
    design_pa,
    pa_apply,
)
from fdsic.si_chain import SIChannelSpec, gen_si_channel, si_path_apply, tune_rf_canceller

SINR_CAP_DB = 60.0
CANCELLATION_CAP_DB = 100.0
#: P1dB tracks IIP3 by this offset when sweeping IIP3.
P1DB_ABOVE_IIP3_DB = 9.5

# independent random streams inside one realization
_TX, _SOI, _CHANNEL, _NOISE, _PA = range(1, 6)


class CancellerMode(str, Enum):
    NONE = "none"
    LINEAR = "linear"
    NONLINEAR = "nonlinear"


class PAModel(str, Enum):
    WIENER = "wiener"          # memory FIR then polynomial (mismatched to the canceller)
    HAMMERSTEIN = "hammerstein"  # polynomial then memory FIR (exactly parallel Hammerstein)


class SweepVariable(str, Enum):
    TX_POWER = "tx_power"
    IIP3 = "iip3"
    ANTENNA_SEPARATION = "antenna_separation"


@dataclass(frozen=True)
class Scenario:
    """Complete experiment description; field names double as scenario-file keys.

    ``antenna_separation_db = inf`` removes self-interference altogether, which
    is how the no-SI reference is produced.
    """

    # link budget
    bandwidth_hz: float = 12.5e6
    noise_figure_db: float = 4.1
    snr_requirement_db: float = 10.0
    soi_power_dbm: float = -83.9
    antenna_separation_db: float = 40.0
    rf_cancellation_db: float = 30.0
    papr_db: float = 10.0
    # power amplifier
    pa_model: PAModel = PAModel.WIENER
    pa_gain_db: float = 20.0
    pa_iip3_dbm: float = 15.0
    pa_p1db_dbm: float = 24.5
    pa_memory_len: int = 6
    pa_memory_tail_energy: float = DEFAULT_MEMORY_TAIL_ENERGY
    # ADC
    adc_bits: int = 12
    adc_vrange_v: float = 4.5
    # OFDM waveform
    n_subcarriers: int = 64
    n_data_subcarriers: int = 48
    cp_len_samples: int = 16
    oversampling: int = 4
    base_rate_hz: float = 20e6
    # SI channel
    si_channel_taps: int = 5
    si_k_factor_db: float = 35.8
    # canceller
    canceller_mode: CancellerMode = CancellerMode.NONLINEAR
    canceller_order: int = 5
    canceller_pre_taps: int = 2
    canceller_post_taps: int = 2
    canceller_align: bool = True
    # experiment
    tx_power_dbm: float = 10.0
    n_symbols_per_realization: int = 20
    n_estimation_samples: int = 3200
    n_realizations: int = 50
    master_seed: int = 0
    # component switches, used for idealized runs
    thermal_noise: bool = True
    soi: bool = True
    adc: bool = True

    def __post_init__(self):
        try:
            object.__setattr__(self, "canceller_mode", CancellerMode(self.canceller_mode))
            object.__setattr__(self, "pa_model", PAModel(self.pa_model))
        except ValueError as exc:
            raise ConfigurationError(str(exc)) from None
        if self.n_realizations < 1:
            raise ConfigurationError("n_realizations must be >= 1")
        if self.n_symbols_per_realization < 1:
            raise ConfigurationError("n_symbols_per_realization must be >= 1")
        try:
            n_total = self.n_symbols_per_realization * self.ofdm.symbol_len
            self.pa_params, self.adc_params, self.ph_config
        except InvalidInputError as exc:
            raise ConfigurationError(str(exc)) from None
        if not 1 <= self.n_estimation_samples <= n_total:
            raise ConfigurationError(
                f"n_estimation_samples={self.n_estimation_samples} must lie in [1, {n_total}]"
            )

    @property
    def si_enabled(self) -> bool:
        return not math.isinf(self.antenna_separation_db)

    @property
    def ofdm(self) -> OfdmConfig:
        return OfdmConfig(self.n_subcarriers, self.n_data_subcarriers, self.cp_len_samples,
                          self.oversampling, base_rate_hz=self.base_rate_hz)

    @property
    def pa_params(self) -> PAParams:
        return PAParams(self.pa_gain_db, self.pa_iip3_dbm, self.pa_p1db_dbm, self.pa_memory_len)

    @property
    def adc_params(self) -> AdcParams:
        return AdcParams(self.adc_bits, self.adc_vrange_v)

    @property
    def ph_config(self) -> PHConfig:
        return PHConfig(self.canceller_order, self.canceller_pre_taps, self.canceller_post_taps)

    @property
    def budget_params(self) -> BudgetParams:
        return BudgetParams(
            bandwidth_hz=self.bandwidth_hz,
            noise_figure_db=self.noise_figure_db,
            snr_requirement_db=self.snr_requirement_db,
            received_signal_power_dbm=self.soi_power_dbm,
            antenna_separation_db=self.antenna_separation_db,
            rf_cancellation_db=self.rf_cancellation_db,
            pa_gain_db=self.pa_gain_db,
            pa_iip3_dbm=self.pa_iip3_dbm,
            adc_bits=self.adc_bits,
            papr_db=self.papr_db,
        )

    def channel_spec(self, seed: int) -> SIChannelSpec:
        return SIChannelSpec(self.si_channel_taps, self.si_k_factor_db, self.antenna_separation_db, seed)

    @property
    def thermal_floor_dbm(self) -> float:
        return noise_floor_dbm(self.bandwidth_hz, self.noise_figure_db)

    def replace(self, **changes) -> "Scenario":
        return dataclasses.replace(self, **changes)


# ---------------------------------------------------------------------------
# Scenario files

_SECTION = "scenario"


def _coerce(field: dataclasses.Field, raw: str):
    kind = field.type if isinstance(field.type, str) else field.type.__name__
    text = raw.strip()
    if kind == "bool":
        lowered = text.lower()
        if lowered in ("1", "true", "yes", "on"):
            return True
        if lowered in ("0", "false", "no", "off"):
            return False
        raise ValueError(f"not a boolean: {raw!r}")
    if kind == "int":
        return int(text)
    if kind == "float":
        return float(text)
    return text


def parse_scenario(text: str) -> Scenario:
    """Parse ``key = value`` lines (``#`` comments allowed). Unknown keys are errors."""
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"), interpolation=None)
    parser.optionxform = str
    try:
        parser.read_string(f"[{_SECTION}]\n" + text)
    except configparser.Error as exc:
        raise ConfigurationError(f"malformed scenario file: {exc}") from None
    fields = {f.name: f for f in dataclasses.fields(Scenario)}
    values = {}
    for key, raw in parser.items(_SECTION):
        if key not in fields:
            raise ConfigurationError(f"unknown scenario key {key!r}")
        try:
            values[key] = _coerce(fields[key], raw)
        except ValueError as exc:
            raise ConfigurationError(f"bad value for {key}: {exc}") from None
    return Scenario(**values)


def load_scenario(path) -> Scenario:
    try:
        with open(path, encoding="utf-8") as fh:
            return parse_scenario(fh.read())
    except OSError as exc:
        raise ConfigurationError(f"cannot read scenario file: {exc}") from None


def format_scenario(sc: Scenario) -> str:
    lines = []
    for f in dataclasses.fields(Scenario):
        v = getattr(sc, f.name)
        lines.append(f"{f.name} = {v.value if isinstance(v, Enum) else v}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Metrics


def sinr_db(s_hat: ComplexSignal, s_ref: ComplexSignal) -> float:
    """SINR after projecting ``s_hat`` onto the clean reference; a pure gain is not distortion."""
    if len(s_hat) != len(s_ref):
        raise InvalidInputError(f"length mismatch: {len(s_hat)} vs {len(s_ref)}")
    ref, est = s_ref.samples, s_hat.samples
    ref_energy = np.vdot(ref, ref).real
    if ref_energy == 0:
        raise InvalidInputError("SINR reference has zero power")
    alpha = np.vdot(ref, est) / ref_energy
    err = np.vdot(est - alpha * ref, est - alpha * ref).real
    sig = abs(alpha) ** 2 * ref_energy
    if err <= sig * 10.0 ** (-SINR_CAP_DB / 10.0):
        return SINR_CAP_DB
    return float(10.0 * np.log10(sig / err))


def digital_cancellation_db(si_before: ComplexSignal, si_after: ComplexSignal) -> float:
    """Drop in SI power across the digital canceller, capped at ``CANCELLATION_CAP_DB``."""
    if len(si_before) != len(si_after):
        raise InvalidInputError(f"length mismatch: {len(si_before)} vs {len(si_after)}")
    before, after = si_before.power_w, si_after.power_w
    if before == 0:
        return 0.0
    if after <= before * 10.0 ** (-CANCELLATION_CAP_DB / 10.0):
        return CANCELLATION_CAP_DB
    return float(10.0 * np.log10(before / after))


@dataclass(frozen=True)
class RealizationMetrics:
    sinr_db: float
    digital_cancellation_db: float
    residual_si_dbm: float


@dataclass(frozen=True)
class RunMetrics:
    """Per-realization metrics and their dB-domain means."""

    realizations: tuple

    def __post_init__(self):
        if not self.realizations:
            raise InvalidInputError("RunMetrics needs at least one realization")

    def _mean(self, name):
        vals = np.array([getattr(r, name) for r in self.realizations], dtype=float)
        if np.all(np.isneginf(vals)):
            return -math.inf
        return float(np.mean(vals))

    @property
    def sinr_db(self) -> float:
        return self._mean("sinr_db")

    @property
    def digital_cancellation_db(self) -> float:
        return self._mean("digital_cancellation_db")

    @property
    def residual_si_dbm(self) -> float:
        return self._mean("residual_si_dbm")

    @property
    def n_realizations(self) -> int:
        return len(self.realizations)


# ---------------------------------------------------------------------------
# Realization pipeline


def _stream_seed(master: int, index: int, stream: int) -> int:
    return int(np.random.SeedSequence([master, index, stream]).generate_state(1)[0])


@functools.lru_cache(maxsize=64)
def _pa_for(params: PAParams, seed: int, tail_energy: float) -> WienerPA:
    return design_pa(params, seed, tail_energy)


def scenario_pa(sc: Scenario) -> WienerPA:
    """The PA of a scenario; fixed across realizations."""
    return _pa_for(sc.pa_params, _stream_seed(sc.master_seed, 0, _PA), sc.pa_memory_tail_energy)


def _pa_output(sc: Scenario, pa: WienerPA, x_in: ComplexSignal) -> ComplexSignal:
    if sc.pa_model is PAModel.HAMMERSTEIN:
        poly = x_in.with_samples(pa.polynomial(x_in.samples))
        return poly.with_samples(np.convolve(poly.samples, pa.memory_fir)[: len(poly)])
    return pa_apply(pa, x_in)


def drive_pa(sc: Scenario, pa: WienerPA, x: ComplexSignal) -> ComplexSignal:
    """PA output for a transmit power quoted through the small-signal gain.

    The input is set to ``tx_power_dbm - pa_gain_db``, so the output equals
    ``tx_power_dbm`` while the PA is linear and falls short of it in compression.
    """
    return _pa_output(sc, pa, set_power_dbm(x, sc.tx_power_dbm - sc.pa_gain_db))


@dataclass(frozen=True, eq=False)
class RealizationSignals:
    """Signals of one realization, all referred to the receiver input (antenna) in watts."""

    x: ComplexSignal          # transmit baseband reference, unit power
    soi: ComplexSignal        # clean signal of interest
    si: ComplexSignal         # analog SI after RF cancellation
    received: ComplexSignal   # digitized composite (SOI + noise + SI)
    si_digital: ComplexSignal  # SI alone through the same AGC gain and ADC
    agc_gain: float


def simulate_realization(sc: Scenario, index: int) -> RealizationSignals:
    """Run the analog chain of one realization and digitize it.

    SI-only bookkeeping re-runs the quantizer on the SI component with the
    composite AGC gain.
    """
    cfg = sc.ofdm
    n_sym = sc.n_symbols_per_realization
    x = random_ofdm(n_sym, cfg, np.random.default_rng(_stream_seed(sc.master_seed, index, _TX)))
    zeros = x.with_samples(np.zeros(len(x)))

    if sc.si_enabled:
        y_pa = drive_pa(sc, scenario_pa(sc), x)
        ch = gen_si_channel(sc.channel_spec(_stream_seed(sc.master_seed, index, _CHANNEL)))
        ch = tune_rf_canceller(ch, sc.rf_cancellation_db)
        si = si_path_apply(ch, y_pa)
    else:
        si = zeros

    if sc.soi:
        s = random_ofdm(n_sym, cfg, np.random.default_rng(_stream_seed(sc.master_seed, index, _SOI)))
        s = set_power_dbm(s, sc.soi_power_dbm)
    else:
        s = zeros

    analog = si.with_samples(si.samples + s.samples)
    if sc.thermal_noise:
        analog = awgn(analog, sc.thermal_floor_dbm, _stream_seed(sc.master_seed, index, _NOISE))

    if sc.adc and analog.power_w > 0:
        adc = sc.adc_params
        g = agc_gain(analog, adc, sc.papr_db)
        received = analog.with_samples(adc_quantize(analog.with_samples(analog.samples * g), adc).samples / g)
        if sc.si_enabled:
            si_digital = si.with_samples(adc_quantize(si.with_samples(si.samples * g), adc).samples / g)
        else:
            # a mid-rise quantizer maps zero to half a step; absent SI stays absent
            si_digital = si
    else:
        g = 1.0
        received, si_digital = analog, si
    return RealizationSignals(x, s, si, received, si_digital, g)


def _mode_config(sc: Scenario, mode: CancellerMode) -> PHConfig:
    order = 1 if mode is CancellerMode.LINEAR else sc.canceller_order
    return PHConfig(order, sc.canceller_pre_taps, sc.canceller_post_taps)


def evaluate_mode(sc: Scenario, sig: RealizationSignals, mode) -> RealizationMetrics:
    """Digital cancellation and metrics for one canceller mode on simulated signals.

    Without SI the canceller is bypassed, so the no-SI reference does not
    depend on the mode.
    """
    mode = CancellerMode(mode)
    if mode is CancellerMode.NONE or not sc.si_enabled:
        si_hat = np.zeros(len(sig.x), dtype=np.complex128)
    else:
        canc = fit_canceller(sig.x, sig.received, _mode_config(sc, mode), sc.n_estimation_samples,
                             align=sc.canceller_align)
        si_hat = canc.regenerate(sig.x).samples
    s_hat = sig.received.with_samples(sig.received.samples - si_hat)
    si_after = sig.si_digital.with_samples(sig.si_digital.samples - si_hat)
    sinr = sinr_db(s_hat, sig.soi) if sc.soi else math.nan
    return RealizationMetrics(
        sinr_db=sinr,
        digital_cancellation_db=digital_cancellation_db(sig.si_digital, si_after),
        residual_si_dbm=float(watts_to_dbm(si_after.power_w)),
    )


def _realization_task(args):
    sc, index, modes = args
    sig = simulate_realization(sc, index)
    return {m: evaluate_mode(sc, sig, m) for m in modes}


def run_realization(sc: Scenario, realization_index: int) -> RunMetrics:
    """Metrics of a single realization under ``sc.canceller_mode``."""
    res = _realization_task((sc, realization_index, (sc.canceller_mode,)))
    return RunMetrics((res[sc.canceller_mode],))


def _run_many(tasks, n_jobs: int):
    if n_jobs <= 1:
        return [_realization_task(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=n_jobs) as pool:
        # map preserves submission order, so reduction order is fixed
        return list(pool.map(_realization_task, tasks, chunksize=max(1, len(tasks) // (4 * n_jobs))))


def run_scenario(sc: Scenario, n_jobs: int = 1) -> RunMetrics:
    """All ``sc.n_realizations`` realizations under ``sc.canceller_mode``."""
    tasks = [(sc, i, (sc.canceller_mode,)) for i in range(sc.n_realizations)]
    return RunMetrics(tuple(r[sc.canceller_mode] for r in _run_many(tasks, n_jobs)))


@dataclass(frozen=True)
class SweepRow:
    value: float
    mode: str
    metrics: RunMetrics


NO_SI = "no_si"
SWEEP_MODES = (CancellerMode.LINEAR, CancellerMode.NONLINEAR)


def sweep_point(sc: Scenario, variable, value) -> Scenario:
    variable = SweepVariable(variable)
    if variable is SweepVariable.TX_POWER:
        return sc.replace(tx_power_dbm=value)
    if variable is SweepVariable.IIP3:
        return sc.replace(pa_iip3_dbm=value, pa_p1db_dbm=value + P1DB_ABOVE_IIP3_DB)
    return sc.replace(antenna_separation_db=value)


def run_sweep(sc: Scenario, variable, values, n_jobs: int = 1) -> list:
    """Linear and nonlinear cancellation plus the no-SI reference at each sweep value.

    Realization ``i`` uses the same seeds at every sweep value and in every mode.
    """
    values = [float(v) for v in values]
    if not values:
        raise InvalidInputError("sweep needs at least one value")
    tasks, layout = [], []
    for v in values:
        point = sweep_point(sc, variable, v)
        ref = point.replace(antenna_separation_db=math.inf)
        tasks += [(point, i, SWEEP_MODES) for i in range(sc.n_realizations)]
        tasks += [(ref, i, (CancellerMode.NONE,)) for i in range(sc.n_realizations)]
        layout.append(v)
    results = _run_many(tasks, n_jobs)
    rows, n = [], sc.n_realizations
    for j, v in enumerate(layout):
        block = results[2 * n * j: 2 * n * (j + 1)]
        for m in SWEEP_MODES:
            rows.append(SweepRow(v, m.value, RunMetrics(tuple(r[m] for r in block[:n]))))
        rows.append(SweepRow(v, NO_SI, RunMetrics(tuple(r[CancellerMode.NONE] for r in block[n:]))))
    return rows


# ---------------------------------------------------------------------------
# CSV output

SWEEP_HEADER = ("variable_value", "mode", "mean_sinr_db", "mean_digital_cancellation_db",
                "residual_si_dbm", "n_realizations")
BUDGET_HEADER = ("tx_power_dbm", "soi_dbm", "linear_si_dbm", "nonlinear_si_dbm",
                 "thermal_noise_dbm", "quantization_noise_dbm")
RUN_HEADER = ("realization", "mode", "sinr_db", "digital_cancellation_db", "residual_si_dbm")


def _fmt(v: float) -> str:
    return f"{v:.6f}" if math.isfinite(v) else str(v)


def sweep_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SWEEP_HEADER)
    for r in rows:
        m = r.metrics
        w.writerow([_fmt(r.value), r.mode, _fmt(m.sinr_db), _fmt(m.digital_cancellation_db),
                    _fmt(m.residual_si_dbm), m.n_realizations])
    return buf.getvalue()


def run_csv(sc: Scenario, metrics: RunMetrics) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(RUN_HEADER)
    mode = sc.canceller_mode.value
    for i, r in enumerate(metrics.realizations):
        w.writerow([i, mode, _fmt(r.sinr_db), _fmt(r.digital_cancellation_db), _fmt(r.residual_si_dbm)])
    w.writerow(["mean", mode, _fmt(metrics.sinr_db), _fmt(metrics.digital_cancellation_db),
                _fmt(metrics.residual_si_dbm)])
    return buf.getvalue()


def budget_csv(sc: Scenario, tx_values) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(BUDGET_HEADER)
    for row in budget_table(tx_values, sc.budget_params):
        w.writerow([_fmt(v) for v in row])
    return buf.getvalue()

