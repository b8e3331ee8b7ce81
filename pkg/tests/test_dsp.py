import itertools

import numpy as np
import pytest

from fdsic.dsp import (
    ComplexSignal,
    OfdmConfig,
    dbm_to_watts,
    fir_filter,
    measure_power_dbm,
    ofdm_demodulate,
    ofdm_modulate,
    papr_db,
    qam16_map,
    random_ofdm,
    random_qam16,
    set_power_dbm,
    watts_to_dbm,
)
from fdsic.errors import InvalidInputError

FS = 80e6


def sig(values):
    return ComplexSignal(np.asarray(values, dtype=complex), FS)


ALL_LABELS = np.array(list(itertools.product([0, 1], repeat=4))).reshape(-1)


# --- ComplexSignal ---------------------------------------------------------

def test_signal_is_read_only():
    s = sig([1, 2, 3])
    with pytest.raises(ValueError):
        s.samples[0] = 5


@pytest.mark.parametrize("bad", [[np.nan], [1, np.inf], [complex(0, np.nan)]])
def test_signal_rejects_non_finite(bad):
    with pytest.raises(InvalidInputError):
        sig(bad)


@pytest.mark.parametrize("rate", [0.0, -1.0])
def test_signal_rejects_bad_rate(rate):
    with pytest.raises(InvalidInputError):
        ComplexSignal(np.zeros(3), rate)


def test_dbm_watts_round_trip():
    p = np.array([-98.9, 0.0, 24.5])
    np.testing.assert_allclose(watts_to_dbm(dbm_to_watts(p)), p, atol=1e-12)
    assert watts_to_dbm(0.0) == -np.inf


# --- 16-QAM ----------------------------------------------------------------

def test_qam16_corner_point():
    assert qam16_map([0, 0, 0, 0])[0] == pytest.approx((-3 - 3j) / np.sqrt(10))


def test_qam16_alphabet_unit_power_and_spacing():
    pts = qam16_map(ALL_LABELS)
    assert len(np.unique(np.round(pts, 12))) == 16
    assert np.mean(np.abs(pts) ** 2) == pytest.approx(1.0, abs=1e-15)
    d = np.abs(pts[:, None] - pts[None, :])
    assert d[d > 0].min() == pytest.approx(2 / np.sqrt(10))


def test_qam16_gray_neighbours_differ_by_one_bit():
    bits = ALL_LABELS.reshape(16, 4)
    pts = qam16_map(ALL_LABELS)
    step = 2 / np.sqrt(10)
    for i, j in itertools.combinations(range(16), 2):
        if abs(abs(pts[i] - pts[j]) - step) < 1e-12:
            assert np.sum(bits[i] != bits[j]) == 1


@pytest.mark.parametrize("bits", [[0, 1, 1], [0, 1, 0, 1, 1]])
def test_qam16_length_must_be_multiple_of_four(bits):
    with pytest.raises(InvalidInputError):
        qam16_map(bits)


def test_qam16_rejects_non_binary():
    with pytest.raises(InvalidInputError):
        qam16_map([0, 2, 1, 0])


def test_random_qam16_power_converges():
    s = random_qam16(100_000, np.random.default_rng(3))
    assert np.mean(np.abs(s) ** 2) == pytest.approx(1.0, abs=0.01)


# --- OFDM ------------------------------------------------------------------

def test_default_numerology():
    cfg = OfdmConfig()
    assert (cfg.fft_size, cfg.cp_len, cfg.symbol_len) == (256, 64, 320)
    assert cfg.sample_rate_hz == 80e6
    assert cfg.symbol_len / cfg.sample_rate_hz == pytest.approx(4e-6)


def test_data_bins_symmetric_with_null_dc():
    cfg = OfdmConfig()
    bins = np.sort(np.where(cfg.data_bins >= cfg.fft_size // 2, cfg.data_bins - cfg.fft_size, cfg.data_bins))
    assert 0 not in bins
    np.testing.assert_array_equal(bins, np.r_[-24:0, 1:25])


@pytest.mark.parametrize("kwargs", [
    dict(n_data_subcarriers=64),
    dict(n_data_subcarriers=47),
    dict(oversampling=0),
    dict(cp_len_samples=-1),
    dict(n_subcarriers=0),
    dict(base_rate_hz=0.0),
])
def test_ofdm_config_validation(kwargs):
    with pytest.raises(InvalidInputError):
        OfdmConfig(**kwargs)


@pytest.mark.parametrize("n_sym, n_samples", [(1, 320), (10, 3200)])
def test_ofdm_lengths(n_sym, n_samples):
    cfg = OfdmConfig()
    x = ofdm_modulate(random_qam16(48 * n_sym, np.random.default_rng(0)), cfg)
    assert len(x) == n_samples
    assert x.sample_rate_hz == 80e6


def test_ofdm_cyclic_prefix_copies_tail():
    cfg = OfdmConfig()
    x = ofdm_modulate(random_qam16(48, np.random.default_rng(1)), cfg).samples
    np.testing.assert_allclose(x[:cfg.cp_len], x[-cfg.cp_len:], atol=0)


@pytest.mark.parametrize("cfg", [
    OfdmConfig(),
    OfdmConfig(oversampling=1),
    OfdmConfig(cp_len_samples=0),
    OfdmConfig(n_subcarriers=128, n_data_subcarriers=100, oversampling=2),
])
def test_ofdm_round_trip(cfg):
    d = random_qam16(5 * cfg.n_data_subcarriers, np.random.default_rng(4))
    np.testing.assert_allclose(ofdm_demodulate(ofdm_modulate(d, cfg), cfg), d, atol=1e-10, rtol=0)


def test_ofdm_unit_power():
    x = random_ofdm(200, OfdmConfig(), np.random.default_rng(5))
    assert x.power_w == pytest.approx(1.0, abs=0.01)


def test_ofdm_occupies_only_active_bins():
    cfg = OfdmConfig()
    x = random_ofdm(1, cfg, np.random.default_rng(6)).samples[cfg.cp_len:]
    spec = np.abs(np.fft.fft(x)) ** 2
    mask = np.zeros(cfg.fft_size, bool)
    mask[cfg.data_bins] = True
    assert spec[~mask].max() < 1e-20 * spec[mask].min()


def test_ofdm_zero_input_gives_zero_output():
    cfg = OfdmConfig()
    x = ofdm_modulate(np.zeros(48), cfg)
    assert not np.any(x.samples)
    assert not np.any(ofdm_demodulate(x, cfg))


def test_ofdm_delay_by_one_symbol_shifts_symbols():
    cfg = OfdmConfig()
    d = random_qam16(3 * 48, np.random.default_rng(7))
    x = ofdm_modulate(d, cfg).samples
    delayed = sig(np.r_[np.zeros(cfg.symbol_len), x[:-cfg.symbol_len]])
    out = ofdm_demodulate(delayed, cfg)
    np.testing.assert_allclose(out[48:], d[:-48], atol=1e-10)
    np.testing.assert_allclose(out[:48], 0, atol=1e-12)


def test_ofdm_modulate_rejects_partial_symbol():
    with pytest.raises(InvalidInputError):
        ofdm_modulate(np.ones(47), OfdmConfig())


def test_ofdm_demodulate_rejects_partial_symbol():
    with pytest.raises(InvalidInputError):
        ofdm_demodulate(sig(np.ones(319)), OfdmConfig())


def test_ofdm_papr_near_table_value():
    x = random_ofdm(200, OfdmConfig(), np.random.default_rng(8))
    assert 8.0 <= papr_db(x) <= 12.0


# --- filtering and power ---------------------------------------------------

@pytest.mark.parametrize("x, h, expected", [
    ([1, 0, 0], [1], [1, 0, 0]),
    ([1, 0, 0], [0.5, 0.25], [0.5, 0.25, 0]),
    ([1, 1, 1], [1, 1], [1, 2, 2]),
])
def test_fir_filter_examples(x, h, expected):
    np.testing.assert_allclose(fir_filter(sig(x), h).samples, expected)


def test_fir_filter_is_linear():
    rng = np.random.default_rng(9)
    x, y = (rng.standard_normal(64) + 1j * rng.standard_normal(64) for _ in range(2))
    h = rng.standard_normal(5) + 1j * rng.standard_normal(5)
    a, b = 0.3 - 2j, 1.7 + 0.1j
    lhs = fir_filter(sig(a * x + b * y), h).samples
    rhs = a * fir_filter(sig(x), h).samples + b * fir_filter(sig(y), h).samples
    np.testing.assert_allclose(lhs, rhs, rtol=1e-12, atol=1e-12)


def test_fir_filter_rejects_empty_taps():
    with pytest.raises(InvalidInputError):
        fir_filter(sig([1, 2]), [])


@pytest.mark.parametrize("amp, dbm", [(np.sqrt(1e-3), 0.0), (np.sqrt(0.1), 20.0)])
def test_measure_power_constant_amplitude(amp, dbm):
    assert measure_power_dbm(sig(np.full(10, amp))) == pytest.approx(dbm, abs=1e-12)


def test_measure_power_zero_is_neg_inf():
    assert measure_power_dbm(sig(np.zeros(4))) == -np.inf


def test_measure_power_empty_raises():
    with pytest.raises(InvalidInputError):
        measure_power_dbm(sig([]))


@pytest.mark.parametrize("target", [20.0, -83.9, -98.9301])
def test_set_power_round_trip(target):
    x = random_ofdm(2, OfdmConfig(), np.random.default_rng(10))
    assert abs(measure_power_dbm(set_power_dbm(x, target)) - target) < 1e-9


def test_set_power_to_current_level_is_identity():
    x = sig([1 + 1j, 2, -0.5j])
    np.testing.assert_allclose(set_power_dbm(x, measure_power_dbm(x)).samples, x.samples, rtol=1e-14)


def test_set_power_zero_signal_raises():
    with pytest.raises(InvalidInputError):
        set_power_dbm(sig(np.zeros(3)), 0.0)


def test_papr_examples():
    assert papr_db(sig(np.exp(1j * np.linspace(0, 6, 50)))) == pytest.approx(0.0, abs=1e-12)
    assert papr_db(sig([0, 2])) == pytest.approx(10 * np.log10(2))
    with pytest.raises(InvalidInputError):
        papr_db(sig([0, 0]))
