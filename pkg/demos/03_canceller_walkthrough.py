"""One received frame, cancelled two ways.

Simulates a single realization at a high transmit power, then fits a
linear and a nonlinear canceller on the first ten symbols and compares
what is left of the self-interference.
"""
import numpy as np

from fdsic.canceller import PHConfig, fit_canceller
from fdsic.dsp import measure_power_dbm
from fdsic.simulation import Scenario, simulate_realization, sinr_db

sc = Scenario(tx_power_dbm=20.0, antenna_separation_db=40.0)
sig = simulate_realization(sc, index=0)
print(f"SOI {measure_power_dbm(sig.soi):.1f} dBm, SI after RF cancellation {measure_power_dbm(sig.si):.1f} dBm")

for name, cfg in [("linear", PHConfig(1, 2, 2)), ("nonlinear", PHConfig(5, 2, 2))]:
    canc = fit_canceller(sig.x, sig.received, cfg, sc.n_estimation_samples)
    si_hat = canc.regenerate(sig.x)
    left = sig.si_digital.with_samples(sig.si_digital.samples - si_hat.samples)
    clean = sig.received.with_samples(sig.received.samples - si_hat.samples)
    print(f"{name:>9}: {cfg.n_coeffs:2d} coefficients, delay {canc.delay}, "
          f"residual SI {measure_power_dbm(left):.1f} dBm, SINR {sinr_db(clean, sig.soi):.2f} dB")

print("\nnonlinear branch energies (dB):")
for p in (1, 3, 5):
    b = canc.model.branch(p)
    print(f"  order {p}: {10 * np.log10(np.sum(np.abs(b) ** 2)):.1f}")
