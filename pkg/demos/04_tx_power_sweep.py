"""How much more transmit power does nonlinear cancellation buy?

Sweeps TX power at three antenna separations and prints mean SINR for
both cancellers next to the SI-free reference.
Pass a realization count to trade accuracy for time (default 10).
"""
import sys

import numpy as np

from fdsic.simulation import Scenario, run_sweep

n = int(sys.argv[1]) if len(sys.argv) > 1 else 10
tx = np.arange(0.0, 25.01, 2.5)
for sep in (30.0, 40.0, 50.0):
    rows = run_sweep(Scenario(antenna_separation_db=sep, n_realizations=n), "tx_power", tx)
    table = {(r.value, r.mode): r.metrics for r in rows}
    print(f"\nseparation {sep:.0f} dB   (SINR dB / digital cancellation dB)")
    print(f"{'tx':>5} {'linear':>14} {'nonlinear':>14} {'no SI':>7}")
    for t in tx:
        lin, nl, ref = table[(t, "linear")], table[(t, "nonlinear")], table[(t, "no_si")]
        print(f"{t:5.1f} {lin.sinr_db:6.2f} / {lin.digital_cancellation_db:5.1f} "
              f"{nl.sinr_db:6.2f} / {nl.digital_cancellation_db:5.1f} {ref.sinr_db:7.2f}")
