"""How cheap a PA can we get away with at 20 dBm?

Sweeps the PA intercept point (compression tracks it 9.5 dB higher) at a
fixed 20 dBm transmit power and reports the lowest IIP3 at which each
canceller keeps SINR at or above 10 dB.
"""
import sys

import numpy as np

from fdsic.simulation import Scenario, run_sweep



def lowest_iip3(grid, sinr, target):
    """First grid point from which SINR stays at or above the target, else None."""
    bad = np.flatnonzero(sinr < target)
    if not bad.size:
        return grid[0]
    return grid[bad[-1] + 1] if bad[-1] + 1 < grid.size else None


n = int(sys.argv[1]) if len(sys.argv) > 1 else 10
iip3 = np.arange(5.0, 25.01, 2.0)
target = 10.0
for sep in (40.0, 50.0):
    rows = run_sweep(Scenario(antenna_separation_db=sep, tx_power_dbm=20.0, n_realizations=n), "iip3", iip3)
    print(f"\nseparation {sep:.0f} dB")
    for mode in ("linear", "nonlinear"):
        sinr = np.array([r.metrics.sinr_db for r in rows if r.mode == mode])
        print(f"  {mode:>9}: " + " ".join(f"{v:6.2f}" for v in sinr))
        need = lowest_iip3(iip3, sinr, target)
        print(f"  {'':>9}  reaches {target:g} dB from IIP3 "
              + (f"{need:g} dBm" if need is not None else "beyond the sweep"))
