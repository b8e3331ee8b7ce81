"""Where does PA distortion start to matter?

Prints the closed-form power levels at the detector input for a range of
transmit powers and locates the point where third-order SI reaches the
thermal floor.
"""
import numpy as np

from fdsic.budget import BudgetParams, budget_table, nonlinear_crossover_dbm

params = BudgetParams()
print(f"sensitivity: {params.sensitivity_dbm:.2f} dBm")
print(f"nonlinear SI meets the thermal floor at {nonlinear_crossover_dbm(params):.2f} dBm TX\n")

print(f"{'tx':>6} {'soi':>8} {'lin SI':>8} {'nl SI':>8} {'thermal':>8} {'quant':>8}")
for row in budget_table(np.arange(-10.0, 31.0, 5.0), params):
    print(" ".join(f"{v:8.2f}" for v in row))

# each extra dB of TX power raises the distortion by three
for sep in (30.0, 40.0, 50.0):
    p = BudgetParams(antenna_separation_db=sep)
    print(f"separation {sep:.0f} dB -> crossover {nonlinear_crossover_dbm(p):.2f} dBm")
