"""Build the transmitter PA from its datasheet figures and measure it back.

The design solves the polynomial so a two-tone test and a single-tone
AM/AM sweep return the requested IIP3 and 1 dB compression point.
"""
import numpy as np

from fdsic.dsp import dbm_to_watts, watts_to_dbm
from fdsic.impairments import PAParams, design_pa, measure_input_p1db_dbm, measure_two_tone_iip3_dbm

for iip3 in (5.0, 15.0, 25.0):
    params = PAParams(iip3_dbm=iip3, p1db_dbm=iip3 + 9.5)
    pa = design_pa(params, seed=0)
    a1, a3, a5 = (c.real for c in pa.poly_coeffs)
    print(f"IIP3 target {iip3:4.1f} dBm: a1={a1:.1f} a3={a3:.4g} a5={a5:.4g}")
    print(f"  measured IIP3 {measure_two_tone_iip3_dbm(pa.polynomial):.2f} dBm, "
          f"input P1dB {measure_input_p1db_dbm(pa.polynomial):.2f} dBm")
    print(f"  AM/AM peak at {watts_to_dbm(pa.saturation_input_w):.2f} dBm input")

pa = design_pa(PAParams(), seed=0)
print("\nmemory filter taps:", np.round(pa.memory_fir, 4))
print("\nAM/AM of the default PA (input dBm -> gain dB):")
for p_in in (-20.0, -10.0, 0.0, 4.5, 7.0):
    u = np.sqrt(dbm_to_watts(p_in)) + 0j
    print(f"  {p_in:6.1f} -> {20 * np.log10(abs(pa.polynomial(u)) / abs(u)):.2f}")
