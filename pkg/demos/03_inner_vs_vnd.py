# # Inner unit vs repetition node: is the decoding tunnel open?
#
# The inner unit is {demapper, pi2, accumulator, degree-1 check nodes},
# iterated 3 times per activation. On an EXIT chart the VND curve is drawn
# with its axes swapped; decoding can converge when the inner curve stays
# above it everywhere.

import numpy as np

from pnc_bicm import build_spec, ebn0_to_snr_db, make_label_map
from pnc_bicm.exit_analysis import inner_and_vnd_curves, tunnel_margin, vnd_closed_form

spec = build_spec(4096, 3, seed=0)
grid = tuple(np.round(np.arange(0, 0.96, 0.1), 2)) + (0.999,)

for ebn0 in (1.8, 3.0):
    print(f"Eb/N0 = {ebn0} dB  (SNR = {ebn0_to_snr_db(ebn0, spec.rate):.2f} dB)")
    for kind in ("gray", "anti_gray"):
        inner, vnd = inner_and_vnd_curves(make_label_map(kind), spec, ebn0, grid, n_bits=40_000)
        margin = tunnel_margin(inner, vnd)
        print(f"  {kind:9s} min margin {margin.min():+.3f} at I_A = {grid[int(np.argmin(margin))]}")
    print("  VND simulated vs closed form, max gap:",
          f"{np.max(np.abs(vnd.i_e - vnd_closed_form(grid, 3))):.4f}")
