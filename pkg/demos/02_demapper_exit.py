# # Demapper EXIT curves at SNR = 4 dB
#
# I_A is the mutual information of the feedback the demapper receives about
# the NC coded bits, I_E the information in its extrinsic output. The Gray
# demapper ignores feedback; anti-Gray starts lower but gains from it.

from pnc_bicm import make_label_map
from pnc_bicm.exit_analysis import DEFAULT_GRID, demapper_curve

curves = {kind: demapper_curve(make_label_map(kind), snr_db=4.0, grid=DEFAULT_GRID,
                               n_symbols=50_000, seed=0)
          for kind in ("gray", "anti_gray")}

print("  I_A    gray   anti-Gray")
for i, i_a in enumerate(DEFAULT_GRID):
    print(f"{i_a:5.3f}  {curves['gray'].i_e[i]:.4f}  {curves['anti_gray'].i_e[i]:.4f}")

# The same data as CSV, in the format of the `exit` CLI subcommand:
#
#     pnc-bicm exit --kind demapper --snr 4 --out fig5.csv
