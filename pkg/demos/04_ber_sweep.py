# # BER of the relay NC decoder: iterative vs non-iterative
#
# A small version of the packet-error experiment: 20 packets of 1024 bits per
# point. The CLI equivalent is
#
#     pnc-bicm ber --k 4096 --packets 1000 --snr 1:6:0.5 --map anti_gray --out ber.csv

from pnc_bicm.harness import BerConfig, run_ber_sweep
from pnc_bicm.relay_decoder import Schedule

snr_grid = (3.0, 3.5, 4.0, 4.5, 5.0)
rows = {}
for kind in ("gray", "anti_gray"):
    for feedback in (True, False):
        cfg = BerConfig(k=1024, num_packets=20, snr_grid_db=snr_grid, map=kind, seed=1,
                        schedule=Schedule(demapper_feedback=feedback))
        rows[(kind, feedback)] = run_ber_sweep(cfg)

print("SNR   " + "  ".join(f"{k[:4]}/{'it' if fb else 'no'}" for k, fb in rows))
for i, snr in enumerate(snr_grid):
    print(f"{snr:4.1f}  " + "  ".join(f"{recs[i].ber:.1e}" for recs in rows.values()))

# Anti-Gray needs the demapper feedback. Gray is unaffected by it: with one
# bit per axis the partner bit's prior cancels out of the demapper ratio.
