# # Repeat-accumulate code and the relay constellation
#
# Both end nodes use the same rate-1/3 RA code. Because the code is linear,
# the XOR of the two codewords is itself a codeword, which is what lets the
# relay decode the network-coded packet directly.

import numpy as np

from pnc_bicm import build_spec, build_superposed, encode, make_label_map, modulate

spec = build_spec(k=8, d_v=3, seed=1)
print(f"k={spec.k}  n={spec.n}  rate={spec.rate:.3f}")
print(spec.to_record())

rng = np.random.default_rng(0)
s1, s2 = rng.integers(0, 2, (2, spec.k))
x1, x2 = encode(spec, s1), encode(spec, s2)
print("x1 ^ x2 == encode(s1 ^ s2):", np.array_equal(x1 ^ x2, encode(spec, s1 ^ s2)))

# ## QPSK label maps
#
# Gray puts one bit on each axis. Anti-Gray walks the circle with labels
# 00, 11, 01, 10 so neighbouring points differ in 2, 1, 2, 1 bits.

for kind in ("gray", "anti_gray"):
    print(kind)
    print(make_label_map(kind).to_text())

# ## The superimposed constellation
#
# The relay sees a1 + a2: 16 constituent pairs land on 9 points. Each NC
# label (the XOR of the two labels) owns exactly 4 pairs.

for kind in ("gray", "anti_gray"):
    sc = build_superposed(make_label_map(kind))
    print(f"{kind}: point -> NC labels of the pairs landing there")
    for p in sc.distinct_points:
        labels = sorted({f"{c:02b}" for c in sc.nc_labels[np.isclose(sc.points, p)]})
        print(f"  {p.real:+.0f}{p.imag:+.0f}j  {labels}")

a1 = modulate(make_label_map("anti_gray"), x1)
print("first relay symbols (noiseless):", a1[:4] + modulate(make_label_map("anti_gray"), x2)[:4])
