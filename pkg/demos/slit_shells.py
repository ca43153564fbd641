"""Shell ledger of the inverse slit map as the exponent crosses n = 3.

Below the threshold the dyadic shells shrink geometrically, at p = n they
are all the same size, above it they grow.  The fitted decay rate beta is
printed next to each verdict.
"""
import numpy as np

from bienergy import energy, make_slit_pair

_, f = make_slit_pair(3)

for p in (2.0, 2.5, 2.9, 3.0, 3.5):
    res = energy(f, p=p)
    c = res.ledger.contributions
    print(f"p={p:<4} {res.kind:<12} beta={res.beta:+.3f}  value={res.value:.6g}")
    print("    last shells:", np.array2string(c[-4:], precision=3))
