"""
Norms, sums and increasing families
===================================

Build a few norms, combine them, and turn an arbitrary list into an
increasing family with the max-prefix transform.
"""

import math

import numpy as np

from multinorm import (
    Lp, NormFamily, Sum, TruncSeminorm, build_l2plus_family, certify_increasing, eval_norm,
    frechet_metric, make_increasing,
)
from multinorm.norms import describe

v = np.array([1.0, 1.0])

# Exponents are stored exactly, so 2 + 1/3 stays 7/3 and never drifts.
for spec in (Lp(1), Lp(2), Lp(2.5), Lp(math.inf)):
    print(f"{describe(spec):>6}  {eval_norm(spec, v):.6f}")

# A truncated l1 seminorm is only allowed next to a genuine norm.
s = Sum((Lp(2.5), TruncSeminorm(2)))
print(describe(s), eval_norm(s, np.array([1.0, 1.0, 0.0])))

# l_inf <= l2 <= l1 holds pointwise; certification records how it was shown.
fam = certify_increasing(NormFamily((Lp(math.inf), Lp(2), Lp(1))), 2)
print("certified:", fam.certificate)

# Out of order? The max-prefix transform repairs it exactly.
fixed = make_increasing(NormFamily((Lp(1), Lp(2))))
print([eval_norm(q, v) for q in fixed])

# The l_{2+1/n} families shrink as n grows, so they come back as max-prefixes.
for variant in ("plain", "plus_sup", "plus_trunc"):
    f = build_l2plus_family(3, 3, variant)
    print(variant, [describe(q) for q in f])

# The truncated Frechet metric of a certified family lies in [0, 1).
print("frechet:", frechet_metric(certify_increasing(NormFamily((Lp(2), Lp(1))), 2), v, 0 * v))
