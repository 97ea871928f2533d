"""
Modulus of convexity
====================

Sampled upper bounds on delta(eps). A flat norm gets an exact certificate;
a round one gets evidence.
"""

import math

from multinorm import modulus_of_convexity, uc_verdict
from multinorm.norms import Lp

est = modulus_of_convexity(Lp(2), 2, samples=50_000)
print(est.table())
print("closed form at eps = 1:", 1 - math.sqrt(1 - 0.25))
print(uc_verdict(est, 1e-3))

est = modulus_of_convexity(Lp(1), 2, [0.5, 1.0, 1.5], samples=20_000)
x, y = est.witness_pairs[1]
print("l1 pair", x, y, "midpoint norm", 1 - est.delta_hat[1])
print(uc_verdict(est, 1e-3))
