"""
Common nearest points across a family
=====================================

Minimize the sum of two ordered norms, then the partial sums of a longer
family, and check which witnesses are optimal for every member.
"""

import math

import numpy as np

from multinorm import (
    Ball, Lp, NormFamily, build_l2plus_family, certify_increasing, common_nearest_family,
    common_nearest_two, uniqueness_check,
)

diamond = Ball(Lp(1), [0, 0], 1)
square = Ball(Lp(math.inf), [0, 0], 1)
disk = Ball(Lp(2), [0, 0], 1)

# (0.5, 0.5) is nearest to (1, 1) under both l2 and l1, so the sum finds it.
r = common_nearest_two(diamond, Lp(2), Lp(1), [1, 1])
print(r.distance, r.common_witnesses)

# On the disk, (2, 1) has different l2 and l1 nearest points:
# (2, 1)/sqrt(5) and (1, 1)/sqrt(2). The sum has a minimizer, but it is
# optimal for neither norm, so there is no common nearest point to report.
r = common_nearest_two(disk, Lp(2), Lp(1), [2, 1], 1e-9)
print("sum minimizer", r.best, "gaps to each optimum", r.part_gaps.min(axis=0))
print("common witnesses:", r.common_witnesses)

# A three-norm chain on the square: level 1 is a face, deeper levels pin (1, 0).
fam = certify_increasing(NormFamily((Lp(math.inf), Lp(2), Lp(1))), 2)
chain = common_nearest_family(square, fam, [2, 0], 1e-8, resolution=0.01)
for n, level in enumerate(chain.per_level, 1):
    print(f"level {n}: {len(level.witnesses)} witnesses, distance {level.distance:.6f}")
print("nested:", chain.nested, "common:", chain.common_witnesses)
print("unique at level 2:", uniqueness_check(chain, fam, 2, 1e-3))

# The truncated l_{2+1/n} family on the Euclidean ball in R^3.
fam = build_l2plus_family(3, 3, "single_uc", n0=2)
chain = common_nearest_family(Ball(Lp(2), [0, 0, 0], 1), fam, [2, 0, 0], 1e-8)
print(chain.common_witnesses, uniqueness_check(chain, fam, 2, 1e-3))
