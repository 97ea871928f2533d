"""
Nearest-point sets
==================

The projection of a point onto a set can be a whole face. The solver returns
a finite set of epsilon-minimizers and a verdict on uniqueness.
"""

import math

import numpy as np

from multinorm import Ball, nearest_point_set
from multinorm.norms import Lp

square = Ball(Lp(math.inf), [0, 0], 1)

# Under l_inf, every point (1, y) of the right face is 1 away from (2, 0).
r = nearest_point_set(square, Lp(math.inf), [2, 0], resolution=0.01)
print(f"distance {r.distance}, {len(r.witnesses)} witnesses, "
      f"y in [{r.witnesses[:, 1].min()}, {r.witnesses[:, 1].max()}], unique: {r.unique}")

# The Euclidean norm picks out a single point of that face.
r = nearest_point_set(square, Lp(2), [2, 0])
print(r.distance, r.witnesses, r.unique)

# On the l1 ball, (1, 1) sees the whole edge under l1 but only its midpoint under l2.
diamond = Ball(Lp(1), [0, 0], 1)
for p in (1, 2):
    r = nearest_point_set(diamond, Lp(p), [1, 1], resolution=0.02)
    print(f"l{p}: distance {r.distance:.9f}, {len(r.witnesses)} witnesses")

# The trace shows how the coarse grid, polish, ellipsoid and refinement stages improved the value.
for stage in r.trace:
    print(stage)
