"""
Compact sets and their h-nets
=============================

Balls, polytopes and point clouds, membership tests, and the discretization
that the brute-force oracle enumerates.
"""

import math

import numpy as np

from multinorm import Ball, PointCloud, Polytope, contains, convexity_probe, discretize
from multinorm.norms import Lp

square = Ball(Lp(math.inf), [0, 0], 1)
diamond = Ball(Lp(1), [0, 0], 1)
triangle = Polytope([[0, 0], [1, 0], [0, 1]])

print(contains(square, [1, 0.5]), contains(diamond, [1, 1]), contains(triangle, [0.25, 0.25]))

# A net at resolution h: every point of the set is within l_inf distance h of
# some net point, and the boundary is sampled explicitly (nearest points live there).
net = discretize(Ball(Lp(2), [0, 0], 1), 0.1)
print(len(net), "points, max radius", np.linalg.norm(net, axis=1).max())

# A segment in the plane is a lower-dimensional polytope; it still gets a net.
seg = discretize(Polytope([[0, 0], [1, 1]]), 0.25)
print(seg)

# Clouds are not convex in general, and the probe says why.
probe = convexity_probe(PointCloud([[0, 0], [1, 1]]))
print(bool(probe), "midpoint", probe.witness[2])
