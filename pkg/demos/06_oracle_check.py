"""
Checking the solver against brute force
=======================================

Enumerate a fine net, keep every point within eps of the minimum, and compare
with the solver's answer: distances within the Lipschitz error bar, witness
sets within two grid cells.
"""

import math

from multinorm import Ball, Polytope, compare, grid_argmin, nearest_point_set
from multinorm.norms import Lp, Sum

cases = [
    (Ball(Lp(math.inf), [0, 0], 1), Lp(math.inf), [2, 0]),
    (Ball(Lp(1), [0, 0], 1), Lp(2), [1, 1]),
    (Polytope([[0, 0], [2, 0], [1.5, 2], [-0.5, 1]]), Sum((Lp(2), Lp(1))), [3, 3]),
]
res = 0.01
for K, norm, x in cases:
    sol = nearest_point_set(K, norm, x, resolution=res)
    rep = compare(sol, grid_argmin(K, norm, x, res, 1e-9))
    print(f"{rep.objective:>8}: {rep.agreement:<8} {rep.details}")
