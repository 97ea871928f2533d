import math
from dataclasses import replace

import numpy as np
import pytest

from multinorm.geometry import Ball, PointCloud, Polytope
from multinorm.norms import Lp, Sum, eval_norm
from multinorm.oracle import (
    DISTANCE_MISMATCH, MATCH, WITNESS_MISMATCH, compare, grid_argmin, hausdorff,
)
from multinorm.projection import nearest_point_set

INF = math.inf
LINF_BALL = Ball(Lp(INF), [0, 0], 1)


def test_face_example():
    rep = grid_argmin(LINF_BALL, Lp(INF), [2, 0], 0.05, 0.01)
    assert abs(rep.min_value - 1) <= 0.05
    pts = rep.argmin_points
    assert np.allclose(pts[:, 0], 1.0)
    ys = np.sort(pts[:, 1])
    assert ys[0] == pytest.approx(-1) and ys[-1] == pytest.approx(1)
    assert np.diff(ys).max() <= 0.05 + 1e-12


def test_singleton_cloud():
    rep = grid_argmin(PointCloud([[0, 0]]), Lp(3), [1, 0], 0.1, 0.0)
    assert rep.min_value == 1.0 and rep.error_bar == 0.0
    np.testing.assert_array_equal(rep.argmin_points, [[0, 0]])


def test_l1_ball_l2_example():
    rep = grid_argmin(Ball(Lp(1), [0, 0], 1), Lp(2), [1, 1], 0.01, 1e-3)
    assert abs(rep.min_value - 1 / math.sqrt(2)) <= 0.01 * math.sqrt(2)
    assert np.abs(rep.argmin_points - 0.5).max() <= 0.05


def test_rejects_interior_query():
    with pytest.raises(ValueError):
        grid_argmin(LINF_BALL, Lp(2), [0.5, 0], 0.1, 0.0)


def test_argmin_points_within_eps():
    K = Polytope([[0, 0], [2, 0], [1, 3]])
    obj = Sum((Lp(2), Lp(1)))
    rep = grid_argmin(K, obj, [3, 3], 0.02, 0.05)
    vals = eval_norm(obj, rep.x - rep.argmin_points)
    assert vals.max() <= rep.min_value + 0.05 + 1e-12


def test_halving_resolution_never_worsens_beyond_error_bar():
    K = Ball(Lp(2), [0, 0], 1)
    x = [1.3, 0.9]
    for obj in (Lp(1), Lp(INF), Lp(2)):
        coarse = grid_argmin(K, obj, x, 0.08, 0.0)
        fine = grid_argmin(K, obj, x, 0.04, 0.0)
        assert fine.min_value <= coarse.min_value + coarse.error_bar


def test_threads_do_not_change_the_answer(monkeypatch):
    import multinorm.oracle as oracle
    monkeypatch.setattr(oracle, "_CHUNK", 97)
    a = grid_argmin(LINF_BALL, Lp(3), [2, 1], 0.02, 1e-3, threads=1)
    b = grid_argmin(LINF_BALL, Lp(3), [2, 1], 0.02, 1e-3, threads=4)
    assert a.to_json() == b.to_json()


def test_hausdorff():
    assert hausdorff([[0, 0]], [[0, 0.5], [0, -0.25]]) == 0.5
    assert hausdorff([[0, 0]], np.empty((0, 2))) == math.inf


def test_compare_outcomes():
    sol = nearest_point_set(LINF_BALL, Lp(INF), [2, 0], resolution=0.02)
    rep = grid_argmin(LINF_BALL, Lp(INF), [2, 0], 0.02, 1e-9)
    assert compare(sol, rep).agreement == MATCH

    off = replace(sol, distance=sol.distance + 0.5)
    assert compare(off, rep).agreement == DISTANCE_MISMATCH

    lonely = replace(sol, witnesses=np.array([[1.0, 0.5]]), values=np.array([1.0]))
    out = compare(lonely, rep)
    assert out.agreement == WITNESS_MISMATCH
    assert out.unmatched and "not covered" in out.details


def test_compare_refuses_different_problems():
    sol = nearest_point_set(LINF_BALL, Lp(INF), [2, 0], resolution=0.05)
    with pytest.raises(ValueError):
        compare(sol, grid_argmin(LINF_BALL, Lp(2), [2, 0], 0.05, 0))
    with pytest.raises(ValueError):
        compare(sol, grid_argmin(LINF_BALL, Lp(INF), [3, 0], 0.05, 0))
