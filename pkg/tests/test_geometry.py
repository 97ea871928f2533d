import math

import numpy as np
import pytest

from multinorm.geometry import (
    Ball, BudgetExceeded, PointCloud, Polytope, bounding_box, contains, contains_many,
    convexity_probe, diameter, discretize, set_from_json, set_to_json,
)
from multinorm.norms import Lp, TruncSeminorm, eval_norm

INF = math.inf


def _sample_inside(K, n, rng):
    """Random points of K by rejection from the bounding box (or hull barycentres)."""
    if isinstance(K, Polytope):
        w = rng.dirichlet(np.ones(len(K.vertices)), size=n)
        return w @ K.vertices
    lo, hi = bounding_box(K)
    pts = rng.uniform(lo, hi, size=(20 * n, len(lo)))
    return pts[contains_many(K, pts)][:n]


def test_contains_examples():
    assert contains(Ball(Lp(INF), [0, 0], 1), [1, 0.5], 0)
    assert not contains(Ball(Lp(1), [0, 0], 1), [1, 1], 0)
    assert contains(Polytope([[0, 0], [1, 0], [0, 1]]), [0.25, 0.25], 0)
    assert not contains(Polytope([[0, 0], [1, 0], [0, 1]]), [0.6, 0.6], 0)
    assert contains(PointCloud([[1, 2], [3, 4]]), [3, 4 + 1e-10], 1e-9)


def test_contains_dimension_mismatch():
    with pytest.raises(ValueError):
        contains(Ball(Lp(2), [0, 0], 1), [0, 0, 0])


def test_invalid_sets():
    with pytest.raises(ValueError):
        Ball(Lp(2), [0, 0], 0)
    with pytest.raises(ValueError):
        Ball(TruncSeminorm(1), [0, 0], 1)
    with pytest.raises(ValueError):
        Polytope([[0, 0], [1, 0, 0]])


def test_polytope_dedupes_vertices():
    P = Polytope([[0, 0], [1, 0], [0, 1], [1, 0]])
    assert len(P.vertices) == 3


def test_ball_membership_matches_norm():
    rng = np.random.default_rng(0)
    K = Ball(Lp(3), [0.5, -1.0, 2.0], 1.5)
    pts = rng.uniform(-2, 4, size=(2000, 3))
    direct = eval_norm(Lp(3), pts - K.center) <= 1.5
    assert np.array_equal(contains_many(K, pts), direct)
    assert all(contains(K, p) == d for p, d in zip(pts[:200], direct[:200]))


@pytest.mark.parametrize("verts", [
    [[0, 0], [2, 0], [1, 3], [-1, 1]],
    [[0, 0, 0], [1, 0, 0], [0, 1, 0], [0, 0, 1], [1, 1, 1]],
    [[0, 0], [1, 1]],                      # a segment: lower-dimensional hull
    [[0, 0, 0], [1, 0, 0], [0, 1, 0]],     # a triangle in R^3
])
def test_polytope_membership_lp_agrees_with_halfspaces(verts):
    P = Polytope(verts)
    rng = np.random.default_rng(1)
    inside = _sample_inside(P, 200, rng)
    assert contains_many(P, inside, 1e-9).all()
    lo, hi = bounding_box(P)
    probe = rng.uniform(lo - 0.5, hi + 0.5, size=(300, len(lo)))
    batched = contains_many(P, probe, 1e-9)
    scalar = np.array([contains(P, q, 1e-9) for q in probe])
    assert np.array_equal(batched, scalar)


def test_discretize_examples():
    np.testing.assert_array_equal(discretize(PointCloud([[1, 2]]), 0.3), [[1, 2]])
    net = discretize(Ball(Lp(INF), [0, 0], 1), 1.0)
    lattice = {(a, b) for a in (-1, 0, 1) for b in (-1, 0, 1)}
    assert lattice <= {tuple(p) for p in net}


@pytest.mark.parametrize("K, h", [
    (Ball(Lp(2), [0, 0], 1), 0.5),
    (Ball(Lp(2), [0, 0], 1), 0.07),
    (Ball(Lp(1), [1, 0, -1], 2), 0.3),
    (Ball(Lp(INF), [0, 0], 1), 0.13),
    (Polytope([[0, 0], [2, 0], [1, 3], [-1, 1]]), 0.1),
    (Polytope([[0, 0], [1, 1]]), 0.05),
    (Polytope([[0, 0, 0], [1, 0, 0], [0, 1, 0], [0, 0, 1]]), 0.2),
])
def test_discretize_is_a_contained_h_net(K, h):
    net = discretize(K, h)
    assert contains_many(K, net, 1e-9).all()
    q = _sample_inside(K, 1000, np.random.default_rng(2))
    gap = np.abs(q[:, None, :] - net[None]).max(axis=2).min(axis=1)
    assert gap.max() <= h


def test_discretize_ball_reaches_boundary():
    # boundary enrichment: some net point lies on the sphere in the direction (1, 0)
    net = discretize(Ball(Lp(2), [0, 0], 1), 0.1)
    r = eval_norm(Lp(2), net)
    assert r.max() == pytest.approx(1.0, abs=1e-12)
    assert np.any(np.all(np.isclose(net, [1.0, 0.0], atol=1e-12), axis=1))


def test_budget_is_enforced(monkeypatch):
    with pytest.raises(BudgetExceeded):
        discretize(Ball(Lp(2), [0, 0, 0], 1), 1e-3, budget=10_000)
    monkeypatch.setenv("MULTINORM_POINT_BUDGET", "100")
    with pytest.raises(BudgetExceeded):
        discretize(Ball(Lp(2), [0, 0], 1), 0.05)


def test_convexity_probe():
    assert convexity_probe(Polytope([[0, 0], [1, 0], [0, 1]]))
    assert convexity_probe(Ball(Lp(1), [0, 0], 1))
    probe = convexity_probe(PointCloud([[0, 0], [1, 1]]), trials=100)
    assert not probe
    np.testing.assert_allclose(probe.witness[2], [0.5, 0.5])
    assert convexity_probe(PointCloud([[3, 3]]))


def test_diameter_and_bbox():
    K = Ball(Lp(2), [1, 1], 2)
    lo, hi = bounding_box(K)
    np.testing.assert_allclose(lo, [-1, -1])
    assert diameter(K) == pytest.approx(4.0)


@pytest.mark.parametrize("K", [
    Ball(Lp(2.5), [0, 1], 0.5), Polytope([[0, 0], [1, 0], [0, 1]]), PointCloud([[1, 2], [0, 0]]),
])
def test_set_json_roundtrip(K):
    back = set_from_json(set_to_json(K))
    assert type(back) is type(K)
    assert set_to_json(back) == set_to_json(K)
