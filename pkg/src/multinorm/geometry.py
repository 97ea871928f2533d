"""
Compact sets in R^d: norm balls, polytopes (convex hull of vertices) and
finite point clouds, with membership tests and finite h-nets.
"""

from __future__ import annotations

import itertools
import math
import os
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog
from scipy.spatial import ConvexHull

from .norms import (
    NormSpec, coordinate_bounds, eval_norm, is_norm, linf_upper_constant,
    spec_from_json, spec_to_json,
)

__all__ = [
    "Ball", "Polytope", "PointCloud", "CompactSet", "BudgetExceeded",
    "ConvexityProbe", "contains", "contains_many", "discretize",
    "convexity_probe", "bounding_box", "diameter", "point_budget",
    "set_to_json", "set_from_json", "dimension",
]

DEFAULT_POINT_BUDGET = 10**7
POLYTOPE_LP_TOL = 1e-9


class BudgetExceeded(RuntimeError):
    """The requested discretization would exceed the point budget."""

    def __init__(self, needed, budget):
        super().__init__(f"discretization needs ~{needed:,} points, budget is {budget:,}")
        self.needed = needed
        self.budget = budget


def point_budget() -> int:
    env = os.environ.get("MULTINORM_POINT_BUDGET")
    return int(float(env)) if env else DEFAULT_POINT_BUDGET


def _vector(v, name="vector"):
    a = np.asarray(v, dtype=float)
    if a.ndim != 1 or a.size == 0:
        raise ValueError(f"{name} must be a nonempty 1-d list of reals")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} has non-finite coordinates")
    a.setflags(write=False)
    return a


def _points(pts, name):
    a = np.asarray(pts, dtype=float)
    if a.ndim != 2 or a.shape[0] == 0 or a.shape[1] == 0:
        raise ValueError(f"{name} must be a nonempty list of equal-length vectors")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} has non-finite coordinates")
    # dedupe, keeping a deterministic lexicographic order
    a = np.unique(a, axis=0)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Ball:
    norm: NormSpec
    center: np.ndarray
    radius: float

    def __post_init__(self):
        if not is_norm(self.norm):
            raise ValueError("ball norm must be a true norm, not a seminorm")
        object.__setattr__(self, "center", _vector(self.center, "center"))
        r = float(self.radius)
        if not (r > 0 and math.isfinite(r)):
            raise ValueError("ball radius must be a positive real")
        object.__setattr__(self, "radius", r)
        # fail early on weight/dimension mismatch
        eval_norm(self.norm, np.zeros_like(self.center))

    @property
    def dim(self):
        return self.center.shape[0]


class _Hull:
    """Affine chart plus half-space description of a convex hull.

    Points are mapped to coordinates ``z`` in the affine hull of the vertices
    via ``p = origin + z @ basis``; for full-dimensional hulls ``basis`` is
    the identity so grids stay axis aligned.
    """

    def __init__(self, vertices):
        d = vertices.shape[1]
        c = vertices.mean(axis=0)
        scale = max(1.0, float(np.abs(vertices).max()))
        _, s, vt = np.linalg.svd(vertices - c, full_matrices=False)
        k = int(np.sum(s > 1e-10 * scale * math.sqrt(vertices.shape[0])))
        self.scale = scale
        self.k = k
        if k == d:
            self.origin = np.zeros(d)
            self.basis = np.eye(d)
        else:
            self.origin = c
            self.basis = vt[:k]
        z = (vertices - self.origin) @ self.basis.T
        self.equations = None
        self.simplices = None
        if k >= 2:
            hull = ConvexHull(z)
            self.equations = hull.equations
            self.simplices = hull.simplices
        elif k == 1:
            self.lo, self.hi = float(z.min()), float(z.max())

    def to_chart(self, p):
        return (p - self.origin) @ self.basis.T

    def from_chart(self, z):
        return self.origin + z @ self.basis

    def inside_chart(self, z, tol=0.0):
        tol = tol + 1e-12 * self.scale
        if self.k == 0:
            return np.ones(z.shape[0], dtype=bool)
        if self.k == 1:
            return (z[:, 0] >= self.lo - tol) & (z[:, 0] <= self.hi + tol)
        A, b = self.equations[:, :-1], self.equations[:, -1]
        return np.all(z @ A.T + b <= tol, axis=1)

    def inside(self, p, tol=0.0):
        z = self.to_chart(p)
        ok = self.inside_chart(z, tol)
        if self.k < p.shape[1]:
            off = np.abs(self.from_chart(z) - p).max(axis=1)
            ok &= off <= tol + 1e-12 * self.scale
        return ok


@dataclass(frozen=True, eq=False)
class Polytope:
    """Convex hull of finitely many vertices (duplicates removed)."""

    vertices: np.ndarray
    _hull: _Hull = field(init=False, repr=False)

    def __post_init__(self):
        v = _points(self.vertices, "vertices")
        object.__setattr__(self, "vertices", v)
        object.__setattr__(self, "_hull", _Hull(v))

    @property
    def dim(self):
        return self.vertices.shape[1]


@dataclass(frozen=True, eq=False)
class PointCloud:
    """A finite set of points; not convex in general."""

    points: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "points", _points(self.points, "points"))

    @property
    def dim(self):
        return self.points.shape[1]


CompactSet = Ball | Polytope | PointCloud


def dimension(K: CompactSet) -> int:
    return K.dim


def _check_dim(K, v):
    if v.shape[-1] != K.dim:
        raise ValueError(f"dimension mismatch: set lives in R^{K.dim}, vector has {v.shape[-1]}")


def _polytope_residual(P: Polytope, v) -> float:
    """Smallest ``t`` with ``|V^T lam - v|_inf <= t``, ``lam`` in the simplex."""
    V = P.vertices
    m, d = V.shape
    # variables: lam (m), t
    c = np.zeros(m + 1)
    c[-1] = 1.0
    A_ub = np.block([[V.T, -np.ones((d, 1))], [-V.T, -np.ones((d, 1))]])
    b_ub = np.concatenate([v, -v])
    A_eq = np.concatenate([np.ones(m), [0.0]])[None]
    res = linprog(c, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=[1.0],
                  bounds=[(0, None)] * m + [(0, None)], method="highs")
    if res.status != 0:
        raise RuntimeError(f"membership LP failed: {res.message}")
    return float(res.x[-1])


def contains(K: CompactSet, v, tol: float = 0.0) -> bool:
    """Membership of a single vector, with slack ``tol``.

    Ball: ``norm(v - center) <= radius + tol``. Polytope: the convex-combination
    LP residual (l_inf) is at most ``max(tol, 1e-9)``. PointCloud: some member
    lies within l_inf distance ``tol``.
    """
    v = np.asarray(v, dtype=float)
    _check_dim(K, v)
    if isinstance(K, Ball):
        return bool(eval_norm(K.norm, v - K.center) <= K.radius + tol)
    if isinstance(K, Polytope):
        return _polytope_residual(K, v) <= max(tol, POLYTOPE_LP_TOL)
    return bool(np.abs(K.points - v).max(axis=1).min() <= tol)


def contains_many(K: CompactSet, pts, tol: float = 0.0) -> np.ndarray:
    """Vectorized membership. Polytopes use their half-space form here."""
    pts = np.atleast_2d(np.asarray(pts, dtype=float))
    _check_dim(K, pts)
    if isinstance(K, Ball):
        return eval_norm(K.norm, pts - K.center) <= K.radius + tol
    if isinstance(K, Polytope):
        return K._hull.inside(pts, tol)
    out = np.zeros(pts.shape[0], dtype=bool)
    for i in range(0, pts.shape[0], 4096):
        chunk = pts[i:i + 4096]
        dist = np.abs(chunk[:, None, :] - K.points[None]).max(axis=2).min(axis=1)
        out[i:i + 4096] = dist <= tol
    return out


def bounding_box(K: CompactSet):
    """Axis-aligned ``(lo, hi)`` containing ``K``."""
    if isinstance(K, Ball):
        half = K.radius * coordinate_bounds(K.norm, K.dim)
        if not np.all(np.isfinite(half)):
            raise ValueError("ball norm does not bound every coordinate")
        return K.center - half, K.center + half
    pts = K.vertices if isinstance(K, Polytope) else K.points
    return pts.min(axis=0), pts.max(axis=0)


def diameter(K: CompactSet) -> float:
    """l_inf diameter of the bounding box (an upper bound on the set's)."""
    lo, hi = bounding_box(K)
    return float(np.max(hi - lo))


def _axis(lo, hi, h):
    n = max(1, int(math.ceil((hi - lo) / h - 1e-12))) + 1
    return np.linspace(lo, hi, n) if hi > lo else np.array([lo])


def _grid(lo, hi, h, budget):
    axes = [_axis(a, b, h) for a, b in zip(lo, hi)]
    n = math.prod(len(a) for a in axes)
    if n > budget:
        raise BudgetExceeded(n, budget)
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1)


def _cube_surface(d, s, budget):
    """Grid on the surface of [-1, 1]^d with spacing <= s (odd counts keep 0)."""
    n = max(2, int(math.ceil(2.0 / s))) + 1
    n += (n + 1) % 2
    line = np.linspace(-1.0, 1.0, n)
    if d == 1:
        return np.array([[-1.0], [1.0]])
    count = 2 * d * n ** (d - 1)
    if count > budget:
        raise BudgetExceeded(count, budget)
    face = np.stack([m.ravel() for m in np.meshgrid(*([line] * (d - 1)), indexing="ij")], axis=1)
    out = []
    for i in range(d):
        for sgn in (-1.0, 1.0):
            pts = np.insert(face, i, sgn, axis=1)
            out.append(pts)
    return np.vstack(out)


def _ball_boundary(K: Ball, h, budget):
    d = K.dim
    # radial map u -> u / N(u) from the cube surface is L-Lipschitz in l_inf
    m = 1.0 / float(np.max(coordinate_bounds(K.norm, d)))
    C = linf_upper_constant(K.norm, d)
    L = 1.0 / m + C / m**2
    s = h / (K.radius * L)
    U = _cube_surface(d, s, budget)
    return K.center + K.radius * U / eval_norm(K.norm, U)[:, None]


def _simplex_lattice(V, k):
    """Barycentric lattice with step 1/k on the simplex spanned by rows of V."""
    m = V.shape[0]
    if m == 1:
        return V.copy()
    axes = np.meshgrid(*([np.arange(k + 1)] * (m - 1)), indexing="ij")
    A = np.stack([a.ravel() for a in axes], axis=1)
    A = A[A.sum(axis=1) <= k].astype(float)
    lam = np.hstack([A, (k - A.sum(axis=1))[:, None]]) / k
    return lam @ V


def _polytope_net(P: Polytope, h, budget):
    H = P._hull
    k = H.k
    if k == 0:
        return H.from_chart(np.zeros((1, 0)))
    # chart coordinates are orthonormal, so l_inf in R^d <= l2 in chart <= sqrt(k) l_inf
    hz = h if k == P.dim else h / math.sqrt(k)
    z_all = (P.vertices - H.origin) @ H.basis.T
    lo, hi = z_all.min(axis=0), z_all.max(axis=0)
    grid = _grid(lo, hi, hz, budget)
    parts = [grid[H.inside_chart(grid)]]
    if k == 1:
        parts.append(np.array([[H.lo], [H.hi]]))
    else:
        zverts = z_all
        for simplex in H.simplices:
            Vs = zverts[simplex]
            diam = max(np.linalg.norm(a - b) for a, b in itertools.combinations(Vs, 2))
            steps = max(1, int(math.ceil(2.0 * diam / hz)))
            parts.append(_simplex_lattice(Vs, steps))
            if sum(len(p) for p in parts) > budget:
                raise BudgetExceeded(sum(len(p) for p in parts), budget)
        parts.append(zverts)
    z = np.vstack(parts)
    return H.from_chart(z)


def discretize(K: CompactSet, resolution: float, budget: int | None = None) -> np.ndarray:
    """Finite h-net of ``K`` with ``h <= resolution`` in the l_inf metric.

    Balls and polytopes get an axis grid over the bounding box filtered by
    membership plus a boundary layer (interior grid nodes lie within h/2,
    boundary samples within h/2 of the boundary). Point clouds return their
    points. The result is deduplicated and sorted lexicographically.
    """
    if not resolution > 0:
        raise ValueError("resolution must be positive")
    budget = point_budget() if budget is None else budget
    if isinstance(K, PointCloud):
        return K.points.copy()
    h = float(resolution)
    if isinstance(K, Ball):
        lo, hi = bounding_box(K)
        grid = _grid(lo, hi, h, budget)
        inner = grid[contains_many(K, grid)]
        net = np.vstack([inner, _ball_boundary(K, h, budget - len(inner))])
    else:
        net = _polytope_net(K, h, budget)
    if len(net) > budget:
        raise BudgetExceeded(len(net), budget)
    return np.unique(net, axis=0)


@dataclass(frozen=True)
class ConvexityProbe:
    """Outcome of :func:`convexity_probe`; truthy when no counterexample was found."""

    convex: bool
    witness: tuple | None = None
    analytic: bool = False

    def __bool__(self):
        return self.convex


def convexity_probe(K: CompactSet, trials: int = 1000, seed: int = 0) -> ConvexityProbe:
    """Look for two members whose midpoint is not a member (tol 1e-7).

    Balls and polytopes are convex by construction and short-circuit. A
    failed probe carries the witness ``(a, b, midpoint)``.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if isinstance(K, (Ball, Polytope)):
        return ConvexityProbe(True, None, analytic=True)
    pts = K.points
    if len(pts) == 1:
        return ConvexityProbe(True, None, analytic=True)
    rng = np.random.default_rng(seed)
    # every midpoint of distinct cloud points is checked first when affordable
    pairs = list(itertools.combinations(range(len(pts)), 2))
    if len(pairs) > trials:
        idx = rng.choice(len(pairs), size=trials, replace=False)
        pairs = [pairs[i] for i in sorted(idx)]
    for i, j in pairs:
        mid = 0.5 * (pts[i] + pts[j])
        if not contains(K, mid, 1e-7):
            return ConvexityProbe(False, (pts[i].tolist(), pts[j].tolist(), mid.tolist()))
    return ConvexityProbe(True, None)


# ---------------------------------------------------------------------------
# JSON interchange

def set_to_json(K: CompactSet) -> dict:
    if isinstance(K, Ball):
        return {"kind": "ball", "norm": spec_to_json(K.norm),
                "center": K.center.tolist(), "radius": K.radius}
    if isinstance(K, Polytope):
        return {"kind": "polytope", "vertices": K.vertices.tolist()}
    return {"kind": "cloud", "points": K.points.tolist()}


def set_from_json(obj: dict) -> CompactSet:
    kind = obj.get("kind")
    if kind == "ball":
        return Ball(spec_from_json(obj["norm"]), obj["center"], obj["radius"])
    if kind == "polytope":
        return Polytope(obj["vertices"])
    if kind == "cloud":
        return PointCloud(obj["points"])
    raise ValueError(f"unknown set kind {kind!r}")
