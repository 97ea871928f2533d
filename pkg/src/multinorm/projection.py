"""
Nearest-point sets (metric projections) onto compact sets, for single norms,
ordered pairs of norms via their sum, and whole increasing families via the
chain of partial sums.

Every result carries a finite set of epsilon-minimizers ("witnesses") rather
than an exact argmin, since argmin sets can be continua (a face of a ball).
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .geometry import (
    Ball, CompactSet, PointCloud, Polytope, bounding_box, contains, contains_many,
    convexity_probe, diameter, discretize, set_to_json,
)
from .norms import (
    NormFamily, NormSpec, NotIncreasingError, Sum, certify_pair, describe, eval_norm,
    is_norm, spec_to_json, subgradient,
)

__all__ = [
    "NearestPointResult", "ChainResult", "NotExteriorError", "SolverAccuracyError",
    "NestingViolation", "nearest_point_set", "common_nearest_two",
    "common_nearest_family", "uniqueness_check", "witness_diameter",
    "YES", "NO", "UNKNOWN",
]

YES, NO, UNKNOWN = "yes", "no", "unknown"

DEFAULT_REL_EPS = 1e-6
DEFAULT_GRID_DIVISIONS = 64
DEFAULT_STARTS = 32
DEFAULT_ITERATIONS = 200
REFINE_FACTOR = 8
FINAL_STARTS = 4
BISECTION_STEPS = 45
# ellipsoid radius shrinks by ~exp(-1/(2k(k+1))) per step; 32 e-folds ~ 1e-14
ELLIPSOID_EFOLDS = 32


class NotExteriorError(ValueError):
    """The query point lies in K; nearest-point problems need x outside K."""


class SolverAccuracyError(RuntimeError):
    """Two solves of the same instance contradict each other beyond tolerance."""

    def __init__(self, message, level=None):
        super().__init__(message)
        self.level = level


class NestingViolation(SolverAccuracyError):
    """A deeper level's witnesses are not epsilon-optimal for a shallower level."""


@dataclass
class NearestPointResult:
    distance: float
    witnesses: np.ndarray
    values: np.ndarray
    epsilon: float
    unique: str
    objective: NormSpec
    x: np.ndarray
    trace: list = field(default_factory=list)
    # filled by common_nearest_two: per-norm optimal distances and gaps
    parts: tuple = ()
    part_distances: tuple = ()
    part_gaps: np.ndarray | None = None

    @property
    def best(self) -> np.ndarray:
        """The witness with the smallest objective value (lexicographic tie-break)."""
        return self.witnesses[int(np.argmin(self.values))]

    @property
    def common_mask(self) -> np.ndarray | None:
        """Witnesses that are also optimal for every part (two-norm solves only)."""
        if self.part_gaps is None:
            return None
        return np.all(self.part_gaps <= 2.0 * self.epsilon, axis=1)

    @property
    def common_witnesses(self) -> np.ndarray | None:
        mask = self.common_mask
        return None if mask is None else self.witnesses[mask]

    def to_json(self) -> dict:
        out = {
            "objective": spec_to_json(self.objective),
            "objective_name": describe(self.objective),
            "x": self.x.tolist(),
            "distance": self.distance,
            "epsilon": self.epsilon,
            "unique": self.unique,
            "witnesses": self.witnesses.tolist(),
            "values": self.values.tolist(),
            "trace": self.trace,
        }
        if self.parts:
            out["part_distances"] = list(self.part_distances)
            out["part_gaps"] = self.part_gaps.tolist()
            out["common_witnesses"] = self.common_witnesses.tolist()
        return out


# ---------------------------------------------------------------------------
# Search domain in chart coordinates

class _Domain:
    def __init__(self, K: CompactSet):
        self.K = K
        if isinstance(K, Polytope):
            H = K._hull
            self.origin, self.basis, self.k = H.origin, H.basis, H.k
            self._inside = H.inside_chart
        else:
            d = K.dim
            self.origin, self.basis, self.k = np.zeros(d), np.eye(d), d
            self._inside = lambda z: contains_many(K, z)

    def to_points(self, z):
        return self.origin + z @ self.basis

    def to_chart(self, p):
        return (p - self.origin) @ self.basis.T

    def pull(self, z, anchor):
        """Move points outside K onto the segment toward ``anchor`` (inside K)."""
        z = np.array(z, dtype=float)
        out = ~self._inside(z)
        if not out.any():
            return z
        a, p = anchor[out], z[out]
        lo = np.zeros(len(a))
        hi = np.ones(len(a))
        for _ in range(BISECTION_STEPS):
            mid = 0.5 * (lo + hi)
            ok = self._inside(a + mid[:, None] * (p - a))
            lo = np.where(ok, mid, lo)
            hi = np.where(ok, hi, mid)
        z[out] = a + lo[:, None] * (p - a)
        return z


def _separator(dom):
    """Return ``sep(z)``: a normal ``a`` with K inside ``{a . (y - z) <= 0}``, or None if z in K."""
    K = dom.K
    if isinstance(K, Ball):
        def sep(z):
            v = z - K.center
            if eval_norm(K.norm, v) <= K.radius:
                return None
            return subgradient(K.norm, v)
        return sep
    H = K._hull
    if H.k == 1:
        return lambda z: (np.array([-1.0]) if z[0] < H.lo else
                          np.array([1.0]) if z[0] > H.hi else None)
    A, b = H.equations[:, :-1], H.equations[:, -1]

    def sep(z):
        r = A @ z + b
        i = int(np.argmax(r))
        return A[i] if r[i] > 0 else None
    return sep


def _ellipsoid(norm, x, dom, center, radius):
    """Central-cut ellipsoid method for min norm(x - y) over the convex set K.

    Objective and feasibility cuts both come from exact subgradients, so the
    method converges on nonsmooth objectives (l1, l_inf, sums) where simplex
    searches stall at kinks. Returns the best feasible chart point, or None.
    """
    k = dom.k
    c = np.array(center, dtype=float)
    P = np.eye(k) * radius ** 2
    sep = _separator(dom)
    best, fbest = None, math.inf
    floor = (1e-15 * max(radius, 1.0)) ** 2
    for _ in range(int(2 * k * (k + 1) * ELLIPSOID_EFOLDS) + 50):
        g = sep(c)
        if g is None:
            p = dom.to_points(c[None])[0]
            f = eval_norm(norm, x - p)
            if f < fbest:
                best, fbest = c.copy(), f
            g = -(dom.basis @ subgradient(norm, x - p))
            if not np.any(g):
                break
        Pg = P @ g
        gPg = float(g @ Pg)
        if gPg <= floor:
            break
        step = Pg / math.sqrt(gPg)
        if k == 1:
            c = c - 0.5 * step
            P = 0.25 * P
        else:
            c = c - step / (k + 1)
            P = (k * k / (k * k - 1.0)) * (P - (2.0 / (k + 1)) * np.outer(step, step))
            P = 0.5 * (P + P.T)
    return best


def _random_rotations(rng, count, k):
    G = rng.standard_normal((count, k, k))
    Q, R = np.linalg.qr(G)
    return Q * np.sign(np.diagonal(R, axis1=1, axis2=2))[:, None, :]


def _nelder_mead(F, dom, starts, step, rot, iterations):
    """Batched simplex search, one simplex per start; vertices kept inside K."""
    B, k = starts.shape
    rows = np.arange(B)
    S = np.empty((B, k + 1, k))
    S[:, 0] = starts
    S[:, 1:] = starts[:, None, :] + step * np.transpose(rot, (0, 2, 1))
    anchors = np.repeat(starts[:, None, :], k + 1, axis=1).reshape(-1, k)
    S = dom.pull(S.reshape(-1, k), anchors).reshape(B, k + 1, k)
    fS = F(S.reshape(-1, k)).reshape(B, k + 1)
    for _ in range(iterations):
        order = np.argsort(fS, axis=1, kind="stable")
        S = S[rows[:, None], order]
        fS = fS[rows[:, None], order]
        best, worst = S[:, 0], S[:, -1]
        f0, fsw, fw = fS[:, 0], fS[:, -2], fS[:, -1]
        # converged simplices are frozen row by row, so a row's trajectory
        # never depends on which other rows share its batch
        live = fw - f0 > 1e-15 * (1.0 + np.abs(f0))
        if not live.any():
            break
        c = S[:, :-1].mean(axis=1)
        trial = np.concatenate([c + (c - worst), c + 2.0 * (c - worst),
                                c + 0.5 * (c - worst), c + 0.5 * (worst - c)])
        trial = dom.pull(trial, np.tile(best, (4, 1)))
        ft = F(trial).reshape(4, B)
        xr, xe, xoc, xic = trial.reshape(4, B, k)
        fr, fe, foc, fic = ft

        new = np.empty_like(best)
        fnew = np.empty_like(f0)
        accept = np.zeros(B, dtype=bool)

        expand = fr < f0
        use_e = expand & (fe < fr)
        new[use_e], fnew[use_e] = xe[use_e], fe[use_e]
        use_r = (expand & ~use_e) | (~expand & (fr < fsw))
        new[use_r], fnew[use_r] = xr[use_r], fr[use_r]
        accept |= expand | use_r

        outside = ~accept & (fr < fw)
        oc_ok = outside & (foc <= fr)
        new[oc_ok], fnew[oc_ok] = xoc[oc_ok], foc[oc_ok]
        inside = ~accept & ~outside
        ic_ok = inside & (fic < fw)
        new[ic_ok], fnew[ic_ok] = xic[ic_ok], fic[ic_ok]
        accept |= oc_ok | ic_ok

        accept &= live
        S[accept, -1] = new[accept]
        fS[accept, -1] = fnew[accept]

        shrink = ~accept & live
        if shrink.any():
            sb = S[shrink, :1]
            moved = sb + 0.5 * (S[shrink, 1:] - sb)
            anchors = np.repeat(sb, k, axis=1).reshape(-1, k)
            moved = dom.pull(moved.reshape(-1, k), anchors).reshape(-1, k, k)
            S[shrink, 1:] = moved
            fS[shrink, 1:] = F(moved.reshape(-1, k)).reshape(-1, k)
    return S.reshape(-1, k), fS.ravel()


def _polish(F, dom, starts, step, rng, iterations, threads):
    B, k = starts.shape
    rot = _random_rotations(rng, B, k)
    if threads <= 1 or B < 2:
        return _nelder_mead(F, dom, starts, step, rot, iterations)
    bounds = np.linspace(0, B, min(threads, B) + 1).astype(int)
    jobs = [(starts[a:b], rot[a:b]) for a, b in zip(bounds[:-1], bounds[1:])]
    with ThreadPoolExecutor(len(jobs)) as pool:
        parts = list(pool.map(lambda j: _nelder_mead(F, dom, j[0], step, j[1], iterations), jobs))
    return np.concatenate([p[0] for p in parts]), np.concatenate([p[1] for p in parts])


def _top(points, values, m):
    """Indices of the ``m`` smallest values; ties broken lexicographically."""
    keys = [points[:, j] for j in range(points.shape[1] - 1, -1, -1)] + [values]
    order = np.lexsort(keys)
    return order[:m]


def _lattice_windows(centers, lo, step, half):
    """Points of the lattice ``lo + step * Z^k`` within ``half`` of each center."""
    k = centers.shape[1]
    span = int(math.ceil(half / step))
    offsets = np.stack(np.meshgrid(*([np.arange(-span, span + 1)] * k), indexing="ij"),
                       axis=-1).reshape(-1, k)
    base = np.round((centers - lo) / step).astype(np.int64)
    idx = np.unique((base[:, None, :] + offsets[None]).reshape(-1, k), axis=0)
    owner = np.abs(lo + idx[:, None, :] * step - centers[None]).max(axis=2).argmin(axis=1)
    return lo + idx * step, owner


def _dedupe(points, values, cell):
    """Keep the best point per spatial cell of size ``cell``; sort lexicographically."""
    if len(points) <= 1:
        return points, values
    # cells centred on multiples of ``cell``, so exact values like 1.0 do not sit on an edge
    keys = np.rint(points / cell).astype(np.int64)
    order = np.lexsort([values] + [keys[:, j] for j in range(keys.shape[1] - 1, -1, -1)])
    keys, points, values = keys[order], points[order], values[order]
    first = np.ones(len(keys), dtype=bool)
    first[1:] = np.any(keys[1:] != keys[:-1], axis=1)
    points, values = points[first], values[first]
    order = np.lexsort([points[:, j] for j in range(points.shape[1] - 1, -1, -1)])
    return points[order], values[order]


def witness_diameter(witnesses, norm: NormSpec) -> float:
    """Largest ``norm(a - b)`` over pairs of witnesses."""
    W = np.asarray(witnesses, dtype=float)
    if len(W) < 2:
        return 0.0
    if len(W) > 2000:
        # the max of a convex function of (a, b) sits at extreme points
        try:
            from scipy.spatial import ConvexHull
            W = W[ConvexHull(W).vertices]
        except Exception:
            pass
    best = 0.0
    for i in range(0, len(W), 256):
        D = eval_norm(norm, W[i:i + 256, None, :] - W[None])
        best = max(best, float(np.max(D)))
    return best


def _verdict(K, witnesses, norm, tol):
    diam = witness_diameter(witnesses, norm)
    if diam > 10.0 * tol:
        return NO
    # point clouds are enumerated exactly, so a tight witness set is the whole
    # argmin whether or not the cloud is convex
    if diam <= tol and (isinstance(K, PointCloud) or convexity_probe(K)):
        return YES
    return UNKNOWN


def _check_query(K, norm, x):
    x = np.asarray(x, dtype=float)
    if x.shape != (K.dim,):
        raise ValueError(f"query point must have dimension {K.dim}")
    if not np.all(np.isfinite(x)):
        raise ValueError("query point has non-finite coordinates")
    if not is_norm(norm):
        raise ValueError("objective must be a norm, not a bare seminorm")
    if contains(K, x, 0.0):
        raise NotExteriorError("x lies in K; the nearest-point problem needs x outside K")
    return x


def nearest_point_set(K: CompactSet, norm: NormSpec, x, eps: float | None = None, *,
                      resolution: float | None = None, seed: int = 42,
                      starts: int = DEFAULT_STARTS, iterations: int = DEFAULT_ITERATIONS,
                      threads: int = 1, budget: int | None = None,
                      unique_tol: float = 1e-3) -> NearestPointResult:
    """Epsilon-argmin of ``norm(x - y)`` over ``y`` in ``K``.

    Point clouds are enumerated exactly. Balls and polytopes go through a
    coarse grid (``resolution``, default diameter/64), a projected simplex
    polish from the best ``starts`` grid points, an ellipsoid-method run
    that pins down the optimal value, one refinement round on a
    lattice of spacing ``resolution/8`` around the incumbents, and a final
    polish. ``eps`` defaults to 1e-6 times the coarse-grid optimum.

    Raises
    ------
    NotExteriorError
        If ``x`` lies in ``K``.
    BudgetExceeded
        If the coarse grid does not fit in the point budget.
    """
    x = _check_query(K, norm, x)
    if eps is not None and not eps > 0:
        raise ValueError("eps must be positive")

    if isinstance(K, PointCloud):
        pts = K.points
        vals = eval_norm(norm, x - pts)
        dist = float(vals.min())
        e = float(eps) if eps is not None else DEFAULT_REL_EPS * dist
        keep = vals <= dist + e
        W, V = _dedupe(pts[keep], vals[keep], e)
        trace = [{"stage": "enumerate", "points": int(len(pts)), "best": dist}]
        return NearestPointResult(dist, W, V, e, _verdict(K, W, norm, unique_tol), norm, x, trace)

    dom = _Domain(K)
    h = float(resolution) if resolution else diameter(K) / DEFAULT_GRID_DIVISIONS
    rng = np.random.default_rng(seed)

    def F(z):
        return eval_norm(norm, x - dom.to_points(z))

    grid = dom.to_chart(discretize(K, h, budget))
    gvals = F(grid)
    coarse = float(gvals.min())
    e = float(eps) if eps is not None else DEFAULT_REL_EPS * coarse
    trace = [{"stage": "coarse", "resolution": h, "points": int(len(grid)), "best": coarse}]
    pools = [(grid, gvals)]

    if dom.k == 0:
        cand, cvals = grid, gvals
    else:
        idx = _top(grid, gvals, min(starts, len(grid)))
        P, PV = _polish(F, dom, grid[idx], h, rng, iterations, threads)
        pools.append((P, PV))
        trace.append({"stage": "polish", "starts": int(len(idx)), "iterations": iterations,
                      "best": float(PV.min())})

        # K is convex here, so a cutting-plane run reaches the global optimum
        lo_c, hi_c = grid.min(axis=0), grid.max(axis=0)
        z = _ellipsoid(norm, x, dom, 0.5 * (lo_c + hi_c),
                       0.5 * float(np.linalg.norm(hi_c - lo_c)) + h)
        if z is not None:
            z = z[None]
            P, PV = np.concatenate([z, P]), np.concatenate([F(z), PV])
            pools.append((z, PV[:1]))
            trace.append({"stage": "ellipsoid", "best": float(PV[0])})

        # refinement on a lattice anchored at the grid corner, so the sampled
        # points do not depend on where individual polish runs ended up
        inc = P[_top(P, PV, len(P))]
        inc = inc[np.unique(np.floor(inc / (h / 4)), axis=0, return_index=True)[1]][:starts]
        hr = h / REFINE_FACTOR
        lo = grid.min(axis=0)
        L, owner = _lattice_windows(inc, lo, hr, h)
        L = dom.pull(L, inc[owner])
        LV = F(L)
        pools.append((L, LV))
        trace.append({"stage": "refine", "resolution": hr, "points": int(len(L)),
                      "best": float(LV.min())})

        cand = np.concatenate([p[0] for p in pools])
        cvals = np.concatenate([p[1] for p in pools])
        idx = _top(cand, cvals, FINAL_STARTS)
        Q, QV = _polish(F, dom, cand[idx], hr, rng, iterations, threads)
        pools.append((Q, QV))
        trace.append({"stage": "final_polish", "starts": int(len(idx)), "iterations": iterations,
                      "best": float(QV.min())})
        cand = np.concatenate([p[0] for p in pools])
        cvals = np.concatenate([p[1] for p in pools])

    dist = float(cvals.min())
    keep = cvals <= dist + e
    W, V = _dedupe(dom.to_points(cand[keep]), cvals[keep], e)
    return NearestPointResult(dist, W, V, e, _verdict(K, W, norm, unique_tol), norm, x, trace)


def _ensure_optimal(results, witnesses, labels):
    """Raise if any collected witness beats a solve's reported optimum."""
    for r, label in zip(results, labels):
        vals = eval_norm(r.objective, r.x - witnesses)
        better = float(vals.min())
        if better < r.distance - r.epsilon:
            raise SolverAccuracyError(
                f"{label} ({describe(r.objective)}): a witness from another solve reaches "
                f"{better:.12g} < reported optimum {r.distance:.12g} - eps", level=label)


def common_nearest_two(K: CompactSet, n1: NormSpec, n2: NormSpec, x, eps: float | None = None,
                       **solver) -> NearestPointResult:
    """Minimize ``n1 + n2`` over ``K`` and score each witness against both norms.

    Requires ``n1 <= n2`` pointwise (certified by sampling/structure; raises
    NotIncreasingError otherwise). The returned result's ``part_gaps[i, j]``
    is ``n_j(x - w_i) - dist_j``; :attr:`NearestPointResult.common_witnesses`
    are the witnesses optimal for both norms within ``2 * eps``. That set may
    be empty: the sum's minimizers need not minimize each norm separately.
    """
    x = _check_query(K, n1, x)
    try:
        certify_pair(n1, n2, K.dim)
    except NotIncreasingError as err:
        raise NotIncreasingError(f"norm pair is not ordered n1 <= n2: {err}",
                                 witness=err.witness) from None
    total = nearest_point_set(K, Sum((n1, n2)), x, eps, **solver)
    singles = [nearest_point_set(K, n, x, eps, **solver) for n in (n1, n2)]
    pool = np.concatenate([total.witnesses] + [s.witnesses for s in singles])
    _ensure_optimal([total] + singles, pool, ["sum", "n1", "n2"])
    gaps = np.stack([eval_norm(n, x - total.witnesses) - s.distance
                     for n, s in zip((n1, n2), singles)], axis=1)
    total.parts = (n1, n2)
    total.part_distances = tuple(s.distance for s in singles)
    total.part_gaps = gaps
    return total


@dataclass
class ChainResult:
    """Per-level results for the partial sums ``S_n = norm_1 + ... + norm_n``."""

    per_level: list
    singles: list
    intersection_witnesses: np.ndarray
    nesting: list
    validation: np.ndarray
    family: NormFamily
    set: CompactSet
    x: np.ndarray

    @property
    def nested(self) -> bool:
        return all(step["ok"] for step in self.nesting)

    @property
    def single_distances(self) -> list:
        return [r.distance for r in self.singles]

    @property
    def common_mask(self) -> np.ndarray:
        tol = np.array([r.epsilon for r in self.singles]) + self.per_level[-1].epsilon
        return np.all(self.validation <= tol, axis=1)

    @property
    def common_witnesses(self) -> np.ndarray:
        """Deepest-level witnesses that are optimal for every single norm."""
        return self.intersection_witnesses[self.common_mask]

    def to_json(self) -> dict:
        return {
            "set": set_to_json(self.set),
            "x": self.x.tolist(),
            "levels": [r.to_json() for r in self.per_level],
            "single_norm": [r.to_json() for r in self.singles],
            "single_distances": self.single_distances,
            "nesting": self.nesting,
            "nested": self.nested,
            "intersection_witnesses": self.intersection_witnesses.tolist(),
            "validation_gaps": self.validation.tolist(),
            "common_witnesses": self.common_witnesses.tolist(),
        }


def common_nearest_family(K: CompactSet, family: NormFamily, x, eps: float | None = None, *,
                          strict: bool = False, **solver) -> ChainResult:
    """Solve every partial sum of an increasing family and check the nesting.

    Level ``n`` minimizes ``norm_1 + ... + norm_n``. Nesting asks that each
    level-(n+1) witness be within ``2 * eps`` of the level-n optimum. A
    failed check is recorded in ``nesting``; with ``strict=True`` it raises
    NestingViolation. Solves that contradict each other (a witness of one
    level beats another level's optimum) raise SolverAccuracyError.
    """
    if not family.increasing_certified:
        raise NotIncreasingError("common_nearest_family needs an increasing-certified family")
    x = _check_query(K, family[0], x)
    singles = [nearest_point_set(K, s, x, eps, **solver) for s in family]
    levels = []
    objectives = []
    for n in range(1, len(family) + 1):
        obj = family[0] if n == 1 else Sum(tuple(family.specs[:n]))
        objectives.append(obj)
        levels.append(singles[0] if n == 1 else nearest_point_set(K, obj, x, eps, **solver))

    pool = np.concatenate([r.witnesses for r in levels + singles])
    labels = [f"level {n}" for n in range(1, len(levels) + 1)] + [
        f"norm {n}" for n in range(1, len(singles) + 1)]
    _ensure_optimal(levels + singles, pool, labels)

    nesting = []
    for n in range(1, len(levels)):
        upper, deeper = levels[n - 1], levels[n]
        gaps = eval_norm(objectives[n - 1], x - deeper.witnesses) - upper.distance
        tol = upper.epsilon + deeper.epsilon
        step = {"level": n + 1, "against": n, "max_gap": float(gaps.max()), "tol": tol,
                "ok": bool(gaps.max() <= tol)}
        nesting.append(step)
        if strict and not step["ok"]:
            raise NestingViolation(
                f"level {n + 1} witnesses miss the level {n} optimum by {step['max_gap']:.3g} "
                f"(tolerance {tol:.3g})", level=n + 1)

    W = levels[-1].witnesses
    validation = np.stack([eval_norm(s, x - W) - r.distance for s, r in zip(family, singles)],
                          axis=1)
    return ChainResult(levels, singles, W, nesting, validation, family, K, x)


def uniqueness_check(chain: ChainResult, family: NormFamily, uc_index: int,
                     tol: float) -> str:
    """Verdict on uniqueness of the nearest point at level ``uc_index`` (1-based).

    ``"yes"``: the level's witnesses have diameter <= ``tol`` under norm
    ``uc_index`` and K is convex or an exactly enumerated point cloud. ``"no"``: two witnesses
    are more than ``10 * tol`` apart. ``"unknown"`` otherwise. The caller is
    responsible for the norm at ``uc_index`` being uniformly convex.
    """
    if not 1 <= uc_index <= len(family):
        raise ValueError(f"uc_index must be in 1..{len(family)}")
    if not tol > 0:
        raise ValueError("tol must be positive")
    level = chain.per_level[uc_index - 1]
    return _verdict(chain.set, level.witnesses, family[uc_index - 1], tol)
