"""
Brute-force ground truth: exhaustive epsilon-argmin over a discretized set.

Nothing here touches the optimization path of :mod:`multinorm.projection`;
the only shared pieces are :func:`eval_norm` and :func:`discretize`.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .geometry import CompactSet, PointCloud, contains, discretize
from .norms import NormSpec, describe, eval_norm, linf_upper_constant

__all__ = ["OracleReport", "grid_argmin", "compare", "hausdorff", "MATCH",
           "DISTANCE_MISMATCH", "WITNESS_MISMATCH"]

MATCH = "match"
DISTANCE_MISMATCH = "distance_mismatch"
WITNESS_MISMATCH = "witness_mismatch"

_CHUNK = 1 << 16


@dataclass
class OracleReport:
    resolution: float
    eps: float
    argmin_points: np.ndarray
    min_value: float
    lipschitz: float
    objective: str
    x: np.ndarray
    agreement: str | None = None
    details: str = ""
    unmatched: list = field(default_factory=list)

    @property
    def error_bar(self) -> float:
        """Worst-case gap between ``min_value`` and the true infimum."""
        return self.lipschitz * self.resolution

    def to_json(self) -> dict:
        return {
            "resolution": self.resolution, "eps": self.eps,
            "objective": self.objective, "x": self.x.tolist(),
            "min_value": self.min_value, "lipschitz": self.lipschitz,
            "argmin_points": self.argmin_points.tolist(),
            "agreement": self.agreement, "details": self.details,
            "unmatched": self.unmatched,
        }


def _evaluate(objective, x, net, threads):
    chunks = [net[i:i + _CHUNK] for i in range(0, len(net), _CHUNK)]

    def run(chunk):
        return eval_norm(objective, x - chunk)

    if threads > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(threads) as pool:
            parts = list(pool.map(run, chunks))
    else:
        parts = [run(c) for c in chunks]
    return np.concatenate(parts)


def grid_argmin(K: CompactSet, objective: NormSpec, x, resolution: float, eps: float,
                budget: int | None = None, threads: int = 1) -> OracleReport:
    """Exhaustive epsilon-argmin of ``objective(x - g)`` over ``discretize(K, resolution)``.

    Raises ``ValueError`` when ``x`` lies in ``K``.
    """
    x = np.asarray(x, dtype=float)
    if contains(K, x, 0.0):
        raise ValueError("query point lies in K; the nearest-point problem needs x outside K")
    if eps < 0:
        raise ValueError("eps must be nonnegative")
    net = discretize(K, resolution, budget)
    vals = _evaluate(objective, x, net, threads)
    m = float(vals.min())
    keep = vals <= m + eps
    # point clouds are enumerated exactly
    lip = 0.0 if isinstance(K, PointCloud) else linf_upper_constant(objective, K.dim)
    return OracleReport(
        resolution=float(resolution), eps=float(eps), argmin_points=net[keep],
        min_value=m, lipschitz=lip, objective=describe(objective), x=x,
    )


def _nearest_linf(A, B):
    """For each row of A, l_inf distance to the closest row of B (and its index)."""
    dist = np.empty(len(A))
    idx = np.empty(len(A), dtype=int)
    for i in range(0, len(A), 512):
        D = np.abs(A[i:i + 512, None, :] - B[None]).max(axis=2)
        idx[i:i + 512] = D.argmin(axis=1)
        dist[i:i + 512] = D[np.arange(len(D)), idx[i:i + 512]]
    return dist, idx


def hausdorff(A, B) -> float:
    """Hausdorff distance in l_inf between two finite point sets."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    B = np.atleast_2d(np.asarray(B, dtype=float))
    if len(A) == 0 or len(B) == 0:
        return 0.0 if len(A) == len(B) else np.inf
    return float(max(_nearest_linf(A, B)[0].max(), _nearest_linf(B, A)[0].max()))


def compare(solver_result, report: OracleReport) -> OracleReport:
    """Fill ``report.agreement`` from a solver's ``NearestPointResult``.

    Distances must agree within ``eps + lipschitz * resolution``; witness
    sets within Hausdorff distance ``2 * resolution``.
    """
    if not np.array_equal(np.asarray(solver_result.x, dtype=float), report.x):
        raise ValueError("solver result and oracle report are for different query points")
    if describe(solver_result.objective) != report.objective:
        raise ValueError("solver result and oracle report use different objectives")
    W = np.asarray(solver_result.witnesses, dtype=float)
    gap = abs(solver_result.distance - report.min_value)
    bound = solver_result.epsilon + report.error_bar
    if gap > bound:
        return replace(report, agreement=DISTANCE_MISMATCH,
                       details=f"|distance - oracle min| = {gap:.3g} > {bound:.3g}")
    h = 2.0 * report.resolution
    dW, iW = _nearest_linf(W, report.argmin_points)
    dO, iO = _nearest_linf(report.argmin_points, W)
    unmatched = [{"witness": W[i].tolist(), "nearest_oracle": report.argmin_points[iW[i]].tolist(),
                  "distance": float(dW[i])} for i in np.flatnonzero(dW > h)]
    uncovered = [{"oracle": report.argmin_points[i].tolist(), "nearest_witness": W[iO[i]].tolist(),
                  "distance": float(dO[i])} for i in np.flatnonzero(dO > h)]
    if unmatched or uncovered:
        hd = float(max(dW.max(), dO.max()))
        return replace(report, agreement=WITNESS_MISMATCH, unmatched=unmatched + uncovered,
                       details=(f"Hausdorff distance {hd:.3g} > {h:.3g}: {len(unmatched)} solver "
                                f"witnesses off the oracle argmin, {len(uncovered)} oracle points "
                                "not covered by the solver"))
    return replace(report, agreement=MATCH,
                   details=f"distance gap {gap:.3g} <= {bound:.3g}; witness sets within {h:.3g}")
