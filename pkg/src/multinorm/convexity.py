"""
Sampled estimates of the modulus of convexity

    delta(e) = inf { 1 - ||(x + y)/2|| : ||x|| = ||y|| = 1, ||x - y|| >= e }

A finite sample can only find pairs with large midpoints, never rule them
out, so every estimate here is an upper bound on the true delta. A stored
pair is an exact certificate of that upper bound, which is what makes
negative ("not uniformly convex") verdicts rigorous.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .norms import NormSpec, describe, eval_norm, is_norm, spec_to_json

__all__ = ["ModulusEstimate", "modulus_of_convexity", "uc_verdict", "verify_pair",
           "DEFAULT_EPS_GRID", "UC_EVIDENCE", "NOT_UC_EVIDENCE", "INCONCLUSIVE"]

DEFAULT_EPS_GRID = (0.25, 0.5, 1.0, 1.5, 1.9, 2.0)
UC_EVIDENCE = "uc_evidence"
NOT_UC_EVIDENCE = "not_uc_evidence"
INCONCLUSIVE = "inconclusive"

BATCH = 10_000
FEAS_TOL = 1e-12
PAIR_TOL = 1e-9


@dataclass
class ModulusEstimate:
    norm: NormSpec
    dim: int
    eps_grid: list
    delta_hat: list
    witness_pairs: list
    samples: int
    seed: int
    failures: dict = field(default_factory=dict)
    # delta is nondecreasing in e; indices j where delta_hat[j+1] < delta_hat[j]
    monotone_violations: list = field(default_factory=list)
    direction: str = "upper_bound"

    def to_json(self) -> dict:
        return {
            "norm": spec_to_json(self.norm), "norm_name": describe(self.norm),
            "dim": self.dim, "samples": self.samples, "seed": self.seed,
            "direction": self.direction,
            "eps_grid": list(self.eps_grid),
            "delta_hat": [None if d is None else d for d in self.delta_hat],
            "witness_pairs": [None if p is None else [p[0].tolist(), p[1].tolist()]
                              for p in self.witness_pairs],
            "failures": {str(k): v for k, v in self.failures.items()},
            "monotone_violations": self.monotone_violations,
        }

    def table(self) -> str:
        lines = [f"modulus of convexity, {describe(self.norm)} on R^{self.dim}, "
                 f"{self.samples} samples (upper bounds)",
                 f"{'eps':>8}  {'delta_hat':>14}"]
        for e, d in zip(self.eps_grid, self.delta_hat):
            lines.append(f"{e:>8.4g}  {'failed' if d is None else format(d, '>14.8f')}")
        return "\n".join(lines)


def _unit(norm, V):
    n = eval_norm(norm, V)
    return V / n[:, None]


def _repair(norm, X, Y, eps):
    """Move each y toward -x (on the sphere) until ||x - y|| >= eps.

    Returns the repaired Y and a feasibility mask. The bisection keeps the
    feasible end, so pairs land just on the constraint boundary.
    """
    ok = eval_norm(norm, X - Y) >= eps - FEAS_TOL
    if ok.all():
        return Y, ok
    bad = ~ok
    x, y = X[bad], Y[bad]

    def path(t):
        v = (1.0 - t)[:, None] * y - t[:, None] * x
        n = eval_norm(norm, v)
        # y == x would pass through 0 at t = 1/2; nudge off it
        n = np.where(n > 0, n, 1.0)
        return v / n[:, None]

    lo = np.zeros(len(x))
    hi = np.ones(len(x))
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        feas = eval_norm(norm, x - path(mid)) >= eps - FEAS_TOL
        hi = np.where(feas, mid, hi)
        lo = np.where(feas, lo, mid)
    y_new = path(hi)
    feas = eval_norm(norm, x - y_new) >= eps - FEAS_TOL
    Y = Y.copy()
    Y[bad] = y_new
    ok = ok.copy()
    ok[bad] = feas
    return Y, ok


def _batch_best(norm, dim, eps, n, rng, polish_steps, incumbent):
    X = _unit(norm, rng.standard_normal((n, dim)))
    Y = _unit(norm, rng.standard_normal((n, dim)))
    Y, ok = _repair(norm, X, Y, eps)
    if not ok.any():
        return None
    mid = np.where(ok, eval_norm(norm, 0.5 * (X + Y)), -np.inf)
    i = int(np.argmax(mid))
    bx, by, bm = X[i], Y[i], float(mid[i])
    if bm <= incumbent:
        return bx, by, bm
    sigma = 0.1
    for _ in range(polish_steps):
        px = _unit(norm, bx + sigma * rng.standard_normal((16, dim)))
        py = _unit(norm, by + sigma * rng.standard_normal((16, dim)))
        py, pok = _repair(norm, px, py, eps)
        pm = np.where(pok, eval_norm(norm, 0.5 * (px + py)), -np.inf)
        j = int(np.argmax(pm))
        if pm[j] > bm:
            bx, by, bm = px[j], py[j], float(pm[j])
        else:
            sigma *= 0.7
    return bx, by, bm


def modulus_of_convexity(norm: NormSpec, dim: int, eps_grid=DEFAULT_EPS_GRID,
                         samples: int = 100_000, seed: int = 42,
                         polish_steps: int = 100) -> ModulusEstimate:
    """Estimate delta(e) for each ``e`` in ``eps_grid`` from random unit pairs.

    Samples are drawn in batches of 10,000 with a seed schedule keyed on
    ``(seed, e index, batch)``. A batch whose raw best beats every earlier
    batch gets a local polish, and the estimate is the max over batches.
    Each decision depends on earlier batches alone, so a larger ``samples``
    (in whole batches) only adds candidates and never raises ``delta_hat``.
    """
    if not is_norm(norm):
        raise ValueError("modulus of convexity needs a norm")
    if samples < 1:
        raise ValueError("samples must be >= 1")
    grid = [float(e) for e in eps_grid]
    if any(not 0 < e <= 2 for e in grid):
        raise ValueError("every eps must lie in (0, 2]")
    deltas, pairs, failures = [], [], {}
    for j, e in enumerate(grid):
        best = None
        for b, start in enumerate(range(0, samples, BATCH)):
            n = min(BATCH, samples - start)
            rng = np.random.default_rng([seed, j, b])
            out = _batch_best(norm, dim, e, n, rng, polish_steps,
                              -np.inf if best is None else best[2])
            if out is not None and (best is None or out[2] > best[2]):
                best = out
        if best is None:
            failures[e] = "no sampled pair satisfied ||x - y|| >= eps"
            deltas.append(None)
            pairs.append(None)
        else:
            # rounding can push a flat midpoint a hair above 1
            deltas.append(max(0.0, 1.0 - best[2]))
            pairs.append((best[0], best[1]))
    viol = [j for j in range(len(grid) - 1)
            if deltas[j] is not None and deltas[j + 1] is not None
            and grid[j + 1] > grid[j] and deltas[j + 1] < deltas[j] - 1e-6]
    return ModulusEstimate(norm, dim, grid, deltas, pairs, samples, seed, failures, viol)


def verify_pair(norm: NormSpec, x, y, eps: float, tol: float = PAIR_TOL):
    """Re-check a witness pair from scratch.

    Returns ``(valid, delta_bound)``: ``valid`` when both vectors are unit
    (within ``tol``) and ``||x - y|| >= eps - tol``; ``delta_bound`` is
    ``1 - ||(x + y)/2||``, an exact upper bound on delta(eps) for valid pairs.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    valid = (abs(eval_norm(norm, x) - 1.0) <= tol and abs(eval_norm(norm, y) - 1.0) <= tol
             and eval_norm(norm, x - y) >= eps - tol)
    return bool(valid), 1.0 - eval_norm(norm, 0.5 * (x + y))


def uc_verdict(est: ModulusEstimate, threshold: float, eps_floor: float = 0.1) -> str:
    """Classify an estimate.

    ``not_uc_evidence`` when a stored pair, re-verified, shows delta(e) <=
    threshold/10 for some ``e >= eps_floor`` (a proof). ``uc_evidence`` when
    every ``e >= eps_floor`` on the grid has delta_hat >= threshold (not a
    proof). ``inconclusive`` otherwise.
    """
    if not threshold > 0:
        raise ValueError("threshold must be positive")
    usable = [(e, d, p) for e, d, p in zip(est.eps_grid, est.delta_hat, est.witness_pairs)
              if e >= eps_floor]
    for e, d, p in usable:
        if p is None:
            continue
        valid, bound = verify_pair(est.norm, p[0], p[1], e)
        if valid and bound <= threshold / 10.0:
            return NOT_UC_EVIDENCE
    if usable and all(d is not None and d >= threshold for _, d, _ in usable):
        return UC_EVIDENCE
    return INCONCLUSIVE
