"""
Norms on R^d and finite increasing norm families.

A norm is described by a small closed algebra of immutable specs:

    Lp(p)                 (sum |v_i|^p)^(1/p), p in [1, inf]
    WeightedLp(p, w)      ||w * v||_p with positive weights
    TruncSeminorm(n)      sum_{i<=n} |v_i|  (a seminorm; only valid inside Sum)
    Sum(parts)            sum of the parts
    MaxPrefix(parts)      max of the parts

Every evaluator is vectorized over leading axes, so ``eval_norm(spec, V)``
with ``V`` of shape ``(m, d)`` returns ``m`` values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence, Union

import numpy as np

__all__ = [
    "Lp", "WeightedLp", "TruncSeminorm", "Sum", "MaxPrefix", "NormSpec",
    "NormFamily", "NotIncreasingError", "eval_norm", "is_norm", "sum_norm",
    "make_increasing", "certify_increasing", "certify_pair", "frechet_metric",
    "build_l2plus_family", "linf_upper_constant", "coordinate_bounds",
    "spec_to_json", "spec_from_json", "subgradient", "family_to_json", "family_from_json",
    "describe",
]

INCREASING_SAMPLES = 10_000
INCREASING_TOL = 1e-9


class NotIncreasingError(ValueError):
    """Raised when a family (or ordered pair) fails the pointwise ordering check.

    ``witness`` holds a vector ``v`` with ``norm_k(v) > norm_{k+1}(v) + tol``.
    """

    def __init__(self, message, index=None, witness=None):
        super().__init__(message)
        self.index = index
        self.witness = witness


def _as_exponent(p) -> Union[Fraction, float]:
    if isinstance(p, Fraction):
        out = p
    elif isinstance(p, str):
        s = p.strip().lower()
        if s in ("inf", "infinity", "+inf"):
            return math.inf
        out = Fraction(s)
    elif isinstance(p, (int, np.integer)):
        out = Fraction(int(p))
    else:
        p = float(p)
        if math.isinf(p) and p > 0:
            return math.inf
        if not math.isfinite(p):
            raise ValueError(f"invalid exponent {p!r}")
        # shortest decimal repr keeps 2.5 -> 5/2, 2.3 -> 23/10
        out = Fraction(repr(p))
    if out < 1:
        raise ValueError(f"p must satisfy 1 <= p <= inf, got {p!r}")
    return out


@dataclass(frozen=True)
class Lp:
    p: Union[Fraction, float]

    def __post_init__(self):
        object.__setattr__(self, "p", _as_exponent(self.p))


@dataclass(frozen=True)
class WeightedLp:
    """``||w * v||_p``; weights must be positive and match the dimension."""

    p: Union[Fraction, float]
    weights: tuple

    def __post_init__(self):
        object.__setattr__(self, "p", _as_exponent(self.p))
        w = tuple(float(x) for x in self.weights)
        if not w or any(not (x > 0 and math.isfinite(x)) for x in w):
            raise ValueError("weights must be a nonempty list of positive reals")
        object.__setattr__(self, "weights", w)


@dataclass(frozen=True)
class TruncSeminorm:
    n: int

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ValueError("TruncSeminorm needs an integer n >= 1")
        object.__setattr__(self, "n", int(self.n))


@dataclass(frozen=True)
class Sum:
    parts: tuple

    def __post_init__(self):
        parts = tuple(self.parts)
        if not parts:
            raise ValueError("Sum needs at least one part")
        for q in parts:
            _check_spec(q)
        if not any(is_norm(q) for q in parts):
            raise ValueError("Sum of seminorms only: at least one part must be a norm")
        object.__setattr__(self, "parts", parts)


@dataclass(frozen=True)
class MaxPrefix:
    parts: tuple

    def __post_init__(self):
        parts = tuple(self.parts)
        if not parts:
            raise ValueError("MaxPrefix needs at least one part")
        for q in parts:
            _check_spec(q)
            if isinstance(q, TruncSeminorm):
                raise ValueError("TruncSeminorm may only appear inside a Sum")
        object.__setattr__(self, "parts", parts)


NormSpec = Union[Lp, WeightedLp, TruncSeminorm, Sum, MaxPrefix]
_SPEC_TYPES = (Lp, WeightedLp, TruncSeminorm, Sum, MaxPrefix)


def _check_spec(spec):
    if not isinstance(spec, _SPEC_TYPES):
        raise TypeError(f"not a NormSpec: {spec!r}")


def is_norm(spec: NormSpec) -> bool:
    """True for genuine norms, False for bare seminorms."""
    if isinstance(spec, (Lp, WeightedLp)):
        return True
    if isinstance(spec, TruncSeminorm):
        return False
    return any(is_norm(q) for q in spec.parts)


def _lp_abs(a, p):
    # a holds absolute values; scaling by the max keeps homogeneity tight
    if p == 1:
        return a.sum(axis=-1)
    if math.isinf(p):
        return a.max(axis=-1)
    pf = float(p)
    scale = a.max(axis=-1)
    safe = np.where(scale > 0, scale, 1.0)
    r = ((a / safe[..., None]) ** pf).sum(axis=-1) ** (1.0 / pf)
    return np.where(scale > 0, scale * r, 0.0)


def _eval(spec, v):
    if isinstance(spec, Lp):
        return _lp_abs(np.abs(v), spec.p)
    if isinstance(spec, WeightedLp):
        w = np.asarray(spec.weights)
        if w.shape[0] != v.shape[-1]:
            raise ValueError(
                f"weights have length {w.shape[0]} but vector has dimension {v.shape[-1]}")
        return _lp_abs(np.abs(v) * w, spec.p)
    if isinstance(spec, TruncSeminorm):
        return np.abs(v[..., : spec.n]).sum(axis=-1)
    if isinstance(spec, Sum):
        out = _eval(spec.parts[0], v)
        for q in spec.parts[1:]:
            out = out + _eval(q, v)
        return out
    if isinstance(spec, MaxPrefix):
        out = _eval(spec.parts[0], v)
        for q in spec.parts[1:]:
            out = np.maximum(out, _eval(q, v))
        return out
    raise TypeError(f"not a NormSpec: {spec!r}")


def eval_norm(spec: NormSpec, v):
    """Evaluate ``spec`` at ``v``.

    Parameters
    ----------
    spec : NormSpec
    v : array_like, shape (d,) or (..., d)
        Must be finite.

    Returns
    -------
    float or ndarray
        A float for a single vector, an array over the leading axes otherwise.
    """
    v = np.asarray(v, dtype=float)
    if v.ndim == 0:
        v = v[None]
    if not np.all(np.isfinite(v)):
        raise ValueError("vector has non-finite coordinates")
    out = _eval(spec, v)
    return float(out) if np.ndim(out) == 0 else out


def _lp_subgradient(a, p):
    # a = |v| >= 0; returns the dual-unit vector with <g, a> = ||a||_p
    if p == 1:
        return np.ones_like(a)
    if math.isinf(p):
        g = np.zeros_like(a)
        g[int(np.argmax(a))] = 1.0
        return g
    n = _lp_abs(a, p)
    if n == 0:
        return np.zeros_like(a)
    return (a / n) ** (float(p) - 1.0)


def subgradient(spec: NormSpec, v) -> np.ndarray:
    """One subgradient of ``spec`` at the single vector ``v``.

    Exact for every NormSpec kind; at kinks (zero coordinates of l1, ties of
    l_inf, the origin) a valid element of the subdifferential is returned.
    """
    v = np.asarray(v, dtype=float)
    sgn = np.sign(v)
    if isinstance(spec, Lp):
        return sgn * _lp_subgradient(np.abs(v), spec.p)
    if isinstance(spec, WeightedLp):
        w = np.asarray(spec.weights)
        return w * sgn * _lp_subgradient(np.abs(v) * w, spec.p)
    if isinstance(spec, TruncSeminorm):
        g = np.zeros_like(v)
        g[: spec.n] = sgn[: spec.n]
        return g
    if isinstance(spec, Sum):
        return sum(subgradient(q, v) for q in spec.parts)
    if isinstance(spec, MaxPrefix):
        vals = [_eval(q, v) for q in spec.parts]
        return subgradient(spec.parts[int(np.argmax(vals))], v)
    raise TypeError(f"not a NormSpec: {spec!r}")


def sum_norm(parts: Sequence[NormSpec]) -> Sum:
    """Return ``Sum(parts)``, whose value is the sum of the part values."""
    return Sum(tuple(parts))


def describe(spec: NormSpec) -> str:
    """Short human-readable name, e.g. ``l2.5 + p2``."""
    if isinstance(spec, Lp):
        return "linf" if math.isinf(spec.p) else f"l{_fmt_p(spec.p)}"
    if isinstance(spec, WeightedLp):
        return f"w-l{'inf' if math.isinf(spec.p) else _fmt_p(spec.p)}"
    if isinstance(spec, TruncSeminorm):
        return f"p{spec.n}"
    if isinstance(spec, Sum):
        return " + ".join(describe(q) for q in spec.parts)
    return "max(" + ", ".join(describe(q) for q in spec.parts) + ")"


def _fmt_p(p):
    return str(p.numerator) if p.denominator == 1 else (
        repr(float(p)) if Fraction(float(p)) == p else f"{p.numerator}/{p.denominator}")


# ---------------------------------------------------------------------------
# Constants used to convert grid resolution into distance error bars

def linf_upper_constant(spec: NormSpec, dim: int) -> float:
    """Smallest ``C`` with ``spec(u) <= C * ||u||_inf`` on R^dim.

    A convex function on the cube attains its max at a corner, so scanning
    the 2^dim sign vectors is exact (up to the symmetry u -> -u).
    """
    if dim > 16:
        raise ValueError("corner enumeration limited to dim <= 16")
    signs = np.array(np.meshgrid(*([[-1.0, 1.0]] * dim), indexing="ij")).reshape(dim, -1).T
    signs = signs[signs[:, 0] > 0] if dim > 0 else signs
    return float(np.max(eval_norm(spec, signs)))


def coordinate_bounds(spec: NormSpec, dim: int) -> np.ndarray:
    """Per-coordinate ``b_i`` with ``|v_i| <= b_i * spec(v)`` (``inf`` if none)."""
    if isinstance(spec, Lp):
        return np.ones(dim)
    if isinstance(spec, WeightedLp):
        w = np.asarray(spec.weights)
        if w.shape[0] != dim:
            raise ValueError("weights length does not match dimension")
        return 1.0 / w
    if isinstance(spec, TruncSeminorm):
        b = np.full(dim, np.inf)
        b[: spec.n] = 1.0
        return b
    # sum and max both dominate each part
    return np.min([coordinate_bounds(q, dim) for q in spec.parts], axis=0)


# ---------------------------------------------------------------------------
# Families

@dataclass(frozen=True)
class NormFamily:
    """Ordered norms ``specs[0] <= specs[1] <= ...`` (when certified).

    ``certificate`` records how ordering was established: ``"none"``,
    ``"exact"`` (structural proof, e.g. max-prefix chains) or ``"sampled"``.
    """

    specs: tuple
    increasing_certified: bool = False
    certificate: str = "none"
    metadata: dict = field(default_factory=dict, compare=False, hash=False)

    def __post_init__(self):
        specs = tuple(self.specs)
        if not specs:
            raise ValueError("a NormFamily needs at least one norm")
        for s in specs:
            _check_spec(s)
            if not is_norm(s):
                raise ValueError(f"family member {describe(s)} is only a seminorm")
        object.__setattr__(self, "specs", specs)

    def __len__(self):
        return len(self.specs)

    def __getitem__(self, k):
        return self.specs[k]

    def __iter__(self):
        return iter(self.specs)


def _provably_le(a, b) -> bool:
    """Structural proof that a(v) <= b(v) for all v (incomplete by design)."""
    if a == b:
        return True
    if isinstance(a, TruncSeminorm) and isinstance(b, TruncSeminorm):
        return a.n <= b.n
    if isinstance(a, MaxPrefix):
        return all(_provably_le(q, b) for q in a.parts)
    if isinstance(b, MaxPrefix):
        return any(_provably_le(a, q) for q in b.parts)
    if isinstance(b, Sum):
        if any(_provably_le(a, q) for q in b.parts):
            return True
        if isinstance(a, Sum) and len(a.parts) <= len(b.parts):
            return all(_provably_le(x, y) for x, y in zip(a.parts, b.parts))
    return False


def _sample_sphere(dim, samples, seed):
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((samples, dim))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    extra = [np.eye(dim)]
    if dim <= 10:
        extra.append(np.array(np.meshgrid(*([[-1.0, 1.0]] * dim), indexing="ij"))
                     .reshape(dim, -1).T / math.sqrt(dim))
    return np.vstack([g] + extra)


def certify_pair(a: NormSpec, b: NormSpec, dim: int, samples: int = INCREASING_SAMPLES,
                 tol: float = INCREASING_TOL, seed: int = 0) -> str:
    """Check ``a <= b`` pointwise. Returns the certificate kind or raises."""
    if _provably_le(a, b):
        return "exact"
    V = _sample_sphere(dim, samples, seed)
    gap = eval_norm(a, V) - eval_norm(b, V)
    k = int(np.argmax(gap))
    if gap[k] > tol:
        raise NotIncreasingError(
            f"{describe(a)} exceeds {describe(b)} by {gap[k]:.3g}", witness=V[k])
    return "sampled"


def certify_increasing(family: NormFamily, dim: int, samples: int = INCREASING_SAMPLES,
                       tol: float = INCREASING_TOL, seed: int = 0) -> NormFamily:
    """Return a certified copy of ``family`` or raise NotIncreasingError."""
    kinds = []
    for k in range(len(family) - 1):
        try:
            kinds.append(certify_pair(family[k], family[k + 1], dim, samples, tol, seed + k))
        except NotIncreasingError as err:
            raise NotIncreasingError(f"norms {k} and {k + 1}: {err}", index=k,
                                     witness=err.witness) from None
    cert = "sampled" if "sampled" in kinds else "exact"
    return NormFamily(family.specs, True, cert, dict(family.metadata, dim=dim))


def make_increasing(family: NormFamily) -> NormFamily:
    """Max-prefix transform: the k-th norm becomes ``max(specs[0..k])``.

    The result is pointwise increasing by construction. On an already
    increasing family each new norm equals the old one value for value.
    """
    specs = tuple(MaxPrefix(family.specs[: k + 1]) for k in range(len(family)))
    return NormFamily(specs, True, "exact", dict(family.metadata))


def frechet_metric(family: NormFamily, x, y) -> float:
    """Truncated Frechet metric ``sum_i 2^-i t_i / (1 + t_i)``, ``t_i = ||x - y||_i``."""
    if not family.increasing_certified:
        raise ValueError("frechet_metric needs an increasing-certified family")
    u = np.asarray(x, dtype=float) - np.asarray(y, dtype=float)
    total = 0.0
    for i, spec in enumerate(family.specs, start=1):
        t = eval_norm(spec, u)
        total += math.ldexp(t / (1.0 + t), -i)
    return total


L2PLUS_VARIANTS = ("plain", "plus_sup", "plus_trunc", "single_uc")


def build_l2plus_family(N: int, d: int, variant: str = "plain", n0: int | None = None,
                        increasing: bool = True) -> NormFamily:
    """Finite truncation of the l_{2+1/n} families on R^d.

    Member ``n`` (1-based) is built from ``Lp(2 + 1/n)``:

    ``plain``       the bare norm
    ``plus_sup``    ``+ Lp(inf)``
    ``plus_trunc``  ``+ TruncSeminorm(n)``
    ``single_uc``   as ``plus_trunc`` except member ``n0`` stays bare

    With ``increasing=True`` the family is routed through :func:`make_increasing`
    (for ``single_uc`` the bare member breaks the ordering otherwise).
    With ``increasing=False`` the raw members are returned uncertified.
    """
    if N < 1 or d < 1:
        raise ValueError("need N >= 1 and d >= 1")
    if variant not in L2PLUS_VARIANTS:
        raise ValueError(f"unknown variant {variant!r}; expected one of {L2PLUS_VARIANTS}")
    if variant == "single_uc":
        if n0 is None or not 1 <= n0 <= N:
            raise ValueError("single_uc needs 1 <= n0 <= N")
    elif n0 is not None:
        raise ValueError("n0 only applies to the single_uc variant")

    specs = []
    for n in range(1, N + 1):
        base = Lp(Fraction(2) + Fraction(1, n))
        if variant == "plain" or (variant == "single_uc" and n == n0):
            specs.append(base)
        elif variant == "plus_sup":
            specs.append(Sum((base, Lp(math.inf))))
        else:
            specs.append(Sum((base, TruncSeminorm(n))))
    meta = {"variant": variant, "N": N, "dim": d}
    if n0 is not None:
        meta["n0"] = n0
    family = NormFamily(tuple(specs), metadata=meta)
    return make_increasing(family) if increasing else family


# ---------------------------------------------------------------------------
# JSON interchange

def _p_to_json(p):
    if math.isinf(p):
        return "inf"
    if p.denominator == 1:
        return int(p)
    if Fraction(float(p)) == p:
        return float(p)
    return f"{p.numerator}/{p.denominator}"


def spec_to_json(spec: NormSpec) -> dict:
    if isinstance(spec, Lp):
        return {"kind": "lp", "p": _p_to_json(spec.p)}
    if isinstance(spec, WeightedLp):
        return {"kind": "wlp", "p": _p_to_json(spec.p), "weights": list(spec.weights)}
    if isinstance(spec, TruncSeminorm):
        return {"kind": "trunc", "n": spec.n}
    kind = "sum" if isinstance(spec, Sum) else "maxprefix"
    return {"kind": kind, "parts": [spec_to_json(q) for q in spec.parts]}


def spec_from_json(obj: dict) -> NormSpec:
    try:
        kind = obj["kind"]
        if kind == "lp":
            return Lp(obj["p"])
        if kind == "wlp":
            return WeightedLp(obj["p"], tuple(obj["weights"]))
        if kind == "trunc":
            return TruncSeminorm(obj["n"])
        if kind == "sum":
            return Sum(tuple(spec_from_json(q) for q in obj["parts"]))
        if kind == "maxprefix":
            return MaxPrefix(tuple(spec_from_json(q) for q in obj["parts"]))
    except (KeyError, TypeError) as err:
        raise ValueError(f"malformed norm spec {obj!r}: {err}") from None
    raise ValueError(f"unknown norm kind {kind!r}")


def family_to_json(family: NormFamily) -> dict:
    return {"norms": [spec_to_json(s) for s in family.specs],
            "increasing": bool(family.increasing_certified)}


def family_from_json(obj: dict, dim: int | None = None) -> NormFamily:
    """Load a family; ``"increasing": true`` is re-certified when ``dim`` is known."""
    family = NormFamily(tuple(spec_from_json(s) for s in obj["norms"]))
    if obj.get("increasing") and dim is not None:
        family = certify_increasing(family, dim)
    return family
