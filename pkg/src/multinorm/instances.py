"""
JSON problem instances, result serialization and the built-in reference corpus.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from pathlib import Path

import jsonschema
import numpy as np
from referencing import Registry, Resource

from .geometry import CompactSet, set_from_json, set_to_json
from .norms import (
    Lp, NormFamily, NormSpec, build_l2plus_family, certify_increasing, eval_norm, family_to_json,
    spec_from_json, spec_to_json,
)

__all__ = ["Instance", "SchemaError", "load_instance", "parse_instance", "validate",
           "dumps", "witness_csv", "builtin_corpus", "write_corpus"]

SCHEMAS = ("norm", "family", "set", "instance", "modulus")


class SchemaError(ValueError):
    """The document does not match its JSON schema or describes an invalid object."""


@lru_cache(maxsize=None)
def _registry():
    pairs = []
    for name in SCHEMAS:
        text = resources.files("multinorm.schemas").joinpath(f"{name}.schema.json").read_text()
        pairs.append((f"{name}.schema.json", Resource.from_contents(json.loads(text))))
    return Registry().with_resources(pairs)


def validate(doc, schema: str = "instance"):
    registry = _registry()
    schema_doc = registry[f"{schema}.schema.json"].contents
    try:
        jsonschema.Draft202012Validator(schema_doc, registry=registry).validate(doc)
    except jsonschema.ValidationError as err:
        path = "/".join(str(p) for p in err.absolute_path) or "<root>"
        raise SchemaError(f"{schema} schema violation at {path}: {err.message}") from None


@dataclass
class Instance:
    set: CompactSet
    family: NormFamily
    x: np.ndarray
    eps: float | None = None
    seed: int = 42
    norm: NormSpec | None = None
    resolution: float | None = None
    oracle_resolution: float | None = None
    oracle_eps: float | None = None
    uc_index: int | None = None
    uc_tol: float = 1e-3
    name: str = ""
    expect: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        out = {"name": self.name, "set": set_to_json(self.set),
               "family": family_to_json(self.family), "x": self.x.tolist(), "seed": self.seed}
        for key in ("eps", "resolution", "oracle_resolution", "oracle_eps", "uc_index"):
            if getattr(self, key) is not None:
                out[key] = getattr(self, key)
        if self.norm is not None:
            out["norm"] = spec_to_json(self.norm)
        if self.uc_index is not None:
            out["uc_tol"] = self.uc_tol
        if self.expect:
            out["expect"] = self.expect
        return out


def parse_instance(doc: dict) -> Instance:
    validate(doc, "instance")
    try:
        K = set_from_json(doc["set"])
        x = np.asarray(doc["x"], dtype=float)
        if x.shape != (K.dim,):
            raise SchemaError(f"x has dimension {x.size}, set lives in R^{K.dim}")
        fam_doc = doc["family"]
        family = NormFamily(tuple(spec_from_json(s) for s in fam_doc["norms"]))
        if fam_doc.get("increasing"):
            family = certify_increasing(family, K.dim)
        norm = spec_from_json(doc["norm"]) if "norm" in doc else None
    except SchemaError:
        raise
    except ValueError as err:
        raise SchemaError(str(err)) from None
    return Instance(
        set=K, family=family, x=x, eps=doc.get("eps"), seed=doc.get("seed", 42), norm=norm,
        resolution=doc.get("resolution"), oracle_resolution=doc.get("oracle_resolution"),
        oracle_eps=doc.get("oracle_eps"), uc_index=doc.get("uc_index"),
        uc_tol=doc.get("uc_tol", 1e-3), name=doc.get("name", ""), expect=doc.get("expect", {}),
    )


def load_instance(path) -> Instance:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as err:
        raise SchemaError(f"{path}: not valid JSON ({err})") from None
    return parse_instance(doc)


def dumps(obj) -> str:
    """Deterministic JSON text (sorted keys, shortest float repr)."""
    return json.dumps(obj, sort_keys=True, indent=2, allow_nan=False) + "\n"


def witness_csv(witnesses, values) -> str:
    """One row per witness: coordinates then objective value."""
    W = np.atleast_2d(np.asarray(witnesses, dtype=float))
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow([f"x{i + 1}" for i in range(W.shape[1])] + ["objective"])
    for w, v in zip(W, values):
        writer.writerow([repr(float(c)) for c in w] + [repr(float(v))])
    return buf.getvalue()


# ---------------------------------------------------------------------------
# Reference corpus: small instances with values known in closed form.
# Curved objectives get eps = 1e-8: an eps-argmin around a quadratic minimum
# has width ~sqrt(2 eps), which must stay below the uniqueness tolerance.

def _ball(p, center, r=1.0):
    return {"kind": "ball", "norm": spec_to_json(Lp(p)), "center": center, "radius": r}


def builtin_corpus() -> list[dict]:
    inf = "inf"
    s2 = 1.0 / math.sqrt(2.0)
    docs = [
        {
            "name": "linf_ball_face", "seed": 42,
            "set": _ball(inf, [0.0, 0.0]),
            "family": {"norms": [spec_to_json(Lp(inf))], "increasing": True},
            "x": [2.0, 0.0], "resolution": 0.01, "oracle_resolution": 0.01, "oracle_eps": 1e-9,
            "uc_index": 1, "uc_tol": 1e-3,
            "expect": {"single_distances": [1.0], "face": {"axis": 0, "value": 1.0,
                                                           "span": [-1.0, 1.0]},
                       "uniqueness": "no"},
        },
        {
            "name": "l1_ball_corner_pair", "seed": 42,
            "set": _ball(1, [0.0, 0.0]),
            "family": {"norms": [spec_to_json(Lp(2)), spec_to_json(Lp(1))], "increasing": True},
            "x": [1.0, 1.0], "eps": 1e-8, "resolution": 0.01, "oracle_resolution": 0.01,
            "oracle_eps": 1e-9, "uc_index": 1, "uc_tol": 1e-3,
            "expect": {"single_distances": [s2, 1.0], "common_point": [0.5, 0.5],
                       "uniqueness": "yes"},
        },
        {
            "name": "linf_ball_three_norms", "seed": 42,
            "set": _ball(inf, [0.0, 0.0]),
            "family": {"norms": [spec_to_json(Lp(inf)), spec_to_json(Lp(2)),
                                 spec_to_json(Lp(1))], "increasing": True},
            "x": [2.0, 0.0], "eps": 1e-8, "resolution": 0.01, "oracle_resolution": 0.01,
            "oracle_eps": 1e-9, "uc_index": 2, "uc_tol": 1e-3,
            "expect": {"single_distances": [1.0, 1.0, 1.0], "common_point": [1.0, 0.0],
                       "uniqueness": "yes"},
        },
    ]
    for variant, n0 in (("plain", None), ("plus_sup", None), ("plus_trunc", None),
                        ("single_uc", 2)):
        fam = build_l2plus_family(3, 3, variant, n0=n0)
        # the nearest point is (1, 0, 0), so each distance is the norm of (1, 0, 0)
        dists = [float(eval_norm(s, np.array([1.0, 0.0, 0.0]))) for s in fam.specs]
        docs.append({
            "name": f"l2plus_{variant}", "seed": 42,
            "set": _ball(2, [0.0, 0.0, 0.0]),
            "family": family_to_json(fam),
            "x": [2.0, 0.0, 0.0], "eps": 1e-8, "oracle_resolution": 0.05, "oracle_eps": 1e-9,
            "uc_index": n0 or 1, "uc_tol": 1e-3,
            "expect": {"single_distances": dists, "common_point": [1.0, 0.0, 0.0],
                       "uniqueness": "yes"},
        })
    return docs


def write_corpus(directory) -> list[Path]:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    paths = []
    for doc in builtin_corpus():
        validate(doc, "instance")
        path = directory / f"{doc['name']}.json"
        path.write_text(dumps(doc))
        paths.append(path)
    return paths
