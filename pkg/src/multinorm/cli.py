"""
Command-line front end.

Exit codes: 0 success, 2 unreadable or schema-violating input, 3 a violated
precondition (x in K, unordered family, point budget), 4 a mismatch
(``verify``/``corpus`` disagreement or inconsistent solver output).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .convexity import DEFAULT_EPS_GRID, modulus_of_convexity, uc_verdict
from .geometry import BudgetExceeded
from .instances import (
    Instance, SchemaError, dumps, load_instance, validate, witness_csv,
    write_corpus,
)
from .norms import NotIncreasingError, describe, spec_from_json
from .oracle import MATCH, compare, grid_argmin
from .projection import (
    NotExteriorError, SolverAccuracyError, common_nearest_family, common_nearest_two,
    nearest_point_set, uniqueness_check,
)

EXIT_OK = 0
EXIT_SCHEMA = 2
EXIT_PRECONDITION = 3
EXIT_MISMATCH = 4

COMMANDS = ("project", "common", "chain", "modulus", "verify", "corpus")


@dataclass
class RunConfig:
    command: str
    instance_path: str | None = None
    eps: float | None = None
    resolution: float | None = None
    seed: int | None = None
    output_path: str | None = None
    format: str = "json"
    uc_index: int | None = None
    uc_tol: float | None = None
    threads: int = 1


class Mismatch(Exception):
    """A check failed; carries the artifact that documents it."""

    def __init__(self, message, artifact):
        super().__init__(message)
        self.artifact = artifact


def _solver_kwargs(cfg: RunConfig, inst: Instance) -> dict:
    return {
        "resolution": cfg.resolution if cfg.resolution is not None else inst.resolution,
        "seed": cfg.seed if cfg.seed is not None else inst.seed,
        "threads": cfg.threads,
    }


def _eps(cfg: RunConfig, inst: Instance):
    return cfg.eps if cfg.eps is not None else inst.eps


def _require_instance(cfg: RunConfig) -> Instance:
    if not cfg.instance_path:
        raise SchemaError(f"{cfg.command} needs --instance")
    return load_instance(cfg.instance_path)


def _project(cfg):
    inst = _require_instance(cfg)
    norm = inst.norm if inst.norm is not None else inst.family[0]
    res = nearest_point_set(inst.set, norm, inst.x, _eps(cfg, inst), **_solver_kwargs(cfg, inst))
    if cfg.format == "csv":
        return witness_csv(res.witnesses, res.values)
    return dumps(res.to_json())


def _common(cfg):
    inst = _require_instance(cfg)
    if len(inst.family) != 2:
        raise ValueError(f"common needs a two-norm family, got {len(inst.family)} norms")
    res = common_nearest_two(inst.set, inst.family[0], inst.family[1], inst.x,
                             _eps(cfg, inst), **_solver_kwargs(cfg, inst))
    if cfg.format == "csv":
        return witness_csv(res.common_witnesses, res.values[res.common_mask])
    return dumps(res.to_json())


def _chain(cfg):
    inst = _require_instance(cfg)
    chain = common_nearest_family(inst.set, inst.family, inst.x, _eps(cfg, inst),
                                  **_solver_kwargs(cfg, inst))
    if cfg.format == "csv":
        last = chain.per_level[-1]
        return witness_csv(chain.common_witnesses, last.values[chain.common_mask])
    out = chain.to_json()
    uc_index = cfg.uc_index if cfg.uc_index is not None else inst.uc_index
    if uc_index is not None:
        tol = cfg.uc_tol if cfg.uc_tol is not None else inst.uc_tol
        out["uniqueness"] = {"uc_index": uc_index, "tol": tol,
                             "verdict": uniqueness_check(chain, inst.family, uc_index, tol)}
    return dumps(out)


def _modulus(cfg):
    if not cfg.instance_path:
        raise SchemaError("modulus needs --instance")
    try:
        doc = json.loads(Path(cfg.instance_path).read_text())
    except json.JSONDecodeError as err:
        raise SchemaError(f"{cfg.instance_path}: not valid JSON ({err})") from None
    validate(doc, "modulus")
    try:
        norm = spec_from_json(doc["norm"])
    except ValueError as err:
        raise SchemaError(str(err)) from None
    seed = cfg.seed if cfg.seed is not None else doc.get("seed", 42)
    est = modulus_of_convexity(norm, doc["dim"], doc.get("eps_grid", DEFAULT_EPS_GRID),
                               samples=doc.get("samples", 100_000), seed=seed)
    out = est.to_json()
    if "threshold" in doc:
        out["threshold"] = doc["threshold"]
        out["verdict"] = uc_verdict(est, doc["threshold"])
    print(est.table())
    if "verdict" in out:
        print(f"verdict at threshold {doc['threshold']:g}: {out['verdict']}")
    if cfg.format == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["eps", "delta_hat"])
        for e, d in zip(est.eps_grid, est.delta_hat):
            w.writerow([repr(e), "" if d is None else repr(d)])
        return buf.getvalue()
    return dumps(out)


def _instance_paths(path) -> list[Path]:
    p = Path(path)
    if p.is_dir():
        return sorted(p.glob("*.json"))
    if p.is_file():
        return [p]
    raise SchemaError(f"{path}: no such file or directory")


def _verify_instance(cfg: RunConfig, inst: Instance) -> list[dict]:
    """Solver against oracle for every member norm (and the instance's own norm)."""
    norms = list(inst.family.specs)
    if inst.norm is not None:
        norms.append(inst.norm)
    res = cfg.resolution or inst.oracle_resolution or inst.resolution
    if res is None:
        raise SchemaError(f"instance {inst.name or '?'} has no oracle_resolution")
    oracle_eps = inst.oracle_eps if inst.oracle_eps is not None else 1e-9
    kwargs = _solver_kwargs(cfg, inst)
    kwargs["resolution"] = res
    rows = []
    for norm in norms:
        sol = nearest_point_set(inst.set, norm, inst.x, _eps(cfg, inst), **kwargs)
        rep = compare(sol, grid_argmin(inst.set, norm, inst.x, res, oracle_eps,
                                       threads=cfg.threads))
        rows.append({
            "instance": inst.name, "norm": describe(norm), "agreement": rep.agreement,
            "details": rep.details, "solver_distance": sol.distance,
            "oracle_min": rep.min_value, "error_bar": rep.error_bar,
            "solver_witnesses": int(len(sol.witnesses)),
            "oracle_points": int(len(rep.argmin_points)), "unmatched": rep.unmatched,
        })
    return rows


def _verify(cfg):
    if not cfg.instance_path:
        raise SchemaError("verify needs --instance (a corpus directory or one instance file)")
    rows = []
    for path in _instance_paths(cfg.instance_path):
        inst = load_instance(path)
        if not inst.name:
            inst.name = path.stem
        rows.extend(_verify_instance(cfg, inst))
    if cfg.format == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["instance", "norm", "agreement", "solver_distance", "oracle_min",
                    "error_bar"])
        for r in rows:
            w.writerow([r["instance"], r["norm"], r["agreement"], repr(r["solver_distance"]),
                        repr(r["oracle_min"]), repr(r["error_bar"])])
        text = buf.getvalue()
    else:
        text = dumps({"results": rows, "all_match": all(r["agreement"] == MATCH for r in rows)})
    bad = [r for r in rows if r["agreement"] != MATCH]
    if bad:
        raise Mismatch(f"{len(bad)} of {len(rows)} solver/oracle comparisons disagree", text)
    return text


def _check_expectations(inst: Instance, chain, cfg) -> list[dict]:
    exp = inst.expect
    checks = []

    def add(name, ok, detail):
        checks.append({"check": name, "ok": bool(ok), "detail": detail})

    if "single_distances" in exp:
        got = chain.single_distances
        err = float(np.max(np.abs(np.array(got) - np.array(exp["single_distances"]))))
        add("single_distances", err <= 1e-6, f"max error {err:.3g}")
    if "common_point" in exp:
        W = chain.common_witnesses
        p = np.array(exp["common_point"])
        d = float(np.abs(W - p).max(axis=1).min()) if len(W) else float("inf")
        add("common_point", d <= 1e-4, f"nearest common witness at l_inf distance {d:.3g}")
    if "face" in exp:
        f = exp["face"]
        W = chain.per_level[0].witnesses
        off = float(np.abs(W[:, f["axis"]] - f["value"]).max())
        other = np.delete(W, f["axis"], axis=1)
        lo, hi = f["span"]
        step = inst.resolution or 0.01
        covered = other.min() <= lo + step and other.max() >= hi - step
        add("face", off <= 1e-6 and covered,
            f"off-face {off:.3g}, spans [{other.min():.4f}, {other.max():.4f}]")
    if "uniqueness" in exp and inst.uc_index is not None:
        verdict = uniqueness_check(chain, inst.family, inst.uc_index, inst.uc_tol)
        add("uniqueness", verdict == exp["uniqueness"], f"verdict {verdict}")
    return checks


def _corpus(cfg):
    directory = Path(cfg.output_path or "corpus")
    paths = write_corpus(directory)
    report = []
    for path in paths:
        inst = load_instance(path)
        chain = common_nearest_family(inst.set, inst.family, inst.x, _eps(cfg, inst),
                                      **_solver_kwargs(cfg, inst))
        checks = _check_expectations(inst, chain, cfg)
        report.append({"instance": inst.name, "file": path.name, "checks": checks,
                       "ok": all(c["ok"] for c in checks)})
    text = dumps({"corpus": str(directory), "instances": report,
                  "all_ok": all(r["ok"] for r in report)})
    if not all(r["ok"] for r in report):
        raise Mismatch("corpus expectations failed", text)
    return text


_HANDLERS = {"project": _project, "common": _common, "chain": _chain,
             "modulus": _modulus, "verify": _verify, "corpus": _corpus}


def _emit(cfg: RunConfig, text: str):
    # corpus uses --out as its directory; its report goes to stdout
    if cfg.output_path and cfg.command != "corpus":
        Path(cfg.output_path).write_text(text)
    elif cfg.command != "modulus":
        # modulus has already printed its table; the JSON/CSV artifact needs --out
        sys.stdout.write(text)


def run(cfg: RunConfig) -> int:
    """Execute one command and return its exit code."""
    if cfg.command not in COMMANDS:
        print(f"error: unknown command {cfg.command!r}", file=sys.stderr)
        return EXIT_SCHEMA
    try:
        text = _HANDLERS[cfg.command](cfg)
    except SchemaError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_SCHEMA
    except OSError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_SCHEMA
    except Mismatch as err:
        _emit(cfg, err.artifact)
        print(f"mismatch: {err}", file=sys.stderr)
        return EXIT_MISMATCH
    except SolverAccuracyError as err:
        print(f"mismatch: {err}", file=sys.stderr)
        return EXIT_MISMATCH
    except (NotExteriorError, NotIncreasingError, BudgetExceeded, ValueError) as err:
        print(f"precondition violated: {err}", file=sys.stderr)
        return EXIT_PRECONDITION
    _emit(cfg, text)
    return EXIT_OK


def _positive(kind):
    def parse(s):
        v = kind(s)
        if not v > 0:
            raise argparse.ArgumentTypeError(f"must be positive, got {s}")
        return v
    return parse


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="multinorm",
        description="Nearest-point sets under increasing families of norms.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--instance", help="instance JSON (a directory for verify)")
    parser.add_argument("--eps", type=_positive(float), help="epsilon-argmin tolerance")
    parser.add_argument("--resolution", type=_positive(float), help="grid spacing")
    parser.add_argument("--seed", type=int, help="random seed (default: instance seed or 42)")
    parser.add_argument("--out", help="output file (corpus: output directory)")
    parser.add_argument("--format", choices=("json", "csv"), default="json")
    parser.add_argument("--uc-index", type=_positive(int), help="1-based uniformly convex level")
    parser.add_argument("--uc-tol", type=_positive(float), help="uniqueness diameter tolerance")
    parser.add_argument("--threads", type=_positive(int), default=1)
    return parser


def main(argv=None) -> int:
    a = build_parser().parse_args(argv)
    cfg = RunConfig(command=a.command, instance_path=a.instance, eps=a.eps,
                    resolution=a.resolution, seed=a.seed, output_path=a.out, format=a.format,
                    uc_index=a.uc_index, uc_tol=a.uc_tol, threads=a.threads)
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
