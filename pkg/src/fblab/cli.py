"""Command-line experiment runner.

Each subcommand reads a JSON config::

    {"space": {"dim": 2, "norm": "l1"}, "p": 1, "payload": {...},
     "budget": {"restarts": 32, "tuple_max": 8, "samples": 256}, "seed": 0,
     "output": "results/run1"}

and writes ``<output>.json`` (full result) and/or ``<output>.csv`` (one
summary row).  Exit status: 0 success, 1 configuration error, 2 consistency
violation.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import homfn as H
from . import phmaps as PM
from . import witnesses as W
from .estimate import Budget, ConsistencyError, NormEstimate
from .fblnorm import fbl_bracket, witness_value
from .spaces import make_space, space_from_json, space_to_json
from .summing import SignCapError, weak_1_norm_signs, weak_p_norm
from .verify import verify_suite

TASKS = ("norm", "weakp", "phinorm", "witness", "extract-phi", "classify", "gap", "diverge")
CSV_FIELDS = ("task", "p", "lower", "upper", "method", "witness_size", "seed", "wall_ms")


class ConfigError(ValueError):
    """The configuration violates a documented precondition."""


def _need(d, key, where):
    if not isinstance(d, dict) or key not in d:
        raise ConfigError(f"{where}: missing required key {key!r}")
    return d[key]


def _p(cfg, default=None):
    p = cfg.get("p", default)
    if p is None:
        raise ConfigError("config: missing required key 'p'")
    if isinstance(p, bool) or not isinstance(p, (int, float)) or not (1 <= p < math.inf):
        raise ConfigError(f"config: p must be a real number in [1, inf), got {p!r}")
    return float(p)


def _space(cfg):
    try:
        return space_from_json(_need(cfg, "space", "config"))
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(f"config.space: {exc}") from None


def _fn(payload, space, key="f"):
    return H.from_json(_need(payload, key, "payload"), space, f"payload.{key}")


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, (np.floating, float)):
        v = float(x)
        return v if math.isfinite(v) else ("inf" if v > 0 else "-inf")
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, np.bool_):
        return bool(x)
    return x


def _witness_size(w):
    if w is None:
        return 0
    a = np.asarray(w, dtype=float)
    return int(a.shape[0]) if a.ndim == 2 else (1 if a.size else 0)


# ---------------------------------------------------------------------------
# tasks; each returns (result dict, summary row fields)


def task_norm(cfg, budget, seed):
    space, p = _space(cfg), _p(cfg)
    f = _fn(cfg.get("payload", {}), space)
    est = fbl_bracket(space, f, p, budget, seed)
    return {"estimate": est.to_json()}, est


def task_weakp(cfg, budget, seed):
    space, p = _space(cfg), _p(cfg)
    payload = cfg.get("payload", {})
    T = _need(payload, "tuple", "payload")
    try:
        T = np.array(T, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"payload.tuple: {exc}") from None
    if T.ndim != 2 or T.shape[0] == 0 or T.shape[1] != space.dim:
        raise ConfigError(f"payload.tuple: need a nonempty list of length-{space.dim} functionals")
    if payload.get("method") == "signs":
        if p != 1:
            raise ConfigError("payload.method 'signs' requires p = 1")
        try:
            est = weak_1_norm_signs(space, T, budget.sign_cap)
        except SignCapError as exc:
            raise ConfigError(f"payload.tuple: {exc}") from None
    else:
        est = weak_p_norm(space, T, p, budget, seed)
    return {"estimate": est.to_json()}, est


def task_phinorm(cfg, budget, seed):
    space, p = _space(cfg), _p(cfg)
    phi = PM.map_from_json(_need(cfg.get("payload", {}), "map", "payload"), space, None, "payload.map")
    est = PM.phi_p_norm(phi, p, budget, seed)
    extra = {"map": phi.to_json(), "estimate": est.to_json()}
    if cfg.get("payload", {}).get("diagnostics", False):
        extra["linearity"] = PM.linearity_report(phi, 1000, seed, p)
        extra["injectivity"] = PM.injectivity_probe(phi, 200, seed)
    return extra, est


def task_witness(cfg, budget, seed):
    space = _space(cfg)
    payload = cfg.get("payload", {})
    kind = _need(payload, "construction", "payload")
    if kind == "sup_deltas":
        f = W.sup_deltas(space, _need(payload, "vectors", "payload"), _need(payload, "scales", "payload"))
        unif = H.uniform_norm_ball(f, space, budget, seed)
        res = {"construction": kind, "f": H.to_json(f), "uniform_norm": unif.to_json()}
        return res, unif
    if kind == "series":
        f = W.series_witness(space, _need(payload, "basis", "payload"))
        unif = H.uniform_norm_ball(f, space, budget, seed)
        return {"construction": kind, "f": H.to_json(f), "uniform_norm": unif.to_json()}, unif
    if kind == "kernel":
        X = np.asarray(_need(payload, "obstacles", "payload"), dtype=float).reshape(-1, space.dim)
        Bf = _need(payload, "basis_funcs", "payload")
        xs = W.kernel_witness(space, X, Bf)
        res = {"construction": kind, "xstar": xs.tolist(),
               "residual": float(np.max(np.abs(X @ xs), initial=0.0))}
        if "basis" in payload:
            f = W.series_witness(space, payload["basis"])
            res["f(xstar)"] = H.evaluate(f, xs)
        val = abs(res.get("f(xstar)", 0.0))
        return res, NormEstimate(val, val, "exact_closed_form", xs)
    if kind == "mu":
        p = _p(cfg)
        atoms = [(float(w), pt) for w, pt in _need(payload, "atoms", "payload")]
        f = W.mu_induced(space, atoms, p)
        est = fbl_bracket(space, f, p, budget, seed)
        res = {"construction": kind, "f": H.to_json(f), "mass": W.measure_mass(atoms), "estimate": est.to_json()}
        return res, est
    raise ConfigError(f"payload.construction: unknown construction {kind!r}")


def task_extract(cfg, budget, seed):
    space = _space(cfg)
    payload = cfg.get("payload", {})
    act = _need(payload, "action", "payload")
    if not isinstance(act, dict):
        raise ConfigError("payload.action: expected an object keyed by basis index")
    tgt = space_from_json(payload["target"]) if "target" in payload else make_space(len(act), space.kind if space.kind != "polyhedral" else "l2")
    phi = PM.map_from_json({"map": "tabulated", "action": act}, space, tgt, "payload")
    M = phi.apply_batch(np.eye(space.dim)).T
    lin = PM.linearity_report(phi, 1000, seed, _p(cfg, 1.0))
    res = {"map": phi.to_json(), "basis_images": M.T.tolist(), "linearity": lin}
    if lin["additivity_defect"] <= 1e-12 and lin["homogeneity_defect"] <= 1e-12:
        res["adjoint_matrix"] = M.tolist()
    up = PM.phi_upper(phi, _p(cfg, 1.0))
    return res, NormEstimate(0.0, up, "structural_upper", None, math.isfinite(up))


def task_classify(cfg, budget, seed):
    space = _space(cfg)
    payload = cfg.get("payload", {})
    f = _fn(payload, space)
    pr = dict(payload.get("probe", {}))
    pr.setdefault("seed", seed)
    for k in ("radii", "points", "directions"):
        if k in pr and pr[k] is not None:
            pr[k] = tuple(map(tuple, pr[k])) if k != "radii" else tuple(pr[k])
    try:
        probe = H.Probe(**pr)
    except TypeError as exc:
        raise ConfigError(f"payload.probe: {exc}") from None
    c = H.classify_finite_dim(f, space, probe)
    jump = c.jump if math.isfinite(c.jump) else math.inf
    return {"classification": c.to_json()}, NormEstimate(0.0, max(jump, 0.0), c.label, c.point, False)


def task_gap(cfg, budget, seed):
    p = _p(cfg)
    payload = cfg.get("payload", {})
    N, q, m = _need(payload, "N", "payload"), _need(payload, "q", "payload"), _need(payload, "m", "payload")
    if not isinstance(m, int) or not isinstance(N, int):
        raise ConfigError("payload: N and m must be integers")
    h = None
    if "h" in payload:
        h = H.from_json(payload["h"], make_space(N, "l2"), "payload.h")
    rep = W.gap_witness(N, p, float(q), m, h)
    b = rep.value("chain_bound")
    return {"report": rep.to_json()}, NormEstimate(b, math.inf, "gap", rep.z, False)


def task_diverge(cfg, budget, seed):
    p = _p(cfg)
    payload = cfg.get("payload", {})
    N = _need(payload, "N", "payload")
    if not isinstance(N, int):
        raise ConfigError("payload.N must be an integer")
    rep = W.divergence_witness(N, p, seed, payload.get("checkpoints"))
    res = {"report": rep.to_json(include_f=payload.get("include_f", False))}
    lo = rep.value(f"L({N})/K")
    return res, NormEstimate(lo, math.inf, "divergence", None, False)


RUNNERS = {
    "norm": task_norm,
    "weakp": task_weakp,
    "phinorm": task_phinorm,
    "witness": task_witness,
    "extract-phi": task_extract,
    "classify": task_classify,
    "gap": task_gap,
    "diverge": task_diverge,
}


# ---------------------------------------------------------------------------


def run(cfg: dict, task: str, seed: int | None = None, timing: bool = True):
    """Execute one task; returns ``(result_json, csv_row)``."""
    if task not in RUNNERS:
        raise ConfigError(f"unknown task {task!r}")
    if "task" in cfg and cfg["task"] != task:
        raise ConfigError(f"config.task is {cfg['task']!r} but subcommand is {task!r}")
    if seed is None:
        seed = cfg.get("seed", 0)
    if isinstance(seed, bool) or not isinstance(seed, int):
        raise ConfigError(f"seed must be an integer, got {seed!r}")
    try:
        budget = Budget.from_dict(cfg.get("budget"))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"config.budget: {exc}") from None
    t0 = time.perf_counter()
    result, est = RUNNERS[task](cfg, budget, seed)
    wall_ms = (time.perf_counter() - t0) * 1000.0
    if est.lower > est.upper * (1 + 1e-6) + 1e-12:
        raise ConsistencyError(f"lower {est.lower!r} exceeds upper {est.upper!r}")
    out = {
        "task": task,
        "seed": seed,
        "p": cfg.get("p"),
        "space": cfg.get("space"),
        "budget": budget.to_dict(),
        "result": result,
    }
    row = {
        "task": task,
        "p": cfg.get("p", ""),
        "lower": repr(float(est.lower)),
        "upper": repr(float(est.upper)) if math.isfinite(est.upper) else "inf",
        "method": est.method,
        "witness_size": _witness_size(est.witness),
        "seed": seed,
        "wall_ms": f"{wall_ms:.1f}" if timing else "",
    }
    return _jsonable(out), row


def _csv_text(row) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=CSV_FIELDS, lineterminator="\n")
    w.writeheader()
    w.writerow(row)
    return buf.getvalue()


def revalidate_file(path: str, cfg: dict | None = None, tol: float = 1e-9) -> tuple[bool, str]:
    """Check a saved result's lower bound against its witness."""
    res = json.loads(Path(path).read_text())
    task = res.get("task")
    if task not in ("norm", "phinorm"):
        return True, f"nothing to revalidate for task {task!r}"
    space = space_from_json(res["space"])
    p = float(res["p"])
    est = res["result"]["estimate"]
    lower = float(est["lower"])
    Wt = np.atleast_2d(np.array(est["witness"] or [], dtype=float))
    if Wt.size == 0:
        return lower == 0.0, "empty witness"
    if weak_p_norm(space, Wt, p).upper > 1 + tol:
        return False, "witness tuple is not feasible"
    if task == "norm":
        if cfg is None:
            return False, "norm results need the config that names the function"
        f = H.from_json(cfg["payload"]["f"], space)
        val = witness_value(f, Wt, p)
    else:
        phi = PM.map_from_json(res["result"]["map"], space)
        val = weak_p_norm(phi.target, phi.apply_batch(Wt), p).lower
    ok = abs(val - lower) <= tol * max(1.0, abs(lower)) or val >= lower
    return ok, f"witness gives {val!r}, recorded {lower!r}"


def _parser():
    ap = argparse.ArgumentParser(prog="fblab", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)
    for name in TASKS:
        sp_ = sub.add_parser(name, help=f"run the {name} task")
        sp_.add_argument("--config", required=True, help="path to the JSON config")
        sp_.add_argument("--seed", type=int, default=None, help="override the config seed")
        sp_.add_argument("--out", default=None, help="output path prefix (default: config 'output' or stdout)")
        sp_.add_argument("--format", choices=("json", "csv", "both"), default="both")
        sp_.add_argument("--no-timing", action="store_true", help="leave wall_ms empty for byte-identical CSV")
    v = sub.add_parser("verify", help="run the invariant battery")
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--check", default=None, help="revalidate a saved norm/phinorm result JSON")
    v.add_argument("--config", default=None, help="config that produced the --check result")
    return ap


def _write(out, fmt, result, row):
    text_json = json.dumps(result, indent=2, sort_keys=True) + "\n"
    text_csv = _csv_text(row)
    if out is None:
        if fmt in ("json", "both"):
            sys.stdout.write(text_json)
        if fmt in ("csv", "both"):
            sys.stdout.write(text_csv)
        return
    base = Path(out)
    if base.suffix in (".json", ".csv"):
        base = base.with_suffix("")
    base.parent.mkdir(parents=True, exist_ok=True)
    if fmt in ("json", "both"):
        base.with_suffix(".json").write_text(text_json)
    if fmt in ("csv", "both"):
        base.with_suffix(".csv").write_text(text_csv)


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    if args.command == "verify":
        if args.check:
            try:
                cfg = json.loads(Path(args.config).read_text()) if args.config else None
                ok, msg = revalidate_file(args.check, cfg)
            except (OSError, ValueError, KeyError, TypeError) as exc:
                print(f"config error: {exc}", file=sys.stderr)
                return 1
            print(("PASS" if ok else "FAIL") + f" revalidate {args.check}: {msg}")
            return 0 if ok else 1
        return 0 if verify_suite(args.seed) else 1
    try:
        try:
            cfg = json.loads(Path(args.config).read_text())
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from None
        if not isinstance(cfg, dict):
            raise ConfigError("config must be a JSON object")
        result, row = run(cfg, args.command, args.seed, timing=not args.no_timing)
        _write(args.out or cfg.get("output"), args.format, result, row)
    except ConsistencyError as exc:
        print(f"consistency violation: {exc}", file=sys.stderr)
        return 2
    except (ConfigError, H.ASTError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, KeyError, TypeError) as exc:
        print(f"config error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
