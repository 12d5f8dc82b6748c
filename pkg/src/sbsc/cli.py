"""Command-line entry point.

Usage::

    sbsc gen    [CONFIG] [key=value ...]
    sbsc run    [CONFIG] [key=value ...]
    sbsc bench  [CONFIG] [key=value ...]
    sbsc theory [CONFIG] [key=value ...]

CONFIG is a flat UTF-8 file of ``key=value`` lines (``#`` starts a comment).
Command-line pairs override the file. ``SBSC_THREADS`` supplies the
``threads`` key when neither source sets it.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
import tempfile
import time
import traceback
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import bench as _bench
from . import theory as _theory
from .dataset import SyntheticSpec, generate_synthetic, load_dataset, save_dataset
from .ensemble import STAGES, SBSCParams, bag
from .exceptions import AssumptionViolated, SBSCError
from .metrics import accuracy, nmi
from .subcluster import build_subclusters

SCHEMA = 1


# ------------------------------------------------------------- config


def _int_list(v):
    return tuple(int(x) for x in v.replace(";", ",").split(",") if x.strip())


def _float_list(v):
    return tuple(float(x) for x in v.replace(";", ",").split(",") if x.strip())


def _bool(v):
    s = v.strip().lower()
    if s in ("1", "true", "yes", "on"):
        return True
    if s in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {v!r}")


def _lambda(v):
    return "auto" if v.strip().lower() == "auto" else float(v)


KEYS = {
    # shared
    "seed": int, "threads": int,
    # synthetic data
    "K": int, "d": int, "D": int, "per_cluster": int, "counts": _int_list, "sigma": float,
    # pipeline
    "data": str, "format": str, "n": int, "d_max": int, "lambda1": _lambda,
    "lambda2": _lambda, "m": int, "threshold_grid": _int_list, "bags": int,
    "noisy": _bool, "declared_d": int,
    # outputs
    "out": str, "labels_out": str, "report_out": str, "dump_affinity": str,
    # bench
    "axis": str, "levels": _float_list, "repeats": int,
    # theory
    "g1": float, "g2": float, "c1": float, "c2": float, "c3": float, "q0": float,
    "eta1": float, "eta2": float, "eta3": float, "trials": int,
}


class ConfigError(SBSCError):
    pass


def parse_config_text(text: str, source: str = "<config>") -> dict:
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected key=value, got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key] = value
    return out


def load_config(path=None, overrides=(), env=None) -> dict:
    """Merge file, command-line pairs and environment into typed values."""
    env = os.environ if env is None else env
    raw = {}
    if "SBSC_THREADS" in env:
        raw["threads"] = env["SBSC_THREADS"]
    if path is not None:
        raw.update(parse_config_text(Path(path).read_text(encoding="utf-8"), str(path)))
    raw.update(parse_config_text("\n".join(overrides), "<command line>"))
    cfg = {}
    for key, value in raw.items():
        if key not in KEYS:
            raise ConfigError(f"unknown config key {key!r}")
        try:
            cfg[key] = KEYS[key](value)
        except ValueError as exc:
            raise ConfigError(f"bad value for {key!r}: {exc}") from None
    cfg.setdefault("seed", 0)
    cfg.setdefault("threads", 1)
    return cfg


def _require(cfg, *keys):
    missing = [k for k in keys if k not in cfg]
    if missing:
        raise ConfigError(f"missing config key(s): {', '.join(missing)}")


def synthetic_spec(cfg) -> SyntheticSpec:
    _require(cfg, "K", "d", "D")
    if "counts" in cfg:
        counts = cfg["counts"]
    else:
        _require(cfg, "per_cluster")
        counts = (cfg["per_cluster"],) * cfg["K"]
    return SyntheticSpec(K=cfg["K"], d=cfg["d"], D=cfg["D"], counts=counts,
                         sigma=cfg.get("sigma", 0.0), seed=cfg["seed"])


def pipeline_params(cfg, K=None) -> SBSCParams:
    K = cfg.get("K", K)
    if K is None:
        raise ConfigError("missing config key: K")
    return SBSCParams(
        K=K, n=cfg.get("n"), d_max=cfg.get("d_max"),
        lambda1=cfg.get("lambda1", "auto"), lambda2=cfg.get("lambda2", "auto"),
        m=cfg.get("m"), threshold_grid=cfg.get("threshold_grid"),
        bags=cfg.get("bags", 1), seed=cfg["seed"], noisy=cfg.get("noisy", True),
        d=cfg.get("declared_d", cfg.get("d")), threads=cfg["threads"])


# ------------------------------------------------------------- outputs


def _atomic_write(path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else str(x)
    return x


def write_report(path, report: dict) -> None:
    report = {"schema": SCHEMA, **report}
    _atomic_write(path, json.dumps(_jsonable(report), indent=2, sort_keys=True) + "\n")


def labels_csv(labels) -> str:
    return "index,label\n" + "".join(f"{i},{int(v)}\n" for i, v in enumerate(labels))


# ------------------------------------------------------------- commands


def cmd_gen(cfg) -> dict:
    spec = synthetic_spec(cfg)
    data = generate_synthetic(spec)
    out = cfg.get("out", "dataset.csv")
    with tempfile.TemporaryDirectory(dir=Path(out).resolve().parent) as tmp:
        tmp_path = Path(tmp) / "data.csv"
        save_dataset(data, tmp_path)
        os.replace(tmp_path, out)
    digest = {"N": spec.N, "D": spec.D, "K": spec.K, "d": spec.d,
              "sigma": spec.sigma, "seed": spec.seed, "out": out}
    print(json.dumps(digest, sort_keys=True))
    return digest


def cmd_run(cfg) -> dict:
    _require(cfg, "data")
    data = load_dataset(cfg["data"], cfg.get("format", "csv-rows"))
    params = pipeline_params(cfg, K=data.K).resolve(data.N, data.D)
    timings, infos = {}, []
    t0 = time.perf_counter()
    labels = bag(data, params, timings=timings, infos=infos)
    total = time.perf_counter() - t0

    labels_out = cfg.get("labels_out", "labels.csv")
    _atomic_write(labels_out, labels_csv(labels))
    if cfg.get("dump_affinity"):
        infos[0]["affinity"].to_csv(cfg["dump_affinity"])

    report = {
        "command": "run",
        "seed": params.seed,
        "params": asdict(params),
        "data": {"path": cfg["data"], "N": data.N, "D": data.D},
        "timings": {**{s: timings.get(s, 0.0) for s in STAGES}, "total": total},
        "bags": [{"seed": params.seed + b, "t_max": info["t_max"],
                  "stability": info["scores"], "lambda1": info["lambda1"],
                  "lambda2": info["lambda2"]} for b, info in enumerate(infos)],
        "cluster_sizes": np.bincount(labels, minlength=params.K),
        "labels_out": labels_out,
    }
    if data.labels is not None:
        report["accuracy"] = accuracy(labels, data.labels)
        report["nmi"] = nmi(labels, data.labels)
    write_report(cfg.get("report_out", "report.json"), report)
    summary = {k: report[k] for k in ("accuracy", "nmi") if k in report}
    summary["seconds"] = round(total, 3)
    print(json.dumps(summary, sort_keys=True))
    return report


def cmd_bench(cfg) -> dict:
    axis = cfg.get("axis", "sigma")
    base = synthetic_spec(cfg)
    params = pipeline_params(cfg)
    repeats = cfg.get("repeats", 10 if axis == "sigma" else 1)
    if axis == "sigma":
        levels = cfg.get("levels", (0.0, 0.05, 0.1, 0.15, 0.2, 0.25))
        rows = _bench.sigma_sweep(base, params, levels, repeats)
    elif axis == "N":
        levels = cfg.get("levels", (base.counts[0],))
        rows = _bench.size_sweep(base, params, [int(v) for v in levels], repeats)
    else:
        raise ConfigError(f"axis must be 'sigma' or 'N', got {axis!r}")
    out = cfg.get("out", "sweep.csv")
    body = ",".join(_bench.SweepRow.HEADER) + "\n"
    body += "".join(",".join(repr(v) for v in r.as_tuple()) + "\n" for r in rows)
    _atomic_write(out, body)
    report = {"command": "bench", "axis": axis, "seed": cfg["seed"],
              "rows": [asdict(r) for r in rows], "sweep_out": out}
    if axis == "N":
        slope = _bench.loglog_slope([r.level for r in rows], [r.runtime for r in rows])
        report["loglog_slope"] = slope
    write_report(cfg.get("report_out", "bench.json"), report)
    print(body, end="")
    if axis == "N":
        print(f"log-log slope: {slope:.3f}")
    return report


def cmd_theory(cfg) -> dict:
    """Bounds for a synthetic configuration plus Monte-Carlo verdicts."""
    spec = synthetic_spec(cfg)
    data = generate_synthetic(spec)
    K = spec.K
    n = cfg.get("n", min(spec.N, math.ceil(8 * K * math.log(spec.N))))
    d_max = cfg.get("d_max", math.ceil(0.6 * spec.D))
    rng = np.random.default_rng(cfg["seed"])
    sample = np.sort(rng.choice(spec.N, size=n, replace=False))
    sampled = np.bincount(data.labels[sample], minlength=K)
    trials = cfg.get("trials", 100_000)

    base = _theory.TheoryParams.from_bases(
        data.bases, spec.counts, sampled, d_max, g1=cfg.get("g1", 0.5),
        g2=cfg.get("g2", 0.0), sigma=spec.sigma, m=cfg.get("m"),
        c1=cfg.get("c1"), c2=cfg.get("c2"), c3=cfg.get("c3"), q0=cfg.get("q0"),
        eta1=cfg.get("eta1"), eta2=cfg.get("eta2"), eta3=cfg.get("eta3"))
    rep = None
    if "g1" not in cfg:
        try:
            rep = _theory.search_constants(base)
        except AssumptionViolated:
            pass
    if rep is None:
        # evaluate anyway so the report lists what failed
        rep = _theory.theorem_bounds(base, strict=False)

    subs = build_subclusters(data, sample, d_max)
    pure = float(np.mean([np.unique(data.labels[s.members]).size == 1 for s in subs]))
    lemma3 = [_theory.lemma3_check(rep.params.T, spec.d, d_max, N_j, trials=trials,
                                   seed=cfg["seed"] + j)
              for j, N_j in enumerate(spec.counts)]
    report = {
        "command": "theory",
        "seed": cfg["seed"],
        "inputs": {"K": K, "d": spec.d, "D": spec.D, "counts": spec.counts,
                   "sampled": sampled, "n": n, "d_max": d_max, "sigma": spec.sigma,
                   "maximal_affinity": rep.params.affinity},
        "bounds": rep.as_dict(),
        "empirical": {"subcluster_preserving": pure,
                      "theorem1_holds": (None if math.isnan(rep.clamped["p1"])
                                         else bool(rep.clamped["p1"] <= pure))},
        "monte_carlo": {"lemma3": [{"N_j": N_j, **asdict(c), "passed": c.passed}
                                   for N_j, c in zip(spec.counts, lemma3)]},
    }
    write_report(cfg.get("report_out", "theory.json"), report)
    print(json.dumps(_jsonable({"raw": rep.raw, "clamped": rep.clamped,
                                "subcluster_preserving": pure}), sort_keys=True))
    return report


COMMANDS = {"gen": cmd_gen, "run": cmd_run, "bench": cmd_bench, "theory": cmd_theory}


def _origin(exc) -> str:
    """Module of the innermost package frame that raised ``exc``."""
    name = "sbsc"
    for frame in traceback.extract_tb(exc.__traceback__):
        parts = Path(frame.filename).parts
        if "sbsc" in parts:
            name = "sbsc." + Path(frame.filename).stem
    return name


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="sbsc", description=__doc__.split("\n\n")[0])
    ap.add_argument("command", choices=sorted(COMMANDS))
    ap.add_argument("args", nargs="*", help="optional config file, then key=value overrides")
    ns = ap.parse_args(argv)
    path = None
    pairs = list(ns.args)
    if pairs and "=" not in pairs[0]:
        path = pairs.pop(0)
    try:
        cfg = load_config(path, pairs)
        COMMANDS[ns.command](cfg)
    except (SBSCError, ValueError, OSError, KeyError) as exc:
        print(f"sbsc {ns.command}: {_origin(exc)}: {type(exc).__name__}: {exc}",
              file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
