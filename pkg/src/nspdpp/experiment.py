"""Config-driven pipeline runs and one-factor-at-a-time sweeps.

A config is one JSON document with flat keys plus a nested ``factors``
block. A run writes everything to its output directory only after every
selection succeeded, so a failed run leaves no partial outputs.
"""
from __future__ import annotations

import copy
import csv
import io
import json
import logging
import platform
import shutil
import tempfile
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict
from importlib import metadata as importlib_metadata
from pathlib import Path

import numpy as np

from .datagen import RNG_ALGORITHM, DataFactors, generate
from .datagen import metadata as data_metadata
from .explicit import write_kernel_csv
from .formats import read_sequences, write_patterns, write_sequences
from .graph import write_graph_csv
from .implicit import write_implicit_csv
from .metrics import METRIC_NAMES
from .miner import DEFAULT_MAX_LEN, mine_nsp
from .pipeline import ALL_MODES, MODES, ModelParams, SelectionContext
from .sampler import InfeasibleK

log = logging.getLogger(__name__)

MANIFEST_VERSION = 1
METRIC_COLUMNS = ("selector", "k", "seed") + METRIC_NAMES
SWEEP_FACTORS = ("C", "T", "S", "I", "DB", "N")


class ConfigError(ValueError):
    """Invalid configuration (CLI exit code 2)."""


DEFAULT_CONFIG: dict = {
    "input": None,
    "factors": asdict(DataFactors(DB=1000)),
    "min_sup": 0.3,
    "max_len": DEFAULT_MAX_LEN,
    "epsilon": 0.0,
    "min_link_sup": None,
    "max_link_size": 2,
    "modes": list(MODES),
    "k": [30],
    "seeds": [0],
    "out": "nspdpp-run",
    "dump": False,
    "sweep": {},
}


def load_config(path) -> dict:
    """Read a config or a saved manifest (its ``config`` block is used)."""
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: not valid JSON ({exc})") from None
    if not isinstance(doc, dict):
        raise ConfigError(f"{path}: top level must be an object")
    if "manifest_version" in doc:
        doc = doc["config"]
    return doc


def resolve_config(base: dict | None = None, overrides: dict | None = None) -> dict:
    """Defaults, then ``base``, then non-None ``overrides``; validated."""
    cfg = copy.deepcopy(DEFAULT_CONFIG)
    for layer in (base or {}, {k: v for k, v in (overrides or {}).items() if v is not None}):
        for key, value in layer.items():
            if key not in cfg:
                raise ConfigError(f"unknown config key {key!r}")
            if key == "factors":
                if not isinstance(value, dict):
                    raise ConfigError("factors must be an object")
                unknown = set(value) - set(cfg["factors"])
                if unknown:
                    raise ConfigError(f"unknown factors {sorted(unknown)}")
                cfg["factors"].update(value)
            else:
                cfg[key] = copy.deepcopy(value)
    for key in ("k", "seeds", "modes"):
        if not isinstance(cfg[key], list):
            cfg[key] = [cfg[key]]
    validate(cfg)
    return cfg


def _is_int(v) -> bool:
    return isinstance(v, int) and not isinstance(v, bool)


def validate(cfg: dict) -> None:
    def need(cond, msg):
        if not cond:
            raise ConfigError(msg)

    if cfg["input"] is not None:
        need(Path(cfg["input"]).is_file(), f"input file not found: {cfg['input']}")
    try:
        DataFactors(**cfg["factors"])
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad factors: {exc}") from None
    need(isinstance(cfg["min_sup"], (int, float)) and 0 < cfg["min_sup"] <= 1,
         "min_sup must lie in (0, 1]")
    need(_is_int(cfg["max_len"]) and cfg["max_len"] >= 1, "max_len must be a positive integer")
    need(isinstance(cfg["epsilon"], (int, float)), "epsilon must be a number")
    mls = cfg["min_link_sup"]
    need(mls is None or (isinstance(mls, (int, float)) and 0 < mls <= 1),
         "min_link_sup must lie in (0, 1]")
    need(_is_int(cfg["max_link_size"]) and cfg["max_link_size"] >= 1,
         "max_link_size must be a positive integer")
    need(cfg["modes"] and all(m in ALL_MODES for m in cfg["modes"]),
         f"modes must be a non-empty subset of {list(ALL_MODES)}")
    need(len(set(cfg["modes"])) == len(cfg["modes"]), "modes must not repeat")
    need(cfg["k"] and all(_is_int(k) and k >= 1 for k in cfg["k"]), "k values must be >= 1")
    need(cfg["seeds"] and all(_is_int(s) and s >= 0 for s in cfg["seeds"]),
         "seeds must be non-negative integers")
    need(isinstance(cfg["out"], str) and cfg["out"], "out must be a path")
    need(isinstance(cfg["dump"], bool), "dump must be true or false")
    need(isinstance(cfg["sweep"], dict), "sweep must map factor names to value lists")
    for name, values in cfg["sweep"].items():
        need(name in SWEEP_FACTORS, f"cannot sweep {name!r}; choose from {SWEEP_FACTORS}")
        need(isinstance(values, list) and values, f"sweep values for {name} must be a non-empty list")


def versions() -> dict:
    try:
        pkg = importlib_metadata.version("artifact")
    except importlib_metadata.PackageNotFoundError:
        pkg = "unknown"
    return {"nspdpp": pkg, "numpy": np.__version__, "python": platform.python_version()}


def to_json(obj) -> str:
    def default(o):
        if isinstance(o, np.integer):
            return int(o)
        if isinstance(o, np.floating):
            return float(o)
        if isinstance(o, np.ndarray):
            return o.tolist()
        if hasattr(o, "__dataclass_fields__"):
            return asdict(o)
        raise TypeError(f"cannot serialise {type(o).__name__}")

    return json.dumps(obj, indent=2, sort_keys=True, default=default) + "\n"


def csv_text(columns, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([_cell(row.get(c)) for c in columns])
    return buf.getvalue()


def _cell(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return v


def diagnostics(res, k: int, wall_time: float | None = None) -> dict:
    out = {"mode": res.mode, "k": k, "seed": res.seed, "chosen": list(res.chosen),
           "weights": None if res.weights is None else list(res.weights)}
    out.update(res.diagnostics)
    if wall_time is not None:
        out["wall_time"] = wall_time
    return out


def run_pipeline(cfg: dict) -> dict:
    """gen (or ingest) -> mine -> select every (mode, k, seed) -> eval, then write outputs."""
    if cfg["input"] is not None:
        db = read_sequences(cfg["input"])
        factors = None
    else:
        factors = DataFactors(**cfg["factors"])
        db = generate(factors)
    coll = mine_nsp(db, cfg["min_sup"], cfg["max_len"])
    log.info("mined %d patterns", len(coll))
    if len(coll) == 0:
        raise InfeasibleK("no patterns were mined")
    too_big = [k for k in cfg["k"] if k > len(coll)]
    if too_big:
        raise InfeasibleK(f"k={too_big[0]} exceeds the {len(coll)} mined patterns")
    params = ModelParams(cfg["epsilon"], cfg["min_link_sup"], cfg["max_link_size"])
    ctx = SelectionContext(coll, db, params)
    rows, timings, selections = [], [], []
    for k in cfg["k"]:
        for seed in cfg["seeds"]:
            for mode in cfg["modes"]:
                t0 = time.perf_counter()
                res = ctx.select(mode, k, seed)
                elapsed = time.perf_counter() - t0
                row = {"selector": mode, "k": k, "seed": seed}
                row.update(ctx.evaluate(res))
                rows.append(row)
                timings.append({"selector": mode, "k": k, "seed": seed, "wall_time": elapsed})
                selections.append((res, mode, k, seed))
    report = {"patterns": len(coll), "rows": rows, "timings": timings,
              "weights": list(ctx.weights) if {"einsp", "exact"} & set(cfg["modes"]) else None}
    _write_run(cfg, db, factors, coll, ctx, rows, timings, selections)
    return report


def _write_run(cfg, db, factors, coll, ctx, rows, timings, selections) -> None:
    out = Path(cfg["out"])
    out.parent.mkdir(parents=True, exist_ok=True)
    # build in a sibling temp dir so a failure never leaves a half-written run
    tmp = Path(tempfile.mkdtemp(prefix=".nspdpp-", dir=out.parent))
    try:
        files = []
        if factors is not None:
            write_sequences(db, tmp / "data.txt")
            (tmp / "data.txt.meta.json").write_text(to_json(data_metadata(factors)))
            files += ["data.txt", "data.txt.meta.json"]
        write_patterns(coll, tmp / "patterns.txt", db.labels)
        files.append("patterns.txt")
        sel_dir = tmp / "selections"
        sel_dir.mkdir()
        for res, mode, k, seed in selections:
            stem = f"{mode}_k{k}_seed{seed}"
            write_patterns(coll.subset(list(res.chosen)), sel_dir / f"{stem}.txt", db.labels)
            (sel_dir / f"{stem}.json").write_text(to_json(diagnostics(res, k)))
            files += [f"selections/{stem}.txt", f"selections/{stem}.json"]
        (tmp / "metrics.csv").write_text(csv_text(METRIC_COLUMNS, rows))
        (tmp / "timings.csv").write_text(
            csv_text(("selector", "k", "seed", "wall_time"), timings))
        files += ["metrics.csv", "timings.csv"]
        if cfg["dump"]:
            write_graph_csv(ctx.graph, ctx.stats, tmp / "graph.csv", db.labels)
            write_kernel_csv(ctx.explicit, tmp / "kernel.csv")
            write_implicit_csv(coll, ctx.model, ctx.q_impl, tmp / "implicit.csv", db.labels)
            files += ["graph.csv", "kernel.csv", "implicit.csv"]
        manifest = {"manifest_version": MANIFEST_VERSION, "config": cfg, "versions": versions(),
                    "rng": RNG_ALGORITHM, "outputs": sorted(files)}
        (tmp / "manifest.json").write_text(to_json(manifest))
        if out.exists():
            shutil.rmtree(out)
        tmp.rename(out)
    except BaseException:
        shutil.rmtree(tmp, ignore_errors=True)
        raise


def sweep_cells(cfg: dict) -> list[dict]:
    """One isolated pipeline config per (factor, value, seed)."""
    if not cfg["sweep"]:
        raise ConfigError("sweep needs at least one factor with values")
    cells = []
    for name, values in cfg["sweep"].items():
        for value in values:
            for seed in cfg["seeds"]:
                cell = copy.deepcopy(cfg)
                cell["sweep"] = {}
                cell["input"] = None
                cell["factors"][name] = value
                cell["factors"]["seed"] = seed
                cell["seeds"] = [seed]
                cell["out"] = str(Path(cfg["out"]) / f"{name}={value}" / f"seed{seed}")
                validate(cell)
                cells.append({"factor": name, "value": value, "seed": seed, "config": cell})
    return cells


def _run_cell(cell: dict) -> list[dict]:
    report = run_pipeline(cell["config"])
    return [{"factor": cell["factor"], "value": cell["value"], **row} for row in report["rows"]]


def sweep_factors(cfg: dict, jobs: int = 1) -> dict:
    """Run every sweep cell (in parallel up to ``jobs``) and aggregate the metrics."""
    cells = sweep_cells(cfg)
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_run_cell, cells))
    else:
        results = [_run_cell(c) for c in cells]
    rows = [row for rs in results for row in rs]
    groups: dict[tuple, list[dict]] = {}
    for row in rows:
        groups.setdefault((row["factor"], row["value"], row["selector"], row["k"]), []).append(row)
    summary = []
    for (name, value, selector, k), rs in groups.items():
        entry = {"factor": name, "value": value, "selector": selector, "k": k, "runs": len(rs)}
        for m in METRIC_NAMES:
            entry[m] = float(np.mean([r[m] for r in rs]))
        summary.append(entry)
    out = Path(cfg["out"])
    out.mkdir(parents=True, exist_ok=True)
    (out / "sweep.csv").write_text(csv_text(("factor", "value") + METRIC_COLUMNS, rows))
    (out / "sweep_summary.csv").write_text(
        csv_text(("factor", "value", "selector", "k", "runs") + METRIC_NAMES, summary))
    manifest = {"manifest_version": MANIFEST_VERSION, "config": cfg, "versions": versions(),
                "rng": RNG_ALGORITHM, "cells": [c["config"]["out"] for c in cells]}
    (out / "manifest.json").write_text(to_json(manifest))
    return {"cells": len(cells), "rows": rows, "summary": summary}
