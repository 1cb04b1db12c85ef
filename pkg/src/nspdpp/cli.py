"""Command line: gen, mine, select, eval, pipeline, sweep."""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time
from dataclasses import fields
from pathlib import Path

from .datagen import DataFactors, generate, write_dataset
from .experiment import (ConfigError, csv_text, diagnostics, load_config, resolve_config,
                         run_pipeline, sweep_factors, to_json)
from .explicit import ConfigurationError, write_kernel_csv
from .formats import FormatError, read_patterns, read_sequences, write_patterns
from .graph import write_graph_csv
from .implicit import write_implicit_csv
from .metrics import METRIC_NAMES, UndefinedMetric, evaluate
from .miner import DEFAULT_MAX_LEN, mine_nsp
from .pipeline import ALL_MODES, ModelParams, SelectionContext, implicit_model
from .sampler import InfeasibleK

EXIT_CONFIG = 2
EXIT_INFEASIBLE = 3
EXIT_IO = 4

log = logging.getLogger("nspdpp")


def _default_jobs() -> int:
    try:
        return max(1, int(os.environ.get("NSPDPP_JOBS", "1")))
    except ValueError:
        return 1


def _csv_list(kind):
    def parse(text):
        try:
            return [kind(v) for v in text.split(",") if v.strip()]
        except ValueError:
            raise argparse.ArgumentTypeError(f"expected comma-separated values: {text!r}")
    return parse


def cmd_gen(args) -> int:
    values = {f.name: getattr(args, f.name) for f in fields(DataFactors)
              if getattr(args, f.name) is not None}
    try:
        f = DataFactors(**values)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    db = generate(f)
    write_dataset(db, f, args.out)
    log.info("wrote %d sequences to %s", len(db), args.out)
    return 0


def cmd_mine(args) -> int:
    if not 0 < args.min_sup <= 1:
        raise ConfigError("--min-sup must lie in (0, 1]")
    if args.max_len < 1:
        raise ConfigError("--max-len must be positive")
    db = read_sequences(args.input)
    coll = mine_nsp(db, args.min_sup, args.max_len)
    write_patterns(coll, args.out, db.labels)
    log.info("wrote %d patterns to %s", len(coll), args.out)
    return 0


def _context(args, db, coll) -> SelectionContext:
    return SelectionContext(coll, db, ModelParams(args.epsilon or 0.0, args.min_link_sup))


def cmd_select(args) -> int:
    if args.k < 1:
        raise ConfigError("--k must be at least 1")
    db = read_sequences(args.input)
    coll = read_patterns(args.patterns, db)
    if not len(coll):
        raise InfeasibleK("the pattern file is empty")
    ctx = _context(args, db, coll)
    t0 = time.perf_counter()
    res = ctx.select(args.mode, args.k, args.seed)
    elapsed = time.perf_counter() - t0
    write_patterns(coll.subset(list(res.chosen)), args.out, db.labels)
    diag = diagnostics(res, args.k, elapsed)
    if args.mode in ("einsp", "exact", "ksdpp"):
        diag["spectra"] = {"explicit": ctx.explicit.rank, "implicit": ctx.implicit.rank}
    Path(args.diagnostics or f"{args.out}.json").write_text(to_json(diag))
    if args.dump_graph:
        write_graph_csv(ctx.graph, ctx.stats, args.dump_graph, db.labels)
    if args.dump_kernel:
        write_kernel_csv(ctx.explicit, args.dump_kernel)
    if args.dump_implicit:
        write_implicit_csv(coll, ctx.model, ctx.q_impl, args.dump_implicit, db.labels)
    return 0


def _diagnostics_for(path: Path) -> dict:
    for cand in (Path(f"{path}.json"), path.with_suffix(".json")):
        if cand.exists() and cand != path:
            return json.loads(cand.read_text())
    return {}


def cmd_eval(args) -> int:
    db = read_sequences(args.input)
    params = ModelParams(args.epsilon or 0.0, args.min_link_sup)
    rows = []
    for path in map(Path, args.patterns):
        sel = read_patterns(path, db)
        if not len(sel):
            raise UndefinedMetric(f"{path}: no patterns to evaluate")
        diag = _diagnostics_for(path)
        row = {"selector": diag.get("mode", path.stem), "k": diag.get("k", len(sel)),
               "seed": diag.get("seed"), "wall_time": diag.get("wall_time")}
        row.update(evaluate(list(sel), db, implicit_model(db, sel, params)))
        rows.append(row)
    text = csv_text(("selector", "k", "seed") + METRIC_NAMES + ("wall_time",), rows)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def _overrides(args) -> dict:
    out = {"input": args.input, "min_sup": args.min_sup, "max_len": args.max_len,
           "epsilon": args.epsilon, "min_link_sup": args.min_link_sup, "modes": args.modes,
           "k": args.k, "seeds": args.seeds, "out": args.out}
    if args.dump:
        out["dump"] = True
    factors = {f: getattr(args, f) for f in ("C", "T", "S", "I", "DB", "N")
               if getattr(args, f) is not None}
    if args.data_seed is not None:
        factors["seed"] = args.data_seed
    if factors:
        out["factors"] = factors
    return out


def _config(args) -> dict:
    base = load_config(args.config) if args.config else None
    return resolve_config(base, _overrides(args))


def cmd_pipeline(args) -> int:
    report = run_pipeline(_config(args))
    sys.stdout.write(csv_text(("selector", "k", "seed") + METRIC_NAMES, report["rows"]))
    return 0


def cmd_sweep(args) -> int:
    cfg = _config(args)
    if args.factor:
        name, _, values = args.factor.partition("=")
        try:
            parsed = [float(v) if name in "CTSI" else int(v) for v in values.split(",") if v]
        except ValueError:
            raise ConfigError(f"bad --factor {args.factor!r}") from None
        cfg["sweep"] = {name: parsed}
        cfg = resolve_config(cfg)
    report = sweep_factors(cfg, args.jobs)
    log.info("ran %d sweep cells", report["cells"])
    sys.stdout.write(csv_text(("factor", "value", "selector", "k", "runs") + METRIC_NAMES,
                              report["summary"]))
    return 0


def _add_factor_flags(p, defaults: DataFactors | None):
    for name, kind in (("C", float), ("T", float), ("S", float), ("I", float),
                       ("DB", int), ("N", int)):
        p.add_argument(f"--{name}", type=kind,
                       default=None, help=f"data factor {name}"
                       + (f" (default {getattr(defaults, name)})" if defaults else ""))


def _add_model_flags(p):
    p.add_argument("--epsilon", type=float, default=None,
                   help="dependency threshold for implicit relations (default 0)")
    p.add_argument("--min-link-sup", type=float, default=None,
                   help="minimum presence of link itemsets (default min_sup / 2)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nspdpp", description=__doc__)
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a synthetic sequence database")
    _add_factor_flags(p, DataFactors())
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("mine", help="mine positive and negative sequential patterns")
    p.add_argument("--input", required=True)
    p.add_argument("--min-sup", type=float, required=True)
    p.add_argument("--max-len", type=int, default=DEFAULT_MAX_LEN)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_mine)

    p = sub.add_parser("select", help="select k patterns from a pattern file")
    p.add_argument("--patterns", required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--mode", choices=ALL_MODES, default="einsp")
    _add_model_flags(p)
    p.add_argument("--out", required=True)
    p.add_argument("--diagnostics", help="diagnostics JSON path (default <out>.json)")
    p.add_argument("--dump-graph", metavar="CSV")
    p.add_argument("--dump-kernel", metavar="CSV")
    p.add_argument("--dump-implicit", metavar="CSV")
    p.set_defaults(func=cmd_select)

    p = sub.add_parser("eval", help="score selected pattern files against a database")
    p.add_argument("--input", required=True)
    p.add_argument("--patterns", nargs="+", required=True)
    _add_model_flags(p)
    p.add_argument("--out", help="CSV path (default stdout)")
    p.set_defaults(func=cmd_eval)

    for name, func, text in (("pipeline", cmd_pipeline, "gen/ingest, mine, select, eval"),
                             ("sweep", cmd_sweep, "one-factor-at-a-time sensitivity sweep")):
        p = sub.add_parser(name, help=text)
        p.add_argument("--config", help="JSON config or a saved manifest")
        p.add_argument("--input", help="sequence file to use instead of generating")
        _add_factor_flags(p, None)
        p.add_argument("--data-seed", type=int)
        p.add_argument("--min-sup", type=float)
        p.add_argument("--max-len", type=int)
        _add_model_flags(p)
        p.add_argument("--modes", type=_csv_list(str))
        p.add_argument("--k", type=_csv_list(int))
        p.add_argument("--seeds", type=_csv_list(int))
        p.add_argument("--dump", action="store_true", help="write graph/kernel/implicit CSVs")
        p.add_argument("--out")
        if name == "sweep":
            p.add_argument("--factor", help="e.g. C=6,8,10,12,14 (overrides the config sweep)")
            p.add_argument("--jobs", type=int, default=_default_jobs(),
                           help="parallel cells (default $NSPDPP_JOBS or 1)")
        p.set_defaults(func=func)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ConfigError, ConfigurationError, UndefinedMetric) as exc:
        print(f"nspdpp: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except InfeasibleK as exc:
        print(f"nspdpp: infeasible k: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (OSError, FormatError) as exc:
        print(f"nspdpp: I/O failure: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
