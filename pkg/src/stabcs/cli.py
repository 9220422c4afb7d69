"""Command-line driver.

Each subcommand reads files and writes files into ``--out``:

    stab        config                    -> stab.csv, stab.meta.json
    diabatize   config, stab.csv          -> crossings.json, stab_refined.csv
    resonance   config, crossings.json    -> trajectory_deta*.csv, report.json
    benchmark   config                    -> benchmark.csv, benchmark.json

CSV files get a ``.meta.json`` sidecar; JSON files embed a ``metadata``
block.  Both carry the configuration hash and x0.
"""

import argparse
import json
import logging
import os
import sys

import numpy as np

from . import config as config_mod
from . import expost_cs
from .direct_cs import theta_trajectory
from .errors import ConfigError, SchemaError, StabcsError
from .pipeline import diabatize_graph
from .stabgraph import StabilizationGraph, sweep

logger = logging.getLogger("stabcs")


def _write_json(obj, path):
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _read_json(path):
    with open(path) as fh:
        text = fh.read()
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(exc.msg, line=exc.lineno) from None


def _write_csv_meta(path, cfg, **extra):
    _write_json({"metadata": {**cfg.metadata(), **extra}}, path[:-4] + ".meta.json")


def cmd_stab(cfg, out, threads=1, **_):
    g = sweep(cfg.eta_grid.values(), cfg.potential, cfg.basis, threads=threads)
    path = os.path.join(out, "stab.csv")
    g.to_csv(path)
    _write_csv_meta(path, cfg, n_eta=len(g), n_states=g.n_states)
    return path


def _load_graph(path, cfg):
    g = StabilizationGraph.from_csv(path, cfg.potential, cfg.basis)
    if len(g) and g.n_states != cfg.basis.size:
        raise ConfigError(f"{path} has {g.n_states} energy columns but the configured "
                          f"basis has {cfg.basis.size} functions")
    return g


def cmd_diabatize(cfg, out, threads=1, graph=None, **_):
    graph = graph or os.path.join(out, "stab.csv")
    g = _load_graph(graph, cfg)
    res = diabatize_graph(g, cfg.window_center, cfg.window_half_width, cfg.potential, cfg.basis,
                          E0=cfg.E0, spacing=cfg.refine_spacing, rounds=cfg.refine_rounds,
                          threads=threads, eta_span=cfg.crossing_span)
    if len(res.graph) > len(g):
        refined = os.path.join(out, "stab_refined.csv")
        res.graph.to_csv(refined)
        _write_csv_meta(refined, cfg, n_eta=len(res.graph), n_states=res.graph.n_states)
    path = os.path.join(out, "crossings.json")
    _write_json({
        "metadata": {**cfg.metadata(), "graph": os.path.basename(graph)},
        "records": [r.as_dict() for r in res.records],
        "refinement_requests": [list(map(float, r)) for r in res.refinement_requests],
        "failures": res.failures,
    }, path)
    return path


REQUIRED_RECORD_KEYS = ("eta_c", "E_r", "delta", "alpha_c")


def load_crossings(path):
    doc = _read_json(path)
    if not isinstance(doc, dict) or not isinstance(doc.get("records"), list):
        raise SchemaError(f"{path}: expected an object with a 'records' list")
    for k, r in enumerate(doc["records"]):
        missing = [key for key in REQUIRED_RECORD_KEYS if key not in r]
        if missing:
            raise SchemaError(f"{path}: record {k} lacks {missing}")
    return doc


def _benchmark(cfg, threads):
    # the resonance under study is the one the crossing window is centred on
    guess = cfg.window_center if cfg.benchmark_guess is None else cfg.benchmark_guess
    return theta_trajectory(cfg.potential, cfg.basis, cfg.benchmark_theta_grid.values(),
                            guess=guess, threads=threads)


def cmd_resonance(cfg, out, threads=1, crossings=None, **_):
    crossings = crossings or os.path.join(out, "crossings.json")
    doc = load_crossings(crossings)
    if not doc["records"]:
        raise StabcsError(f"{crossings} holds no crossing records")
    model = expost_cs.DiabaticModel.from_records(doc["records"])
    thetas = cfg.theta_grid.values()
    trajectories = []
    for de in cfg.delta_eta:
        tr = expost_cs.theta_sweep(model, thetas, de)
        expost_cs.extrapolate(tr, cfg.extrapolation_window, cfg.extrapolation_degree)
        csv_path = os.path.join(out, f"trajectory_deta{de:+.3f}.csv")
        tr.to_csv(csv_path)
        _write_csv_meta(csv_path, cfg, delta_eta=de)
        trajectories.append(tr)
    bench = _benchmark(cfg, threads).stationary_energy if cfg.compare_benchmark else None
    report = expost_cs.summary(trajectories, bench)
    report["metadata"] = {**cfg.metadata(), "crossings": os.path.basename(crossings),
                          "n_channels": len(model.channels), "E_r": model.E_r}
    path = os.path.join(out, "report.json")
    _write_json(report, path)
    return path


def cmd_benchmark(cfg, out, threads=1, **_):
    tr = _benchmark(cfg, threads)
    csv_path = os.path.join(out, "benchmark.csv")
    tr.to_csv(csv_path)
    _write_csv_meta(csv_path, cfg)
    e = tr.stationary_energy
    path = os.path.join(out, "benchmark.json")
    _write_json({"metadata": cfg.metadata(), "theta": tr.stationary_theta,
                 "ReE": e.real, "ImE": e.imag, "width": -2 * e.imag}, path)
    return path


COMMANDS = {"stab": cmd_stab, "diabatize": cmd_diabatize,
            "resonance": cmd_resonance, "benchmark": cmd_benchmark}


def build_parser():
    parser = argparse.ArgumentParser(
        prog="stabcs", description="Resonances from stabilization graphs by ex-post complex scaling.")
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {"stab": "sweep eta and write the stabilization graph",
             "diabatize": "fit every avoided crossing of the resonance",
             "resonance": "ex-post complex scaling and extrapolation to theta = 0",
             "benchmark": "direct complex scaling of the Hamiltonian"}
    for name, text in helps.items():
        p = sub.add_parser(name, help=text)
        p.add_argument("--config", help="JSON run configuration (defaults built in)")
        p.add_argument("--out", default=".", help="output directory")
        p.add_argument("--threads", type=int, default=1, help="worker threads")
        p.add_argument("-v", "--verbose", action="store_true")
        if name == "diabatize":
            p.add_argument("--graph", help="graph CSV (default: OUT/stab.csv)")
        if name == "resonance":
            p.add_argument("--crossings", help="crossings JSON (default: OUT/crossings.json)")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.threads < 1:
        print("error: --threads must be at least 1", file=sys.stderr)
        return 2
    try:
        cfg = config_mod.load(args.config) if args.config else config_mod.RunConfig()
        os.makedirs(args.out, exist_ok=True)
        kwargs = {k: v for k, v in vars(args).items() if k in ("graph", "crossings")}
        path = COMMANDS[args.command](cfg, args.out, threads=args.threads, **kwargs)
    except (ConfigError, SchemaError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: no such file: {exc.filename}", file=sys.stderr)
        return 1
    except (StabcsError, ValueError, np.linalg.LinAlgError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
