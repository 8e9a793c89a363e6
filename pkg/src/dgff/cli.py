"""Command-line interface: build frames, filter, recover, benchmark, demo, export.

Graphs are given either as a CSV edge-list path or as a generator spec:

    path:N   ring:N[:undirected]   sbm:N:C:P_IN:P_OUT
    random:N:P[:directed]   swissroll:N[:K]

Flags may also come from a ``--config`` file of ``key = value`` lines;
explicit flags win. ``DGFF_WORKERS`` sets the number of worker processes
for trial loops (results are always written in a fixed order).
"""
from __future__ import annotations

import argparse
import logging
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import io
from .basis import gfb
from .containers import SpectralBasis
from .convex_solver import DivergenceError
from .frames import FAMILIES, build_frame, lidgff, lrlidgff
from .graph import Graph, GraphError, laplacian, make_path, make_random, make_ring, make_sbm, make_swiss_roll
from .manifold_opt import PCALError, SolverConfig
from .spectral import (SolveConfig, cluster_signal, dgs_filter, analyze, ideal_lowpass,
                       recovery_trial, relative_error, spectral_dispersion, spike_demo, tikhonov_response)

log = logging.getLogger("dgff")

EXIT_OK, EXIT_NUMERIC, EXIT_USAGE = 0, 1, 2



class UsageError(Exception):
    pass


# -- graph and signal sources ---------------------------------------------------------

def load_graph(spec: str, seed: int = 0) -> tuple[Graph, np.ndarray | None]:
    """Resolve a generator spec or CSV path; returns the graph and SBM labels if any."""
    parts = spec.split(":")
    kind = parts[0].lower()
    try:
        if kind == "path" and len(parts) == 2:
            return make_path(int(parts[1])), None
        if kind == "ring" and len(parts) in (2, 3):
            return make_ring(int(parts[1]), directed=not (len(parts) == 3 and parts[2] == "undirected")), None
        if kind == "sbm" and len(parts) == 5:
            return make_sbm(int(parts[1]), int(parts[2]), float(parts[3]), float(parts[4]), seed)
        if kind == "random" and len(parts) in (3, 4):
            directed = len(parts) == 4 and parts[3] == "directed"
            return make_random(int(parts[1]), float(parts[2]), seed, directed=directed), None
        if kind == "swissroll" and len(parts) in (2, 3):
            return make_swiss_roll(int(parts[1]), seed, k=int(parts[2]) if len(parts) == 3 else 8), None
    except ValueError as exc:
        raise UsageError(f"bad graph spec {spec!r}: {exc}") from exc
    if Path(spec).exists():
        return io.read_graph(spec), None
    raise UsageError(f"graph {spec!r} is neither a generator spec nor an existing file")


def default_signal(g: Graph, labels, seed: int) -> np.ndarray:
    """Cluster signal for SBM graphs, otherwise a smooth low-frequency signal in [-1, 1]."""
    if labels is not None:
        return cluster_signal(labels)
    from .graph import symmetrize, adjacency, degree_laplacian

    _, U = np.linalg.eigh(degree_laplacian(symmetrize(adjacency(g))))
    rng = np.random.default_rng(seed)
    k = max(2, g.n // 10)
    s = U[:, :k] @ (rng.standard_normal(k) / (1 + np.arange(k)))
    lo, hi = s.min(), s.max()
    return 2 * (s - lo) / (hi - lo) - 1 if hi > lo else np.zeros(g.n)


def load_signal(args, g, labels, seed):
    if args.signal:
        return io.read_signal(args.signal, g.n)
    return default_signal(g, labels, seed)


def _frame(args, g, family=None):
    return build_frame(family or args.frame, g, alpha=args.alpha, beta=args.beta, q=args.q,
                       threshold=args.threshold, cfg=SolverConfig(seed=args.seed, sink=args.sink))


def _out(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _workers() -> int:
    try:
        return max(1, int(os.environ.get("DGFF_WORKERS", "1")))
    except ValueError:
        raise UsageError("DGFF_WORKERS must be an integer")


def _pmap(fn, items):
    items = list(items)
    n = _workers()
    if n == 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(n) as ex:
        return list(ex.map(fn, items))


def _floats(text) -> list[float]:
    if isinstance(text, (int, float)):
        return [float(text)]
    return [float(t) for t in str(text).split(",") if t.strip()]


# -- commands ---------------------------------------------------------------------------

def cmd_build(args) -> int:
    g, _ = load_graph(args.graph, args.seed)
    out = _out(args)
    F = _frame(args, g)
    name = F.name if isinstance(F, SpectralBasis) else F.family
    io.write_frame(F, out / "frame.csv")
    disp = spectral_dispersion(F.frequencies)
    rows = [[name, g.n, F.size, disp]]
    meta = getattr(F, "meta", {})
    if "residual" in meta:
        rows[0].append(meta["residual"])
    header = ["family", "n", "size", "dispersion"] + (["residual"] if "residual" in meta else [])
    io.write_rows(out / "summary.csv", header, rows)
    print(f"{name}: {F.size} vectors on {g.n} nodes, dispersion {disp:.6g}")
    return EXIT_OK


def cmd_filter(args) -> int:
    g, labels = load_graph(args.graph, args.seed)
    out = _out(args)
    s_true = load_signal(args, g, labels, args.seed)
    rng = np.random.default_rng(args.seed)
    noise = args.sigma * rng.standard_normal(g.n) if args.sigma > 0 else np.zeros(g.n)
    y = s_true + noise
    F = _frame(args, g)
    coeffs = analyze(F, y, _solve_cfg(args))
    rows, best = [], None
    if args.tikhonov:
        sweep = [("tikhonov", c, tikhonov_response(F.frequencies, c)) for c in _floats(args.tikhonov)]
    else:
        sweep = [("lowpass", w, ideal_lowpass(F.size, w)) for w in range(1, F.size + 1)]
    for kind, param, h in sweep:
        s_hat = dgs_filter(F, y, h, coeffs=coeffs)
        ef, e, ratio = relative_error(s_hat, s_true, noise)
        rows.append([kind, float(param), ef, e, ratio])
        if best is None or ef < best[0]:
            best = (ef, s_hat)
    io.write_rows(out / "filter_sweep.csv", ["response", "param", "e_f", "e", "ratio"], rows)
    io.write_signal(np.real_if_close(best[1]), out / "filtered.csv")
    print(f"best e_f {best[0]:.6g} over {len(rows)} sweep points")
    return EXIT_OK


def _solve_cfg(args) -> SolveConfig:
    return SolveConfig(max_iter=args.max_iter, sink=args.sink)


def _recover_cell(task):
    F, s_true, method, rate, sigma, trial, seed, max_iter = task
    try:
        r = recovery_trial(F, s_true, rate, sigma, seed, method, SolveConfig(max_iter=max_iter))
    except DivergenceError:
        return (method, rate, sigma, trial, math.nan, math.nan, -1, math.nan, "diverged")
    return (method, rate, sigma, trial, r.snr_db, math.nan if r.e_ratio is None else r.e_ratio,
            r.iterations, r.seconds, "ok")


def cmd_recover(args) -> int:
    g, labels = load_graph(args.graph, args.seed)
    out = _out(args)
    s_true = load_signal(args, g, labels, args.seed)
    methods = [m.strip() for m in args.frame.split(",")]
    frames = {m: _frame(args, g, m).vectors for m in methods}
    tasks = []
    for rate in _floats(args.rate):
        for sigma in _floats(args.sigma):
            for trial in range(args.trials):
                # one sampling/noise draw per (rate, sigma, trial), shared by all methods
                seed = np.random.SeedSequence([args.seed, trial, int(rate * 1e6), int(sigma * 1e6)])
                for m in methods:
                    tasks.append((frames[m], s_true, m, rate, sigma, trial, seed, args.max_iter))
    results = _pmap(_recover_cell, tasks)
    rows = [[args.graph, m, rate, sigma, t, snr, ratio, it, status]
            for m, rate, sigma, t, snr, ratio, it, _, status in results]
    io.write_rows(out / "recovery.csv",
                  ["graph", "method", "rate", "sigma", "trial", "snr_db", "e_ratio", "iters", "status"], rows)
    if args.timing:
        io.write_rows(out / "recovery.timing.csv", ["method", "rate", "sigma", "trial", "seconds"],
                      [[m, rate, sigma, t, secs] for m, rate, sigma, t, _, _, _, secs, _ in results])
    agg = []
    for rate in _floats(args.rate):
        for sigma in _floats(args.sigma):
            for m in methods:
                vals = [r[4] for r in results if r[0] == m and r[1] == rate and r[2] == sigma and r[8] == "ok"]
                agg.append([m, rate, sigma, len(vals), float(np.mean(vals)) if vals else math.nan])
                print(f"{m:>10s} p={rate:g} sigma={sigma:g}: mean SNR {agg[-1][4]:.4f} dB over {len(vals)} trials")
    io.write_rows(out / "recovery_summary.csv", ["method", "rate", "sigma", "trials", "mean_snr_db"], agg)
    return EXIT_OK


def _bench_cell(task):
    n, seed, rate, max_iter, graph_kind = task
    g, labels = load_graph(f"{graph_kind}:{n}" if graph_kind != "sbm" else f"sbm:{n}:2:0.7:0.25", seed)
    s_true = default_signal(g, labels, seed)
    b = gfb(laplacian(g))
    frames = {"GFB": b.vectors, "LiDGFF": lidgff(b).vectors,
              "lrLiDGFF": lrlidgff(b).vectors}
    rows = []
    for m, F in frames.items():
        r = recovery_trial(F, s_true, rate, 0.0, seed, m, SolveConfig(max_iter=max_iter))
        rows.append((n, m, F.shape[1], r.iterations, r.snr_db, r.seconds))
    return rows


def cmd_bench(args) -> int:
    out = _out(args)
    sizes = [int(s) for s in str(args.sizes).split(",") if s.strip()]
    kind = args.graph if args.graph in ("swissroll", "sbm", "path") else "swissroll"
    results = _pmap(_bench_cell, [(n, args.seed, _floats(args.rate)[0], args.max_iter, kind) for n in sizes])
    rows = [r for block in results for r in block]
    io.write_rows(out / "bench.csv", ["n", "method", "vectors", "iters", "snr_db"], [r[:5] for r in rows])
    if args.timing:
        io.write_rows(out / "bench.timing.csv", ["n", "method", "seconds"], [[r[0], r[1], r[5]] for r in rows])
    for r in rows:
        print(f"n={r[0]:5d} {r[1]:>9s} M={r[2]:5d} iters={r[3]:7d} snr={r[4]:.3f} dB {r[5]:.2f}s")
    return EXIT_OK


def _demo_cell(task):
    seed, n, amplitude = task
    g, labels = make_sbm(n, 2, 0.7, 0.25, seed)
    s_true = cluster_signal(labels)
    b = gfb(laplacian(g))
    return spike_demo(lidgff(b), b, s_true, amplitude)


def cmd_demo_fig10(args) -> int:
    out = _out(args)
    n = int(args.nodes)
    demos = _pmap(_demo_cell, [(args.seed + t, n, args.amplitude) for t in range(args.trials)])
    rows, curves = [], []
    for t, d in enumerate(demos):
        rows.append([t, args.seed + t, d.spike, d.best_basis, d.best_frame, int(d.best_frame < d.best_basis)])
        curves += [[t, "GFB", w + 1, v] for w, v in enumerate(d.ratios_basis)]
        curves += [[t, "LiDGFF", w + 1, v] for w, v in enumerate(d.ratios_frame)]
    io.write_rows(out / "fig10_summary.csv",
                  ["trial", "seed", "spike_index", "min_ratio_gfb", "min_ratio_lidgff", "frame_wins"], rows)
    io.write_rows(out / "fig10_curves.csv", ["trial", "method", "cutoff", "ratio"], curves)
    # spectra of the first trial for plotting
    g, labels = make_sbm(n, 2, 0.7, 0.25, args.seed)
    s_true = cluster_signal(labels)
    b = gfb(laplacian(g))
    f = lidgff(b)
    y = s_true + demos[0].noise
    io.write_rows(out / "fig10_spectrum_gfb.csv", ["index", "frequency", "coefficient"],
                  [[k, lam, c] for k, (lam, c) in enumerate(zip(b.frequencies, b.vectors.T @ y))])
    io.write_rows(out / "fig10_spectrum_lidgff.csv", ["index", "frequency", "origin", "coefficient"],
                  [[k, lam, str(o), float(np.real(c))] for k, (lam, o, c)
                   in enumerate(zip(f.frequencies, f.origin, analyze(f, y)))])
    wins = sum(r[5] for r in rows)
    print(f"LiDGFF beats GFB in {wins} of {len(rows)} trials")
    return EXIT_OK


def cmd_export(args) -> int:
    g, labels = load_graph(args.graph, args.seed)
    out = _out(args)
    io.write_graph(g, out / "graph.csv")
    io.write_signal(default_signal(g, labels, args.seed), out / "signal.csv")
    if args.frame:
        F = _frame(args, g)
        io.write_frame(F, out / "frame.csv")
    if args.plot_script:
        (out / "plot.py").write_text(_PLOT_SCRIPT)
    print(f"exported graph with {g.n} nodes and {len(g.edges)} edges to {out}")
    return EXIT_OK


_PLOT_SCRIPT = '''"""Plot frame frequencies from frame.freq.csv (needs matplotlib)."""
import csv
import matplotlib.pyplot as plt

with open("frame.freq.csv") as fh:
    rows = list(csv.DictReader(fh))
orig = [(int(r["index"]), float(r["frequency"])) for r in rows if r["origin"].startswith("original")]
extra = [(int(r["index"]), float(r["frequency"])) for r in rows if not r["origin"].startswith("original")]
plt.plot(*zip(*orig), "o", label="original")
if extra:
    plt.plot(*zip(*extra), "x", label="inserted")
plt.xlabel("index")
plt.ylabel("graph frequency")
plt.legend()
plt.savefig("frequencies.png", dpi=150)
'''


# -- argument handling ------------------------------------------------------------------

def read_config(path) -> dict:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"config file not found: {path}")
    cfg = {}
    for lineno, line in enumerate(path.read_text().splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key = value")
        key, val = (t.strip() for t in line.split("=", 1))
        key = key.replace("-", "_")
        cfg[key] = val
    return cfg


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key = value file; explicit flags override it")
    common.add_argument("--graph", help="generator spec or edge-list CSV")
    common.add_argument("--frame", default="LiDGFF", help=f"one of {', '.join(FAMILIES)}")
    common.add_argument("--alpha", type=float, default=0.5)
    common.add_argument("--beta", type=float, default=0.5)
    common.add_argument("--q", type=float, default=0.01, help="magnetic rotation parameter")
    common.add_argument("--threshold", type=float, default=None, help="lrLiDGFF threshold T1")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out", default="out")
    common.add_argument("--trace", help="write the optimizer trace CSV here")
    common.add_argument("--max-iter", type=int, default=200_000, help="solver iteration cap")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="dgff", description=__doc__.split("\n")[0])
    sub = p.add_subparsers(dest="command", required=True)

    sub.add_parser("build", parents=[common], help="build a basis or frame")

    f = sub.add_parser("filter", parents=[common], help="DGS filtering sweep")
    f.add_argument("--signal", help="node,value CSV; default is a generated signal")
    f.add_argument("--sigma", type=float, default=0.1)
    f.add_argument("--tikhonov", help="comma list of c values (default: ideal low-pass sweep)")

    r = sub.add_parser("recover", parents=[common], help="inpainting from sampled nodes")
    r.add_argument("--signal")
    r.add_argument("--rate", default="0.7", help="comma list of sampling rates")
    r.add_argument("--sigma", default="0", help="comma list of noise levels")
    r.add_argument("--trials", type=int, default=20)
    r.add_argument("--timing", action="store_true", help="also write wall times to recovery.timing.csv")

    b = sub.add_parser("bench", parents=[common], help="timing and iteration counts versus size")
    b.add_argument("--sizes", default="250")
    b.add_argument("--rate", default="0.7")
    b.add_argument("--timing", action="store_true", help="also write wall times to bench.timing.csv")

    d = sub.add_parser("demo-fig10", parents=[common], help="intermediate-frequency spike demo")
    d.add_argument("--trials", type=int, default=20)
    d.add_argument("--nodes", type=int, default=30)
    d.add_argument("--amplitude", type=float, default=None, help="spike value (default: max |a*|)")

    e = sub.add_parser("export", parents=[common], help="write graph, signal and optional frame files")
    e.add_argument("--plot-script", action="store_true")
    return p


def parse_args(argv=None) -> argparse.Namespace:
    """Parse ``argv``; config-file values become defaults so explicit flags win."""
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        cfg = read_config(args.config)
        sub = next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction))
        cmd_parser = sub.choices[args.command]
        dests = {a.dest: a for a in cmd_parser._actions}
        for key, val in cfg.items():
            if key not in dests or key in ("help", "config"):
                raise UsageError(f"unknown config key {key!r}")
            if isinstance(dests[key], (argparse._StoreTrueAction, argparse._StoreFalseAction)):
                cfg[key] = val.lower() in ("1", "true", "yes", "on")
        # string defaults pass through each option's type converter
        cmd_parser.set_defaults(**cfg)
        args = parser.parse_args(argv)
    return args


def _check(args):
    needs_graph = args.command in ("build", "filter", "recover", "export")
    if needs_graph and not args.graph:
        raise UsageError(f"{args.command} needs --graph")
    if args.command == "bench" and not args.graph:
        args.graph = "swissroll"
    for key in ("alpha", "beta"):
        if not 0 < getattr(args, key) < 1:
            raise UsageError(f"--{key} must lie in (0, 1)")
    if not 0 <= args.q < 1:
        raise UsageError("--q must lie in [0, 1)")
    if hasattr(args, "trials") and args.trials < 1:
        raise UsageError("--trials must be positive")


COMMANDS = {"build": cmd_build, "filter": cmd_filter, "recover": cmd_recover, "bench": cmd_bench,
            "demo-fig10": cmd_demo_fig10, "export": cmd_export}


def main(argv=None) -> int:
    try:
        args = parse_args(argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                            format="%(levelname)s %(name)s: %(message)s")
        _check(args)
        args.sink = [] if args.trace else None
        code = COMMANDS[args.command](args)
        if args.trace:
            io.write_rows(args.trace, ["solver", "iteration", "value", "feasibility"], args.sink)
        return code
    except (UsageError, GraphError, FileNotFoundError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (PCALError, DivergenceError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
