"""CSV/JSON file formats for graphs, signals, bases and frames.

Node indices are 1-based on disk. Floats are written with ``repr`` so a
write/read round trip is bit-exact.
"""
from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .containers import Origin, SpectralBasis, SpectralFrame
from .graph import Graph, GraphError


def _fmt(x) -> str:
    return repr(float(x))


def _fmt_complex(z) -> str:
    z = complex(z)
    if z.imag == 0:
        return _fmt(z.real)
    return f"{_fmt(z.real)}{'+' if np.copysign(1, z.imag) > 0 else '-'}{_fmt(abs(z.imag))}j"


def _parse_complex(text: str):
    text = text.strip()
    if text.endswith("j"):
        return complex(text.replace(" ", ""))
    return float(text)


def meta_path(path) -> Path:
    path = Path(path)
    return path.with_name(path.stem + ".meta.json")


# -- graphs -----------------------------------------------------------------------

def write_graph(g: Graph, path) -> None:
    """Edge list ``src,dst,weight`` plus ``<stem>.meta.json`` with ``n`` and ``directed``."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["src", "dst", "weight"])
        for src, dst, wt in g.edges:
            w.writerow([src + 1, dst + 1, _fmt(wt)])
    meta_path(path).write_text(json.dumps({"n": g.n, "directed": g.directed}, sort_keys=True) + "\n")


def read_graph(path, n: int | None = None, directed: bool | None = None) -> Graph:
    """Read an edge-list CSV; the sidecar supplies ``n``/``directed`` unless given."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"graph file not found: {path}")
    meta = {}
    if meta_path(path).exists():
        meta = json.loads(meta_path(path).read_text())
    edges = []
    with path.open(newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or not {"src", "dst", "weight"} <= set(reader.fieldnames):
            raise GraphError(f"{path}: expected header src,dst,weight")
        for line, row in enumerate(reader, start=2):
            try:
                src, dst, wt = int(row["src"]), int(row["dst"]), float(row["weight"])
            except (TypeError, ValueError) as exc:
                raise GraphError(f"{path}:{line}: malformed row {row}") from exc
            if src < 1 or dst < 1:
                raise GraphError(f"{path}:{line}: node indices are 1-based")
            edges.append((src - 1, dst - 1, wt))
    if n is None:
        n = meta.get("n", max((max(e[0], e[1]) + 1 for e in edges), default=0))
    if directed is None:
        directed = bool(meta.get("directed", False))
    return Graph(int(n), tuple(edges), directed)


# -- signals -----------------------------------------------------------------------

def write_signal(x, path) -> None:
    x = np.asarray(x)
    cplx = np.iscomplexobj(x)
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["node", "value"])
        for i, v in enumerate(x, start=1):
            w.writerow([i, _fmt_complex(v) if cplx else _fmt(v)])


def read_signal(path, n: int | None = None) -> np.ndarray:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"signal file not found: {path}")
    vals = {}
    with path.open(newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or not {"node", "value"} <= set(reader.fieldnames):
            raise ValueError(f"{path}: expected header node,value")
        for row in reader:
            vals[int(row["node"]) - 1] = _parse_complex(row["value"])
    size = n if n is not None else (max(vals) + 1 if vals else 0)
    if sorted(vals) != list(range(size)):
        raise ValueError(f"{path}: signal must list nodes 1..{size} exactly once")
    out = np.array([vals[i] for i in range(size)])
    return out if np.iscomplexobj(out) else out.astype(float)


# -- bases and frames ----------------------------------------------------------------

def _write_matrix(V: np.ndarray, path: Path) -> None:
    cplx = np.iscomplexobj(V)
    header = ["node"]
    for m in range(V.shape[1]):
        header += [f"v{m}_re", f"v{m}_im"] if cplx else [f"v{m}"]
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for i in range(V.shape[0]):
            row = [i + 1]
            for z in V[i]:
                row += [_fmt(z.real), _fmt(z.imag)] if cplx else [_fmt(z)]
            w.writerow(row)


def _read_matrix(path: Path) -> np.ndarray:
    with path.open(newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0][0] != "node":
        raise ValueError(f"{path}: expected a vector matrix with a node column")
    data = np.array([[float(v) for v in r[1:]] for r in rows[1:]])
    if len(rows[0]) > 1 and rows[0][1].endswith("_re"):
        return data[:, 0::2] + 1j * data[:, 1::2]
    return data.reshape(len(rows) - 1, len(rows[0]) - 1)


def frequency_path(path) -> Path:
    path = Path(path)
    return path.with_name(path.stem + ".freq.csv")


def write_frame(F, path) -> Path:
    """Write ``<path>`` (vectors, one row per node) and ``<stem>.freq.csv``.

    Bases are written with origin ``original:k`` and family set to the basis
    name. Returns the path of the frequency file.
    """
    path = Path(path)
    _write_matrix(F.vectors, path)
    if isinstance(F, SpectralBasis):
        origin = [Origin("original", k) for k in range(F.size)]
        family, measure = F.name, F.variation_measure
    else:
        origin, family, measure = F.origin, F.family, ""
    fpath = frequency_path(path)
    with fpath.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["index", "frequency", "origin", "family", "measure"])
        for m, (lam, o) in enumerate(zip(F.frequencies, origin)):
            w.writerow([m, _fmt(lam), str(o), family, measure])
    return fpath


def read_frame(path):
    """Inverse of :func:`write_frame`; returns a basis if every origin is ``original``."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"frame file not found: {path}")
    V = _read_matrix(path)
    fpath = frequency_path(path)
    if not fpath.exists():
        raise FileNotFoundError(f"frequency file not found: {fpath}")
    with fpath.open(newline="") as fh:
        rows = list(csv.DictReader(fh))
    if len(rows) != V.shape[1]:
        raise ValueError(f"{fpath}: {len(rows)} frequencies for {V.shape[1]} vectors")
    freqs = np.array([float(r["frequency"]) for r in rows])
    origin = [Origin.parse(r["origin"]) for r in rows]
    family = rows[0]["family"] if rows else "GFB"
    measure = rows[0].get("measure", "") if rows else ""
    if measure:
        return SpectralBasis(V, freqs, measure, name=family)
    return SpectralFrame(V, freqs, origin, family)


def write_rows(path, header, rows) -> None:
    """Plain CSV writer with ``repr`` floats and ``\\n`` line endings."""
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) if isinstance(v, (float, np.floating)) else v for v in row])
