"""Denser-graph-frequency frames built on top of a graph Fourier basis.

Every builder returns a :class:`SpectralFrame` whose columns are sorted by
graph frequency; the ``origin`` of each column records how it was made.
"""
from __future__ import annotations

import logging
import math
from typing import Sequence

import numpy as np

from .basis import dcb, dfb, gfb, mag_gfb, path_frequency
from .containers import Origin, SpectralBasis, SpectralFrame, sort_by_frequency
from .graph import Graph, GraphError, magnetic_laplacian
from .manifold_opt import DirectedVariation, SolverConfig, StiefelProblem, pcal_solve, phi_gradient, phi_objective

log = logging.getLogger(__name__)

_ORTHO_TOL = 1e-8


def _check_weight(alpha, name="alpha"):
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"{name} must lie in (0, 1), got {alpha}")


# -- analytic frames --------------------------------------------------------------

def adgff_ring(n: int, alpha: float) -> SpectralFrame:
    """DFB plus the fractional-index exponentials ``exp(j 2 pi (k+alpha) l / n) / sqrt(n)``.

    Inserted vectors get the modulus of ``1 - exp(j 2 pi (k+alpha) / n)`` as
    their ordering frequency, like the DFB columns themselves.
    """
    _check_weight(alpha)
    base = dfb(n)
    ell = np.arange(n)
    k = np.arange(n)
    extra = np.exp(2j * np.pi * np.outer(ell, k + alpha) / n) / np.sqrt(n)
    lam_extra = 1 - np.exp(2j * np.pi * (k + alpha) / n)
    base_k = np.round(np.angle(1 - base.complex_frequencies) * n / (2 * np.pi)).astype(int) % n
    vecs = np.hstack([base.vectors, extra])
    freqs = np.concatenate([base.frequencies, np.abs(lam_extra)])
    origin = [Origin("original", int(kk)) for kk in base_k] + [Origin("analytic", int(kk), alpha) for kk in k]
    cfreqs = np.concatenate([base.complex_frequencies, lam_extra])
    order = np.argsort(freqs, kind="stable")
    return SpectralFrame(vecs[:, order], freqs[order], [origin[i] for i in order], "ADGFF",
                         {"graph": "ring", "alpha": alpha, "complex_frequencies": cfreqs[order]})


def adgff_path(n: int, alpha: float) -> SpectralFrame:
    """DCB plus normalized fractional-index cosines.

    Inserted vectors get ``2 - 2 cos(pi (k+alpha) / n)``, the path-graph
    eigenvalue formula continued to fractional k.
    """
    _check_weight(alpha)
    base = dcb(n)
    ell = np.arange(n)
    k = np.arange(n)
    c = np.where(k == 0, 1 / np.sqrt(2), 1.0)
    extra = c[None, :] * np.sqrt(2 / n) * np.cos(np.pi * np.outer(ell + 0.5, k + alpha) / n)
    extra /= np.linalg.norm(extra, axis=0)
    vecs = np.hstack([base.vectors, extra])
    freqs = np.concatenate([base.frequencies, path_frequency(k + alpha, n)])
    origin = [Origin("original", int(kk)) for kk in k] + [Origin("analytic", int(kk), alpha) for kk in k]
    vecs, freqs, origin = sort_by_frequency(vecs, freqs, origin)
    return SpectralFrame(vecs, freqs, origin, "ADGFF", {"graph": "path", "alpha": alpha})


# -- interpolation ----------------------------------------------------------------

def interpolate_vector(u, v, alpha: float, beta: float) -> np.ndarray:
    """Normalized ``alpha u + beta v`` for an orthonormal pair ``u, v``."""
    u = np.asarray(u)
    v = np.asarray(v)
    if alpha < 0 or beta < 0 or alpha == beta == 0:
        raise ValueError("weights must be nonnegative and not both zero")
    if abs(np.vdot(u, v)) > _ORTHO_TOL:
        raise ValueError(f"parent vectors are not orthogonal (|<u,v>| = {abs(np.vdot(u, v)):.2e})")
    w = alpha * u + beta * v
    return w / np.linalg.norm(w)


def intermediate_frequency(lam_k: float, lam_k1: float, alpha: float, beta: float) -> float:
    """Quadratic-form value of the interpolated vector: ``(a^2 l_k + b^2 l_k1) / (a^2 + b^2)``."""
    den = alpha * alpha + beta * beta
    if den == 0:
        raise ValueError("alpha and beta cannot both be zero")
    return (alpha * alpha * lam_k + beta * beta * lam_k1) / den


def _require_orthonormal(b: SpectralBasis):
    err = b.orthonormality_error()
    if err > _ORTHO_TOL:
        raise ValueError(f"basis is not orthonormal (max |U^H U - I| = {err:.2e})")


def _interpolated_frame(b: SpectralBasis, inserts, family: str) -> SpectralFrame:
    """Merge ``b`` with inserted vectors; ``inserts`` yields ``(k, alpha, beta)``."""
    U, lam = b.vectors, b.frequencies
    cols = [U[:, k] for k in range(b.size)]
    freqs = list(lam)
    origin = [Origin("original", k) for k in range(b.size)]
    for k, a, bb in inserts:
        w = a * U[:, k] + bb * U[:, k + 1]
        cols.append(w / np.linalg.norm(w))
        freqs.append(intermediate_frequency(lam[k], lam[k + 1], a, bb))
        origin.append(Origin("interpolated", k, a, bb))
    vecs = np.column_stack(cols)
    # primary key frequency, ties resolved by parent index then insertion order
    parent = np.array([o.k + (0.5 if o.kind != "original" else 0.0) for o in origin])
    order = np.lexsort((parent, np.asarray(freqs)))
    vecs = vecs[:, order]
    freqs = np.asarray(freqs)[order]
    origin = tuple(origin[i] for i in order)
    return SpectralFrame(vecs, freqs, origin, family, {"basis": b.name})


def lidgff(b: SpectralBasis, alpha: float = 0.5, beta: float = 0.5, family: str = "LiDGFF") -> SpectralFrame:
    """Basis plus one interpolated vector between every pair of neighbours (2N-1 vectors)."""
    _require_orthonormal(b)
    if alpha <= 0 or beta <= 0:
        raise ValueError("alpha and beta must be positive")
    return _interpolated_frame(b, ((k, alpha, beta) for k in range(b.size - 1)), family)


def default_threshold(frequencies) -> float:
    """One third of the mean gap between consecutive sorted frequencies."""
    lam = np.sort(np.asarray(frequencies, dtype=float))
    if lam.size < 2:
        raise ValueError("need at least two frequencies")
    return float(np.sum(np.diff(lam)) / (3 * (lam.size - 1)))


def lrlidgff(b: SpectralBasis, thresholds: Sequence[float] | None = None,
             weight_sets: Sequence[Sequence[tuple[float, float]]] | None = None) -> SpectralFrame:
    """Low-redundancy interpolation frame.

    A gap ``lam[k+1] - lam[k]`` with ``T[l] <= gap < T[l+1]`` receives the
    ``l``-th weight set, which holds ``l`` (alpha, beta) pairs (1-based l).
    Gaps below ``T[0]`` receive nothing.

    Args:
        b: orthonormal basis with ascending frequencies.
        thresholds: strictly increasing, the last may be ``inf``. Defaults to
            ``(default_threshold(freqs), inf)``.
        weight_sets: ``len(thresholds) - 1`` lists of pairs. Defaults to
            ``[[(0.5, 0.5)], [(1/3, 2/3), (2/3, 1/3)], ...]``.
    """
    _require_orthonormal(b)
    if thresholds is None:
        thresholds = (default_threshold(b.frequencies), math.inf)
    T = [float(t) for t in thresholds]
    if len(T) < 2:
        raise ValueError("need at least two thresholds")
    if any(t < 0 for t in T) or any(np.diff(T) <= 0):
        raise ValueError(f"thresholds must be nonnegative and strictly increasing, got {T}")
    if T[0] == 0.0:
        # a zero threshold would put copies of the parents into degenerate eigenspaces
        T[0] = np.finfo(float).tiny
    if weight_sets is None:
        weight_sets = [[((l + 1 - m) / (l + 1), m / (l + 1)) for m in range(1, l + 1)]
                       for l in range(1, len(T))]
    if len(weight_sets) != len(T) - 1:
        raise ValueError("need one weight set per threshold interval")
    for l, ws in enumerate(weight_sets, start=1):
        if len(ws) != l:
            raise ValueError(f"weight set {l} must hold {l} pairs, got {len(ws)}")

    gaps = np.diff(b.frequencies)
    inserts = []
    for k, gap in enumerate(gaps):
        for l in range(1, len(T)):
            if T[l - 1] <= gap < T[l]:
                inserts.extend((k, float(a), float(bb)) for a, bb in weight_sets[l - 1])
    frame = _interpolated_frame(b, inserts, "lrLiDGFF")
    frame.meta["thresholds"] = tuple(T)
    return frame


def mag_dgff(g: Graph, q: float, alpha: float = 0.5, beta: float = 0.5) -> SpectralFrame:
    """Interpolation frame of the magnetic-Laplacian eigenbasis (complex for directed g)."""
    return lidgff(mag_gfb(g, q), alpha, beta, family="MagDGFF")


def tv_ordering_violations(g: Graph, frame: SpectralFrame) -> int:
    """Count inserted vectors whose edge TV falls outside their parents' TV range."""
    from .graph import tv_complex

    tv = np.array([tv_complex(g, frame.vectors[:, m]) for m in range(frame.size)])
    by_origin = {(o.kind, o.k): m for m, o in enumerate(frame.origin) if o.kind == "original"}
    bad = 0
    for m, o in enumerate(frame.origin):
        if o.kind != "interpolated":
            continue
        lo, hi = sorted((tv[by_origin[("original", o.k)]], tv[by_origin[("original", o.k + 1)]]))
        if not lo - 1e-9 <= tv[m] <= hi + 1e-9:
            bad += 1
    return bad


# -- optimization-based frame --------------------------------------------------------

def sfdgff_blocks(n: int) -> list[tuple[int, int]]:
    """Column ranges ``[start, stop)`` of the two overlapping half-blocks."""
    c = math.ceil((n + 1) / 2)
    return [(0, c), (c - 1, n)]


def sfdgff(g: Graph, U_sf: SpectralBasis, alpha: float = 0.5, cfg: SolverConfig | None = None) -> SpectralFrame:
    """Spread-frequency frame: SfGFB plus DV-targeted intermediate vectors.

    The basis is split into two half-blocks sharing the middle column; in
    each block PCAL finds orthonormal vectors whose DVs match the weighted
    targets of neighbouring basis vectors, starting from the plain
    interpolants. Inserted vectors are ranked by their own DV.
    """
    _check_weight(alpha)
    beta = 1.0 - alpha
    cfg = cfg or SolverConfig()
    op = DirectedVariation.of(g)
    U = np.asarray(U_sf.vectors, dtype=float)
    n = U.shape[1]
    if n < 3:
        raise GraphError("sfdgff needs at least 3 basis vectors")
    cols, origin = [], []
    report = {"feasibility": [], "converged": [], "iterations": []}
    for start, stop in sfdgff_blocks(n):
        block = U[:, start:stop]
        K = block.shape[1] - 1
        X0 = np.column_stack([interpolate_vector(block[:, k], block[:, k + 1], alpha, beta) for k in range(K)])
        prob = StiefelProblem(lambda X, B=block: phi_objective(op, B, X, alpha, beta),
                              lambda X, B=block: phi_gradient(op, B, X, alpha, beta),
                              U.shape[0], K)
        res = pcal_solve(prob, cfg, X0)
        if not res.converged:
            log.warning("sfdgff: block [%d, %d) hit the iteration cap; feasibility %.2e", start, stop, res.feasibility)
        report["feasibility"].append(res.feasibility)
        report["converged"].append(res.converged)
        report["iterations"].append(res.iterations)
        for k in range(K):
            cols.append(res.X[:, k] / np.linalg.norm(res.X[:, k]))
            origin.append(Origin("optimized", start + k, alpha, beta))
    X = np.column_stack(cols)
    vecs = np.hstack([U, X])
    freqs = np.concatenate([U_sf.frequencies, op.value(X)])
    origin = [Origin("original", k) for k in range(n)] + origin
    vecs, freqs, origin = sort_by_frequency(vecs, freqs, origin)
    report["residual"] = sfdgff_residual(op, U, X, alpha, beta)
    return SpectralFrame(vecs, freqs, origin, "SfDGFF", report)


def sfdgff_residual(graph, U, X, alpha: float = 0.5, beta: float = 0.5) -> float:
    """``sqrt(sum_k (DV(x_k) - (alpha DV(u_k) + beta DV(u_{k+1})))^2)`` over consecutive pairs."""
    op = graph if isinstance(graph, DirectedVariation) else DirectedVariation(
        graph.adjacency() if isinstance(graph, Graph) else graph)
    du = op.value(np.asarray(U, dtype=float))
    dx = op.value(np.asarray(X, dtype=float))
    return float(np.sqrt(np.sum((dx - (alpha * du[:-1] + beta * du[1:])) ** 2)))


def inserted_vectors(frame: SpectralFrame) -> np.ndarray:
    """Columns that are not original basis vectors, in parent order."""
    idx = [m for m, o in enumerate(frame.origin) if o.kind != "original"]
    idx.sort(key=lambda m: (frame.origin[m].k, m))
    return frame.vectors[:, idx]


def build_frame(family: str, g: Graph, *, alpha: float = 0.5, beta: float = 0.5, q: float = 0.01,
                threshold: float | None = None, cfg: SolverConfig | None = None,
                normalized: bool = False):
    """Construct a basis or frame by name, for the CLI and experiments.

    Families: ``GFB``, ``RGFF``, ``LiDGFF``, ``lrLiDGFF``, ``MagGFB``,
    ``MagDGFF``, ``SfGFB``, ``SfDGFF``, ``ADGFF-ring``, ``ADGFF-path``.
    """
    from .basis import rgff, sf_gfb
    from .graph import laplacian, normalized_laplacian

    key = family.lower()
    if key in ("adgff-ring", "adgff-path"):
        return adgff_ring(g.n, alpha) if key == "adgff-ring" else adgff_path(g.n, alpha)
    if key in ("gfb", "rgff", "lidgff", "lrlidgff"):
        if g.directed:
            raise GraphError(f"{family} needs an undirected graph")
        L = normalized_laplacian(g) if normalized else laplacian(g)
        if key == "rgff":
            return rgff(L)
        b = gfb(L)
        if key == "gfb":
            return b
        if key == "lidgff":
            return lidgff(b, alpha, beta)
        T = default_threshold(b.frequencies) if threshold is None else threshold
        return lrlidgff(b, (T, math.inf), [[(alpha, beta)]])
    if key == "maggfb":
        return gfb(magnetic_laplacian(g, q))
    if key == "magdgff":
        return mag_dgff(g, q, alpha, beta)
    if key in ("sfgfb", "sfdgff"):
        b = sf_gfb(g, SolverConfig(max_iter=5_000, seed=cfg.seed, sink=cfg.sink) if cfg else None)
        return b if key == "sfgfb" else sfdgff(g, b, alpha, cfg)
    raise ValueError(f"unknown frame family {family!r}")


FAMILIES = ("GFB", "RGFF", "LiDGFF", "lrLiDGFF", "MagGFB", "MagDGFF", "SfGFB", "SfDGFF", "ADGFF-ring", "ADGFF-path")
