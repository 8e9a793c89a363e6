"""Graphs, Laplacians and variation measures.

Node indices are 0-based in memory. The file formats in :mod:`dgff.io` use
1-based indices.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class GraphError(ValueError):
    """Raised for malformed graphs or operations the graph does not support."""


@dataclass(frozen=True)
class Graph:
    """Weighted graph stored as an edge list.

    Attributes:
        n: number of nodes.
        edges: tuple of ``(src, dst, weight)`` with 0-based indices. For an
            undirected graph every edge is listed once and stands for both
            directions.
        directed: whether ``edges`` are ordered pairs.
    """

    n: int
    edges: tuple[tuple[int, int, float], ...]
    directed: bool = False

    def __post_init__(self):
        if int(self.n) < 1:
            raise GraphError(f"node count must be positive, got {self.n}")
        seen = set()
        clean = []
        for src, dst, w in self.edges:
            src, dst, w = int(src), int(dst), float(w)
            if not (0 <= src < self.n and 0 <= dst < self.n):
                raise GraphError(f"edge ({src}, {dst}) outside [0, {self.n})")
            if src == dst:
                raise GraphError(f"self-loop at node {src}")
            if not np.isfinite(w) or w < 0:
                raise GraphError(f"edge ({src}, {dst}) has invalid weight {w}")
            key = (src, dst) if self.directed else (min(src, dst), max(src, dst))
            if key in seen:
                raise GraphError(f"duplicate edge {key}")
            seen.add(key)
            clean.append((src, dst, w))
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "edges", tuple(clean))

    @classmethod
    def from_adjacency(cls, W, directed: bool | None = None) -> "Graph":
        """Build a graph from a dense nonnegative adjacency matrix."""
        W = np.asarray(W, dtype=float)
        if W.ndim != 2 or W.shape[0] != W.shape[1]:
            raise GraphError("adjacency must be square")
        if np.any(np.diag(W) != 0):
            raise GraphError("adjacency has nonzero diagonal")
        if directed is None:
            directed = not np.array_equal(W, W.T)
        if not directed:
            if not np.allclose(W, W.T, atol=1e-12):
                raise GraphError("undirected graph needs a symmetric adjacency")
            rows, cols = np.nonzero(np.triu(W, 1))
        else:
            rows, cols = np.nonzero(W)
        edges = tuple((int(i), int(j), float(W[i, j])) for i, j in zip(rows, cols))
        return cls(W.shape[0], edges, bool(directed))

    def adjacency(self) -> np.ndarray:
        return adjacency(self)

    def symmetrized(self) -> "Graph":
        """Undirected graph with adjacency ``Sym(W)``."""
        return Graph.from_adjacency(symmetrize(adjacency(self)), directed=False)


@dataclass(frozen=True)
class HermitianOperator:
    """Dense Hermitian matrix tagged with the construction that produced it."""

    matrix: np.ndarray
    kind: str
    q: float | None = None

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    def __post_init__(self):
        M = self.matrix
        if M.ndim != 2 or M.shape[0] != M.shape[1]:
            raise GraphError("operator must be square")
        if np.max(np.abs(M - M.conj().T), initial=0.0) > 1e-12 * max(1.0, np.abs(M).max(initial=0.0)):
            raise GraphError("operator is not Hermitian")


def symmetrize(X: np.ndarray) -> np.ndarray:
    return 0.5 * (X + X.T)


def adjacency(g: Graph) -> np.ndarray:
    """Dense adjacency matrix, ``W[i, j]`` is the weight of edge ``i -> j``."""
    W = np.zeros((g.n, g.n))
    for src, dst, w in g.edges:
        W[src, dst] = w
        if not g.directed:
            W[dst, src] = w
    return W


def degree_laplacian(W: np.ndarray) -> np.ndarray:
    """``D - W`` with out-degrees (row sums). Not symmetric for directed W."""
    return np.diag(W.sum(axis=1)) - W


def laplacian(g: Graph) -> HermitianOperator:
    """Combinatorial Laplacian ``L = D - W`` of an undirected graph."""
    if g.directed:
        raise GraphError("laplacian() needs an undirected graph; use magnetic_laplacian() for directed graphs")
    return HermitianOperator(degree_laplacian(adjacency(g)), "laplacian")


def normalized_laplacian(g: Graph) -> HermitianOperator:
    """Symmetric normalized Laplacian ``D^{-1/2} L D^{-1/2}``."""
    if g.directed:
        raise GraphError("normalized_laplacian() needs an undirected graph")
    W = adjacency(g)
    d = W.sum(axis=1)
    if np.any(d <= 0):
        raise GraphError(f"isolated nodes {np.flatnonzero(d <= 0).tolist()} make D^(-1/2) undefined")
    s = 1.0 / np.sqrt(d)
    L = s[:, None] * degree_laplacian(W) * s[None, :]
    return HermitianOperator(symmetrize(L), "normalized-laplacian")


def magnetic_laplacian(g: Graph, q: float) -> HermitianOperator:
    """Hermitian magnetic Laplacian ``D_s - Gamma_q * Sym(W)``.

    The phase of entry ``(i, j)`` is ``2 pi q (w_ij - w_ji)``; for an
    undirected graph every phase vanishes and the ordinary Laplacian comes
    back (as a complex array).
    """
    if not 0.0 <= q < 1.0:
        raise GraphError(f"rotation parameter q must lie in [0, 1), got {q}")
    W = adjacency(g)
    Ws = symmetrize(W)
    gamma = np.exp(2j * np.pi * q * (W - W.T))
    L = np.diag(Ws.sum(axis=1)).astype(complex) - gamma * Ws
    return HermitianOperator(L, "magnetic-laplacian", q=float(q))


def _as_signal(x, n: int, dtype=None) -> np.ndarray:
    x = np.asarray(x, dtype=dtype)
    if x.shape != (n,):
        raise GraphError(f"signal of shape {x.shape} does not match {n} nodes")
    return x


def gtv(L: HermitianOperator, x) -> float:
    """Quadratic-form variation ``x^H L x``."""
    x = _as_signal(x, L.n)
    return float(np.real(np.vdot(x, L.matrix @ x)))


def dv(g: Graph, x) -> float:
    """Directed variation ``sum_ij w_ij [x_i - x_j]_+^2``.

    For an undirected graph each edge counts in both directions, so the
    value equals ``x^T L x``.
    """
    x = _as_signal(x, g.n, float)
    return dv_from_adjacency(adjacency(g), x)


def dv_from_adjacency(W: np.ndarray, x: np.ndarray) -> float:
    diff = np.maximum(x[:, None] - x[None, :], 0.0)
    return float(np.sum(W * diff * diff))


def tv_complex(g: Graph, x) -> float:
    """``sum over edges |x_i - x_j|^2``; each edge is counted once."""
    x = _as_signal(x, g.n)
    if not g.edges:
        return 0.0
    src = np.fromiter((e[0] for e in g.edges), int, len(g.edges))
    dst = np.fromiter((e[1] for e in g.edges), int, len(g.edges))
    return float(np.sum(np.abs(x[src] - x[dst]) ** 2))


# -- generators ---------------------------------------------------------------

def make_ring(n: int, directed: bool = True) -> Graph:
    """Cycle ``0 -> 1 -> ... -> n-1 -> 0`` with unit weights."""
    if n < 2:
        raise GraphError("ring needs n >= 2")
    if n == 2 and not directed:
        return Graph(2, ((0, 1, 1.0),), False)
    return Graph(n, tuple((i, (i + 1) % n, 1.0) for i in range(n)), directed)


def make_path(n: int) -> Graph:
    """Undirected chain with unit weights."""
    if n < 2:
        raise GraphError("path needs n >= 2")
    return Graph(n, tuple((i, i + 1, 1.0) for i in range(n - 1)), False)


def make_sbm(n: int, clusters: int, p_in: float, p_out: float, seed=None) -> tuple[Graph, np.ndarray]:
    """Undirected stochastic block model with unit weights.

    Nodes are split into ``clusters`` contiguous, near-equal blocks.

    Returns:
        The graph and the block label of every node.
    """
    if n < 2:
        raise GraphError("sbm needs n >= 2")
    if not (0 <= p_in <= 1 and 0 <= p_out <= 1):
        raise GraphError("edge probabilities must lie in [0, 1]")
    if not 1 <= clusters <= n:
        raise GraphError("cluster count must lie in [1, n]")
    rng = np.random.default_rng(seed)
    labels = np.repeat(np.arange(clusters), np.diff(np.linspace(0, n, clusters + 1).round().astype(int)))
    iu, ju = np.triu_indices(n, 1)
    prob = np.where(labels[iu] == labels[ju], p_in, p_out)
    keep = rng.random(iu.size) < prob
    edges = tuple((int(i), int(j), 1.0) for i, j in zip(iu[keep], ju[keep]))
    return Graph(n, edges, False), labels


def make_random(n: int, p: float, seed=None, directed: bool = False, connected: bool = True,
                weighted: bool = False) -> Graph:
    """Erdos-Renyi graph; with ``connected`` a random spanning path is added.

    For directed graphs each unordered pair gets at most one orientation, so
    the result has no 2-cycles.
    """
    if n < 2:
        raise GraphError("random graph needs n >= 2")
    rng = np.random.default_rng(seed)
    W = np.zeros((n, n))
    iu, ju = np.triu_indices(n, 1)
    keep = rng.random(iu.size) < p
    if connected:
        order = rng.permutation(n)
        chain = np.zeros((n, n), bool)
        chain[order[:-1], order[1:]] = True
        chain = chain | chain.T
        keep |= chain[iu, ju]
    weights = rng.uniform(0.5, 1.5, iu.size) if weighted else np.ones(iu.size)
    flip = rng.random(iu.size) < 0.5
    for i, j, k, w, f in zip(iu, ju, keep, weights, flip):
        if not k:
            continue
        if directed and f:
            W[j, i] = w
        else:
            W[i, j] = w
    if not directed:
        W = W + W.T
    return Graph.from_adjacency(W, directed=directed)


def make_swiss_roll(n: int, seed=None, k: int = 8, sigma: float | None = None) -> Graph:
    """k-nearest-neighbour graph on points sampled from a 3-D swiss roll.

    Edge weights are Gaussian in the Euclidean distance, with bandwidth the
    mean neighbour distance unless ``sigma`` is given.
    """
    from scipy.spatial import cKDTree

    if n < 2:
        raise GraphError("swiss roll needs n >= 2")
    rng = np.random.default_rng(seed)
    t = 1.5 * np.pi * (1 + 2 * rng.random(n))
    h = 21 * rng.random(n)
    pts = np.column_stack([t * np.cos(t), h, t * np.sin(t)])
    k = min(k, n - 1)
    dist, idx = cKDTree(pts).query(pts, k + 1)
    dist, idx = dist[:, 1:], idx[:, 1:]
    if sigma is None:
        sigma = float(np.mean(dist))
    W = np.zeros((n, n))
    rows = np.repeat(np.arange(n), k)
    W[rows, idx.ravel()] = np.exp(-(dist.ravel() / sigma) ** 2)
    W = np.maximum(W, W.T)
    return Graph.from_adjacency(W, directed=False)


def is_connected(g: Graph) -> bool:
    from scipy.sparse.csgraph import connected_components

    count, _ = connected_components(symmetrize(adjacency(g)) > 0, directed=False)
    return count == 1


