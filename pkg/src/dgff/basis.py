"""Graph Fourier bases: Laplacian eigenbases, closed-form DFT/DCT bases,
spread-frequency bases, and the redundant RGFF baseline frame."""
from __future__ import annotations

import logging

import numpy as np

from .containers import Origin, SpectralBasis, SpectralFrame, sort_by_frequency
from .graph import Graph, GraphError, HermitianOperator, adjacency, degree_laplacian, symmetrize
from .manifold_opt import DirectedVariation, SolverConfig, StiefelProblem, pcal_solve, polar_orthonormalize

log = logging.getLogger(__name__)

# eigenvalues closer than this (relative to the spectral radius) form one eigenspace
_CLUSTER_TOL = 1e-9


def canonical_phase(U: np.ndarray) -> np.ndarray:
    """Rotate each column so its largest-magnitude entry is real and positive.

    Ties between entries of equal magnitude (within 1e-10) go to the lowest
    index, which keeps the rule stable under round-off.
    """
    U = U.copy()
    mag = np.abs(U)
    for k in range(U.shape[1]):
        col = mag[:, k]
        idx = int(np.flatnonzero(col >= col.max() - 1e-10)[0])
        ph = U[idx, k] / mag[idx, k]
        U[:, k] = U[:, k] * np.conj(ph)
        if np.isrealobj(U):
            continue
        U[idx, k] = U[idx, k].real
    return U


def _eig_sorted(M: np.ndarray):
    if not np.all(np.isfinite(M)):
        raise np.linalg.LinAlgError("operator has non-finite entries")
    if np.iscomplexobj(M) and np.abs(M.imag).max(initial=0.0) == 0:
        M = M.real
    lam, U = np.linalg.eigh(M)
    scale = max(1.0, float(np.abs(lam).max(initial=0.0)))
    start = 0
    for k in range(1, lam.size + 1):
        if k == lam.size or lam[k] - lam[k - 1] > _CLUSTER_TOL * scale:
            if k - start > 1:
                # ordered Gram-Schmidt on the eigenspace block
                U[:, start:k], _ = np.linalg.qr(U[:, start:k])
            start = k
    return lam, canonical_phase(U)


def gfb(L: HermitianOperator) -> SpectralBasis:
    """Eigenbasis of a Laplacian-type Hermitian operator, ascending frequencies."""
    lam, U = _eig_sorted(L.matrix)
    measure = "tv" if L.kind == "magnetic-laplacian" else "gtv"
    name = "MagGFB" if L.kind == "magnetic-laplacian" else "GFB"
    return SpectralBasis(U, np.maximum(lam, 0.0) if lam.min() > -1e-10 else lam, measure, name=name)


def mag_gfb(g: Graph, q: float) -> SpectralBasis:
    """Unitary eigenbasis of the magnetic Laplacian."""
    from .graph import magnetic_laplacian

    return gfb(magnetic_laplacian(g, q))


def dfb(n: int) -> SpectralBasis:
    """Discrete Fourier basis of the directed ring.

    Column k (before sorting) is ``exp(j 2 pi k l / n) / sqrt(n)``, the
    eigenvector of ``I - W`` for the ring ``l -> l+1`` with eigenvalue
    ``1 - exp(j 2 pi k / n)``. Columns are ordered by the modulus of that
    eigenvalue; the complex values are kept in ``complex_frequencies``.
    """
    if n < 2:
        raise GraphError("dfb needs n >= 2")
    ell = np.arange(n)
    k = np.arange(n)
    U = np.exp(2j * np.pi * np.outer(ell, k) / n) / np.sqrt(n)
    lam = 1 - np.exp(2j * np.pi * k / n)
    order = np.argsort(np.abs(lam), kind="stable")
    return SpectralBasis(U[:, order], np.abs(lam)[order], "analytic", lam[order], name="DFB")


def dcb(n: int) -> SpectralBasis:
    """Type-II DCT basis, the eigenbasis of the path-graph Laplacian.

    Frequencies are the path Laplacian eigenvalues ``2 - 2 cos(pi k / n)``.
    """
    if n < 2:
        raise GraphError("dcb needs n >= 2")
    ell = np.arange(n)
    k = np.arange(n)
    c = np.where(k == 0, 1 / np.sqrt(2), 1.0)
    U = c[None, :] * np.sqrt(2 / n) * np.cos(np.pi * np.outer(ell + 0.5, k) / n)
    return SpectralBasis(U, path_frequency(k, n), "gtv", name="DCB")


def path_frequency(k, n: int):
    """Path-graph Laplacian eigenvalue as a function of a (possibly fractional) index."""
    return 2.0 - 2.0 * np.cos(np.pi * np.asarray(k, dtype=float) / n)


def ring_frequency(k, n: int):
    """Directed-ring Laplacian eigenvalue ``1 - exp(j 2 pi k / n)``."""
    return 1 - np.exp(2j * np.pi * np.asarray(k, dtype=float) / n)


def u_max(g: Graph, restarts: int = 16, seed: int = 0, max_iter: int = 2000) -> np.ndarray:
    """Unit vector (approximately) maximizing DV over the sphere.

    Projected gradient ascent ``x <- normalize(x + t grad DV(x))`` with a
    backtracking step, started from ``restarts`` random points and from both
    signs of the top eigenvector of the symmetrized Laplacian.
    """
    op = DirectedVariation.of(g)
    rng = np.random.default_rng(seed)
    _, V = np.linalg.eigh(degree_laplacian(symmetrize(adjacency(g))))
    starts = [V[:, -1], -V[:, -1]] + [rng.standard_normal(g.n) for _ in range(restarts)]
    best, best_val = None, -np.inf
    for x in starts:
        x = x / np.linalg.norm(x)
        val = op.value(x)
        for _ in range(max_iter):
            grad = op.gradient(x)
            t = 1e3
            improved = False
            while t > 1e-8:
                cand = x + t * grad
                cand /= np.linalg.norm(cand)
                cval = op.value(cand)
                if cval > val:
                    improved = True
                    break
                t *= 0.5
            if not improved or cval - val <= 1e-15 * max(1.0, val):
                if improved:
                    x, val = cand, cval
                break
            x, val = cand, cval
        if val > best_val + 1e-14:
            best, best_val = x, val
    return best


def sf_gfb(g: Graph, cfg: SolverConfig | None = None, x_max: np.ndarray | None = None,
           restarts: int = 3) -> SpectralBasis:
    """Spread-frequency basis: orthonormal basis minimizing the DV dispersion.

    The first column is the constant vector and the last the maximal-DV
    vector; the ``n - 2`` middle columns are optimized with PCAL in the
    orthogonal complement of those two, starting from the symmetrized-graph
    eigenvectors and from ``restarts`` random orthonormal sets; the best
    local minimum wins. Columns are returned sorted by DV.
    """
    cfg = cfg or SolverConfig(max_iter=5_000)
    n = g.n
    if n < 3:
        raise GraphError("sf_gfb needs n >= 3")
    op = DirectedVariation.of(g)
    u1 = np.full(n, 1 / np.sqrt(n))
    un = u_max(g) if x_max is None else np.asarray(x_max, dtype=float)
    un = un - (un @ u1) * u1
    un /= np.linalg.norm(un)
    d_first, d_last = op.value(u1), op.value(un)

    def objective(X):
        d = np.concatenate([[d_first], op.value(X), [d_last]])
        return float(np.sum(np.diff(d) ** 2))

    def gradient(X):
        dx, gx = op.value_and_gradient(X)
        d = np.concatenate([[d_first], dx, [d_last]])
        diff = np.diff(d)
        coef = 2 * (diff[:-1] - diff[1:])
        return gx * coef[None, :]

    C = np.column_stack([u1, un])
    P = np.eye(n) - C @ C.T
    _, V = np.linalg.eigh(degree_laplacian(symmetrize(adjacency(g))))
    rng = np.random.default_rng(cfg.seed)
    starts = [V[:, 1:-1]] + [rng.standard_normal((n, n - 2)) for _ in range(restarts)]
    prob = StiefelProblem(objective, gradient, n, n - 2, fixed=C, require_half=False)
    best = None
    for S in starts:
        X0 = polar_orthonormalize(P @ S)
        # the dispersion depends on column order, so start from DV order
        X0 = X0[:, np.argsort(op.value(X0), kind="stable")]
        res = pcal_solve(prob, cfg, X0)
        if not res.converged:
            log.info("sf_gfb: PCAL stopped at the iteration cap, feasibility %.2e", res.feasibility)
        if best is None or res.objective < best.objective - 1e-12:
            best = res
    X = polar_orthonormalize(P @ best.X)
    U = np.column_stack([u1, X, un])
    d = op.value(U)
    order = np.argsort(d, kind="stable")
    return SpectralBasis(U[:, order], d[order], "dv", name="SfGFB")


def rgff(L: HermitianOperator) -> SpectralFrame:
    """Redundant graph Fourier frame: eigenvectors of ``L`` and of ``L - 2 rho I``.

    ``rho`` is a quarter of the smallest positive eigen-gap; the extra
    vectors get frequencies ``lambda_k + 2 rho``.
    """
    if L.kind == "magnetic-laplacian" and np.abs(L.matrix.imag).max(initial=0.0) > 0:
        raise GraphError("rgff is defined for undirected graphs")
    lam, U = _eig_sorted(L.matrix)
    gaps = np.diff(lam)
    pos = gaps[gaps > _CLUSTER_TOL * max(1.0, float(np.abs(lam).max()))]
    if pos.size == 0:
        raise GraphError("rgff needs at least one positive eigen-gap")
    rho = 0.25 * float(pos.min())
    _, V = _eig_sorted(L.matrix - 2 * rho * np.eye(L.n))
    lam = np.maximum(lam, 0.0)
    xi = lam + 2 * rho
    n = L.n
    vecs = np.empty((n, 2 * n), dtype=U.dtype)
    vecs[:, 0::2] = U
    vecs[:, 1::2] = V
    freqs = np.empty(2 * n)
    freqs[0::2] = lam
    freqs[1::2] = xi
    origin = []
    for k in range(n):
        origin += [Origin("original", k), Origin("shifted", k)]
    vecs, freqs, origin = sort_by_frequency(vecs, freqs, origin)
    return SpectralFrame(vecs, freqs, origin, "RGFF", {"rho": rho})
