"""Orthogonality-constrained minimization with PCAL.

PCAL (parallelizable column-wise augmented Lagrangian) works on

    L_mu(X, Lam) = f(X) - 1/2 <Lam, X^T X - I> + mu/4 ||X^T X - I||_F^2

and alternates an explicit multiplier update with independent per-column
proximal steps on the unit sphere. Everything here is real-valued.
"""
from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
import scipy.sparse as sp

from .graph import Graph, GraphError, adjacency

log = logging.getLogger(__name__)


class PCALError(ArithmeticError):
    """Raised when the objective or its gradient stops being finite."""


# -- directed variation ---------------------------------------------------------

class DirectedVariation:
    """Vectorized DV values and gradients for one graph.

    Works column-wise on ``n x K`` arrays through the signed incidence
    matrix of the nonzero entries of ``W``.
    """

    def __init__(self, W):
        W = np.asarray(W, dtype=float)
        src, dst = np.nonzero(W)
        self.n = W.shape[0]
        self.weights = W[src, dst]
        m = src.size
        rows = np.concatenate([np.arange(m), np.arange(m)])
        cols = np.concatenate([src, dst])
        vals = np.concatenate([np.ones(m), -np.ones(m)])
        self.incidence = sp.csr_matrix((vals, (rows, cols)), shape=(m, self.n))
        self.incidence_t = self.incidence.T.tocsr()

    @classmethod
    def of(cls, g: Graph) -> "DirectedVariation":
        return cls(adjacency(g))

    def _check(self, X):
        X = np.asarray(X, dtype=float)
        if X.shape[0] != self.n:
            raise GraphError(f"signal length {X.shape[0]} does not match {self.n} nodes")
        return X

    def value(self, X) -> np.ndarray | float:
        """DV of a vector, or of every column of a matrix."""
        X = self._check(X)
        P = np.maximum(self.incidence @ X, 0.0)
        w = self.weights if X.ndim == 1 else self.weights[:, None]
        return (w * P * P).sum(axis=0)

    def gradient(self, X) -> np.ndarray:
        """Gradient of DV, column by column."""
        X = self._check(X)
        P = np.maximum(self.incidence @ X, 0.0)
        w = self.weights if X.ndim == 1 else self.weights[:, None]
        return 2.0 * (self.incidence_t @ (w * P))

    def value_and_gradient(self, X):
        X = self._check(X)
        P = np.maximum(self.incidence @ X, 0.0)
        w = self.weights if X.ndim == 1 else self.weights[:, None]
        wP = w * P
        return (wP * P).sum(axis=0), 2.0 * (self.incidence_t @ wP)


def dv_gradient(g: Graph, x) -> np.ndarray:
    """Gradient of the directed variation at ``x``.

    Entry i is ``2 (sum_j w_ij [x_i - x_j]_+ - sum_j w_ji [x_j - x_i]_+)``.
    """
    x = np.asarray(x, dtype=float)
    if x.shape != (g.n,):
        raise GraphError(f"signal of shape {x.shape} does not match {g.n} nodes")
    return DirectedVariation.of(g).gradient(x)


# -- the frame objective ---------------------------------------------------------

def _dv_op(graph) -> DirectedVariation:
    if isinstance(graph, DirectedVariation):
        return graph
    if isinstance(graph, Graph):
        return DirectedVariation.of(graph)
    return DirectedVariation(graph)


def _check_block(U, X):
    U = np.asarray(U, dtype=float)
    X = np.asarray(X, dtype=float)
    if U.ndim != 2 or X.ndim != 2 or X.shape[0] != U.shape[0] or X.shape[1] != U.shape[1] - 1:
        raise ValueError(f"X must be n x (K-1) for a U block of shape {U.shape}, got {X.shape}")
    return U, X


def phi_objective(graph, U, X, alpha: float, beta: float) -> float:
    """``sum_k alpha (DV(u_k) - DV(x_k))^2 + beta (DV(u_{k+1}) - DV(x_k))^2``.

    Args:
        graph: a :class:`Graph`, an adjacency matrix or a prebuilt
            :class:`DirectedVariation`.
        U: ``n x K`` block of basis vectors.
        X: ``n x (K-1)`` candidate intermediate vectors.
    """
    U, X = _check_block(U, X)
    op = _dv_op(graph)
    du = op.value(U)
    dx = op.value(X)
    return float(np.sum(alpha * (du[:-1] - dx) ** 2 + beta * (du[1:] - dx) ** 2))


def phi_gradient(graph, U, X, alpha: float, beta: float) -> np.ndarray:
    """Column k is ``-2 grad DV(x_k) (alpha (DV(u_k) - DV(x_k)) + beta (DV(u_{k+1}) - DV(x_k)))``."""
    U, X = _check_block(U, X)
    op = _dv_op(graph)
    du = op.value(U)
    dx, gx = op.value_and_gradient(X)
    coef = alpha * (du[:-1] - dx) + beta * (du[1:] - dx)
    return -2.0 * gx * coef[None, :]


# -- problem / config ------------------------------------------------------------

@dataclass
class StiefelProblem:
    """``min f(X)`` over ``n x K`` matrices with orthonormal columns.

    ``fixed`` holds vectors the solution must stay orthogonal to; the solver
    handles them by optimizing in their orthogonal complement.
    """

    objective: Callable[[np.ndarray], float]
    gradient: Callable[[np.ndarray], np.ndarray]
    n: int
    K: int
    fixed: np.ndarray | None = None
    require_half: bool = True

    def __post_init__(self):
        if self.K < 1 or self.n < 1:
            raise ValueError("n and K must be positive")
        free = self.n - (0 if self.fixed is None else np.atleast_2d(self.fixed).shape[-1])
        if self.K > free:
            raise ValueError(f"cannot fit {self.K} orthonormal columns in dimension {free}")
        if self.require_half and self.n < 2 * self.K:
            raise ValueError(f"PCAL needs n >= 2K, got n={self.n}, K={self.K}")


@dataclass
class SolverConfig:
    """PCAL settings. ``eta=None`` picks the proximal weight from a probe.

    ``sink``, when set, receives ``("pcal", iteration, objective,
    feasibility)`` rows of every run that uses this config.
    """

    mu: float = 10.0
    eta: float | None = None
    max_iter: int = 50_000
    tol: float = 1e-10
    seed: int = 0
    sink: list | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.mu <= 0 or self.tol <= 0 or self.max_iter < 1:
            raise ValueError("mu, tol and max_iter must be positive")
        if self.eta is not None and self.eta <= 0:
            raise ValueError("eta must be positive")


@dataclass
class PCALResult:
    X: np.ndarray
    objective: float
    feasibility: float
    iterations: int
    converged: bool
    eta: float
    feasibility_increasing_tail: bool = False
    trace: list = field(default_factory=list, repr=False)


def feasibility(X) -> float:
    """``||X^T X - I||_F``."""
    return float(np.linalg.norm(X.T @ X - np.eye(X.shape[1])))


def _orth_complement(C: np.ndarray) -> np.ndarray:
    C = np.atleast_2d(C.T).T if C.ndim == 1 else C
    Q, _ = np.linalg.qr(C, mode="complete")
    return Q[:, C.shape[1]:]


def _lagrangian_grad(G, X, Lam, mu):
    XtX = X.T @ X
    return G - X @ Lam + mu * (X @ (XtX - np.eye(X.shape[1])))


def _multipliers(G, X, mu):
    Lam0 = G.T @ X
    Lam0 = 0.5 * (Lam0 + Lam0.T)
    grad0 = _lagrangian_grad(G, X, Lam0, mu)
    return Lam0 + np.diag(np.einsum("ij,ij->j", X, grad0))


def estimate_eta(grad: Callable, X: np.ndarray, mu: float, seed: int = 0, iters: int = 20) -> float:
    """Power-iteration probe of the Lipschitz constant of the Lagrangian gradient.

    Hessian-vector products come from central differences of ``grad``.
    """
    rng = np.random.default_rng(seed)
    V = rng.standard_normal(X.shape)
    V /= np.linalg.norm(V)
    G0 = grad(X)
    Lam = _multipliers(G0, X, mu)
    h = 1e-6
    est = 0.0
    for _ in range(iters):
        Gp = _lagrangian_grad(grad(X + h * V), X + h * V, Lam, mu)
        Gm = _lagrangian_grad(grad(X - h * V), X - h * V, Lam, mu)
        HV = (Gp - Gm) / (2 * h)
        nrm = np.linalg.norm(HV)
        if not np.isfinite(nrm) or nrm == 0:
            break
        est = nrm
        V = HV / nrm
    return max(1.0, float(est))


def pcal_solve(problem: StiefelProblem, cfg: SolverConfig | None = None, X0=None,
               trace: Callable[[int, float, float], None] | None = None) -> PCALResult:
    """Run PCAL from ``X0`` until the iterate stalls or the cap is hit.

    All K column updates of one iteration use the multipliers computed from
    the same snapshot of X, so they are independent of each other.

    Args:
        problem: objective, gradient and shape.
        cfg: solver settings.
        X0: ``n x K`` start with unit-norm columns.
        trace: optional callback ``(iteration, objective, feasibility)``.
    """
    cfg = cfg or SolverConfig()
    X0 = np.asarray(X0, dtype=float)
    if X0.shape != (problem.n, problem.K):
        raise ValueError(f"X0 has shape {X0.shape}, expected {(problem.n, problem.K)}")
    if np.abs(np.linalg.norm(X0, axis=0) - 1).max() > 1e-8:
        raise ValueError("X0 columns must have unit norm")

    if problem.fixed is not None:
        Q = _orth_complement(np.asarray(problem.fixed, dtype=float).reshape(problem.n, -1))
        f = lambda Y: problem.objective(Q @ Y)  # noqa: E731
        grad = lambda Y: Q.T @ problem.gradient(Q @ Y)  # noqa: E731
        Y = Q.T @ X0
        Y /= np.linalg.norm(Y, axis=0)
    else:
        Q = None
        f, grad = problem.objective, problem.gradient
        Y = X0.copy()

    mu = cfg.mu
    eta = cfg.eta if cfg.eta is not None else estimate_eta(grad, Y, mu, cfg.seed)
    history = []
    converged = False
    it = 0
    for it in range(1, cfg.max_iter + 1):
        G = grad(Y)
        if not np.all(np.isfinite(G)):
            raise PCALError(f"non-finite gradient at iteration {it}")
        Lam = _multipliers(G, Y, mu)
        step = Y - _lagrangian_grad(G, Y, Lam, mu) / eta
        norms = np.linalg.norm(step, axis=0)
        dead = norms == 0
        if np.any(dead):
            step[:, dead] = Y[:, dead]
            norms[dead] = 1.0
        Y_new = step / norms
        change = np.linalg.norm(Y_new - Y)
        Y = Y_new
        if trace is not None or it % 50 == 0 or change <= cfg.tol:
            val = f(Y)
            if not np.isfinite(val):
                raise PCALError(f"non-finite objective at iteration {it}")
            feas = feasibility(Y)
            history.append((it, val, feas))
            if trace is not None:
                trace(it, val, feas)
        if change <= cfg.tol:
            converged = True
            break

    X = Q @ Y if Q is not None else Y
    feas = feasibility(Y)
    tail = [h[2] for h in history[int(0.75 * len(history)):]]
    increasing = bool(len(tail) > 1 and np.any(np.diff(tail) > 1e-12 * max(1.0, tail[0])))
    if increasing and feas > 1e-10:
        log.warning("PCAL feasibility increased over the last quarter of the run")
    if cfg.sink is not None:
        cfg.sink.extend(("pcal",) + tuple(h) for h in history)
    if not converged:
        log.info("PCAL hit the iteration cap (%d); feasibility %.3e", cfg.max_iter, feas)
    return PCALResult(X, float(f(Y)), feas, it, converged, eta, increasing, history)


def write_trace(path, history: Sequence[tuple]) -> None:
    """Write ``(iteration, objective, feasibility)`` rows as CSV."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["iteration", "objective", "feasibility"])
        for row in history:
            w.writerow([row[0], repr(float(row[1])), repr(float(row[2]))])


def polar_orthonormalize(X: np.ndarray) -> np.ndarray:
    """Closest matrix with orthonormal columns (polar factor)."""
    U, _, Vt = np.linalg.svd(X, full_matrices=False)
    return U @ Vt


__all__ = [
    "DirectedVariation", "PCALError", "PCALResult", "SolverConfig", "StiefelProblem",
    "dv_gradient", "estimate_eta", "feasibility", "pcal_solve", "phi_gradient",
    "phi_objective", "polar_orthonormalize", "write_trace",
]
