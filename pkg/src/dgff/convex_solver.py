"""Primal-dual splitting for l1 basis pursuit with an l2-ball data constraint.

Solves ``min ||a||_1  s.t.  ||A a - y||_2 <= eps`` (``eps = 0`` is the
equality-constrained case) with the iteration

    a+ = prox_{g1 ||.||_1}(a - g1 A^H z)
    z+ = prox_{g2 h*}(z + g2 A (2 a+ - a))

where ``h`` is the indicator of the ball around ``y``.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

log = logging.getLogger(__name__)


class DivergenceError(ArithmeticError):
    """Raised when the primal iterate blows up."""


def soft_threshold(v, gamma: float) -> np.ndarray:
    """Entrywise magnitude shrinkage; keeps the sign (real) or phase (complex)."""
    if gamma < 0:
        raise ValueError("threshold must be nonnegative")
    v = np.asarray(v)
    if gamma == 0:
        return v.copy()
    if np.iscomplexobj(v):
        mag = np.abs(v)
        scale = np.maximum(mag - gamma, 0.0) / np.where(mag > 0, mag, 1.0)
        return v * scale
    return np.sign(v) * np.maximum(np.abs(v) - gamma, 0.0)


def project_l2_ball(v, center, eps: float) -> np.ndarray:
    """Euclidean projection onto ``{x : ||x - center|| <= eps}``."""
    if eps < 0:
        raise ValueError("radius must be nonnegative")
    v = np.asarray(v)
    d = v - center
    nrm = np.linalg.norm(d)
    if nrm <= eps:
        return v.copy()
    return center + (eps / nrm) * d


def conjugate_prox(prox: Callable[[np.ndarray, float], np.ndarray]) -> Callable[[np.ndarray, float], np.ndarray]:
    """Prox of the convex conjugate via Moreau: ``x - g prox_{f/g}(x / g)``.

    ``prox(x, t)`` must evaluate ``prox_{t f}(x)``.
    """
    def prox_conj(x, gamma):
        return x - gamma * prox(x / gamma, 1.0 / gamma)
    return prox_conj


def operator_norm(A, iters: int = 100, seed: int = 0) -> float:
    """Spectral norm estimate by power iteration on ``A^H A``."""
    A = np.asarray(A)
    if A.size == 0:
        return 0.0
    if min(A.shape) <= 64:
        return float(np.linalg.norm(A, 2))
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(A.shape[1])
    s = 0.0
    for _ in range(iters):
        w = A.conj().T @ (A @ v)
        nrm = np.linalg.norm(w)
        if nrm == 0:
            return 0.0
        v = w / nrm
        s_new = np.sqrt(nrm)
        if abs(s_new - s) <= 1e-10 * s_new:
            s = s_new
            break
        s = s_new
    # power iteration approaches from below; pad slightly
    return float(s) * 1.01


@dataclass
class SplitProblem:
    """Basis-pursuit instance and solver settings.

    Attributes:
        A: ``m x K`` matrix (frame, possibly with rows removed by sampling).
        y: data of length ``m``.
        eps: radius of the data ball; 0 gives ``A a = y``.
        gamma1, gamma2: primal and dual steps; ``gamma2`` defaults to
            ``1 / (12 gamma1)`` and is shrunk if ``gamma1 gamma2 ||A||^2 > 1``.
        tol: stop when ``||a+ - a|| <= tol`` and ``a`` is feasible.
        max_iter: iteration cap.
        trace_every: record ``(iteration, change, residual)`` at this period.
        sink: list receiving ``("pds", iteration, change, residual)`` rows.
    """

    A: np.ndarray
    y: np.ndarray
    eps: float = 0.0
    gamma1: float = 0.01
    gamma2: float | None = None
    tol: float = 1e-12
    max_iter: int = 200_000
    trace_every: int = 0
    sink: list | None = field(default=None, repr=False)

    def __post_init__(self):
        self.A = np.asarray(self.A)
        self.y = np.asarray(self.y)
        if self.A.ndim != 2 or self.y.shape != (self.A.shape[0],):
            raise ValueError(f"A {self.A.shape} and y {self.y.shape} do not match")
        if self.eps < 0 or not np.isfinite(self.eps):
            raise ValueError("eps must be finite and nonnegative")
        if self.gamma1 <= 0 or (self.gamma2 is not None and self.gamma2 <= 0):
            raise ValueError("step sizes must be positive")
        if self.gamma2 is None:
            self.gamma2 = 1.0 / (12.0 * self.gamma1)


@dataclass
class PDSResult:
    a: np.ndarray
    z: np.ndarray
    iterations: int
    converged: bool
    residual: float
    objective: float
    best_objective: list = field(default_factory=list)
    trace: list = field(default_factory=list)


def l1_norm(a) -> float:
    return float(np.sum(np.abs(a)))


def pds_solve(p: SplitProblem, trace: Callable[[int, float, float], None] | None = None) -> PDSResult:
    """Run primal-dual splitting from zero.

    Returns the final primal ``a``, dual ``z``, the iteration count and the
    feasibility residual ``max(0, ||A a - y|| - eps)``. ``best_objective``
    records the running minimum of ``||a||_1`` over near-feasible iterates
    at each trace point.
    """
    A, y, eps = p.A, p.y, p.eps
    AH = A.conj().T
    g1, g2 = p.gamma1, p.gamma2
    nrm = operator_norm(A)
    if g1 * g2 * nrm * nrm > 1:
        g2_safe = 1.0 / (g1 * nrm * nrm)
        log.info("pds: gamma1*gamma2*||A||^2 = %.3g > 1, shrinking gamma2 %.4g -> %.4g",
                 g1 * g2 * nrm * nrm, g2, g2_safe)
        g2 = g2_safe
    dtype = np.result_type(A, y, float)
    a = np.zeros(A.shape[1], dtype=dtype)
    z = np.zeros(A.shape[0], dtype=dtype)
    history, best_hist = [], []
    best = np.inf
    converged = False
    it = 0
    feas_tol = 1e-9 * (1 + np.linalg.norm(y))
    every = p.trace_every or (1 if trace is not None else 100 if p.sink is not None else 0)
    real = not np.iscomplexobj(a)

    def norm(v):
        return math.sqrt(v @ v) if real else math.sqrt(np.vdot(v, v).real)

    Aa = np.zeros_like(z)
    for it in range(1, p.max_iter + 1):
        t = a - g1 * (AH @ z)
        a_new = t - np.clip(t, -g1, g1) if real else soft_threshold(t, g1)
        Aa_new = A @ a_new
        v = z + g2 * (2 * Aa_new - Aa)
        # prox of the conjugate of the ball indicator (Moreau):
        # z = v - g2 proj(v / g2) = g2 d (1 - eps / ||d||)_+ with d = v / g2 - y
        d = v / g2 - y
        dn = norm(d)
        z = d * (g2 * (1 - eps / dn)) if dn > eps else np.zeros_like(z)
        change = norm(a_new - a)
        a, Aa = a_new, Aa_new
        if every and (it % every == 0 or change <= p.tol):
            res = max(0.0, float(np.linalg.norm(A @ a - y)) - eps)
            obj = l1_norm(a)
            if res <= 1e-6 * (1 + np.linalg.norm(y)):
                best = min(best, obj)
            history.append((it, float(change), res))
            best_hist.append(best)
            if trace is not None:
                trace(it, float(change), res)
        # from the zero start the first steps can leave a unchanged, so a
        # small step only counts once the iterate is also feasible
        if change <= p.tol and norm(Aa - y) <= eps + feas_tol:
            converged = True
            break
        if not change < 1e12 or (it % 100 == 0 and norm(a) > 1e12):
            raise DivergenceError(f"pds diverged at iteration {it} (||a|| = {np.linalg.norm(a):.3g})")
    if not converged:
        log.info("pds: iteration cap %d reached, last change %.3g", p.max_iter, change)
    res = max(0.0, float(np.linalg.norm(A @ a - y)) - eps)
    if p.sink is not None:
        p.sink.extend(("pds",) + h for h in history)
    return PDSResult(a, z, it, converged, res, l1_norm(a), best_hist, history)


def basis_pursuit(A, y, eps: float = 0.0, **kw) -> np.ndarray:
    """Convenience wrapper returning only the coefficients."""
    return pds_solve(SplitProblem(A, y, eps, **kw)).a


__all__ = [
    "DivergenceError", "PDSResult", "SplitProblem", "basis_pursuit", "conjugate_prox", "l1_norm",
    "operator_norm", "pds_solve", "project_l2_ball", "soft_threshold",
]
