"""Value types shared by the basis and frame builders."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np


class Origin(NamedTuple):
    """Where a frame vector came from.

    ``kind`` is one of ``original``, ``interpolated``, ``analytic``,
    ``optimized``; ``k`` is the 0-based index of the lower parent (or of the
    original vector), ``alpha``/``beta`` the mixing weights when relevant.
    """

    kind: str
    k: int
    alpha: float | None = None
    beta: float | None = None

    def __str__(self):
        parts = [self.kind, str(self.k)]
        if self.alpha is not None:
            parts.append(repr(float(self.alpha)))
        if self.beta is not None:
            parts.append(repr(float(self.beta)))
        return ":".join(parts)

    @classmethod
    def parse(cls, text: str) -> "Origin":
        parts = text.split(":")
        alpha = float(parts[2]) if len(parts) > 2 else None
        beta = float(parts[3]) if len(parts) > 3 else None
        return cls(parts[0], int(parts[1]), alpha, beta)


@dataclass(frozen=True)
class SpectralBasis:
    """N orthonormal vectors (columns) with real graph frequencies, ascending.

    ``variation_measure`` names what the frequencies measure: ``gtv`` for
    Laplacian quadratic forms, ``tv`` for magnetic-Laplacian quadratic forms,
    ``dv`` for directed variation and ``analytic`` for closed-form bases whose
    frequencies come from a formula.
    """

    vectors: np.ndarray
    frequencies: np.ndarray
    variation_measure: str
    complex_frequencies: np.ndarray | None = None
    name: str = "GFB"

    def __post_init__(self):
        freqs = np.asarray(self.frequencies, dtype=float)
        if self.vectors.ndim != 2 or self.vectors.shape[1] != freqs.size:
            raise ValueError("need one frequency per basis vector")
        if np.any(np.diff(freqs) < -1e-12):
            raise ValueError("basis frequencies must be ascending")
        object.__setattr__(self, "frequencies", freqs)

    @property
    def n(self) -> int:
        return self.vectors.shape[0]

    @property
    def size(self) -> int:
        return self.vectors.shape[1]

    @property
    def is_complex(self) -> bool:
        return np.iscomplexobj(self.vectors)

    def orthonormality_error(self) -> float:
        U = self.vectors
        return float(np.abs(U.conj().T @ U - np.eye(U.shape[1])).max())


@dataclass(frozen=True)
class SpectralFrame:
    """M unit-norm vectors with ascending graph frequencies and provenance."""

    vectors: np.ndarray
    frequencies: np.ndarray
    origin: tuple[Origin, ...]
    family: str
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        freqs = np.asarray(self.frequencies, dtype=float)
        V = self.vectors
        if V.ndim != 2 or V.shape[1] != freqs.size or len(self.origin) != freqs.size:
            raise ValueError("vectors, frequencies and origin must have matching lengths")
        if np.any(np.diff(freqs) < -1e-12):
            raise ValueError("frame frequencies must be ascending")
        norms = np.linalg.norm(V, axis=0)
        if V.shape[1] and np.abs(norms - 1).max() > 1e-10:
            raise ValueError("frame vectors must have unit norm")
        object.__setattr__(self, "frequencies", freqs)
        object.__setattr__(self, "origin", tuple(Origin(*o) for o in self.origin))

    @property
    def n(self) -> int:
        return self.vectors.shape[0]

    @property
    def size(self) -> int:
        return self.vectors.shape[1]

    @property
    def is_complex(self) -> bool:
        return np.iscomplexobj(self.vectors)

    def rank(self) -> int:
        return int(np.linalg.matrix_rank(self.vectors))

    def frame_bounds(self) -> tuple[float, float]:
        """Lower and upper frame bounds (extreme eigenvalues of F F^H)."""
        s = np.linalg.svd(self.vectors, compute_uv=False)
        return float(s[-1] ** 2) if s.size >= self.n else 0.0, float(s[0] ** 2)

    def original_mask(self) -> np.ndarray:
        return np.array([o.kind == "original" for o in self.origin])


def sort_by_frequency(vectors: np.ndarray, freqs, origin) -> tuple[np.ndarray, np.ndarray, tuple]:
    """Stable ascending sort of columns; ties keep their input order."""
    freqs = np.asarray(freqs, dtype=float)
    order = np.argsort(freqs, kind="stable")
    return vectors[:, order], freqs[order], tuple(origin[i] for i in order)
