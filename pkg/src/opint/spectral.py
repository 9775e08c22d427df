"""Spectral resolution ``X = sum_lambda (lambda P_lambda + N_lambda)``.

The decomposition goes through a complex Schur form, groups the computed
eigenvalues into clusters, reorders the Schur form so each cluster is
contiguous, and block-diagonalises it with Sylvester solves.  Spectral
projectors are the block indicators conjugated back to the original basis.
Jordan chains are never formed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg
from scipy.linalg import lapack

from .config import DEFAULT, Tolerances
from .errors import AmbiguousClusteringError, IllConditionedError
from .linalg import as_matrix, matrix_from_json, matrix_to_json, operator_norm, solve_sylvester

__all__ = [
    "EigenComponent",
    "SpectralDecomposition",
    "decompose",
    "reconstruct",
    "as_decomposition",
    "nilpotent_index",
    "cluster_points",
]


@dataclass(frozen=True)
class EigenComponent:
    """One distinct eigenvalue with its spectral projector and nilpotent part."""

    lam: complex
    projector: np.ndarray
    nilpotent: np.ndarray
    index: int

    def nilpotent_power(self, q: int) -> np.ndarray:
        """``N^q P`` with the convention ``N^0 P = P``."""
        if q == 0:
            return self.projector
        return np.linalg.matrix_power(self.nilpotent, q)


@dataclass(frozen=True)
class SpectralDecomposition:
    source_dim: int
    components: tuple
    cluster_tolerance: float

    @property
    def eigenvalues(self) -> list[complex]:
        return [c.lam for c in self.components]

    @property
    def indices(self) -> list[int]:
        return [c.index for c in self.components]

    @property
    def max_index(self) -> int:
        return max(self.indices)

    @property
    def is_semisimple(self) -> bool:
        return all(c.index == 1 for c in self.components)

    def __len__(self) -> int:
        return len(self.components)

    def __iter__(self):
        return iter(self.components)

    def reconstruct(self) -> np.ndarray:
        return reconstruct(self)

    def to_json(self) -> dict:
        return {
            "clusters": [
                {
                    "lambda": [float(c.lam.real), float(c.lam.imag)],
                    "index": int(c.index),
                    "projector": matrix_to_json(c.projector),
                    "nilpotent": matrix_to_json(c.nilpotent),
                }
                for c in self.components
            ],
            "tolerance": float(self.cluster_tolerance),
        }

    @classmethod
    def from_json(cls, obj: dict) -> "SpectralDecomposition":
        comps = []
        for entry in obj["clusters"]:
            re_, im = entry["lambda"]
            comps.append(
                EigenComponent(
                    complex(re_, im),
                    matrix_from_json(entry["projector"]),
                    matrix_from_json(entry["nilpotent"]),
                    int(entry["index"]),
                )
            )
        n = comps[0].projector.shape[0]
        return cls(n, tuple(comps), float(obj["tolerance"]))


def reconstruct(d: SpectralDecomposition) -> np.ndarray:
    """Return ``sum (lambda P + N)``."""
    n = d.source_dim
    out = np.zeros((n, n), dtype=np.complex128)
    for c in d.components:
        out += c.lam * c.projector + c.nilpotent
    return out


def cluster_points(points, radius: float) -> list[list[int]]:
    """Single-linkage clusters: points closer than ``radius`` are chained.

    Clusters come back sorted by (real, imag) of their mean so the ordering
    of components is canonical.
    """
    pts = np.asarray(points, dtype=np.complex128)
    n = len(pts)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    dist = np.abs(pts[:, None] - pts[None, :])
    for i in range(n):
        for j in range(i + 1, n):
            if dist[i, j] <= radius:
                parent[find(i)] = find(j)
    groups: dict[int, list[int]] = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    clusters = list(groups.values())
    clusters.sort(key=lambda g: (round(float(np.mean(pts[g]).real), 12), round(float(np.mean(pts[g]).imag), 12)))
    return clusters


def nilpotent_index(N: np.ndarray, scale: float, threshold: float = 1e-9) -> int:
    """Smallest k >= 1 with ``||N^k|| <= threshold * scale^k``."""
    n = N.shape[0]
    power = N.copy()
    for k in range(1, n + 1):
        if operator_norm(power) <= threshold * scale**k:
            return k
        power = power @ N
    return n


def _reorder(T, Q, labels, order):
    """Permute the Schur form so labels appear grouped in ``order``."""
    labels = list(labels)
    target = [lab for lab in order for _ in range(labels.count(lab))]
    for p, want in enumerate(target):
        if labels[p] == want:
            continue
        j = next(i for i in range(p + 1, len(labels)) if labels[i] == want)
        T, Q, info = lapack.ztrexc(T, Q, j + 1, p + 1)
        if info != 0:
            raise IllConditionedError(f"Schur reordering failed (info={info})")
        labels.insert(p, labels.pop(j))
    return T, Q


def _block_diagonalizer(T, sizes, min_gap):
    """V and V^-1 with ``V^-1 T V`` block diagonal for the given block sizes."""
    n = T.shape[0]
    if len(sizes) == 1:
        eye = np.eye(n, dtype=np.complex128)
        return eye, eye.copy()
    k = sizes[0]
    T11, T12, T22 = T[:k, :k], T[:k, k:], T[k:, k:]
    Z = solve_sylvester(T11, T22, -T12, min_gap=min_gap)
    V2, V2inv = _block_diagonalizer(T22, sizes[1:], min_gap)
    V = np.zeros((n, n), dtype=np.complex128)
    Vinv = np.zeros((n, n), dtype=np.complex128)
    V[:k, :k] = np.eye(k)
    V[:k, k:] = Z @ V2
    V[k:, k:] = V2
    Vinv[:k, :k] = np.eye(k)
    Vinv[:k, k:] = -Z
    Vinv[k:, k:] = V2inv
    return V, Vinv


def decompose(X, cluster_tolerance: float | None = None, tolerances: Tolerances = DEFAULT) -> SpectralDecomposition:
    """Spectral decomposition of a square complex matrix.

    Parameters
    ----------
    X : array_like
        Square complex matrix.
    cluster_tolerance : float, optional
        Relative merge radius for computed eigenvalues; the absolute radius is
        ``cluster_tolerance * max(1, ||X||)``.  Defaults to ``tolerances.cluster``.
        A positive ``tolerances.cluster_abs`` takes precedence as an absolute radius.
    tolerances : Tolerances
        Remaining cutoffs (nilpotent index, projector residual, Sylvester gap).

    Returns
    -------
    SpectralDecomposition
        Components sorted by eigenvalue (real part, then imaginary part).

    Raises
    ------
    AmbiguousClusteringError
        Two clusters lie within twice the merge radius of each other.
    IllConditionedError
        The projectors fail the idempotency / resolution-of-identity check.
    """
    A = as_matrix(X)
    n = A.shape[0]
    tol = tolerances.cluster if cluster_tolerance is None else float(cluster_tolerance)
    scale = max(1.0, operator_norm(A))

    c0 = A[0, 0]
    if np.array_equal(A, c0 * np.eye(n)):
        eye = np.eye(n, dtype=np.complex128)
        comp = EigenComponent(complex(c0), eye, np.zeros_like(eye), 1)
        return SpectralDecomposition(n, (comp,), tol)

    T, Q = scipy.linalg.schur(A, output="complex")
    ev = np.diag(T).copy()
    radius = tolerances.cluster_abs if tolerances.cluster_abs > 0 else tol * scale
    clusters = cluster_points(ev, radius)

    if len(clusters) > 1:
        closest = min(
            float(np.min(np.abs(ev[a][:, None] - ev[b][None, :])))
            for i, a in enumerate(clusters)
            for b in clusters[i + 1:]
        )
        if closest < 2 * radius:
            raise AmbiguousClusteringError(
                f"eigenvalue clusters {closest:.3e} apart, merge radius {radius:.3e}",
                distance=closest,
            )

    labels = np.empty(n, dtype=int)
    for lab, members in enumerate(clusters):
        labels[members] = lab
    T, Q = _reorder(T, Q, labels, range(len(clusters)))
    sizes = [len(members) for members in clusters]
    V, Vinv = _block_diagonalizer(T, sizes, tolerances.sylvester_gap * scale)

    QV = Q @ V
    VinvQh = Vinv @ Q.conj().T
    components = []
    start = 0
    for k in sizes:
        sl = slice(start, start + k)
        block = T[sl, sl]
        lam = complex(np.trace(block) / k)
        P = QV[:, sl] @ VinvQh[sl, :]
        N = QV[:, sl] @ (block - lam * np.eye(k)) @ VinvQh[sl, :]
        m = nilpotent_index(N, scale, tolerances.nilpotent) if k > 1 else 1
        components.append(EigenComponent(lam, P, N, m))
        start += k

    Psum = sum(c.projector for c in components)
    pmax = max(operator_norm(c.projector) for c in components)
    residual = operator_norm(Psum - np.eye(n))
    for c in components:
        residual = max(residual, operator_norm(c.projector @ c.projector - c.projector))
    if residual > tolerances.projector_residual * pmax:
        raise IllConditionedError(f"projector residual {residual:.3e}", value=residual)
    return SpectralDecomposition(n, tuple(components), tol)


def as_decomposition(X, tolerances: Tolerances = DEFAULT, cluster_tolerance: float | None = None) -> SpectralDecomposition:
    """Pass decompositions through; decompose raw matrices."""
    if isinstance(X, SpectralDecomposition):
        return X
    return decompose(X, cluster_tolerance, tolerances)
