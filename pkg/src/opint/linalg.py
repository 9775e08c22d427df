"""Dense complex linear-algebra substrate.

Norms, an independent matrix-exponential oracle, Sylvester solves, seeded
generators of matrices with prescribed Jordan structure, and the JSON
matrix file format shared by every module.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.linalg

from .errors import ConvergenceError, IllConditionedError, InvalidInputError

__all__ = [
    "JORDAN_GRAMMAR",
    "JordanSpec",
    "as_matrix",
    "operator_norm",
    "matrix_exp_oracle",
    "solve_sylvester",
    "jordan_matrix",
    "random_jordan_matrix",
    "random_unitary",
    "matrix_to_json",
    "matrix_from_json",
    "write_matrix",
    "read_matrix",
]


def as_matrix(X) -> np.ndarray:
    """Return ``X`` as a square, finite, complex128 array or raise."""
    A = np.asarray(X)
    if A.ndim == 0:
        A = A.reshape(1, 1)
    if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] == 0:
        raise InvalidInputError(f"expected a non-empty square matrix, got shape {A.shape}")
    A = A.astype(np.complex128, copy=False)
    if not np.all(np.isfinite(A)):
        raise InvalidInputError("matrix has NaN or Inf entries")
    return A


def operator_norm(X) -> float:
    """Largest singular value, computed from a full SVD; rectangular input allowed."""
    A = np.asarray(X, dtype=np.complex128)
    if A.ndim != 2 or A.size == 0:
        raise InvalidInputError(f"expected a non-empty matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise InvalidInputError("matrix has NaN or Inf entries")
    return float(np.linalg.svd(A, compute_uv=False)[0])


def matrix_exp_oracle(X, max_terms: int = 10000) -> np.ndarray:
    """exp(X) by scaling, a Taylor series summed to stagnation, and squaring.

    Deliberately shares no code with the spectral machinery so it can serve
    as an independent reference for ``f = exp``.
    """
    A = as_matrix(X)
    n = A.shape[0]
    nrm = operator_norm(A)
    squarings = max(0, int(math.ceil(math.log2(nrm / 0.5)))) if nrm > 0.5 else 0
    B = A / (2.0 ** squarings)

    total = np.eye(n, dtype=np.complex128)
    term = np.eye(n, dtype=np.complex128)
    for k in range(1, max_terms + 1):
        term = term @ B / k
        updated = total + term
        if np.array_equal(updated, total):
            break
        total = updated
    else:
        raise ConvergenceError(f"exp series did not stagnate in {max_terms} terms")

    for _ in range(squarings):
        total = total @ total
    return total


def solve_sylvester(A, B, C, min_gap: float = 1e-12) -> np.ndarray:
    """Solve ``A Z - Z B = C`` for Z.

    Raises :class:`IllConditionedError` (carrying the gap) when the spectra
    of A and B come closer than ``min_gap``.
    """
    A = as_matrix(A)
    B = as_matrix(B)
    C = np.asarray(C, dtype=np.complex128)
    if C.shape != (A.shape[0], B.shape[0]):
        raise InvalidInputError(f"C has shape {C.shape}, expected {(A.shape[0], B.shape[0])}")
    ev_a = np.linalg.eigvals(A)
    ev_b = np.linalg.eigvals(B)
    gap = float(np.min(np.abs(ev_a[:, None] - ev_b[None, :])))
    if gap < min_gap:
        raise IllConditionedError(f"spectral gap {gap:.3e} below {min_gap:.1e}", value=gap)
    if not np.any(C):
        return np.zeros_like(C)
    return scipy.linalg.solve_sylvester(A, -B, C)


@dataclass(frozen=True)
class JordanSpec:
    """Distinct eigenvalues, their Jordan block sizes, and a target cond(S)."""

    blocks: tuple
    similarity_condition: float = 1.0

    def __post_init__(self):
        norm_blocks = []
        for entry in self.blocks:
            lam, sizes = entry
            sizes = tuple(int(s) for s in sizes)
            if not sizes or any(s < 1 for s in sizes):
                raise InvalidInputError(f"block sizes must be positive integers, got {sizes}")
            norm_blocks.append((complex(lam), sizes))
        lams = [lam for lam, _ in norm_blocks]
        if len(set(lams)) != len(lams):
            raise InvalidInputError("eigenvalues in a JordanSpec must be pairwise distinct")
        if not norm_blocks:
            raise InvalidInputError("JordanSpec needs at least one eigenvalue")
        if not self.similarity_condition >= 1.0:
            raise InvalidInputError("similarity_condition must be >= 1")
        object.__setattr__(self, "blocks", tuple(norm_blocks))
        object.__setattr__(self, "similarity_condition", float(self.similarity_condition))

    @property
    def dim(self) -> int:
        return sum(sum(sizes) for _, sizes in self.blocks)

    @property
    def eigenvalues(self) -> list[complex]:
        return [lam for lam, _ in self.blocks]

    def index_of(self, lam: complex) -> int:
        """Nilpotent index of ``lam``: its largest block size."""
        for mu, sizes in self.blocks:
            if mu == lam:
                return max(sizes)
        raise KeyError(lam)

    def indices(self) -> dict:
        return {lam: max(sizes) for lam, sizes in self.blocks}

    def min_separation(self) -> float:
        lams = np.array(self.eigenvalues)
        if len(lams) < 2:
            return math.inf
        d = np.abs(lams[:, None] - lams[None, :])
        return float(np.min(d[~np.eye(len(lams), dtype=bool)]))

    _TOKEN = re.compile(r"\(\s*([^:()]+?)\s*:\s*([0-9,\s]+)\)")

    @classmethod
    def parse(cls, text: str) -> "JordanSpec":
        """Parse ``"(0.3:2,1)(-0.8:3)@cond=10"``.

        Each parenthesised group is ``eigenvalue:size,size,...``; eigenvalues
        accept Python complex syntax (``1+2j``).  ``@cond=c`` is optional.
        """
        src = text.replace("−", "-").strip()
        cond = 1.0
        if "@" in src:
            src, _, tail = src.partition("@")
            m = re.fullmatch(r"\s*cond\s*=\s*([0-9.eE+-]+)\s*", tail)
            if not m:
                raise InvalidInputError(f"bad condition suffix {tail!r}")
            cond = float(m.group(1))
        blocks = []
        pos = 0
        src = src.strip()
        for m in cls._TOKEN.finditer(src):
            if src[pos:m.start()].strip():
                raise InvalidInputError(f"unexpected text {src[pos:m.start()]!r}")
            try:
                lam = complex(m.group(1).replace(" ", ""))
            except ValueError as exc:
                raise InvalidInputError(f"bad eigenvalue {m.group(1)!r}") from exc
            sizes = [int(s) for s in m.group(2).replace(" ", "").split(",") if s]
            blocks.append((lam, sizes))
            pos = m.end()
        if src[pos:].strip() or not blocks:
            raise InvalidInputError(f"cannot parse Jordan spec {text!r}")
        return cls(tuple(blocks), cond)

    def to_string(self) -> str:
        parts = []
        for lam, sizes in self.blocks:
            lam_s = repr(lam.real) if lam.imag == 0 else repr(lam).strip("()")
            parts.append(f"({lam_s}:{','.join(map(str, sizes))})")
        return "".join(parts) + f"@cond={self.similarity_condition!r}"


JORDAN_GRAMMAR = "spec := group+ ['@cond=' real]; group := '(' eigenvalue ':' size (',' size)* ')'"


def jordan_matrix(spec: JordanSpec) -> np.ndarray:
    """Block-diagonal Jordan matrix, blocks in spec order."""
    n = spec.dim
    J = np.zeros((n, n), dtype=np.complex128)
    pos = 0
    for lam, sizes in spec.blocks:
        for s in sizes:
            for i in range(s):
                J[pos + i, pos + i] = lam
                if i + 1 < s:
                    J[pos + i, pos + i + 1] = 1.0
            pos += s
    return J


def random_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed unitary from the QR of a complex Gaussian matrix."""
    G = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    Q, R = np.linalg.qr(G)
    d = np.diag(R)
    return Q * (d / np.abs(d))


def _rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(int(seed) & 0xFFFFFFFFFFFFFFFF)


def random_jordan_matrix(spec: JordanSpec, seed) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(X, S)`` with ``X = S J S^-1`` and ``cond(S) = spec.similarity_condition``.

    ``S = U diag(s) V^H`` with Haar unitaries U, V and singular values spaced
    geometrically from 1 to the target condition.  A condition of exactly 1
    gives ``S = I``, so X is the Jordan matrix itself.
    """
    J = jordan_matrix(spec)
    n = spec.dim
    cond = spec.similarity_condition
    if cond == 1.0:
        return J.copy(), np.eye(n, dtype=np.complex128)
    rng = _rng(seed)
    U = random_unitary(n, rng)
    V = random_unitary(n, rng)
    s = np.geomspace(1.0, cond, n) if n > 1 else np.ones(1)
    S = (U * s) @ V.conj().T
    inner = V.conj().T @ J @ V
    X = (U * s) @ inner @ (U / s).conj().T
    return X, S


def _fmt(x: float) -> float | str:
    return float(format(float(x), ".17g"))


def matrix_to_json(X) -> dict:
    A = as_matrix(X)
    entries = [[_fmt(z.real), _fmt(z.imag)] for z in A.ravel()]
    return {"dim": int(A.shape[0]), "entries": entries}


def matrix_from_json(obj: dict) -> np.ndarray:
    try:
        n = int(obj["dim"])
        flat = np.array([complex(re_, im) for re_, im in obj["entries"]], dtype=np.complex128)
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidInputError(f"malformed matrix object: {exc}") from exc
    if flat.size != n * n:
        raise InvalidInputError(f"expected {n * n} entries, got {flat.size}")
    return as_matrix(flat.reshape(n, n))


def _dump_matrix(X) -> str:
    # 17 significant digits per IEEE double, written by hand so the output
    # does not depend on json's float repr choice
    A = as_matrix(X)
    pairs = ", ".join(f"[{z.real:.17g}, {z.imag:.17g}]" for z in A.ravel())
    return f'{{"dim": {A.shape[0]}, "entries": [{pairs}]}}'


def write_matrix(path, X) -> None:
    Path(path).write_text(_dump_matrix(X) + "\n")


def read_matrix(path) -> np.ndarray:
    return matrix_from_json(json.loads(Path(path).read_text()))
