"""Generalized double and triple operator integrals on finite matrices.

Every spectral integral becomes a finite sum over distinct eigenvalues.
Writing ``L(lambda, q) = N_lambda^q P_lambda`` (with ``L(lambda, 0) = P_lambda``)
and ``c[q1, q2]`` for the Taylor coefficients of beta, the GDOI is

    T(Y) = sum_{lambda1, lambda2} sum_{q1 < m1, q2 < m2} c[q1, q2] L1 Y L2,

split into parts by which of ``q1``, ``q2`` vanish.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .config import DEFAULT, Tolerances
from .errors import InvalidInputError
from .funcspace import AnalyticFn
from .linalg import as_matrix, matrix_to_json, operator_norm
from .spectral import SpectralDecomposition, as_decomposition, decompose

__all__ = [
    "GdoiResult",
    "GtoiResult",
    "MuClassification",
    "NormBounds",
    "func_of_operator",
    "func_of_two_operators",
    "gdoi",
    "gtoi",
    "mu_term",
    "classify_mu",
    "norm_bounds",
    "PLACEMENTS",
]

PLACEMENTS = ("middle", "left", "right")

# (q1 > 0, q2 > 0) -> part name, following the order of the defining sum
_GDOI_PART = {(False, False): "A1", (False, True): "A2", (True, False): "A3", (True, True): "A4"}

# (q1 > 0, q2 > 0, q3 > 0) -> part name
_GTOI_PART = {
    (False, False, False): "A1",
    (False, False, True): "A2",
    (False, True, False): "A3",
    (True, False, False): "A4",
    (False, True, True): "A5",
    (True, False, True): "A6",
    (True, True, False): "A7",
    (True, True, True): "A8",
}


@dataclass(frozen=True)
class GdoiResult:
    total: np.ndarray
    parts: dict

    def part_norms(self) -> dict:
        return {k: operator_norm(v) for k, v in self.parts.items()}

    def to_json(self) -> dict:
        return {"total": matrix_to_json(self.total), "parts": {k: matrix_to_json(v) for k, v in self.parts.items()}}


@dataclass(frozen=True)
class GtoiResult(GdoiResult):
    pass


@dataclass(frozen=True)
class MuClassification:
    ell1: int
    ell2: int
    r: float

    def as_tuple(self) -> tuple:
        return (self.ell1, self.ell2, self.r)


def _powers(d: SpectralDecomposition) -> list:
    """Per component: eigenvalue and the list ``[P, N, N^2, ..., N^(m-1)]``."""
    out = []
    for c in d.components:
        pw = [c.projector]
        for _ in range(1, c.index):
            pw.append(c.nilpotent if len(pw) == 1 else pw[-1] @ c.nilpotent)
        out.append((c.lam, pw))
    return out


def _dim(d: SpectralDecomposition) -> int:
    return d.source_dim


def func_of_operator(f: AnalyticFn, X, tolerances: Tolerances = DEFAULT) -> np.ndarray:
    """``f(X) = sum_lambda sum_{q < m} f^(q)(lambda)/q! N^q P``."""
    if f.arity != 1:
        raise InvalidInputError("func_of_operator needs a univariate function")
    d = as_decomposition(X, tolerances)
    n = _dim(d)
    out = np.zeros((n, n), dtype=np.complex128)
    for lam, pw in _powers(d):
        coeffs = f.taylor((lam,), (len(pw) - 1,))
        for q, L in enumerate(pw):
            out += coeffs[q] * L
    return out


def func_of_two_operators(f: AnalyticFn, X1, X2, tolerances: Tolerances = DEFAULT) -> np.ndarray:
    """``f(X1, X2)`` with every X1 factor placed left of every X2 factor."""
    if f.arity != 2:
        raise InvalidInputError("func_of_two_operators needs a bivariate function")
    d1 = as_decomposition(X1, tolerances)
    d2 = as_decomposition(X2, tolerances)
    n = _dim(d1)
    if _dim(d2) != n:
        raise InvalidInputError("X1 and X2 must have equal dimensions")
    out = np.zeros((n, n), dtype=np.complex128)
    for (l1, pw1), (l2, pw2) in itertools.product(_powers(d1), _powers(d2)):
        c = f.taylor((l1, l2), (len(pw1) - 1, len(pw2) - 1))
        for q1, L1 in enumerate(pw1):
            for q2, L2 in enumerate(pw2):
                out += c[q1, q2] * (L1 @ L2)
    return out


def gdoi(beta: AnalyticFn, X1, X2, Y, placement: str = "middle", tolerances: Tolerances = DEFAULT) -> GdoiResult:
    """Generalized double operator integral ``T_beta^{X1,X2}(Y)``.

    Parameters
    ----------
    beta : AnalyticFn
        Bivariate symbol.
    X1, X2 : array_like or SpectralDecomposition
        Operators supplying the left and right spectral data.
    Y : array_like
        The argument.
    placement : {"middle", "left", "right"}
        Where Y sits in each term: ``L1 Y L2``, ``Y L1 L2`` or ``L1 L2 Y``.
        The outer placements equal the three-variable spectral mapping of
        ``z0 * beta(z1, z2)`` with Y as the extra operator.

    Returns
    -------
    GdoiResult
        ``total`` and the four parts A1..A4 with ``total = A1 + A2 + A3 + A4``.
    """
    if beta.arity != 2:
        raise InvalidInputError("gdoi needs a bivariate symbol")
    if placement not in PLACEMENTS:
        raise InvalidInputError(f"placement must be one of {PLACEMENTS}, got {placement!r}")
    d1 = as_decomposition(X1, tolerances)
    d2 = as_decomposition(X2, tolerances)
    Y = as_matrix(Y)
    n = Y.shape[0]
    if _dim(d1) != n or _dim(d2) != n:
        raise InvalidInputError("X1, X2 and Y must have equal dimensions")

    parts = {name: np.zeros((n, n), dtype=np.complex128) for name in ("A1", "A2", "A3", "A4")}
    for (l1, pw1), (l2, pw2) in itertools.product(_powers(d1), _powers(d2)):
        c = beta.taylor((l1, l2), (len(pw1) - 1, len(pw2) - 1))
        for q1, L1 in enumerate(pw1):
            if placement == "middle":
                left = L1 @ Y
            for q2, L2 in enumerate(pw2):
                if placement == "middle":
                    term = left @ L2
                elif placement == "left":
                    term = Y @ L1 @ L2
                else:
                    term = L1 @ L2 @ Y
                parts[_GDOI_PART[(q1 > 0, q2 > 0)]] += c[q1, q2] * term
    total = parts["A1"] + parts["A2"] + parts["A3"] + parts["A4"]
    return GdoiResult(total, parts)


def gtoi(beta: AnalyticFn, X1, X2, X3, Y1, Y2, tolerances: Tolerances = DEFAULT) -> GtoiResult:
    """Generalized triple operator integral ``T_beta^{X1,X2,X3}(Y1, Y2)``.

    Each term is ``c[q1, q2, q3] L1 Y1 L2 Y2 L3``; the eight parts A1..A8 are
    indexed by which of the ``q`` vanish, in the order
    ``(0,0,0) (0,0,+) (0,+,0) (+,0,0) (0,+,+) (+,0,+) (+,+,0) (+,+,+)``.
    """
    if beta.arity != 3:
        raise InvalidInputError("gtoi needs a trivariate symbol")
    ds = [as_decomposition(X, tolerances) for X in (X1, X2, X3)]
    Y1 = as_matrix(Y1)
    Y2 = as_matrix(Y2)
    n = Y1.shape[0]
    if Y2.shape[0] != n or any(_dim(d) != n for d in ds):
        raise InvalidInputError("all operands must have equal dimensions")

    parts = {f"A{i}": np.zeros((n, n), dtype=np.complex128) for i in range(1, 9)}
    p1, p2, p3 = (_powers(d) for d in ds)
    for (l1, pw1), (l2, pw2), (l3, pw3) in itertools.product(p1, p2, p3):
        c = beta.taylor((l1, l2, l3), (len(pw1) - 1, len(pw2) - 1, len(pw3) - 1))
        for q1, L1 in enumerate(pw1):
            a = L1 @ Y1
            for q2, L2 in enumerate(pw2):
                b = a @ L2 @ Y2
                for q3, L3 in enumerate(pw3):
                    parts[_GTOI_PART[(q1 > 0, q2 > 0, q3 > 0)]] += c[q1, q2, q3] * (b @ L3)
    total = sum(parts.values())
    return GtoiResult(total, parts)


def mu_term(f: AnalyticFn, X1, X2, tolerances: Tolerances = DEFAULT) -> np.ndarray:
    """Nilpotent deviation ``sum_{q>=1} f^(q)/q! N1^q - sum_{q>=1} f^(q)/q! N2^q``."""
    if f.arity != 1:
        raise InvalidInputError("mu_term needs a univariate function")
    d1 = as_decomposition(X1, tolerances)
    d2 = as_decomposition(X2, tolerances)
    n = _dim(d1)
    out = np.zeros((n, n), dtype=np.complex128)
    for sign, d in ((1.0, d1), (-1.0, d2)):
        for lam, pw in _powers(d):
            if len(pw) == 1:
                continue
            coeffs = f.taylor((lam,), (len(pw) - 1,))
            for q in range(1, len(pw)):
                out += sign * coeffs[q] * pw[q]
    return out


def classify_mu(mu, zero_threshold: float | None = None, tolerances: Tolerances = DEFAULT) -> MuClassification:
    """Classify ``mu`` by ``(ell1, ell2, r)``.

    ``r`` is the operator norm.  A numerically zero ``mu`` gives
    ``(0, 0, 0)``.  A nilpotent ``mu`` gives ``ell1 = 0`` and ``ell2`` the
    smallest power that vanishes.  Otherwise ``ell1`` counts eigenvalues
    (with multiplicity) of modulus above the threshold and ``ell2 = 0``.

    The threshold defaults to ``tolerances.mu_zero * max(1, ||mu||)``.
    Nilpotency is decided by powering rather than from eigenvalues, whose
    computed values scatter like ``eps^(1/k)`` around zero.
    """
    M = as_matrix(mu)
    n = M.shape[0]
    r = operator_norm(M)
    thr = tolerances.mu_zero * max(1.0, r) if zero_threshold is None else float(zero_threshold)
    scale = max(1.0, r)
    if r <= thr * scale:
        return MuClassification(0, 0, 0.0)
    power = M @ M
    for k in range(2, n + 1):
        if operator_norm(power) <= thr * scale**k:
            return MuClassification(0, k, r)
        power = power @ M
    try:
        d = decompose(M, tolerances=tolerances)
        ell1 = sum(int(round(np.trace(c.projector).real)) for c in d.components if abs(c.lam) > thr)
    except Exception:
        ell1 = int(np.sum(np.abs(np.linalg.eigvals(M)) > thr))
    return MuClassification(max(ell1, 1), 0, r)


# norm bounds -------------------------------------------------------------

@dataclass(frozen=True)
class NormBounds:
    """Upper and lower bounds on the norm of a GDOI/GTOI value.

    ``upper`` uses restricted nilpotent norms ``||N^q P||``; ``upper_literal``
    uses global powers ``||(X - lambda I)^q||``; ``upper_triangle`` is the
    plain triangle inequality over every individual term and is always valid.
    ``refined_lower`` is None unless its hypothesis holds; it is only
    defined for ``kind="gdoi"``.
    """

    kind: str
    lower: float
    upper: float
    observed: float
    upper_literal: float
    upper_triangle: float
    refined_lower: float | None
    hypothesis_holds: bool
    hypothesis_holds_real: bool
    min_abs_beta: float
    min_re_beta: float
    part_norms: dict = field(default_factory=dict)

    def as_tuple(self) -> tuple:
        return (self.lower, self.upper, self.observed)


def _sandwich_lower(norms: list[float]) -> float:
    s = sorted(norms, reverse=True)
    return max(0.0, s[0] - sum(s[1:]))


def norm_bounds(kind: str, beta: AnalyticFn, *operands, tolerances: Tolerances = DEFAULT) -> NormBounds:
    """Bounds for ``||T_beta(...)||``.

    ``kind="gdoi"`` takes ``(X1, X2, Y)``; ``kind="gtoi"`` takes
    ``(X1, X2, X3, Y1, Y2)``.  For each multi-index of derivative orders the
    coefficient bound is the maximum of ``|c[q]|`` over the whole eigenvalue
    grid, multiplied by the summed nilpotent-power norms of the active
    variables and by the norms of the arguments.
    """
    if kind == "gdoi":
        X1, X2, Y = operands
        mats = (X1, X2)
        args = (as_matrix(Y),)
        result = gdoi(beta, X1, X2, Y, tolerances=tolerances)
        part_of = _GDOI_PART
    elif kind == "gtoi":
        X1, X2, X3, Y1, Y2 = operands
        mats = (X1, X2, X3)
        args = (as_matrix(Y1), as_matrix(Y2))
        result = gtoi(beta, X1, X2, X3, Y1, Y2, tolerances=tolerances)
        part_of = _GTOI_PART
    else:
        raise InvalidInputError(f"kind must be 'gdoi' or 'gtoi', got {kind!r}")

    raw = [X if isinstance(X, SpectralDecomposition) else as_matrix(X) for X in mats]
    ds = [as_decomposition(X, tolerances) for X in mats]
    pws = [_powers(d) for d in ds]
    n = ds[0].source_dim
    arg_norm = float(np.prod([operator_norm(a) for a in args]))
    r = len(ds)

    # restricted and literal nilpotent-power norms per variable, per q >= 1
    restricted, literal = [], []
    for X, pw in zip(raw, pws):
        Xm = X.reconstruct() if isinstance(X, SpectralDecomposition) else X
        rs, ls = {}, {}
        for lam, powers in pw:
            for q in range(1, len(powers)):
                rs.setdefault(q, []).append(operator_norm(powers[q]))
                shifted = np.linalg.matrix_power(Xm - lam * np.eye(n), q)
                ls.setdefault(q, []).append(operator_norm(shifted))
        restricted.append(rs)
        literal.append(ls)

    # coefficient maxima over the eigenvalue grid, per multi-order
    max_order = [max(len(p) for _, p in pw) - 1 for pw in pws]
    cmax = np.zeros(tuple(m + 1 for m in max_order))
    beta_vals = []
    triangle = 0.0
    for combo in itertools.product(*pws):
        lams = tuple(lam for lam, _ in combo)
        orders = tuple(len(p) - 1 for _, p in combo)
        c = beta.taylor(lams, orders)
        beta_vals.append(complex(c.flat[0]))
        idx = tuple(slice(0, o + 1) for o in orders)
        cmax[idx] = np.maximum(cmax[idx], np.abs(c))
        for qs in itertools.product(*(range(o + 1) for o in orders)):
            if c[qs] == 0:
                continue
            Ls = [p[q] for (_, p), q in zip(combo, qs)]
            if r == 2:
                term = Ls[0] @ args[0] @ Ls[1]
            else:
                term = Ls[0] @ args[0] @ Ls[1] @ args[1] @ Ls[2]
            triangle += abs(c[qs]) * operator_norm(term)

    def coefficient_sum(norm_tables):
        total = 0.0
        for qs in itertools.product(*(range(m + 1) for m in max_order)):
            weight = cmax[qs]
            if weight == 0:
                continue
            for v, q in enumerate(qs):
                if q > 0:
                    weight *= sum(norm_tables[v].get(q, []))
            total += weight
        return total * arg_norm

    upper = coefficient_sum(restricted)
    upper_literal = coefficient_sum(literal)

    part_norms = {k: operator_norm(v) for k, v in result.parts.items()}
    observed = operator_norm(result.total)
    lower = _sandwich_lower(list(part_norms.values()))

    rest = sum(v for k, v in part_norms.items() if k != "A1")
    min_abs = float(min(abs(b) for b in beta_vals))
    min_re = float(min(b.real for b in beta_vals))
    # the refined lower bound is stated for the two-operator transform only
    holds = kind == "gdoi" and min_abs * arg_norm >= rest
    holds_re = kind == "gdoi" and min_re * arg_norm >= rest
    refined = min_abs * arg_norm - rest if holds else None
    return NormBounds(
        kind,
        lower,
        upper,
        observed,
        upper_literal,
        triangle,
        refined,
        bool(holds),
        bool(holds_re),
        min_abs,
        min_re,
        part_norms,
    )
