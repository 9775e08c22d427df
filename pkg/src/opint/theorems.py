"""Executable checks of the GDOI identities, bounds and limit statements.

Every check returns a :class:`CheckResult` whose ``residual`` is compared to a
threshold.  Relative residuals divide by ``1 + ||reference||`` so that trivial
cases with a zero reference side stay meaningful.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .config import DEFAULT, Tolerances
from .errors import DegenerateInputError, PathError, PreconditionError
from .funcspace import AnalyticFn, divided_difference
from .gdoi import classify_mu, func_of_operator, gdoi, gtoi, mu_term, norm_bounds
from .linalg import JordanSpec, as_matrix, jordan_matrix, operator_norm, random_jordan_matrix, random_unitary
from .spectral import SpectralDecomposition, as_decomposition, decompose

__all__ = [
    "CheckResult",
    "ConvergenceTrace",
    "check_perturbation",
    "check_dd_split",
    "check_nilpotent_mu",
    "check_telescope",
    "check_derivative",
    "check_power_rule",
    "check_lipschitz",
    "check_homomorphism",
    "check_independence",
    "continuity_experiment",
    "generic_perturbation_trace",
    "schur_doi",
    "spectral_gap",
]


@dataclass(frozen=True)
class CheckResult:
    name: str
    seed: int
    residual: float
    threshold: float
    passed: bool
    details: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "seed": int(self.seed),
            "residual": _json_float(self.residual),
            "threshold": _json_float(self.threshold),
            "passed": bool(self.passed),
            "details": _json_clean(self.details),
        }

    @classmethod
    def from_json(cls, obj: dict) -> "CheckResult":
        return cls(
            str(obj["name"]),
            int(obj["seed"]),
            _float_back(obj["residual"]),
            _float_back(obj["threshold"]),
            bool(obj["passed"]),
            dict(obj.get("details", {})),
        )


def _json_float(x):
    x = float(x)
    if math.isnan(x):
        return "NaN"
    if math.isinf(x):
        return "Infinity" if x > 0 else "-Infinity"
    return x


def _float_back(x):
    return float(x) if not isinstance(x, str) else float(x.replace("Infinity", "inf"))


def _json_clean(obj):
    if isinstance(obj, dict):
        return {str(k): _json_clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_clean(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return _json_float(obj)
    if isinstance(obj, complex):
        return [_json_float(obj.real), _json_float(obj.imag)]
    if obj is None or isinstance(obj, str):
        return obj
    return str(obj)


@dataclass(frozen=True)
class ConvergenceTrace:
    step_sizes: tuple
    errors: tuple
    fitted_slope: float

    def __post_init__(self):
        if len(self.step_sizes) != len(self.errors):
            raise ValueError("step_sizes and errors must have equal length")
        if any(b >= a for a, b in zip(self.step_sizes, self.step_sizes[1:])):
            raise ValueError("step_sizes must be strictly decreasing")
        if any(h <= 0 for h in self.step_sizes) or any(not e >= 0 for e in self.errors):
            raise ValueError("step sizes must be positive and errors nonnegative")

    def to_json(self) -> dict:
        return {
            "step_sizes": [_json_float(h) for h in self.step_sizes],
            "errors": [_json_float(e) for e in self.errors],
            "fitted_slope": _json_float(self.fitted_slope),
        }


def loglog_slope(steps, errors) -> float:
    """Least-squares slope of log(error) against log(step); NaN if any error is zero."""
    e = np.asarray(errors, dtype=float)
    if np.any(e <= 0) or len(e) < 2:
        return float("nan")
    return float(np.polyfit(np.log(np.asarray(steps, dtype=float)), np.log(e), 1)[0])


def _mat(X) -> np.ndarray:
    return X.reconstruct() if isinstance(X, SpectralDecomposition) else as_matrix(X)


def _rel(diff: np.ndarray, ref: np.ndarray) -> float:
    return operator_norm(diff) / (1.0 + operator_norm(ref))


def spectral_gap(d1: SpectralDecomposition, d2: SpectralDecomposition) -> float:
    """Smallest distance between an eigenvalue of d1 and one of d2."""
    a = np.array(d1.eigenvalues)
    b = np.array(d2.eigenvalues)
    return float(np.min(np.abs(a[:, None] - b[None, :])))


def _require_gap(d1, d2, tolerances: Tolerances):
    gap = spectral_gap(d1, d2)
    if gap < tolerances.spectral_gap:
        raise PreconditionError(f"spectra overlap: gap {gap:.3e} below {tolerances.spectral_gap:.1e}")
    return gap


def _threshold(f: AnalyticFn, poly: float, general: float) -> float:
    return poly if f.polynomial else general


# perturbation formulas ---------------------------------------------------

def check_perturbation(f: AnalyticFn, X1, X2, Y, seed: int = 0, tolerances: Tolerances = DEFAULT) -> CheckResult:
    """``f(X1) Y - Y f(X2) = T_{f^[1]}^{X1,X2}(X1 Y - Y X2)``."""
    d1 = as_decomposition(X1, tolerances)
    d2 = as_decomposition(X2, tolerances)
    gap = _require_gap(d1, d2, tolerances)
    A, B, Y = _mat(X1), _mat(X2), as_matrix(Y)
    lhs = func_of_operator(f, d1, tolerances) @ Y - Y @ func_of_operator(f, d2, tolerances)
    rhs = gdoi(divided_difference(f, 1), d1, d2, A @ Y - Y @ B, tolerances=tolerances).total
    residual = _rel(lhs - rhs, lhs)
    threshold = _threshold(f, tolerances.perturbation_poly, tolerances.perturbation)
    return CheckResult(
        "perturbation", seed, residual, threshold, residual <= threshold,
        {"f": f.label, "gap": gap, "dim": A.shape[0]},
    )


def doi_part(f: AnalyticFn, d1: SpectralDecomposition, d2: SpectralDecomposition) -> np.ndarray:
    """``sum f^[1](l1, l2) P1 (X1_P - X2_P) P2`` with ``X_P = sum lambda P``."""
    f1 = divided_difference(f, 1)
    X1P = sum(c.lam * c.projector for c in d1)
    X2P = sum(c.lam * c.projector for c in d2)
    D = X1P - X2P
    out = np.zeros_like(D)
    for c1 in d1:
        for c2 in d2:
            out += f1(c1.lam, c2.lam) * (c1.projector @ D @ c2.projector)
    return out


def check_dd_split(f: AnalyticFn, X1, X2, seed: int = 0, tolerances: Tolerances = DEFAULT) -> CheckResult:
    """``T_{f^[1]}^{X1,X2}(X1 - X2) = DOI part + mu``."""
    d1 = as_decomposition(X1, tolerances)
    d2 = as_decomposition(X2, tolerances)
    _require_gap(d1, d2, tolerances)
    lhs = gdoi(divided_difference(f, 1), d1, d2, _mat(X1) - _mat(X2), tolerances=tolerances).total
    mu = mu_term(f, d1, d2, tolerances)
    rhs = doi_part(f, d1, d2) + mu
    residual = _rel(lhs - rhs, lhs)
    threshold = _threshold(f, tolerances.perturbation_poly, tolerances.dd_split)
    cls = classify_mu(mu, tolerances=tolerances)
    return CheckResult(
        "dd_split", seed, residual, threshold, residual <= threshold,
        {"f": f.label, "mu_norm": operator_norm(mu), "mu_class": list(cls.as_tuple())},
    )


def check_mu_hermitian(f: AnalyticFn, X1, X2, seed: int = 0, tolerances: Tolerances = DEFAULT) -> CheckResult:
    """For Hermitian X1, X2 there are no nilpotent parts, so mu vanishes."""
    mu = mu_term(f, X1, X2, tolerances)
    residual = operator_norm(mu)
    cls = classify_mu(mu, tolerances=tolerances)
    return CheckResult(
        "mu_hermitian", seed, residual, tolerances.mu_hermitian, residual <= tolerances.mu_hermitian,
        {"f": f.label, "mu_class": list(cls.as_tuple())},
    )


def _poly_of_matrix(coeffs, X) -> np.ndarray:
    out = np.zeros_like(X)
    power = np.eye(X.shape[0], dtype=np.complex128)
    for c in coeffs:
        out = out + c * power
        power = power @ X
    return out


def check_nilpotent_mu(f: AnalyticFn, shared_base: JordanSpec, seed: int, tolerances: Tolerances = DEFAULT,
                       coeffs1=None, coeffs2=None) -> CheckResult:
    """mu is nilpotent when X1 and X2 are polynomials in one matrix.

    ``X = S J S^-1`` is drawn from ``shared_base``; ``X1 = p1(X)`` and
    ``X2 = p2(X)`` with seeded low-degree polynomials unless coefficients are
    given.  The check powers mu up to ``k = max m1 + max m2``.
    """
    rng = np.random.default_rng(seed)
    X, _ = random_jordan_matrix(shared_base, rng)
    if coeffs1 is None:
        coeffs1 = [complex(*rng.uniform(-0.5, 0.5, 2)), 1.0, complex(*rng.uniform(-0.2, 0.2, 2))]
    if coeffs2 is None:
        coeffs2 = [complex(*rng.uniform(-0.5, 0.5, 2)), complex(rng.uniform(0.5, 1.5), 0.0)]
    X1 = _poly_of_matrix(coeffs1, X)
    X2 = _poly_of_matrix(coeffs2, X)

    def tol_for(coeffs):
        lams = [sum(c * lam**k for k, c in enumerate(coeffs)) for lam in shared_base.eigenvalues]
        sep = min((abs(a - b) for i, a in enumerate(lams) for b in lams[i + 1:]), default=1.0)
        return tolerances.with_overrides({"cluster_abs": 0.25 * sep}) if sep < math.inf else tolerances

    d1 = decompose(X1, tolerances=tol_for(coeffs1))
    d2 = decompose(X2, tolerances=tol_for(coeffs2))
    mu = mu_term(f, d1, d2, tolerances)
    r = operator_norm(mu)
    scale = max(1.0, r)
    K = d1.max_index + d2.max_index
    power = mu.copy()
    smallest = None
    norm_K = r
    for k in range(1, K + 1):
        nk = operator_norm(power)
        if smallest is None and nk <= tolerances.nilpotent * scale**k:
            smallest = k
        if k == K:
            norm_K = nk
        power = power @ mu
    threshold = tolerances.nilpotent * scale**K
    return CheckResult(
        "nilpotent_mu", seed, norm_K, threshold, norm_K <= threshold,
        {
            "f": f.label,
            "k_bound": K,
            "observed_index": smallest if smallest is not None else -1,
            "mu_norm": r,
            "mu_class": list(classify_mu(mu, tolerances=tolerances).as_tuple()),
        },
    )


# telescope, derivative ---------------------------------------------------

def check_telescope(f: AnalyticFn, A, B, X, Y, seed: int = 0, tolerances: Tolerances = DEFAULT) -> CheckResult:
    """``T_{f^[1]}^{A,X}(Y) - T_{f^[1]}^{B,X}(Y) = T_{f^[2]}^{A,B,X}(A - B, Y)``."""
    dA, dB, dX = (as_decomposition(M, tolerances) for M in (A, B, X))
    f1 = divided_difference(f, 1)
    lhs = gdoi(f1, dA, dX, Y, tolerances=tolerances).total - gdoi(f1, dB, dX, Y, tolerances=tolerances).total
    rhs = gtoi(divided_difference(f, 2), dA, dB, dX, _mat(A) - _mat(B), Y, tolerances=tolerances).total
    residual = _rel(lhs - rhs, lhs)
    threshold = _threshold(f, tolerances.telescope_poly, tolerances.telescope)
    return CheckResult("telescope", seed, residual, threshold, residual <= threshold, {"f": f.label})


def _path_tolerances(lams, tolerances: Tolerances) -> Tolerances:
    lams = list(lams)
    sep = min((abs(a - b) for i, a in enumerate(lams) for b in lams[i + 1:]), default=1.0)
    return tolerances.with_overrides({"cluster_abs": 0.25 * sep})


def check_derivative(f: AnalyticFn, path: str, seed: int, steps=None, tolerances: Tolerances = DEFAULT,
                     base: JordanSpec | None = None) -> tuple[CheckResult, ConvergenceTrace]:
    """Central differences of ``f(X(t))`` at ``t = 0`` against ``T_{f^[1]}^{X,X}(X'(0))``.

    Parameters
    ----------
    path : {"conjugation", "affine"}
        ``conjugation``: ``X(t) = S(t) J S(t)^-1`` with ``S(t) = S0 + t S1``,
        so ``X'(0) = [S1 S0^-1, X(0)]`` and the Jordan type never changes.
        ``affine``: ``X(t) = X0 + t E`` with diagonalizable ``X0`` whose
        eigenvalues stay distinct for small ``|t|``.
    steps : sequence of float, optional
        Decreasing step sizes; default ``0.05 * 2^-k`` for ``k = 0..6``.
    """
    rng = np.random.default_rng(seed)
    steps = tuple(float(h) for h in (steps if steps is not None else [0.05 * 2.0**-k for k in range(7)]))
    if path == "conjugation":
        spec = base or JordanSpec(((0.3, (2,)), (-0.4 + 0.3j, (1,))), 1.0)
        J = jordan_matrix(spec)
        n = spec.dim
        S0 = random_unitary(n, rng) @ np.diag(np.geomspace(1.0, 2.0, n)) @ random_unitary(n, rng)
        S1 = 0.3 * (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2 * n)

        def X_at(t):
            S = S0 + t * S1
            return S @ J @ np.linalg.inv(S)

        X0 = X_at(0.0)
        K = S1 @ np.linalg.inv(S0)
        Xdot = K @ X0 - X0 @ K
        lams = spec.eigenvalues
    elif path == "affine":
        spec = base or JordanSpec(((0.3, (1,)), (-0.4 + 0.3j, (1,)), (0.1 - 0.5j, (1,))), 1.0)
        if any(max(sizes) > 1 or len(sizes) > 1 for _, sizes in spec.blocks):
            raise PathError("affine path needs distinct simple eigenvalues")
        X0, _ = random_jordan_matrix(JordanSpec(spec.blocks, max(spec.similarity_condition, 2.0)), rng)
        n = spec.dim
        E = 0.3 * (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2 * n)

        def X_at(t):
            return X0 + t * E

        Xdot = E
        lams = spec.eigenvalues
    else:
        raise PathError(f"unknown path {path!r}")

    tol = _path_tolerances(lams, tolerances)
    sep0 = min((abs(a - b) for i, a in enumerate(lams) for b in lams[i + 1:]), default=math.inf)
    exact = gdoi(divided_difference(f, 1), X0, X0, Xdot, tolerances=tol).total
    errors = []
    for h in steps:
        dp, dm = decompose(X_at(h), tolerances=tol), decompose(X_at(-h), tolerances=tol)
        if len(dp) != len(lams) or len(dm) != len(lams):
            raise PathError(f"eigenvalue collision along the path at step {h}")
        if path == "affine" and min(spectral_min_sep(dp), spectral_min_sep(dm)) < 0.25 * sep0:
            raise PathError(f"eigenvalues approach each other at step {h}")
        fd = (func_of_operator(f, dp, tol) - func_of_operator(f, dm, tol)) / (2 * h)
        errors.append(operator_norm(fd - exact))
    scale = 1.0 + operator_norm(exact)
    slope = loglog_slope(steps, errors)
    min_err = min(errors)
    if max(errors) <= 1e-12 * scale:
        # central differences are exact for quadratics along affine paths
        passed = True
        residual = max(errors) / scale
    else:
        passed = (tolerances.derivative_slope_low <= slope <= tolerances.derivative_slope_high
                  and min_err <= tolerances.derivative_min_error)
        residual = min_err
    trace = ConvergenceTrace(steps, tuple(errors), slope)
    result = CheckResult(
        f"derivative.{path}", seed, residual, tolerances.derivative_min_error, passed,
        {"f": f.label, "slope": slope, "min_error": min_err, "errors": list(errors), "steps": list(steps)},
    )
    return result, trace


def spectral_min_sep(d: SpectralDecomposition) -> float:
    lams = d.eigenvalues
    return min((abs(a - b) for i, a in enumerate(lams) for b in lams[i + 1:]), default=math.inf)


def check_power_rule(m: int, X, Xdot, seed: int = 0, tolerances: Tolerances = DEFAULT) -> CheckResult:
    """``T_{(z^m)^[1]}^{X,X}(D) = sum_{i<m} X^i D X^(m-1-i)`` exactly."""
    from .funcspace import monomial

    A = _mat(X)
    D = as_matrix(Xdot)
    lhs = gdoi(divided_difference(monomial(m), 1), X, X, D, tolerances=tolerances).total
    rhs = sum(np.linalg.matrix_power(A, i) @ D @ np.linalg.matrix_power(A, m - 1 - i) for i in range(m))
    residual = _rel(lhs - rhs, rhs)
    thr = tolerances.perturbation_poly
    return CheckResult("power_rule", seed, residual, thr, residual <= thr, {"m": m})


# bounds ------------------------------------------------------------------

def _sandwich_result(name, seed, lower, observed, upper, refined, details) -> CheckResult:
    slack = 1e-10 * (1.0 + observed)
    violation = max(0.0, lower - observed, observed - upper)
    if refined is not None:
        violation = max(violation, refined - observed)
    residual = violation / (1.0 + observed)
    return CheckResult(name, seed, residual, 1e-10, violation <= slack, details)


def check_gdoi_bounds(beta: AnalyticFn, X1, X2, Y, seed: int = 0, tolerances: Tolerances = DEFAULT) -> CheckResult:
    b = norm_bounds("gdoi", beta, X1, X2, Y, tolerances=tolerances)
    return _sandwich_result("bounds.gdoi", seed, b.lower, b.observed, b.upper, b.refined_lower, _bound_details(b, beta))


def check_gtoi_bounds(beta: AnalyticFn, X1, X2, X3, Y1, Y2, seed: int = 0, tolerances: Tolerances = DEFAULT) -> CheckResult:
    b = norm_bounds("gtoi", beta, X1, X2, X3, Y1, Y2, tolerances=tolerances)
    return _sandwich_result("bounds.gtoi", seed, b.lower, b.observed, b.upper, b.refined_lower, _bound_details(b, beta))


def _bound_details(b, beta) -> dict:
    return {
        "beta": beta.label,
        "lower": b.lower,
        "observed": b.observed,
        "upper": b.upper,
        "upper_literal": b.upper_literal,
        "upper_triangle": b.upper_triangle,
        "refined_lower": b.refined_lower,
        "hypothesis_eq3_holds": b.hypothesis_holds,
        "hypothesis_real_reading_holds": b.hypothesis_holds_real,
    }


def check_lipschitz(f: AnalyticFn, X1, X2, seed: int = 0, tolerances: Tolerances = DEFAULT) -> CheckResult:
    """``lower <= ||f(X1) - f(X2)|| <= upper`` with beta = f^[1], Y = X1 - X2."""
    d1 = as_decomposition(X1, tolerances)
    d2 = as_decomposition(X2, tolerances)
    _require_gap(d1, d2, tolerances)
    f1 = divided_difference(f, 1)
    b = norm_bounds("gdoi", f1, d1, d2, _mat(X1) - _mat(X2), tolerances=tolerances)
    observed = operator_norm(func_of_operator(f, d1, tolerances) - func_of_operator(f, d2, tolerances))
    details = _bound_details(b, f1)
    details["observed"] = observed
    details["transform_norm"] = b.observed
    return _sandwich_result("lipschitz", seed, b.lower, observed, b.upper, b.refined_lower, details)


# algebra -----------------------------------------------------------------

def check_homomorphism(beta: AnalyticFn, gamma: AnalyticFn, X1, X2, Y, c1: complex = 1.0, c2: complex = 1.0,
                       seed: int = 0, tolerances: Tolerances = DEFAULT) -> CheckResult:
    """Linearity in the symbol and ``T_{beta gamma}(Y) = T_beta(T_gamma(Y))``."""
    d1 = as_decomposition(X1, tolerances)
    d2 = as_decomposition(X2, tolerances)
    Tb = gdoi(beta, d1, d2, Y, tolerances=tolerances).total
    Tg = gdoi(gamma, d1, d2, Y, tolerances=tolerances).total
    combo = gdoi(beta.scale(c1) + gamma.scale(c2), d1, d2, Y, tolerances=tolerances).total
    ref_lin = c1 * Tb + c2 * Tg
    lin = _rel(combo - ref_lin, ref_lin)
    prod = gdoi(beta * gamma, d1, d2, Y, tolerances=tolerances).total
    nested = gdoi(beta, d1, d2, Tg, tolerances=tolerances).total
    comp = _rel(prod - nested, nested)
    residual = max(lin, comp)
    thr = tolerances.homomorphism
    return CheckResult(
        "homomorphism", seed, residual, thr, residual <= thr,
        {"beta": beta.label, "gamma": gamma.label, "linearity": lin, "composition": comp},
    )


def check_independence(X1, X2, Y, seed: int = 0, tolerances: Tolerances = DEFAULT) -> CheckResult:
    """Rank of the vectorized terms ``N1^q1 P1 Y N2^q2 P2`` against their count."""
    d1 = as_decomposition(X1, tolerances)
    d2 = as_decomposition(X2, tolerances)
    Y = as_matrix(Y)
    cols = []
    for c1 in d1:
        for c2 in d2:
            for q1 in range(c1.index):
                L = c1.nilpotent_power(q1) @ Y
                for q2 in range(c2.index):
                    cols.append((L @ c2.nilpotent_power(q2)).ravel())
    M = np.array(cols).T
    norms = np.linalg.norm(M, axis=0)
    top = float(norms.max()) if norms.size else 0.0
    if top == 0.0:
        raise DegenerateInputError("every term vanishes")
    nonzero = int(np.sum(norms > tolerances.rank * top))
    s = np.linalg.svd(M, compute_uv=False)
    rank = int(np.sum(s > tolerances.rank * s[0]))
    return CheckResult(
        "independence", seed, float(nonzero - rank), 0.0, rank == nonzero,
        {"terms": len(cols), "nonzero": nonzero, "rank": rank,
         "categories": _category_counts(d1, d2)},
    )


def _category_counts(d1, d2) -> dict:
    out = {"A1": 0, "A2": 0, "A3": 0, "A4": 0}
    for c1 in d1:
        for c2 in d2:
            out["A1"] += 1
            out["A2"] += c2.index - 1
            out["A3"] += c1.index - 1
            out["A4"] += (c1.index - 1) * (c2.index - 1)
    return out


# continuity --------------------------------------------------------------

def _conjugation_path(X, G, shift, delta):
    S = np.eye(X.shape[0]) + delta * G
    return S @ X @ np.linalg.inv(S) + delta * shift * np.eye(X.shape[0])


def continuity_experiment(beta: AnalyticFn, base, levels: int = 20, seed: int = 0, amplitude: float = 0.01,
                          tolerances: Tolerances = DEFAULT, zero_path: bool = False) -> tuple[CheckResult, ConvergenceTrace]:
    """Error of ``T_beta`` along a structure-preserving path toward ``base``.

    ``X_{i,l} = S_i(d) X_i S_i(d)^-1 + d s_i I`` with ``S_i(d) = I + d G_i``,
    ``d = 2^-l`` for ``l = 0..levels``.  ``G_i`` has operator norm
    ``amplitude`` and ``|s_i| = amplitude``, both seeded.  Passing requires
    ``e_last <= continuity_ratio * e_first`` and slope >= continuity_slope.
    """
    X1, X2, Y = (as_matrix(M) for M in base)
    n = X1.shape[0]
    rng = np.random.default_rng(seed)

    def draw():
        G = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        G *= amplitude / operator_norm(G)
        s = amplitude * np.exp(2j * np.pi * rng.uniform())
        return G, s

    (G1, s1), (G2, s2) = draw(), draw()
    ref = gdoi(beta, X1, X2, Y, tolerances=tolerances).total
    d1, d2 = as_decomposition(X1, tolerances), as_decomposition(X2, tolerances)
    deltas = [2.0**-l for l in range(levels + 1)]
    errors = []
    for delta in deltas:
        if zero_path:
            A, B = X1, X2
        else:
            A = _conjugation_path(X1, G1, s1, delta)
            B = _conjugation_path(X2, G2, s2, delta)
        dA, dB = decompose(A, tolerances=tolerances), decompose(B, tolerances=tolerances)
        if dA.indices != d1.indices or dB.indices != d2.indices:
            raise PathError(f"Jordan structure changed along the path at delta={delta}")
        errors.append(operator_norm(gdoi(beta, dA, dB, Y, tolerances=tolerances).total - ref))
    slope = loglog_slope(deltas, errors)
    e1, eL = errors[0], errors[-1]
    if max(errors) == 0.0:
        passed = True
    else:
        passed = eL <= tolerances.continuity_ratio * e1 and slope >= tolerances.continuity_slope
    trace = ConvergenceTrace(tuple(deltas), tuple(errors), slope)
    result = CheckResult(
        "continuity", seed, eL / e1 if e1 > 0 else 0.0, tolerances.continuity_ratio, passed,
        {"beta": beta.label, "slope": slope, "e_first": e1, "e_last": eL, "levels": levels},
    )
    return result, trace


def generic_perturbation_trace(beta: AnalyticFn, X1, X2, Y, levels: int = 12, seed: int = 0,
                               tolerances: Tolerances = DEFAULT) -> ConvergenceTrace:
    """GDOI error under a generic additive perturbation ``X + d E``.

    Reported only: for defective inputs the perturbed matrices change Jordan
    type, so the finite spectral data jumps and no rate is asserted.
    """
    X1, X2, Y = (as_matrix(M) for M in (X1, X2, Y))
    n = X1.shape[0]
    rng = np.random.default_rng(seed)
    E1 = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    E2 = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    E1 /= operator_norm(E1)
    E2 /= operator_norm(E2)
    ref = gdoi(beta, X1, X2, Y, tolerances=tolerances).total
    deltas, errors = [], []
    for l in range(1, levels + 1):
        delta = 2.0**-l
        try:
            val = gdoi(beta, X1 + delta * E1, X2 + delta * E2, Y, tolerances=tolerances).total
            errors.append(operator_norm(val - ref))
        except Exception:
            errors.append(float("nan"))
        deltas.append(delta)
    finite = [(d, e) for d, e in zip(deltas, errors) if np.isfinite(e) and e > 0]
    slope = loglog_slope([d for d, _ in finite], [e for _, e in finite]) if len(finite) > 1 else float("nan")
    return ConvergenceTrace(tuple(deltas), tuple(errors), slope)


# classical reference -----------------------------------------------------

def schur_doi(beta: AnalyticFn, X1, X2, Y) -> np.ndarray:
    """Classical DOI for Hermitian X1, X2: entrywise ``beta(l_i, m_j)`` in eigenbases."""
    l1, U = np.linalg.eigh(as_matrix(X1))
    l2, V = np.linalg.eigh(as_matrix(X2))
    B = np.array([[beta(a, b) for b in l2] for a in l1])
    return U @ (B * (U.conj().T @ as_matrix(Y) @ V)) @ V.conj().T
