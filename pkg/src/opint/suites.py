"""Seeded trial generation and the verification suites.

Each suite is a cycle of trial kinds; trial ``i`` of a suite runs kind
``i mod len(kinds)`` with a generator seeded from ``(suite seed, i)``, so
results never depend on execution order or worker count.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .config import DEFAULT, Tolerances
from .errors import OpintError
from .funcspace import (
    compose,
    cos_fn,
    divided_difference,
    exp_fn,
    lift,
    monomial,
    polynomial,
    projection,
    sin_fn,
)
from .gdoi import func_of_operator, func_of_two_operators, gdoi
from .linalg import JordanSpec, matrix_exp_oracle, operator_norm, random_jordan_matrix, random_unitary
from .spectral import decompose
from .theorems import (
    CheckResult,
    check_derivative,
    check_dd_split,
    check_gdoi_bounds,
    check_gtoi_bounds,
    check_homomorphism,
    check_independence,
    check_lipschitz,
    check_mu_hermitian,
    check_nilpotent_mu,
    check_perturbation,
    check_power_rule,
    check_telescope,
    continuity_experiment,
    schur_doi,
)

__all__ = ["SUITES", "SuiteReport", "run_suite", "run_trial", "trial_seed", "random_spec", "CENTERS"]

# eigenvalue disk centers: a 0.5-spaced lattice inside |z| <= 1.2
CENTERS = tuple(
    complex(0.5 * a, 0.5 * b) for a in range(-2, 3) for b in range(-2, 3) if abs(complex(0.5 * a, 0.5 * b)) <= 1.2
)
DISK_RADIUS = 0.15
# eigenvalues of one matrix sit in distinct disks, so they are >= 0.2 apart
HARNESS_TOLERANCES = DEFAULT.with_overrides({"cluster_abs": 0.05})


def trial_seed(seed: int, index: int) -> int:
    """64-bit per-trial seed derived from the suite seed and the trial index."""
    state = np.random.SeedSequence([int(seed) & 0xFFFFFFFFFFFFFFFF, int(index)]).generate_state(2, np.uint32)
    return int(state[0]) << 32 | int(state[1])


def random_spec(rng, dim: int, centers, cond_range=(1.0, 10.0), max_block: int = 3,
                defective: bool | None = None, simple: bool = False) -> JordanSpec:
    """Random JordanSpec of size ``dim`` with one eigenvalue per chosen disk.

    ``defective=True`` forces a block of size >= 2, ``False`` forbids one.
    ``simple=True`` gives ``dim`` distinct eigenvalues of multiplicity one.
    """
    if simple:
        defective = False
    max_block = 1 if defective is False else max(1, min(max_block, dim))
    while True:
        sizes, left = [], dim
        while left > 0:
            s = int(rng.integers(1, min(left, max_block) + 1))
            sizes.append(s)
            left -= s
        if defective and max(sizes) < 2:
            continue
        if len(sizes) > len(centers):
            continue
        break
    k = int(rng.integers(max(1, math.ceil(len(sizes) / 3)), len(sizes) + 1))
    if simple:
        k = len(sizes)
    k = min(k, len(centers))
    groups = [[] for _ in range(k)]
    for i, s in enumerate(sizes):
        groups[i % k].append(s)
    chosen = rng.permutation(len(centers))[:k]
    lams = []
    for idx in chosen:
        r = DISK_RADIUS * math.sqrt(rng.uniform())
        lams.append(centers[idx] + r * complex(math.cos(2 * math.pi * rng.uniform()), math.sin(2 * math.pi * rng.uniform())))
    lo, hi = cond_range
    cond = 1.0 if hi <= 1.0 else float(10 ** rng.uniform(math.log10(lo), math.log10(hi)))
    return JordanSpec(tuple(zip(lams, groups)), cond)


def _split_centers(rng, parts: int):
    perm = rng.permutation(len(CENTERS))
    size = len(CENTERS) // parts
    return [tuple(CENTERS[j] for j in perm[i * size:(i + 1) * size]) for i in range(parts)]


def _gaussian(rng, n) -> np.ndarray:
    return (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / math.sqrt(2 * n)


def _dim(rng, max_dim: int, lo: int = 2, cap: int = 6) -> int:
    return int(rng.integers(lo, max(lo, min(max_dim, cap)) + 1))


def _matrices(rng, count: int, max_dim: int, defective=None, cap: int = 6):
    """``count`` same-size matrices with spectra in pairwise disjoint disk sets."""
    n = _dim(rng, max_dim, cap=cap)
    centers = _split_centers(rng, count)
    mats, specs = [], []
    for i in range(count):
        d = defective[i] if isinstance(defective, (list, tuple)) else defective
        spec = random_spec(rng, n, centers[i], defective=d)
        X, _ = random_jordan_matrix(spec, rng)
        mats.append(X)
        specs.append(spec)
    return mats, specs


def _hermitian(rng, n, centers) -> np.ndarray:
    lams = [c.real + DISK_RADIUS * (2 * rng.uniform() - 1) for c in centers[:n]]
    U = random_unitary(n, rng)
    H = U @ np.diag(lams) @ U.conj().T
    return (H + H.conj().T) / 2


def _hermitian_centers(rng):
    # real-axis disks 0.5 apart, shuffled and split in two
    reals = [complex(x, 0.0) for x in (-2.0, -1.5, -1.0, -0.5, 0.0, 0.5, 1.0, 1.5, 2.0, 2.5)]
    perm = rng.permutation(len(reals))
    return [reals[j] for j in perm[:5]], [reals[j] for j in perm[5:]]


def _bivariate_catalog():
    x, y = projection(0, 2), projection(1, 2)
    return [
        ("exp(x)*y", lift(exp_fn(), 0, 2) * y),
        ("x*y", x * y),
        ("exp^[1]", divided_difference(exp_fn(), 1)),
        ("sin(x)+cos(y)", lift(sin_fn(), 0, 2) + lift(cos_fn(), 1, 2)),
        ("exp(x*y)", compose(exp_fn(), x * y)),
        ("x^2+3y", x * x + y.scale(3.0)),
    ]


# trial kinds -------------------------------------------------------------

def _spectral_decompose(rng, seed, max_dim, tol):
    n = int(rng.integers(2, max(2, min(max_dim, 10)) + 1))
    spec = random_spec(rng, n, CENTERS, cond_range=(1.0, 1e3), max_block=4)
    X, _ = random_jordan_matrix(spec, rng)
    d = decompose(X, tolerances=tol)
    eye = np.eye(n)
    rec = operator_norm(d.reconstruct() - X) / operator_norm(X)
    res = operator_norm(sum(c.projector for c in d) - eye)
    idem = max(operator_norm(c.projector @ c.projector - c.projector) for c in d)
    orth = max([operator_norm(a.projector @ b.projector) for a in d for b in d if a is not b] or [0.0])
    expected = sorted((round(lam.real, 9), round(lam.imag, 9), max(sz)) for lam, sz in spec.blocks)
    found = []
    for c in d:
        lam = min(spec.eigenvalues, key=lambda z: abs(z - c.lam))
        found.append((round(lam.real, 9), round(lam.imag, 9), c.index))
    indices_ok = sorted(found) == expected and len(d) == len(spec.blocks)
    ratios = [rec / 1e-9, res / (1e-10 * n), idem / 1e-10, orth / 1e-10]
    residual = max(ratios)
    return CheckResult(
        "spectral.decompose", seed, residual, 1.0, residual <= 1.0 and indices_ok,
        {"dim": n, "spec": spec.to_string(), "reconstruction": rec, "identity": res, "idempotency": idem,
         "orthogonality": orth, "indices_match": indices_ok},
    )


def _spectral_exp(rng, seed, max_dim, tol):
    n = int(rng.integers(2, max(2, min(max_dim, 8)) + 1))
    spec = random_spec(rng, n, CENTERS, cond_range=(2.0, 50.0), max_block=3, defective=True)
    X, _ = random_jordan_matrix(spec, rng)
    got = func_of_operator(exp_fn(), X, tol)
    ref = matrix_exp_oracle(X)
    residual = operator_norm(got - ref) / operator_norm(ref)
    return CheckResult("spectral.exp_oracle", seed, residual, tol.oracle, residual <= tol.oracle,
                       {"dim": n, "spec": spec.to_string()})


def _gdoi_reduction(rng, seed, max_dim, tol):
    n = _dim(rng, max_dim, cap=5)
    c1, c2 = _hermitian_centers(rng)
    X1, X2 = _hermitian(rng, n, c1), _hermitian(rng, n, c2)
    Y = _gaussian(rng, n)
    label, beta = _bivariate_catalog()[int(rng.integers(0, 6))]
    got = gdoi(beta, X1, X2, Y, tolerances=tol)
    ref = schur_doi(beta, X1, X2, Y)
    residual = operator_norm(got.total - ref) / (1.0 + operator_norm(ref))
    extra = max(operator_norm(got.parts[k]) for k in ("A2", "A3", "A4"))
    passed = residual <= tol.doi_reduction and extra == 0.0
    return CheckResult("gdoi.doi_reduction", seed, residual, tol.doi_reduction, passed,
                       {"beta": label, "dim": n, "nilpotent_parts_norm": extra})


def _gdoi_poly_oracle(rng, seed, max_dim, tol):
    (X1, X2), _ = _matrices(rng, 2, max_dim, defective=True)
    n = X1.shape[0]
    Y = _gaussian(rng, n)
    c = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    x, y = projection(0, 2), projection(1, 2)
    beta = None
    ref = np.zeros((n, n), dtype=np.complex128)
    for i in range(3):
        for j in range(3):
            mono = _power(x, i, 2) * _power(y, j, 2)
            beta = mono.scale(c[i, j]) if beta is None else beta + mono.scale(c[i, j])
            ref += c[i, j] * np.linalg.matrix_power(X1, i) @ Y @ np.linalg.matrix_power(X2, j)
    got = gdoi(beta, X1, X2, Y, tolerances=tol).total
    residual = operator_norm(got - ref) / (1.0 + operator_norm(ref))
    thr = 1e-10
    return CheckResult("gdoi.poly_oracle", seed, residual, thr, residual <= thr, {"dim": n})


def _power(f, k, arity):
    from .funcspace import constant

    out = constant(1.0, arity)
    for _ in range(k):
        out = out * f
    return out


def _gdoi_two_operator(rng, seed, max_dim, tol):
    (X1, X2), _ = _matrices(rng, 2, max_dim, defective=True)
    f = lift(exp_fn(), 0, 2) * lift(exp_fn(), 1, 2)
    got = func_of_two_operators(f, X1, X2, tol)
    ref = matrix_exp_oracle(X1) @ matrix_exp_oracle(X2)
    residual = operator_norm(got - ref) / operator_norm(ref)
    return CheckResult("gdoi.two_operator_oracle", seed, residual, tol.oracle, residual <= tol.oracle,
                       {"dim": X1.shape[0]})


def _pert(f_factory, identity_Y=False):
    def run(rng, seed, max_dim, tol):
        (X1, X2), _ = _matrices(rng, 2, max_dim)
        n = X1.shape[0]
        Y = np.eye(n, dtype=np.complex128) if identity_Y else _gaussian(rng, n)
        r = check_perturbation(f_factory(), X1, X2, Y, seed, tol)
        name = "perturbation.identity" if identity_Y else "perturbation.formula"
        return CheckResult(name, seed, r.residual, r.threshold, r.passed, r.details)

    return run


def _dd_split(f_factory):
    def run(rng, seed, max_dim, tol):
        (X1, X2), _ = _matrices(rng, 2, max_dim, defective=True)
        r = check_dd_split(f_factory(), X1, X2, seed, tol)
        return CheckResult("perturbation.dd_split", seed, r.residual, r.threshold, r.passed, r.details)

    return run


def _mu_hermitian(rng, seed, max_dim, tol):
    n = _dim(rng, max_dim, cap=5)
    c1, c2 = _hermitian_centers(rng)
    r = check_mu_hermitian(exp_fn(), _hermitian(rng, n, c1), _hermitian(rng, n, c2), seed, tol)
    return CheckResult("perturbation.mu_hermitian", seed, r.residual, r.threshold, r.passed, r.details)


def _nilpotent_mu(rng, seed, max_dim, tol):
    n = _dim(rng, max_dim, cap=6)
    spec = random_spec(rng, n, CENTERS, cond_range=(1.0, 5.0), defective=True)
    f = [exp_fn, lambda: monomial(3), sin_fn][int(rng.integers(0, 3))]()
    r = check_nilpotent_mu(f, spec, seed, tol)
    return CheckResult("perturbation.nilpotent_mu", seed, r.residual, r.threshold, r.passed, r.details)


def _bounds_gdoi(rng, seed, max_dim, tol):
    (X1, X2), _ = _matrices(rng, 2, max_dim, defective=True)
    Y = _gaussian(rng, X1.shape[0])
    beta = lift(exp_fn(), 0, 2) * projection(1, 2)
    return check_gdoi_bounds(beta, X1, X2, Y, seed, tol)


def _bounds_gtoi(rng, seed, max_dim, tol):
    (X1, X2, X3), _ = _matrices(rng, 3, max_dim, defective=True, cap=4)
    n = X1.shape[0]
    beta = divided_difference(exp_fn(), 2)
    return check_gtoi_bounds(beta, X1, X2, X3, _gaussian(rng, n), _gaussian(rng, n), seed, tol)


def _bounds_lipschitz(rng, seed, max_dim, tol):
    (X1, X2), _ = _matrices(rng, 2, max_dim, defective=True)
    return check_lipschitz(exp_fn(), X1, X2, seed, tol)


def _homomorphism(rng, seed, max_dim, tol):
    (X1, X2), _ = _matrices(rng, 2, max_dim, defective=True)
    cat = _bivariate_catalog()
    i, j = rng.choice(len(cat), size=2, replace=False)
    c1 = complex(rng.standard_normal(), rng.standard_normal())
    c2 = complex(rng.standard_normal(), rng.standard_normal())
    r = check_homomorphism(cat[i][1], cat[j][1], X1, X2, _gaussian(rng, X1.shape[0]), c1, c2, seed, tol)
    return r


def _telescope(f_factory):
    def run(rng, seed, max_dim, tol):
        (A, B, X), _ = _matrices(rng, 3, max_dim, cap=4)
        return check_telescope(f_factory(), A, B, X, _gaussian(rng, A.shape[0]), seed, tol)

    return run


def _derivative(f_factory, path):
    def run(rng, seed, max_dim, tol):
        n = _dim(rng, max_dim, cap=5)
        if path == "conjugation":
            base = random_spec(rng, n, CENTERS, cond_range=(1.0, 1.0), defective=True)
        else:
            base = random_spec(rng, n, CENTERS, cond_range=(1.0, 1.0), simple=True)
        r, _ = check_derivative(f_factory(), path, seed, tolerances=tol, base=base)
        return r

    return run


def _power_rule(rng, seed, max_dim, tol):
    (X,), _ = _matrices(rng, 1, max_dim, defective=True)
    m = int(rng.integers(1, 6))
    return check_power_rule(m, X, _gaussian(rng, X.shape[0]), seed, tol)


def _continuity(kind):
    def run(rng, seed, max_dim, tol):
        if kind == "hermitian":
            n = _dim(rng, max_dim, cap=5)
            c1, c2 = _hermitian_centers(rng)
            X1, X2 = _hermitian(rng, n, c1), _hermitian(rng, n, c2)
            beta = projection(0, 2) * projection(1, 2)
        else:
            (X1, X2), _ = _matrices(rng, 2, max_dim, defective=(kind == "defective"))
            beta = divided_difference(exp_fn(), 1) if kind == "diagonalizable" else lift(exp_fn(), 0, 2) * projection(1, 2)
        Y = _gaussian(rng, X1.shape[0])
        r, _ = continuity_experiment(beta, (X1, X2, Y), levels=20, seed=seed, tolerances=tol)
        return CheckResult(f"continuity.{kind}", seed, r.residual, r.threshold, r.passed, r.details)

    return run


def _independence(rng, seed, max_dim, tol):
    (X1, X2), _ = _matrices(rng, 2, max_dim, defective=True, cap=5)
    return check_independence(X1, X2, _gaussian(rng, X1.shape[0]), seed, tol)


KINDS = {
    "spectral.decompose": _spectral_decompose,
    "spectral.exp_oracle": _spectral_exp,
    "gdoi.doi_reduction": _gdoi_reduction,
    "gdoi.poly_oracle": _gdoi_poly_oracle,
    "gdoi.two_operator_oracle": _gdoi_two_operator,
    "perturbation.z2": _pert(lambda: monomial(2)),
    "perturbation.z3": _pert(lambda: monomial(3)),
    "perturbation.exp": _pert(exp_fn),
    "perturbation.exp_identity": _pert(exp_fn, identity_Y=True),
    "perturbation.dd_split_exp": _dd_split(exp_fn),
    "perturbation.dd_split_z2": _dd_split(lambda: monomial(2)),
    "perturbation.mu_hermitian": _mu_hermitian,
    "perturbation.nilpotent_mu": _nilpotent_mu,
    "bounds.gdoi": _bounds_gdoi,
    "bounds.gtoi": _bounds_gtoi,
    "bounds.lipschitz": _bounds_lipschitz,
    "homomorphism": _homomorphism,
    "telescope.exp": _telescope(exp_fn),
    "telescope.z2": _telescope(lambda: monomial(2)),
    "telescope.sin": _telescope(sin_fn),
    "derivative.z3_conjugation": _derivative(lambda: monomial(3), "conjugation"),
    "derivative.exp_conjugation": _derivative(exp_fn, "conjugation"),
    "derivative.z3_affine": _derivative(lambda: monomial(3), "affine"),
    "derivative.exp_affine": _derivative(exp_fn, "affine"),
    "derivative.power_rule": _power_rule,
    "continuity.diagonalizable": _continuity("diagonalizable"),
    "continuity.defective": _continuity("defective"),
    "continuity.hermitian": _continuity("hermitian"),
    "independence": _independence,
}

SUITES = {
    "spectral": ["spectral.decompose", "spectral.exp_oracle"],
    "gdoi": ["gdoi.doi_reduction", "gdoi.poly_oracle", "gdoi.two_operator_oracle"],
    "perturbation": [
        "perturbation.z2", "perturbation.z3", "perturbation.exp", "perturbation.exp_identity",
        "perturbation.dd_split_exp", "perturbation.dd_split_z2", "perturbation.mu_hermitian",
        "perturbation.nilpotent_mu",
    ],
    "bounds": ["bounds.gdoi", "bounds.gtoi", "bounds.lipschitz"],
    "homomorphism": ["homomorphism"],
    "telescope": ["telescope.exp", "telescope.z2", "telescope.sin"],
    "derivative": [
        "derivative.z3_conjugation", "derivative.exp_conjugation", "derivative.z3_affine",
        "derivative.exp_affine", "derivative.power_rule",
    ],
    "continuity": ["continuity.diagonalizable", "continuity.defective", "continuity.hermitian"],
    "independence": ["independence"],
}
SUITE_NAMES = tuple(SUITES) + ("all",)


def run_trial(kind: str, seed: int, index: int = 0, max_dim: int = 6, tolerances: Tolerances | None = None) -> CheckResult:
    """Run one trial of ``kind``; errors become failed results, never exceptions."""
    ts = trial_seed(seed, index)
    rng = np.random.default_rng(ts)
    tol = tolerances if tolerances is not None else HARNESS_TOLERANCES
    try:
        r = KINDS[kind](rng, ts, max_dim, tol)
    except (OpintError, ValueError, np.linalg.LinAlgError) as exc:
        return CheckResult(kind, ts, float("inf"), 0.0, False, {"error": type(exc).__name__, "message": str(exc)})
    details = dict(r.details)
    details["kind"] = kind
    details["index"] = index
    return CheckResult(kind, ts, r.residual, r.threshold, r.passed, details)


def _job(args):
    return run_trial(*args)


@dataclass
class SuiteReport:
    suite: str
    seed: int
    trials: list
    metadata: dict = field(default_factory=dict)

    @property
    def summary(self) -> dict:
        finite = [t.residual for t in self.trials if math.isfinite(t.residual)]
        worst = max(finite) if finite else 0.0
        if len(finite) < len(self.trials):
            worst = float("inf")
        passed = sum(1 for t in self.trials if t.passed)
        return {"pass": passed, "fail": len(self.trials) - passed, "max_residual": worst}

    def to_json(self, include_metadata: bool = True) -> dict:
        from .theorems import _json_float

        s = self.summary
        out = {
            "suite": self.suite,
            "seed": int(self.seed),
            "trials": [t.to_json() for t in self.trials],
            "summary": {"pass": s["pass"], "fail": s["fail"], "max_residual": _json_float(s["max_residual"])},
        }
        if include_metadata:
            out["metadata"] = self.metadata
        return out

    @classmethod
    def from_json(cls, obj: dict) -> "SuiteReport":
        return cls(str(obj["suite"]), int(obj["seed"]), [CheckResult.from_json(t) for t in obj["trials"]],
                   dict(obj.get("metadata", {})))


def suite_plan(suite: str, trials: int) -> list[str]:
    """Trial kinds in execution order for ``suite``."""
    names = list(SUITES) if suite == "all" else [suite]
    plan = []
    for name in names:
        kinds = SUITES[name]
        plan.extend(kinds[i % len(kinds)] for i in range(trials))
    return plan


def run_suite(suite: str, seed: int, trials: int, max_dim: int = 6, tolerances: Tolerances | None = None,
              jobs: int = 1) -> SuiteReport:
    """Run ``trials`` trials of a suite (per member suite for ``"all"``)."""
    if suite not in SUITE_NAMES:
        raise KeyError(f"unknown suite {suite!r}")
    tol = tolerances if tolerances is not None else HARNESS_TOLERANCES
    plan = suite_plan(suite, trials)
    args = [(kind, seed, i, max_dim, tol) for i, kind in enumerate(plan)]
    start = time.perf_counter()
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_job, args, chunksize=max(1, len(args) // (4 * jobs))))
    else:
        results = [_job(a) for a in args]
    elapsed = time.perf_counter() - start
    meta = {"elapsed_seconds": round(elapsed, 3), "jobs": jobs, "finished_at": time.strftime("%Y-%m-%dT%H:%M:%S")}
    return SuiteReport(suite, seed, results, meta)
