"""Acceptance criteria: one test, and one printed pass/fail line, per criterion.

Every criterion runs on fixed seeds with the trial counts and tolerances of
the build contract.  A failing criterion is reported as such; nothing here
retries with other seeds.
"""

import json

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES
from opint.funcspace import monomial
from opint.report import to_json_text
from opint.suites import HARNESS_TOLERANCES, SUITES, run_suite, run_trial
from opint.theorems import check_derivative, check_power_rule
from opint.linalg import JordanSpec, random_jordan_matrix


def _record(number, title, ok, detail):
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {title} -- {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


def _run(kinds, total, seed, max_dim=6):
    return [run_trial(kinds[i % len(kinds)], seed, i, max_dim=max_dim) for i in range(total)]


def _fails(results):
    return [r for r in results if not r.passed]


def _worst(results, key=None):
    vals = [r.details[key] if key else r.residual for r in results]
    return max(vals) if vals else 0.0


def test_criterion_01_spectral_soundness():
    res = _run(["spectral.decompose"], 500, 101, max_dim=10)
    fails = _fails(res)
    dims = sorted({r.details.get("dim") for r in res if "dim" in r.details})
    ok = not fails and dims[0] == 2 and dims[-1] == 10
    detail = (f"500 matrices dims {dims[0]}-{dims[-1]}, failures {len(fails)}; worst reconstruction "
              f"{_worst(res, 'reconstruction'):.1e} (<=1e-9), identity {_worst(res, 'identity'):.1e} (<=1e-10 n), "
              f"idempotency {_worst(res, 'idempotency'):.1e}, orthogonality {_worst(res, 'orthogonality'):.1e} (<=1e-10)")
    assert _record(1, "spectral soundness", ok, detail), [r.details for r in fails[:3]]


def test_criterion_02_exp_oracle():
    res = _run(["spectral.exp_oracle"], 200, 102, max_dim=8)
    fails = _fails(res)
    detail = f"200 non-normal matrices, failures {len(fails)}, worst relative error {_worst(res):.1e} (<=1e-8)"
    assert _record(2, "spectral-mapping oracle", not fails, detail)


def test_criterion_03_doi_reduction():
    res = _run(["gdoi.doi_reduction"], 200, 103)
    fails = _fails(res)
    detail = f"200 Hermitian pairs, failures {len(fails)}, worst residual {_worst(res):.1e} (<=1e-12)"
    assert _record(3, "DOI reduction", not fails, detail)


def test_criterion_04_perturbation_identity():
    res = _run(["perturbation.z2", "perturbation.z3", "perturbation.exp"], 200, 104)
    fails = _fails(res)
    gap = min(r.details["gap"] for r in res)
    poly = [r for r in res if r.details["kind"] != "perturbation.exp"]
    expo = [r for r in res if r.details["kind"] == "perturbation.exp"]
    ok = not fails and gap >= 0.1 and _worst(poly) <= 1e-12 and _worst(expo) <= 1e-8
    detail = (f"200 trials (z^2, z^3, exp), min gap {gap:.2f} (>=0.1), failures {len(fails)}, "
              f"worst polynomial {_worst(poly):.1e} (<=1e-12), worst exp {_worst(expo):.1e} (<=1e-8)")
    assert _record(4, "perturbation identity", ok, detail)


def test_criterion_05_split_and_mu():
    split = _run(["perturbation.dd_split_exp", "perturbation.dd_split_z2"], 100, 105)
    herm = _run(["perturbation.mu_hermitian"], 100, 205)
    nil = _run(["perturbation.nilpotent_mu"], 100, 305)
    fails = _fails(split) + _fails(herm) + _fails(nil)
    detail = (f"100 trials each; split worst {_worst(split):.1e} (<=1e-9), Hermitian mu worst {_worst(herm):.1e} "
              f"(<=1e-10), nilpotent mu worst ||mu^k|| {_worst(nil):.1e}; failures {len(fails)}")
    assert _record(5, "GDOI-vs-DOI split and mu", not fails, detail)


def test_criterion_06_norm_sandwiches():
    g = _run(["bounds.gdoi"], 500, 106)
    t = _run(["bounds.gtoi"], 200, 206)
    lip = _run(["bounds.lipschitz"], 200, 306)
    fails = _fails(g) + _fails(t) + _fails(lip)
    holds = sum(bool(r.details.get("hypothesis_eq3_holds")) for r in g + lip)
    holds_re = sum(bool(r.details.get("hypothesis_real_reading_holds")) for r in g + lip)
    detail = (f"GDOI 500 / GTOI 200 / Lipschitz 200, failures {len(_fails(g))}/{len(_fails(t))}/{len(_fails(lip))}; "
              f"refined-lower hypothesis held in {holds}/700 two-operator trials (real-part reading {holds_re}/700)")
    assert _record(6, "norm sandwiches", not fails, detail)


def test_criterion_07_homomorphism():
    res = _run(["homomorphism"], 200, 107)
    fails = _fails(res)
    lin = max(r.details["linearity"] for r in res)
    comp = max(r.details["composition"] for r in res)
    detail = f"200 defective pairs, failures {len(fails)}, worst linearity {lin:.1e}, composition {comp:.1e} (<=1e-9)"
    assert _record(7, "homomorphism", not fails, detail)


def test_criterion_08_telescope():
    res = _run(["telescope.exp", "telescope.z2", "telescope.sin"], 100, 108)
    fails = _fails(res)
    sq = [r for r in res if r.details["kind"] == "telescope.z2"]
    ok = not fails and _worst(sq) <= 1e-12 and _worst(res) <= 1e-8
    detail = f"100 triples, failures {len(fails)}, worst {_worst(res):.1e} (<=1e-8), f=z^2 worst {_worst(sq):.1e} (<=1e-12)"
    assert _record(8, "telescope", ok, detail)


def test_criterion_09_derivative():
    kinds = ["derivative.z3_conjugation", "derivative.z3_affine", "derivative.exp_conjugation", "derivative.exp_affine"]
    paths = []
    for k in kinds:
        paths += [run_trial(k, 109, i) for i in range(10)]
    slopes = [r.details["slope"] for r in paths if r.residual > 1e-12]
    min_errs = [r.details["min_error"] for r in paths]
    power = []
    for m in range(1, 6):
        for s in range(4):
            rng = np.random.default_rng([109, m, s])
            X, _ = random_jordan_matrix(JordanSpec.parse("(0.4:3)(-0.5+0.3j:2)(0.6j:1)@cond=5"), rng)
            D = rng.standard_normal((6, 6)) + 1j * rng.standard_normal((6, 6))
            power.append(check_power_rule(m, X, D, s, HARNESS_TOLERANCES))
        r, _ = check_derivative(monomial(m), "conjugation", 109 + m, tolerances=HARNESS_TOLERANCES,
                                base=JordanSpec.parse("(0.3:2)(-0.4+0.3j:1)"))
        power.append(r)
    fails = _fails(paths) + _fails(power)
    pr = [r for r in power if r.name == "power_rule"]
    detail = (f"20 paths each for z^3 and exp, slopes {min(slopes):.2f}-{max(slopes):.2f} (in [1.7, 2.3]), "
              f"largest minimum error {max(min_errs):.1e} (<=1e-6); power rule z^1..z^5 worst {_worst(pr):.1e} (<=1e-12); "
              f"failures {len(fails)}")
    assert _record(9, "derivative theorem", not fails, detail)


def test_criterion_10_continuity():
    res = _run(["continuity.diagonalizable", "continuity.defective", "continuity.hermitian"], 50, 110)
    fails = _fails(res)
    slopes = [r.details["slope"] for r in res]
    detail = (f"50 bases, 21 levels (delta = 2^-l, l = 0..20), failures {len(fails)}, worst final/initial "
              f"{_worst(res):.2e} (<=1e-6), slopes {min(slopes):.3f}-{max(slopes):.3f} (>=0.9)")
    assert _record(10, "continuity", not fails, detail)


def test_criterion_11_independence():
    res = _run(["independence"], 100, 111)
    fails = _fails(res)
    cols = sum(r.details["nonzero"] for r in res)
    detail = f"100 defective pairs with generic Y, failures {len(fails)} ({cols} nonzero terms in total, all full rank)"
    assert _record(11, "independence rank", not fails, detail)


def test_criterion_12_determinism():
    mismatched = []
    for suite in list(SUITES) + ["all"]:
        a = to_json_text(run_suite(suite, 112, 3, jobs=1), include_metadata=False)
        b = to_json_text(run_suite(suite, 112, 3, jobs=1), include_metadata=False)
        c = to_json_text(run_suite(suite, 112, 3, jobs=2), include_metadata=False)
        if not (a == b == c):
            mismatched.append(suite)
    sample = json.loads(to_json_text(run_suite("spectral", 112, 2, jobs=1)))
    ok = not mismatched and "metadata" in sample
    detail = f"{len(SUITES) + 1} suites re-run serially and with 2 workers, mismatches {mismatched or 'none'}"
    assert _record(12, "determinism", ok, detail)
