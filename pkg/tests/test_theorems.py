"""Tests for the executable checks."""

import json

import numpy as np
import pytest

from opint.config import DEFAULT
from opint.errors import DegenerateInputError, PathError, PreconditionError
from opint.funcspace import constant, exp_fn, lift, monomial, polynomial, projection, sin_fn
from opint.linalg import JordanSpec, operator_norm, random_jordan_matrix
from opint.theorems import (
    CheckResult,
    ConvergenceTrace,
    check_dd_split,
    check_derivative,
    check_gdoi_bounds,
    check_homomorphism,
    check_independence,
    check_lipschitz,
    check_mu_hermitian,
    check_nilpotent_mu,
    check_perturbation,
    check_power_rule,
    check_telescope,
    continuity_experiment,
    generic_perturbation_trace,
    loglog_slope,
    schur_doi,
)

TOL = DEFAULT.with_overrides({"cluster_abs": 0.05})
X_, Y_ = projection(0, 2), projection(1, 2)


def _m(text, seed):
    return random_jordan_matrix(JordanSpec.parse(text), seed)[0]


def _rand(seed, n):
    rng = np.random.default_rng(seed)
    return (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2 * n)


def _herm(seed, eigs):
    rng = np.random.default_rng(seed)
    n = len(eigs)
    Q, _ = np.linalg.qr(rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n)))
    H = Q @ np.diag(eigs) @ Q.conj().T
    return (H + H.conj().T) / 2


A4 = "(0.3:2)(-0.5+0.5j:1)(1:1)@cond=4"
B4 = "(-0.6:3)(0.5j:1)@cond=3"


class TestRecords:
    def test_check_result_json_round_trip(self):
        r = CheckResult("x", 3, float("inf"), 1e-8, False, {"a": np.float64(1.5), "z": 1 + 2j, "v": np.bool_(True)})
        text = json.dumps(r.to_json())
        back = CheckResult.from_json(json.loads(text))
        assert back.residual == float("inf") and back.details["z"] == [1.0, 2.0] and back.details["v"] is True

    def test_trace_validation(self):
        with pytest.raises(ValueError):
            ConvergenceTrace((0.1, 0.2), (1.0, 2.0), 1.0)
        with pytest.raises(ValueError):
            ConvergenceTrace((0.2, 0.1), (1.0, -2.0), 1.0)

    def test_loglog_slope(self):
        h = np.array([0.1, 0.05, 0.025])
        assert loglog_slope(h, 3 * h**2) == pytest.approx(2.0)


class TestPerturbation:
    def test_square_exact(self):
        r = check_perturbation(monomial(2), _m(A4, 1), _m(B4, 2), _rand(1, 4), tolerances=TOL)
        assert r.passed and r.residual <= 1e-12

    def test_exp_identity_y(self):
        r = check_perturbation(exp_fn(), _m(A4, 3), _m(B4, 4), np.eye(4), tolerances=TOL)
        assert r.passed and r.residual <= 1e-8

    def test_identity_function(self):
        r = check_perturbation(monomial(1), _m(A4, 5), _m(B4, 6), _rand(2, 4), tolerances=TOL)
        assert r.residual <= 1e-14

    def test_overlapping_spectra(self):
        X = _m(A4, 7)
        with pytest.raises(PreconditionError):
            check_perturbation(exp_fn(), X, X + 1e-5 * np.eye(4), np.eye(4), tolerances=TOL)


class TestSplit:
    def test_hermitian(self):
        r = check_dd_split(exp_fn(), _herm(1, [0.1, 0.6, 1.1]), _herm(2, [-1.0, -0.4, 2.0]))
        assert r.passed and r.residual <= 1e-12
        assert r.details["mu_class"] == [0, 0, 0]

    def test_square_defective(self):
        r = check_dd_split(monomial(2), _m(A4, 8), _m(B4, 9), tolerances=TOL)
        assert r.passed and r.residual <= 1e-12

    def test_exp_defective(self):
        r = check_dd_split(exp_fn(), _m(A4, 10), _m(B4, 11), tolerances=TOL)
        assert r.passed and r.details["mu_norm"] > 0

    def test_mu_hermitian(self):
        r = check_mu_hermitian(sin_fn(), _herm(3, [0.0, 1.0]), _herm(4, [2.0, 3.0]))
        assert r.passed and r.details["mu_class"] == [0, 0, 0]


class TestNilpotentMu:
    def test_equal_operators(self):
        r = check_nilpotent_mu(exp_fn(), JordanSpec.parse("(0.2:2)(-0.4:1)@cond=3"), 0, TOL, [0, 1], [0, 1])
        assert r.passed and r.details["mu_norm"] <= 1e-9 * 10

    def test_commuting_jordan_powers(self):
        r = check_nilpotent_mu(exp_fn(), JordanSpec.parse("(0:3)"), 0, TOL, [0, 1], [0, 0, 1])
        assert r.passed
        assert r.details["k_bound"] <= 6
        assert 1 <= r.details["observed_index"] <= 3

    @pytest.mark.parametrize("seed", range(5))
    def test_seeded_polynomials(self, seed):
        r = check_nilpotent_mu(exp_fn(), JordanSpec.parse("(0.3:3)(-0.5:2)(0.5j:1)@cond=3"), seed, TOL)
        assert r.passed


class TestTelescope:
    def test_equal_a_b(self):
        X = _m(A4, 12)
        r = check_telescope(exp_fn(), X, X, _m(B4, 13), _rand(3, 4), tolerances=TOL)
        assert r.passed

    def test_square_exact(self):
        r = check_telescope(monomial(2), _m(A4, 14), _m(B4, 15), _m("(2:2)(1.5j:2)@cond=2", 16), _rand(4, 4), tolerances=TOL)
        assert r.passed and r.residual <= 1e-12

    def test_exp(self):
        r = check_telescope(exp_fn(), _m(A4, 17), _m(B4, 18), _m("(2:2)(1.5j:2)@cond=2", 19), _rand(5, 4), tolerances=TOL)
        assert r.passed and r.residual <= 1e-8


class TestDerivative:
    @pytest.mark.parametrize("path", ["conjugation", "affine"])
    def test_exp_second_order(self, path):
        r, trace = check_derivative(exp_fn(), path, 3)
        assert r.passed
        assert 1.7 <= trace.fitted_slope <= 2.3

    def test_square_affine_exact(self):
        r, _ = check_derivative(monomial(2), "affine", 4)
        assert r.passed and r.residual <= 1e-12

    @pytest.mark.parametrize("m", range(1, 6))
    def test_power_rule(self, m):
        X = _m("(0.4:3)(-0.3:1)@cond=5", m)
        assert check_power_rule(m, X, _rand(m, 4), tolerances=TOL).residual <= 1e-12

    def test_affine_rejects_defective_base(self):
        with pytest.raises(PathError):
            check_derivative(exp_fn(), "affine", 0, base=JordanSpec.parse("(0:2)"))

    def test_unknown_path(self):
        with pytest.raises(PathError):
            check_derivative(exp_fn(), "spiral", 0)


class TestBounds:
    def test_gdoi_defective(self):
        r = check_gdoi_bounds(lift(exp_fn(), 0, 2) * Y_, _m(A4, 20), _m(B4, 21), _rand(6, 4), tolerances=TOL)
        assert r.passed
        assert r.details["lower"] <= r.details["observed"] <= r.details["upper"]

    def test_lipschitz_shift(self):
        X = _m(A4, 22)
        r = check_lipschitz(monomial(1), X, X + 2 * np.eye(4), tolerances=TOL)
        assert r.details["lower"] == pytest.approx(2.0)
        assert r.details["upper"] == pytest.approx(2.0)
        assert r.details["observed"] == pytest.approx(2.0)

    def test_lipschitz_hermitian(self):
        H1, H2 = _herm(5, [0.1, 0.5, 0.9]), _herm(6, [1.5, 2.0, 2.5])
        r = check_lipschitz(exp_fn(), H1, H2)
        assert r.passed


class TestHomomorphism:
    def test_unit_gamma(self):
        r = check_homomorphism(lift(exp_fn(), 0, 2) * Y_, constant(1.0, 2), _m(A4, 23), _m(B4, 24), _rand(7, 4), tolerances=TOL)
        assert r.passed

    def test_projections(self):
        X1, X2, Y = _m(A4, 25), _m(B4, 26), _rand(8, 4)
        r = check_homomorphism(X_, Y_, X1, X2, Y, 2.0, -1j, tolerances=TOL)
        assert r.passed

    def test_defective(self):
        r = check_homomorphism(lift(exp_fn(), 0, 2) * Y_, X_ + Y_, _m(A4, 27), _m(B4, 28), _rand(9, 4), 0.5, 2j, tolerances=TOL)
        assert r.passed and r.residual <= 1e-9


class TestIndependence:
    def test_double_jordan_block(self):
        J = np.array([[0, 1], [0, 0]], dtype=complex)
        r = check_independence(J, J, np.eye(2))
        # terms are I, N, N and N^2 = 0: three nonzero terms spanning only two dimensions
        assert r.details["terms"] == 4
        assert r.details["nonzero"] == 3 and r.details["rank"] == 2
        assert not r.passed

    def test_double_jordan_block_generic_y(self):
        J = np.array([[0, 1], [0, 0]], dtype=complex)
        r = check_independence(J, J, np.array([[0.3, 1.0], [2.0, -0.7]]))
        assert r.details["nonzero"] == 4 and r.details["rank"] == 4

    def test_hermitian(self):
        r = check_independence(np.diag([1.0, 2.0, 3.0]), np.diag([4.0, 5.0, 6.0]), _rand(10, 3))
        assert r.details["rank"] == 9 and r.details["categories"]["A4"] == 0

    def test_defective_pair(self):
        assert check_independence(_m(A4, 29), _m(B4, 30), _rand(11, 4), tolerances=TOL).passed

    def test_zero_y(self):
        with pytest.raises(DegenerateInputError):
            check_independence(np.eye(2), np.eye(2), np.zeros((2, 2)))


class TestContinuity:
    def test_zero_path(self):
        base = (_m(A4, 31), _m(B4, 32), _rand(12, 4))
        r, trace = continuity_experiment(X_ * Y_, base, levels=5, tolerances=TOL, zero_path=True)
        assert r.passed and max(trace.errors) == 0.0

    def test_exp_divided_difference(self):
        from opint.funcspace import divided_difference

        base = (_m("(0.3:1)(-0.4:1)(0.5j:1)@cond=3", 33), _m("(1:1)(1.5:1)(1+0.5j:1)@cond=3", 34), _rand(13, 3))
        r, trace = continuity_experiment(divided_difference(exp_fn(), 1), base, tolerances=TOL)
        assert r.passed and trace.fitted_slope >= 0.9

    def test_hermitian_slope(self):
        base = (_herm(7, [0.0, 0.5, 1.0]), _herm(8, [2.0, 2.5, 3.0]), _rand(14, 3))
        r, trace = continuity_experiment(X_ * Y_, base)
        assert trace.fitted_slope == pytest.approx(1.0, abs=0.1)

    def test_generic_trace_reports(self):
        trace = generic_perturbation_trace(X_ * Y_, _m(A4, 35), _m(B4, 36), _rand(15, 4), levels=6, tolerances=TOL)
        assert len(trace.errors) == len(trace.step_sizes) == 6


def test_schur_doi_matches_entrywise():
    H1, H2 = np.diag([1.0, 2.0]), np.diag([3.0, 4.0])
    np.testing.assert_allclose(schur_doi(X_ * Y_, H1, H2, np.ones((2, 2))), [[3, 4], [6, 8]], atol=1e-14)
