"""Tests for analytic functions, jets and divided differences."""

import itertools
import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from opint.errors import DomainError, InvalidInputError, UnsupportedOrderError
from opint.funcspace import (
    FUNCTION_GRAMMAR,
    compose,
    confluent_dd,
    constant,
    cos_fn,
    dd_partial,
    divided_difference,
    exp_fn,
    inv_fn,
    jet_eval,
    lift,
    log_fn,
    monomial,
    parse_function,
    polynomial,
    projection,
    sin_fn,
)

mpmath.mp.dps = 40

CATALOG = {
    "exp": (exp_fn, mpmath.exp),
    "sin": (sin_fn, mpmath.sin),
    "cos": (cos_fn, mpmath.cos),
    "log": (log_fn, mpmath.log),
    "inv": (lambda: inv_fn(2.0), lambda z: 1 / (z - 2)),
    "cubic": (lambda: polynomial([1, -2, 0, 3]), lambda z: 1 - 2 * z + 3 * z**3),
}


def _close(a, b, rel=1e-12):
    return abs(complex(a) - complex(b)) <= rel * max(1.0, abs(complex(b)))


class TestJetExamples:
    def test_exp_derivative_at_zero(self):
        assert jet_eval(exp_fn(), (0,), (5,)) == pytest.approx(1.0)

    def test_square_derivative(self):
        assert jet_eval(monomial(2), (3,), (1,)) == pytest.approx(6.0)

    def test_bivariate_product(self):
        xy = projection(0, 2) * projection(1, 2)
        assert jet_eval(xy, (2, 5), (1, 1)) == pytest.approx(1.0)

    def test_order_zero_is_value(self):
        f = exp_fn()
        assert jet_eval(f, (0.4 + 0.1j,), (0,)) == pytest.approx(complex(mpmath.exp(0.4 + 0.1j)))

    def test_order_cap(self):
        with pytest.raises(UnsupportedOrderError):
            exp_fn().jet((0,), (40,))

    def test_arity_mismatch(self):
        with pytest.raises(InvalidInputError):
            exp_fn().jet((0, 1), (0, 0))


@pytest.mark.parametrize("name", sorted(CATALOG))
@pytest.mark.parametrize("z", [0.3 + 0.2j, -0.7, 1.1j])
def test_catalog_derivatives_match_mpmath(name, z):
    make, ref = CATALOG[name]
    f = make()
    if name == "log" and z == -0.7:
        with pytest.raises(DomainError):
            f(z)
        return
    for k in range(8):
        expected = complex(mpmath.diff(ref, mpmath.mpc(z), k))
        assert _close(f.jet((z,), (k,)), expected, 1e-11), (name, k)


class TestGuards:
    def test_pole(self):
        with pytest.raises(DomainError):
            inv_fn(1.0)(1.0)

    def test_branch_cut(self):
        with pytest.raises(DomainError):
            log_fn()(-1.0)


class TestConfluentDD:
    def test_two_nodes(self):
        assert confluent_dd(monomial(2), [1, 2]) == pytest.approx(3.0)

    def test_repeated_node(self):
        assert confluent_dd(monomial(2), [3, 3]) == pytest.approx(6.0)

    def test_cubic_second_difference(self):
        assert confluent_dd(monomial(3), [0, 1, 2]) == pytest.approx(3.0)

    @pytest.mark.parametrize("k", [1, 2, 3, 4])
    def test_single_node_multiplicity(self, k):
        z = 0.2 - 0.3j
        got = confluent_dd(exp_fn(), [z] * (k + 1))
        assert _close(got, complex(mpmath.exp(z)) / math.factorial(k))

    def test_matches_mpmath_quotients(self):
        x, y, w = mpmath.mpc(0.1, 0.2), mpmath.mpc(-0.4), mpmath.mpc(0.5, -0.3)
        d1 = (mpmath.exp(x) - mpmath.exp(y)) / (x - y)
        d1b = (mpmath.exp(y) - mpmath.exp(w)) / (y - w)
        d2 = (d1 - d1b) / (x - w)
        assert _close(confluent_dd(exp_fn(), [complex(x), complex(y)]), complex(d1))
        assert _close(confluent_dd(exp_fn(), [complex(x), complex(y), complex(w)]), complex(d2))

    def test_near_nodes_merge(self):
        z = 0.5
        got = confluent_dd(exp_fn(), [z, z + 1e-9])
        assert _close(got, math.exp(z) * (1 + 0.5e-9), 1e-12)

    @settings(max_examples=60, deadline=None)
    @given(st.lists(st.complex_numbers(max_magnitude=1.5, allow_nan=False, allow_infinity=False), min_size=2, max_size=5),
           st.randoms(use_true_random=False))
    def test_permutation_symmetry(self, nodes, rnd):
        shuffled = list(nodes)
        rnd.shuffle(shuffled)
        for f in (exp_fn(), sin_fn()):
            a, b = confluent_dd(f, nodes), confluent_dd(f, shuffled)
            scale = max(1.0, abs(a))
            # well-separated or confluent node sets are both handled; near-coincident clouds lose accuracy
            if min(abs(p - q) for p, q in itertools.combinations(nodes, 2)) > 1e-2 or len(set(nodes)) == 1:
                assert abs(a - b) <= 1e-10 * scale

    @pytest.mark.parametrize("nodes", [[0, 1, 2, 3], [1j, -1, 0.5, 2j], [0.3, 0.3, -1, 2]])
    def test_permutation_exact_for_polynomials(self, nodes):
        f = polynomial([2, -1, 0, 4, 1])
        values = {confluent_dd(f, list(p)) for p in itertools.permutations(nodes)}
        ref = next(iter(values))
        assert all(abs(v - ref) <= 1e-12 * max(1, abs(ref)) for v in values)

    def test_coalescence(self):
        f = exp_fn()
        for e in range(1, 9):
            gap = 10.0**-e
            x, y = 0.4 + gap / 2, 0.4 - gap / 2
            err = abs(confluent_dd(f, [x, y]) - math.exp(0.4))
            # truncation gap^2 f'''/24 plus cancellation eps*|f|/gap in the plain quotient
            assert err <= gap**2 * math.exp(0.5) / 24 + 4e-16 * math.exp(0.5) / gap


class TestDDPartial:
    def test_value(self):
        assert dd_partial(monomial(2), 1, (1, 2), (0, 0)) == pytest.approx(3.0)

    @pytest.mark.parametrize("point", [(0.3, -1.2), (2j, 2j), (5, 1)])
    def test_square_first_partial(self, point):
        assert dd_partial(monomial(2), 1, point, (1, 0)) == pytest.approx(1.0)

    def test_exp_against_mpmath(self):
        q = lambda x, y: (mpmath.exp(x) - mpmath.exp(y)) / (x - y)
        ref = mpmath.diff(q, (mpmath.mpf("0.3"), mpmath.mpf("0.7")), (2, 1))
        assert _close(dd_partial(exp_fn(), 1, (0.3, 0.7), (2, 1)), complex(ref), 1e-11)

    def test_second_order_against_mpmath(self):
        def q2(x, y, z):
            a = (mpmath.sin(x) - mpmath.sin(y)) / (x - y)
            b = (mpmath.sin(y) - mpmath.sin(z)) / (y - z)
            return (a - b) / (x - z)

        ref = mpmath.diff(q2, (mpmath.mpf("0.1"), mpmath.mpf("0.8"), mpmath.mpf("-0.5")), (1, 0, 2))
        assert _close(dd_partial(sin_fn(), 2, (0.1, 0.8, -0.5), (1, 0, 2)), complex(ref), 1e-10)

    def test_matches_divided_difference_fn(self):
        g = divided_difference(cos_fn(), 1)
        assert _close(g.jet((0.2, -0.6), (1, 2)), dd_partial(cos_fn(), 1, (0.2, -0.6), (1, 2)))


class TestAlgebra:
    def test_clairaut(self):
        f = compose(exp_fn(), projection(0, 2) * projection(1, 2)) + lift(sin_fn(), 1, 2) * projection(0, 2)
        c = f.taylor((0.3, -0.2), (3, 3))
        # mixed partials from one Taylor array are symmetric by construction; compare with mpmath
        g = lambda x, y: mpmath.exp(x * y) + mpmath.sin(y) * x
        for a, b in [(1, 2), (2, 1), (3, 3)]:
            ref = mpmath.diff(g, (mpmath.mpf("0.3"), mpmath.mpf("-0.2")), (a, b))
            assert _close(c[a, b] * math.factorial(a) * math.factorial(b), complex(ref), 1e-10)

    @pytest.mark.parametrize("pair", [("exp", "sin"), ("cos", "inv"), ("cubic", "exp")])
    def test_leibniz(self, pair):
        f = lift(CATALOG[pair[0]][0](), 0, 2) * lift(CATALOG[pair[1]][0](), 1, 2) + projection(0, 2)
        g = compose(exp_fn(), projection(0, 2) - projection(1, 2))
        p = (0.25, -0.4)
        fg = f * g
        for a, b in itertools.product(range(4), repeat=2):
            total = 0
            for i in range(a + 1):
                for j in range(b + 1):
                    total += math.comb(a, i) * math.comb(b, j) * f.jet(p, (i, j)) * g.jet(p, (a - i, b - j))
            assert _close(fg.jet(p, (a, b)), total, 1e-11)

    @pytest.mark.parametrize("point", [(0.0, 0.0), (1.0, 2.0), (0.5j, -0.3)])
    def test_polynomial_identity(self, point):
        y = projection(1, 2)
        for k1 in range(7):
            for k2 in range(7):
                lhs = lift(monomial(k1), 0, 2) * lift(monomial(k2), 1, 2)
                rhs = divided_difference(monomial(k1 + 1), 1) * lift(monomial(k2), 1, 2) - \
                    divided_difference(monomial(k1), 1) * lift(monomial(k2 + 1), 1, 2)
                a, b = lhs.taylor(point, (3, 3)), rhs.taylor(point, (3, 3))
                assert np.max(np.abs(a - b)) <= 1e-12 * max(1.0, np.max(np.abs(a)))
                assert rhs.polynomial
        assert y.polynomial

    def test_constant_and_scale(self):
        f = constant(2.0, 2) + projection(0, 2).scale(3j)
        assert f(1.0, 5.0) == pytest.approx(2 + 3j)


class TestParse:
    @pytest.mark.parametrize("text,z,expected", [
        ("poly:[0,0,1]", 3.0, 9.0), ("exp", 0.0, 1.0), ("sin", 0.0, 0.0), ("cos", 0.0, 1.0),
        ("inv:2", 1.0, -1.0), ("log", 1.0, 0.0), ("poly:[1, 1j]", 1j, 0.0),
    ])
    def test_parse(self, text, z, expected):
        assert parse_function(text)(z) == pytest.approx(expected)

    @pytest.mark.parametrize("bad", ["tan", "poly:[]", "poly:abc", "inv:", ""])
    def test_reject(self, bad):
        with pytest.raises(InvalidInputError) as info:
            parse_function(bad)
        assert "poly" in str(info.value) or "parse" in str(info.value)

    def test_grammar_mentions_every_form(self):
        for token in ("poly", "exp", "sin", "cos", "inv", "log"):
            assert token in FUNCTION_GRAMMAR
