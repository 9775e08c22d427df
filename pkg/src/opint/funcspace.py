"""Analytic scalar functions with exact high-order derivatives.

An :class:`AnalyticFn` is represented by its local Taylor coefficients: for a
point ``p`` and orders ``(o_1, ..., o_r)`` it returns the array
``c[a_1, ..., a_r] = d^{a} f(p) / (a_1! ... a_r!)``.  Catalog members produce
these from closed forms; sums, products and compositions use truncated power
series arithmetic, so no finite differencing is involved anywhere.

Divided differences, including the confluent case, come from a Hermite
table, and the Taylor coefficients of ``f^[1]`` and ``f^[2]`` are divided
differences with repeated nodes.
"""

from __future__ import annotations

import ast
import cmath
import math
from functools import reduce

import numpy as np
from scipy.signal import convolve

from .config import DEFAULT
from .errors import DomainError, InvalidInputError, UnsupportedOrderError

__all__ = [
    "AnalyticFn",
    "jet_eval",
    "confluent_dd",
    "dd_partial",
    "divided_difference",
    "polynomial",
    "monomial",
    "exp_fn",
    "sin_fn",
    "cos_fn",
    "inv_fn",
    "log_fn",
    "constant",
    "projection",
    "lift",
    "compose",
    "parse_function",
]

MAX_ORDER = DEFAULT.max_jet_order


def _inv_factorials(K: int) -> np.ndarray:
    return np.array([1.0 / math.factorial(k) for k in range(K + 1)])


class AnalyticFn:
    """Analytic function of 1, 2 or 3 complex variables.

    Parameters
    ----------
    arity : int
        Number of variables.
    coeffs : callable
        ``coeffs(point, orders)`` returning the Taylor coefficient array of
        shape ``tuple(o + 1 for o in orders)``.
    label : str
        Human-readable name, used in reports.
    polynomial : bool
        True for polynomials; checks use tighter thresholds for them.
    """

    def __init__(self, arity: int, coeffs, label: str, max_order: int = MAX_ORDER, polynomial: bool = False):
        if arity not in (1, 2, 3):
            raise InvalidInputError(f"arity must be 1, 2 or 3, got {arity}")
        self.arity = arity
        self._coeffs = coeffs
        self.label = label
        self.max_order = max_order
        self.polynomial = polynomial

    def __repr__(self) -> str:
        return f"AnalyticFn({self.label!r}, arity={self.arity})"

    def _normalize(self, point, orders):
        if np.isscalar(point):
            point = (point,)
        if np.isscalar(orders):
            orders = (orders,)
        point = tuple(complex(p) for p in point)
        orders = tuple(int(o) for o in orders)
        if len(point) != self.arity or len(orders) != self.arity:
            raise InvalidInputError(f"{self.label} has arity {self.arity}, got point {point} and orders {orders}")
        if any(o < 0 for o in orders):
            raise InvalidInputError(f"orders must be nonnegative, got {orders}")
        if sum(orders) > self.max_order:
            raise UnsupportedOrderError(f"total order {sum(orders)} exceeds jet depth {self.max_order}")
        return point, orders

    def taylor(self, point, orders) -> np.ndarray:
        """Taylor coefficients up to ``orders`` at ``point``."""
        point, orders = self._normalize(point, orders)
        return np.asarray(self._coeffs(point, orders), dtype=np.complex128)

    def jet(self, point, order) -> complex:
        """Mixed partial derivative of multi-order ``order`` at ``point``."""
        point, order = self._normalize(point, order)
        c = self.taylor(point, order)[order]
        return complex(c * math.prod(math.factorial(o) for o in order))

    def __call__(self, *point) -> complex:
        return complex(self.taylor(point, (0,) * self.arity).flat[0])

    # algebra -----------------------------------------------------------

    def _check_same(self, other):
        if not isinstance(other, AnalyticFn) or other.arity != self.arity:
            raise InvalidInputError("operands must be AnalyticFn of equal arity")

    def __add__(self, other):
        if not isinstance(other, AnalyticFn):
            return self + constant(other, self.arity)
        self._check_same(other)
        return AnalyticFn(
            self.arity,
            lambda p, o: self._coeffs(p, o) + other._coeffs(p, o),
            f"({self.label} + {other.label})",
            min(self.max_order, other.max_order),
            self.polynomial and other.polynomial,
        )

    __radd__ = __add__

    def __neg__(self):
        return self.scale(-1.0)

    def __sub__(self, other):
        return self + (-other if isinstance(other, AnalyticFn) else -complex(other))

    def scale(self, c) -> "AnalyticFn":
        c = complex(c)
        return AnalyticFn(self.arity, lambda p, o: c * self._coeffs(p, o), f"{_fmt_scalar(c)}*{self.label}", self.max_order, self.polynomial)

    def __mul__(self, other):
        if not isinstance(other, AnalyticFn):
            return self.scale(other)
        self._check_same(other)

        def coeffs(p, o):
            return _truncated_product(self._coeffs(p, o), other._coeffs(p, o))

        return AnalyticFn(
            self.arity,
            coeffs,
            f"{self.label}*{other.label}",
            min(self.max_order, other.max_order),
            self.polynomial and other.polynomial,
        )

    def __rmul__(self, other):
        return self.scale(other)


def _fmt_scalar(c: complex) -> str:
    return repr(c.real) if c.imag == 0 else repr(c)


def _truncated_product(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    # Cauchy product of two power series, truncated to the common shape
    full = convolve(a, b, method="direct")
    return full[tuple(slice(0, s) for s in a.shape)]


# univariate catalog -----------------------------------------------------

def _univariate(series, label: str, polynomial: bool = False) -> AnalyticFn:
    return AnalyticFn(1, lambda p, o: series(p[0], o[0]), label, polynomial=polynomial)


def polynomial(coeffs) -> AnalyticFn:
    """Polynomial ``sum c_k z^k`` with coefficients in ascending order."""
    a = np.array([complex(c) for c in coeffs], dtype=np.complex128)
    if a.size == 0:
        a = np.zeros(1, dtype=np.complex128)
    deg = a.size - 1

    def series(z0, K):
        out = np.zeros(K + 1, dtype=np.complex128)
        # Taylor shift: coefficient k of p(z0 + h) is sum_j binom(j, k) a_j z0^(j-k)
        for k in range(min(K, deg) + 1):
            out[k] = sum(math.comb(j, k) * a[j] * z0 ** (j - k) for j in range(k, deg + 1))
        return out

    terms = [f"{_fmt_scalar(complex(c))}" for c in a]
    return _univariate(series, f"poly:[{','.join(terms)}]", polynomial=True)


def monomial(m: int) -> AnalyticFn:
    coeffs = [0.0] * m + [1.0]
    f = polynomial(coeffs)
    f.label = f"z^{m}"
    return f


def exp_fn() -> AnalyticFn:
    return _univariate(lambda z0, K: cmath.exp(z0) * _inv_factorials(K), "exp")


def _trig(shift: int, label: str) -> AnalyticFn:
    def series(z0, K):
        s, c = cmath.sin(z0), cmath.cos(z0)
        cycle = [s, c, -s, -c]
        return np.array([cycle[(k + shift) % 4] for k in range(K + 1)]) * _inv_factorials(K)

    return _univariate(series, label)


def sin_fn() -> AnalyticFn:
    return _trig(0, "sin")


def cos_fn() -> AnalyticFn:
    return _trig(1, "cos")


def inv_fn(c: complex) -> AnalyticFn:
    """``1 / (z - c)``; evaluating at the pole raises :class:`DomainError`."""
    c = complex(c)

    def series(z0, K):
        d = z0 - c
        if abs(d) <= 1e-12 * max(1.0, abs(c)):
            raise DomainError(f"inv:{_fmt_scalar(c)} evaluated at its pole")
        k = np.arange(K + 1)
        return (-1.0) ** k / d ** (k + 1)

    return _univariate(series, f"inv:{_fmt_scalar(c)}")


def log_fn() -> AnalyticFn:
    """Principal logarithm; points on the closed negative real axis are refused."""

    def series(z0, K):
        if z0.real <= 0 and abs(z0.imag) <= 1e-12 * max(1.0, abs(z0)):
            raise DomainError(f"log evaluated on its branch cut at {z0}")
        out = np.empty(K + 1, dtype=np.complex128)
        out[0] = cmath.log(z0)
        k = np.arange(1, K + 1)
        out[1:] = (-1.0) ** (k + 1) / (k * z0**k)
        return out

    return _univariate(series, "log")


# multivariate building blocks -------------------------------------------

def constant(c, arity: int = 1) -> AnalyticFn:
    c = complex(c)

    def coeffs(p, o):
        out = np.zeros(tuple(k + 1 for k in o), dtype=np.complex128)
        out.flat[0] = c
        return out

    return AnalyticFn(arity, coeffs, _fmt_scalar(c), polynomial=True)


def lift(g: AnalyticFn, index: int, arity: int) -> AnalyticFn:
    """View univariate ``g`` as a function of variable ``index`` out of ``arity``."""
    if g.arity != 1 or not 0 <= index < arity:
        raise InvalidInputError("lift needs a univariate function and a valid index")

    def coeffs(p, o):
        out = np.zeros(tuple(k + 1 for k in o), dtype=np.complex128)
        sel = [0] * arity
        sel[index] = slice(None)
        out[tuple(sel)] = g._coeffs((p[index],), (o[index],))
        return out

    names = "xyz"
    return AnalyticFn(arity, coeffs, f"{g.label}({names[index]})", g.max_order, g.polynomial)


def projection(index: int, arity: int) -> AnalyticFn:
    """The coordinate function ``(x_1, ..., x_r) -> x_index``."""
    f = lift(monomial(1), index, arity)
    f.label = "xyz"[index]
    return f


def compose(g: AnalyticFn, h: AnalyticFn) -> AnalyticFn:
    """``g(h(...))`` for univariate ``g``, via ``sum_k g_k(h_0) (h - h_0)^k``."""
    if g.arity != 1:
        raise InvalidInputError("outer function of a composition must be univariate")

    def coeffs(p, o):
        hc = h._coeffs(p, o)
        h0 = complex(hc.flat[0])
        tail = hc.copy()
        tail.flat[0] = 0.0
        K = sum(o)
        gc = g._coeffs((h0,), (K,))
        out = np.zeros_like(hc)
        out.flat[0] = gc[0]
        power = np.zeros_like(hc)
        power.flat[0] = 1.0
        for k in range(1, K + 1):
            power = _truncated_product(power, tail)
            out = out + gc[k] * power
        return out

    return AnalyticFn(
        h.arity, coeffs, f"{g.label}({h.label})", min(g.max_order, h.max_order), g.polynomial and h.polynomial
    )


# divided differences ----------------------------------------------------

def _merge_nodes(nodes, confluence: float):
    """Group nearly equal nodes; returns sorted (node, multiplicity) pairs."""
    pts = sorted((complex(z) for z in nodes), key=lambda z: (z.real, z.imag))
    if not pts:
        raise InvalidInputError("divided difference needs at least one node")
    radius = confluence * max(1.0, max(abs(z) for z in pts))
    groups: list[list[complex]] = []
    for z in pts:
        for grp in groups:
            if any(abs(z - w) <= radius for w in grp):
                grp.append(z)
                break
        else:
            groups.append([z])
    # chained merges: repeat until stable
    merged = True
    while merged:
        merged = False
        for i in range(len(groups)):
            for j in range(i + 1, len(groups)):
                if min(abs(a - b) for a in groups[i] for b in groups[j]) <= radius:
                    groups[i].extend(groups.pop(j))
                    merged = True
                    break
            if merged:
                break
    out = []
    for grp in groups:
        grp.sort(key=lambda z: (z.real, z.imag))
        out.append((sum(grp) / len(grp), len(grp)))
    out.sort(key=lambda t: (t[0].real, t[0].imag))
    return out


def confluent_dd(f: AnalyticFn, nodes, confluence: float = DEFAULT.confluence) -> complex:
    """Divided difference ``f[z_0, ..., z_n]`` with repeated nodes allowed.

    Nodes within ``confluence * max(1, max|z|)`` of each other are treated
    as one node of higher multiplicity.  The result does not depend on the
    order in which nodes are given.
    """
    if f.arity != 1:
        raise InvalidInputError("divided differences are defined for univariate functions")
    groups = _merge_nodes(nodes, confluence)
    w = []
    derivs = {}
    for z, m in groups:
        derivs[z] = f.taylor((z,), (m - 1,))
        w.extend([z] * m)
    n = len(w)
    # table[i] holds f[w_i, ..., w_{i+level}]
    table = [derivs[z][0] for z in w]
    for level in range(1, n):
        nxt = []
        for i in range(n - level):
            lo, hi = w[i], w[i + level]
            if lo == hi:
                nxt.append(derivs[lo][level])
            else:
                nxt.append((table[i + 1] - table[i]) / (hi - lo))
        table = nxt
    return complex(table[0])


def divided_difference(f: AnalyticFn, k: int, confluence: float = DEFAULT.confluence) -> AnalyticFn:
    """The ``k``-th divided difference ``f^[k]`` as an AnalyticFn of arity ``k + 1``.

    Its Taylor coefficient of multi-order ``a`` at ``(x_0, ..., x_k)`` is the
    divided difference of f on ``x_i`` repeated ``a_i + 1`` times.
    """
    if f.arity != 1 or k not in (1, 2):
        raise InvalidInputError("divided_difference needs a univariate f and k in {1, 2}")

    def coeffs(p, o):
        out = np.empty(tuple(q + 1 for q in o), dtype=np.complex128)
        for idx in np.ndindex(out.shape):
            nodes = [z for z, a in zip(p, idx) for _ in range(a + 1)]
            out[idx] = confluent_dd(f, nodes, confluence)
        return out

    return AnalyticFn(k + 1, coeffs, f"{f.label}^[{k}]", f.max_order - k, f.polynomial)


def jet_eval(f: AnalyticFn, point, order) -> complex:
    """Mixed partial derivative of ``f`` of the given multi-order at ``point``."""
    return f.jet(point, order)


def dd_partial(f: AnalyticFn, k: int, point, order, confluence: float = DEFAULT.confluence) -> complex:
    """Partial derivative of ``f^[k]``: ``a! b! ... f[x^(a+1), y^(b+1), ...]``."""
    order = tuple(int(o) for o in order)
    point = tuple(complex(z) for z in point)
    if len(point) != k + 1 or len(order) != k + 1:
        raise InvalidInputError(f"f^[{k}] takes {k + 1} arguments")
    if sum(order) + k > f.max_order:
        raise UnsupportedOrderError(f"order {order} exceeds jet depth {f.max_order}")
    nodes = [z for z, a in zip(point, order) for _ in range(a + 1)]
    return confluent_dd(f, nodes, confluence) * math.prod(math.factorial(a) for a in order)


# mini-language -----------------------------------------------------------

FUNCTION_GRAMMAR = 'poly:[c0,c1,...] | exp | sin | cos | inv:c | log'


def parse_function(text: str) -> AnalyticFn:
    """Parse the CLI function mini-language, e.g. ``"poly:[0,0,1]"`` or ``"inv:2"``."""
    src = text.strip().replace("−", "-")
    simple = {"exp": exp_fn, "sin": sin_fn, "cos": cos_fn, "log": log_fn}
    if src in simple:
        return simple[src]()
    try:
        if src.startswith("poly:"):
            values = ast.literal_eval(src[5:].strip())
            if not isinstance(values, (list, tuple)) or not values:
                raise ValueError("empty coefficient list")
            return polynomial([complex(v) for v in values])
        if src.startswith("inv:"):
            return inv_fn(complex(src[4:].strip().replace(" ", "")))
    except (ValueError, SyntaxError, TypeError) as exc:
        raise InvalidInputError(f"cannot parse function {text!r}: {exc}") from exc
    raise InvalidInputError(f"unknown function {text!r}; expected {FUNCTION_GRAMMAR}")


def product(*fns: AnalyticFn) -> AnalyticFn:
    return reduce(lambda a, b: a * b, fns)
