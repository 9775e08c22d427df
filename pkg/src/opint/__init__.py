"""Generalized double and triple operator integrals for finite matrices.

Spectral resolution of arbitrary (possibly defective) square matrices,
divided-difference jets of analytic functions, the GDOI/GTOI transforms
built from them, and a seeded harness that checks the surrounding identities,
bounds and limit theorems numerically.
"""

from .config import DEFAULT, Tolerances
from .errors import (
    AmbiguousClusteringError,
    ConvergenceError,
    DegenerateInputError,
    DomainError,
    IllConditionedError,
    InvalidInputError,
    OpintError,
    PathError,
    PreconditionError,
    UnsupportedOrderError,
)
from .funcspace import (
    AnalyticFn,
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
from .gdoi import (
    GdoiResult,
    GtoiResult,
    MuClassification,
    NormBounds,
    classify_mu,
    func_of_operator,
    func_of_two_operators,
    gdoi,
    gtoi,
    mu_term,
    norm_bounds,
)
from .linalg import (
    JordanSpec,
    as_matrix,
    jordan_matrix,
    matrix_exp_oracle,
    operator_norm,
    random_jordan_matrix,
    read_matrix,
    solve_sylvester,
    write_matrix,
)
from .spectral import EigenComponent, SpectralDecomposition, decompose, reconstruct

__version__ = "0.1.0"
