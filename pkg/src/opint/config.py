"""Numerical tolerances, collected in one place.

Every threshold used by the decomposition, the transforms and the theorem
checks is a field of :class:`Tolerances`.  The CLI exposes them through
``--tol key=value``.
"""

from __future__ import annotations

from dataclasses import dataclass, fields, replace


@dataclass(frozen=True)
class Tolerances:
    # eigenvalue clustering radius, relative to max(1, ||X||)
    cluster: float = 1e-4
    # absolute merge radius; when positive it replaces the relative one
    cluster_abs: float = 0.0
    # smallest k with ||N^k|| <= nilpotent * max(1, ||X||)^k is the index
    nilpotent: float = 1e-9
    # decomposition acceptance: ||sum P - I||, ||P^2 - P||, reconstruction
    projector_residual: float = 1e-8
    # Sylvester solves refuse spectral gaps below this (absolute)
    sylvester_gap: float = 1e-12
    # nodes closer than this (relative) are merged in divided differences
    confluence: float = 1e-6
    # default jet depth for AnalyticFn evaluation
    max_jet_order: int = 32
    # mu classification threshold, relative to max(1, ||mu||)
    mu_zero: float = 1e-9
    # rank cut-off for the independence test, relative to sigma_max
    rank: float = 1e-9
    # minimal eigenvalue gap required by the perturbation-type checks
    spectral_gap: float = 1e-3
    # residual thresholds of individual checks
    perturbation: float = 1e-8
    perturbation_poly: float = 1e-12
    dd_split: float = 1e-9
    mu_hermitian: float = 1e-10
    homomorphism: float = 1e-9
    telescope: float = 1e-8
    telescope_poly: float = 1e-12
    doi_reduction: float = 1e-12
    oracle: float = 1e-8
    derivative_min_error: float = 1e-6
    derivative_slope_low: float = 1.7
    derivative_slope_high: float = 2.3
    continuity_ratio: float = 1e-6
    continuity_slope: float = 0.9

    def with_overrides(self, overrides: dict) -> "Tolerances":
        known = {f.name: f.type for f in fields(self)}
        clean = {}
        for key, value in overrides.items():
            if key not in known:
                raise KeyError(f"unknown tolerance key {key!r}")
            clean[key] = int(value) if key == "max_jet_order" else float(value)
        return replace(self, **clean)

    @classmethod
    def keys(cls) -> list[str]:
        return [f.name for f in fields(cls)]


DEFAULT = Tolerances()
