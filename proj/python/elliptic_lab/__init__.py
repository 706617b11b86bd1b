"""Correlated random matrix laboratory.

Condition-C0 ensembles, elliptic-law geometry and metrics, the Hermitized
self-consistent resolvent system, and anti-concentration tooling, backed by
the C++ core in `elliptic_lab._core`.
"""

from elliptic_lab._core import (
    AtomPairSpec,
    EllipticLaw,
    EnsembleSpec,
    PerturbationSpec,
    ScalarAtomSpec,
    StieltjesState,
    TailReport,
    cofactor_bilinear_identity,
    discrepancy,
    eigenvalues,
    empirical_stu,
    esd_eval,
    generate,
    hs_norm,
    inside_fraction,
    levy_distance,
    log_potential,
    lsv_tail,
    moments_match,
    nu_z_density,
    singular_values,
    small_ball_exact,
    small_ball_mc,
    solve_stu_system,
    truncate_standardize,
)

__all__ = [
    "AtomPairSpec",
    "EllipticLaw",
    "EnsembleSpec",
    "PerturbationSpec",
    "ScalarAtomSpec",
    "StieltjesState",
    "TailReport",
    "cofactor_bilinear_identity",
    "discrepancy",
    "eigenvalues",
    "empirical_stu",
    "esd_eval",
    "generate",
    "hs_norm",
    "inside_fraction",
    "levy_distance",
    "log_potential",
    "lsv_tail",
    "moments_match",
    "nu_z_density",
    "singular_values",
    "small_ball_exact",
    "small_ball_mc",
    "solve_stu_system",
    "truncate_standardize",
]

__version__ = "0.1.0"
