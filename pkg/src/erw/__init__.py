"""Elephant random walks on periodic structures.

Simulation, exact enumeration, closed-form asymptotics, and Monte Carlo
verification for step-reinforced walks whose step alphabet repeats with
period one (type 1) or two (type 2).
"""

from .errors import (
    CapacityError,
    DomainError,
    ErwError,
    ParseError,
    UnknownPresetError,
)
from .lattice import (
    LatticeSpec,
    StepSet,
    ValidationReport,
    WalkType,
    make_spec,
    mean_step,
    parse_spec,
    preset,
    preset_names,
    step_covariance,
    to_document,
    validate,
)
from .mc import (
    EnsembleStats,
    VerifyReport,
    campaign_report,
    check_equivalence,
    check_fclt_cov,
    check_lln,
    check_super_moments,
    ensemble_final_counts,
    ensemble_positions,
    report_json,
    rescale_critical,
    rescale_diffusive,
    rescale_super,
    run_ensemble,
    verify_all,
)
from .theory import (
    Regime,
    RegimeReport,
    Side,
    amplification,
    classify_regime,
    cov_coefficient,
    critical_kernel,
    critical_p,
    diffusive_kernel,
    lln_drift,
    memory_exponent,
    replacement_matrix,
    spectrum,
    super_second_moment,
)
from .urn import UrnState, draw_and_reinforce, erw_via_urns, new_urn, urn_path
from .walk import FirstStepMode, WalkState, new_walk, positions_at, simulate, step

__version__ = "0.1.0"

__all__ = [
    "CapacityError",
    "DomainError",
    "EnsembleStats",
    "ErwError",
    "FirstStepMode",
    "LatticeSpec",
    "ParseError",
    "Regime",
    "RegimeReport",
    "Side",
    "StepSet",
    "UnknownPresetError",
    "UrnState",
    "ValidationReport",
    "VerifyReport",
    "WalkState",
    "WalkType",
    "amplification",
    "campaign_report",
    "check_equivalence",
    "check_fclt_cov",
    "check_lln",
    "check_super_moments",
    "classify_regime",
    "cov_coefficient",
    "critical_kernel",
    "critical_p",
    "diffusive_kernel",
    "draw_and_reinforce",
    "ensemble_final_counts",
    "ensemble_positions",
    "erw_via_urns",
    "lln_drift",
    "make_spec",
    "mean_step",
    "memory_exponent",
    "new_urn",
    "new_walk",
    "parse_spec",
    "positions_at",
    "preset",
    "preset_names",
    "replacement_matrix",
    "report_json",
    "rescale_critical",
    "rescale_diffusive",
    "rescale_super",
    "run_ensemble",
    "simulate",
    "spectrum",
    "step",
    "step_covariance",
    "super_second_moment",
    "to_document",
    "urn_path",
    "validate",
    "verify_all",
]
