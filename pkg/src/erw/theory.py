"""Closed-form asymptotics.

Everything here is a deterministic function of the step geometry and the
memory parameter p.  For a family of m directions the color replacement
matrix of the associated reinforcement scheme is

    A = ((1 - p) / (m - 1)) J_m + ((m p - 1) / (m - 1)) I_m,

doubly stochastic with leading eigenvalue 1 and second eigenvalue
a = (m p - 1) / (m - 1) of multiplicity m - 1.  The walk changes behavior
at p_c = (m + 1) / (2 m), where a crosses 1/2: below it fluctuations are
diffusive with amplification C_a = 1 / (1 - 2 a), at it they carry a
sqrt(log n) correction, above it an n^a scaling with a random limit
direction.  Two-family walks classify over (p_c(U), p_c(W), p), with
mixed regimes when the two families cross at different p.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .lattice import LatticeSpec, WalkType, mean_step, step_covariance

# The superdiffusive moment formulas have a pole at a = 1/2; refuse to
# evaluate them closer to it than this.
SUPER_EXPONENT_MARGIN = 1e-6
# Family means must vanish to within this for the superdiffusive moment
# formulas to apply.
DRIFT_TOLERANCE = 1e-10


def _check_mp(m: int, p: float, allow_one: bool = True) -> None:
    if not isinstance(m, (int, np.integer)) or m < 2:
        raise DomainError(f"m must be an integer >= 2, got {m!r}")
    upper_ok = p <= 1.0 if allow_one else p < 1.0
    if not (0.0 < p and upper_ok):
        span = "(0, 1]" if allow_one else "(0, 1)"
        raise DomainError(f"p must lie in {span}, got {p!r}")


def replacement_matrix(m: int, p: float) -> np.ndarray:
    """Color replacement matrix of the reinforcement scheme on m colors."""
    _check_mp(m, p)
    return ((1.0 - p) / (m - 1)) * np.ones((m, m)) + (
        (m * p - 1.0) / (m - 1)
    ) * np.eye(m)


@dataclass(frozen=True)
class SpectrumSummary:
    """Eigenvalues of the replacement matrix: 1, then a with multiplicity m - 1."""

    leading: float
    second: float
    second_multiplicity: int


def spectrum(m: int, p: float) -> SpectrumSummary:
    return SpectrumSummary(
        leading=1.0,
        second=memory_exponent(m, p),
        second_multiplicity=m - 1,
    )


def critical_p(m: int) -> float:
    """Memory parameter where the second eigenvalue crosses 1/2."""
    if not isinstance(m, (int, np.integer)) or m < 2:
        raise DomainError(f"m must be an integer >= 2, got {m!r}")
    return (m + 1) / (2 * m)


def memory_exponent(m: int, p: float) -> float:
    """Second eigenvalue a = (m p - 1) / (m - 1) of the replacement matrix."""
    _check_mp(m, p)
    return (m * p - 1.0) / (m - 1)


def amplification(m: int, p: float) -> float:
    """Diffusive variance amplification C_a = 1 / (1 - 2a); needs a < 1/2."""
    a = memory_exponent(m, p)
    if a >= 0.5:
        raise DomainError(
            f"amplification diverges at and above p_c = {critical_p(m)!r}; got p = {p!r}"
        )
    return 1.0 / (1.0 - 2.0 * a)


def cov_coefficient(m: int, p: float, s: float, t: float) -> float:
    """Scalar kernel coefficient C_a * s * (t/s)^a for 0 < s <= t."""
    if not 0.0 < s <= t:
        raise DomainError(f"need 0 < s <= t, got s = {s!r}, t = {t!r}")
    a = memory_exponent(m, p)
    return amplification(m, p) * s * (t / s) ** a


def urn_cov_coeff(m: int, p: float, s: float, t: float) -> np.ndarray:
    """Covariance kernel of the rescaled color counts themselves:
    (C_a s (t/s)^a / m) (I_m - J_m / m)."""
    c = cov_coefficient(m, p, s, t)
    return (c / m) * (np.eye(m) - np.ones((m, m)) / m)


class Regime(enum.Enum):
    DIFFUSIVE = "diffusive"
    CRITICAL = "critical"
    CRITICAL_MIXED = "critical_mixed"
    SUPERDIFFUSIVE = "superdiffusive"
    SUPER_MIXED_U = "super_mixed_u"
    SUPER_MIXED_W = "super_mixed_w"


class Side(enum.Enum):
    U = "u"
    W = "w"
    BOTH = "both"
    NONE = "none"


@dataclass(frozen=True)
class RegimeReport:
    p: float
    pc_u: float
    pc_w: float
    exponent_u: float
    exponent_w: float
    regime: Regime
    dominant_side: Side
    scaling: str

    @property
    def dominant_exponent(self) -> float | None:
        """Exponent governing the superdiffusive scaling, when there is one."""
        if self.regime is Regime.SUPERDIFFUSIVE:
            return self.exponent_u
        if self.regime is Regime.SUPER_MIXED_U:
            return self.exponent_u
        if self.regime is Regime.SUPER_MIXED_W:
            return self.exponent_w
        return None


def classify_regime(spec: LatticeSpec, p: float, eps: float = 0.0) -> RegimeReport:
    """Classify (p_c(U), p_c(W), p) into a fluctuation regime.

    eps widens the equality tests against the critical points, for callers
    holding p as an inexact float.  When the two families go fast at
    different p and p exceeds the smaller critical point, the smaller-p_c
    family keeps the larger exponent for every p < 1, because
    a - a' = (p - 1) (1/(m-1) - 1/(m'-1)); the walk is then dominated by
    that family at scale n^max(a, a').
    """
    if not 0.0 < p < 1.0:
        raise DomainError(
            f"regime classification needs p in (0, 1), got p = {p!r}; "
            "p = 1 is the degenerate fixed-direction walk"
        )
    if eps < 0.0:
        raise DomainError("eps must be nonnegative")
    pc_u = critical_p(spec.m)
    pc_w = critical_p(spec.m_prime)
    a_u = memory_exponent(spec.m, p)
    a_w = memory_exponent(spec.m_prime, p)
    low, high = min(pc_u, pc_w), max(pc_u, pc_w)
    small_side = Side.U if pc_u <= pc_w else Side.W
    small_a = a_u if small_side is Side.U else a_w

    def close(x, y):
        return abs(x - y) <= eps

    common = dict(p=p, pc_u=pc_u, pc_w=pc_w, exponent_u=a_u, exponent_w=a_w)
    if close(p, low):
        if close(low, high):
            return RegimeReport(
                regime=Regime.CRITICAL,
                dominant_side=Side.BOTH,
                scaling="sqrt(n log n)",
                **common,
            )
        return RegimeReport(
            regime=Regime.CRITICAL_MIXED,
            dominant_side=small_side,
            scaling="sqrt(n log n)",
            **common,
        )
    if p < low:
        return RegimeReport(
            regime=Regime.DIFFUSIVE,
            dominant_side=Side.NONE,
            scaling="sqrt(n)",
            **common,
        )
    # p above the smaller critical point
    if close(low, high):
        return RegimeReport(
            regime=Regime.SUPERDIFFUSIVE,
            dominant_side=Side.BOTH,
            scaling=f"n^{a_u:.6g}",
            **common,
        )
    regime = Regime.SUPER_MIXED_U if small_side is Side.U else Regime.SUPER_MIXED_W
    return RegimeReport(
        regime=regime,
        dominant_side=small_side,
        scaling=f"n^{small_a:.6g}",
        **common,
    )


def lln_drift(spec: LatticeSpec) -> np.ndarray:
    """Almost-sure limit of S_n / n, namely (mean U + mean W) / 2."""
    return 0.5 * (mean_step(spec.u) + mean_step(spec.w))


def diffusive_kernel(spec: LatticeSpec, p: float, s: float, t: float) -> np.ndarray:
    """Limit covariance E[W_s W_t^T] of the diffusively rescaled walk.

    Type 2: C_a s (t/s)^a Sigma(U) + C_a' s (t/s)^a' Sigma(W);
    type 1 (single family, both parities contribute): 2 C_a s (t/s)^a Sigma(U).
    """
    report = classify_regime(spec, p)
    if report.regime is not Regime.DIFFUSIVE:
        raise DomainError(
            f"diffusive kernel needs the diffusive regime, got {report.regime.value}"
        )
    cu = cov_coefficient(spec.m, p, s, t)
    if spec.walk_type is WalkType.TYPE1:
        return 2.0 * cu * step_covariance(spec.u)
    cw = cov_coefficient(spec.m_prime, p, s, t)
    return cu * step_covariance(spec.u) + cw * step_covariance(spec.w)


def critical_kernel(spec: LatticeSpec, p: float, s: float, eps: float = 0.0) -> np.ndarray:
    """Limit covariance at time s under the sqrt(n^t log n) scaling.

    At a shared critical point: s (Sigma(U) + Sigma(W)) (type 2) or
    2 s Sigma(U) (type 1).  When only one family is critical, that family
    alone survives the scaling: s Sigma(dominant family).
    """
    if s <= 0.0:
        raise DomainError(f"need s > 0, got s = {s!r}")
    report = classify_regime(spec, p, eps=eps)
    if report.regime is Regime.CRITICAL:
        if spec.walk_type is WalkType.TYPE1:
            return 2.0 * s * step_covariance(spec.u)
        return s * (step_covariance(spec.u) + step_covariance(spec.w))
    if report.regime is Regime.CRITICAL_MIXED:
        side = spec.u if report.dominant_side is Side.U else spec.w
        return s * step_covariance(side)
    raise DomainError(
        f"critical kernel needs a critical regime, got {report.regime.value}"
    )


def super_second_moment(spec: LatticeSpec, p: float) -> tuple[np.ndarray, np.ndarray]:
    """Mean (zero) and second moment of the n^a-scale limit vector.

    Valid when both families share the exponent a > 1/2, family means
    vanish, and first steps are drawn uniformly; then
    E[L L^T] = (Sigma(U) + Sigma(W)) / ((2a - 1) Gamma(2a)) for type 2 and
    Sigma(U) / ((2a - 1) Gamma(2a)) for type 1.
    """
    report = classify_regime(spec, p)
    if report.regime is not Regime.SUPERDIFFUSIVE:
        raise DomainError(
            "superdiffusive moments need both families past their shared "
            f"critical point, got regime {report.regime.value}"
        )
    a = report.exponent_u
    if a < 0.5 + SUPER_EXPONENT_MARGIN:
        raise DomainError(
            f"exponent a = {a!r} is within {SUPER_EXPONENT_MARGIN:g} of the "
            "pole at 1/2; the moment formulas are numerically meaningless there"
        )
    mu = mean_step(spec.u)
    mw = mean_step(spec.w)
    if np.max(np.abs(mu)) > DRIFT_TOLERANCE or np.max(np.abs(mw)) > DRIFT_TOLERANCE:
        raise DomainError(
            "superdiffusive moment formulas assume zero family means; "
            f"got mean(U) = {mu.tolist()}, mean(W) = {mw.tolist()}"
        )
    prefactor = 1.0 / ((2.0 * a - 1.0) * math.gamma(2.0 * a))
    if spec.walk_type is WalkType.TYPE1:
        second = prefactor * step_covariance(spec.u)
    else:
        second = prefactor * (step_covariance(spec.u) + step_covariance(spec.w))
    return np.zeros(spec.dimension), second
