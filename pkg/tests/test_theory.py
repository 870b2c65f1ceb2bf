"""Closed-form asymptotics: spectra, kernels, regime boundaries."""

import math

import numpy as np
import pytest

from erw import lattice, theory
from erw.errors import DomainError
from erw.theory import Regime, Side


def test_replacement_matrix_rows_and_columns():
    for m in (2, 3, 5, 8):
        for p in (0.1, 0.5, 0.9):
            A = theory.replacement_matrix(m, p)
            # one ball added per epoch: columns sum to 1
            assert np.allclose(A.sum(axis=0), 1.0, atol=1e-14)
            assert np.allclose(np.diag(A), p, atol=1e-14)


def test_spectrum_matches_numeric_eigenvalues():
    for m in range(2, 13):
        for p in (0.05, 0.3, 0.5, theory.critical_p(m), 0.77, 0.99):
            A = theory.replacement_matrix(m, p)
            eig = np.sort(np.linalg.eigvals(A).real)
            summary = theory.spectrum(m, p)
            assert summary.leading == 1.0
            assert summary.second_multiplicity == m - 1
            assert abs(eig[-1] - 1.0) < 1e-12
            assert np.allclose(eig[:-1], summary.second, atol=1e-12)


def test_critical_p_closed_form():
    assert theory.critical_p(2) == 0.75
    assert theory.critical_p(3) == pytest.approx(2 / 3, abs=1e-15)
    assert theory.critical_p(4) == 0.625
    assert theory.critical_p(6) == pytest.approx(7 / 12, abs=1e-15)
    with pytest.raises(DomainError):
        theory.critical_p(1)


def test_memory_exponent_is_half_at_criticality():
    for m in range(2, 13):
        assert theory.memory_exponent(m, theory.critical_p(m)) == pytest.approx(
            0.5, abs=1e-15
        )


def test_amplification_closed_forms():
    # (m - 1) / (m + 1 - 2 m p), checked against the generic 1/(1 - 2a)
    cases = [(4, 0.3), (6, 0.5), (3, 0.6), (5, 0.55), (2, 0.7)]
    for m, p in cases:
        direct = (m - 1) / (m + 1 - 2 * m * p)
        assert theory.amplification(m, p) == pytest.approx(direct, rel=1e-14)
    with pytest.raises(DomainError):
        theory.amplification(3, 2 / 3)
    with pytest.raises(DomainError):
        theory.amplification(3, 0.9)


def test_cov_coefficient_homogeneous_and_consistent():
    m, p = 3, 0.5
    c = theory.cov_coefficient
    assert c(m, p, 1.0, 1.0) == pytest.approx(theory.amplification(m, p), rel=1e-14)
    # degree-one homogeneity: c(ls, lt) = l c(s, t)
    for lam in (0.5, 2.0, 7.0):
        assert c(m, p, lam * 0.3, lam * 0.8) == pytest.approx(
            lam * c(m, p, 0.3, 0.8), rel=1e-13
        )
    with pytest.raises(DomainError):
        c(m, p, 0.8, 0.3)
    with pytest.raises(DomainError):
        c(m, p, 0.0, 1.0)


def test_urn_cov_coeff_projects_off_the_diagonal():
    K = theory.urn_cov_coeff(4, 0.4, 0.5, 1.0)
    # rank m - 1, kernel along the all-ones direction
    assert np.allclose(K @ np.ones(4), 0.0, atol=1e-14)
    assert np.linalg.matrix_rank(K, tol=1e-12) == 3


def test_diffusive_kernel_gram_matrix_is_psd():
    grid = [0.2, 0.5, 0.8, 1.0]
    for name, p in (("hexagonal", 0.5), ("zd2", 0.4), ("example6", 0.55)):
        spec = lattice.preset(name)
        d = spec.dimension
        gram = np.zeros((len(grid) * d, len(grid) * d))
        for i, s in enumerate(grid):
            for j, t in enumerate(grid):
                block = theory.diffusive_kernel(spec, p, min(s, t), max(s, t))
                gram[i * d : (i + 1) * d, j * d : (j + 1) * d] = block
        assert np.min(np.linalg.eigvalsh(gram)) > -1e-10


def test_diffusive_kernel_type1_doubles_the_single_family():
    spec = lattice.preset("triangular")
    p = 0.5
    a = theory.memory_exponent(spec.m, p)
    expected = (
        2.0
        * theory.amplification(spec.m, p)
        * 0.5
        * (1.0 / 0.5) ** a
        * lattice.step_covariance(spec.u)
    )
    assert np.allclose(
        theory.diffusive_kernel(spec, p, 0.5, 1.0), expected, atol=1e-13
    )


def test_diffusive_kernel_refuses_other_regimes():
    spec = lattice.preset("hexagonal")
    with pytest.raises(DomainError):
        theory.diffusive_kernel(spec, 2 / 3, 1.0, 1.0)
    with pytest.raises(DomainError):
        theory.diffusive_kernel(spec, 0.9, 1.0, 1.0)


def test_critical_kernel_values():
    hexagonal = lattice.preset("hexagonal")
    both = theory.critical_kernel(hexagonal, 2 / 3, 1.0)
    assert np.allclose(both, np.eye(2), atol=1e-12)  # Sigma_U + Sigma_W = I
    assert np.allclose(theory.critical_kernel(hexagonal, 2 / 3, 0.25), 0.25 * both,
                       atol=1e-13)

    triangular = lattice.preset("triangular")
    one_family = theory.critical_kernel(triangular, 7 / 12, 1.0)
    assert np.allclose(one_family, 2 * lattice.step_covariance(triangular.u),
                       atol=1e-12)

    mixed = lattice.preset("example6")  # p = pc_u only: U side survives
    kernel = theory.critical_kernel(mixed, 0.6, 1.0)
    assert np.allclose(kernel, lattice.step_covariance(mixed.u), atol=1e-12)
    assert np.allclose(kernel, np.array([[0.56, 0.32], [0.32, 1.04]]), atol=1e-12)


def test_super_second_moment_against_gamma_oracle():
    spec = lattice.preset("hexagonal")
    p = 0.8
    a = theory.memory_exponent(3, p)  # 0.7
    mean, second = theory.super_second_moment(spec, p)
    assert np.allclose(mean, 0.0, atol=1e-15)
    scale = 1.0 / ((2 * a - 1) * math.gamma(2 * a))
    assert np.allclose(second, scale * np.eye(2), atol=1e-12)

    zd1 = lattice.preset("zd1")
    _, second1 = theory.super_second_moment(zd1, 0.8)
    assert second1.shape == (1, 1)
    assert second1[0, 0] == pytest.approx(1.0 / (0.2 * math.gamma(1.2)), rel=1e-12)


def test_super_second_moment_rejects_unsupported_cases():
    with pytest.raises(DomainError):
        theory.super_second_moment(lattice.preset("hexagonal"), 0.5)  # diffusive
    with pytest.raises(DomainError):
        theory.super_second_moment(lattice.preset("example6"), 0.9)  # mixed exponents
    with pytest.raises(DomainError):
        theory.super_second_moment(lattice.preset("brick_wall"), 0.9)  # drifting family


def test_classify_regime_table():
    hexagonal = lattice.preset("hexagonal")
    assert theory.classify_regime(hexagonal, 0.5).regime is Regime.DIFFUSIVE
    assert theory.classify_regime(hexagonal, 2 / 3).regime is Regime.CRITICAL
    assert theory.classify_regime(hexagonal, 0.8).regime is Regime.SUPERDIFFUSIVE

    zd1 = lattice.preset("zd1")
    assert theory.classify_regime(zd1, 0.75).regime is Regime.CRITICAL
    assert theory.classify_regime(zd1, 0.76).regime is Regime.SUPERDIFFUSIVE

    mixed = lattice.preset("example6")  # pc_u = 0.6 < pc_w = 0.625
    assert theory.classify_regime(mixed, 0.4).regime is Regime.DIFFUSIVE
    report = theory.classify_regime(mixed, 0.6)
    assert report.regime is Regime.CRITICAL_MIXED
    assert report.dominant_side is Side.U
    for p in (0.61, 0.625, 0.7, 0.9):
        report = theory.classify_regime(mixed, p)
        assert report.regime is Regime.SUPER_MIXED_U
        assert report.dominant_side is Side.U
        assert report.dominant_exponent == report.exponent_u
        assert report.exponent_u > report.exponent_w


def test_smaller_critical_point_always_dominates():
    # a - a' = (p - 1)(1/(m-1) - 1/(m'-1)): the family with more directions
    # keeps the larger exponent for every p < 1
    spec = lattice.preset("example6")
    for p in np.linspace(0.61, 0.999, 40):
        report = theory.classify_regime(spec, float(p))
        assert report.exponent_u >= report.exponent_w
        assert report.regime in (Regime.SUPER_MIXED_U, Regime.SUPERDIFFUSIVE)


def test_classify_eps_band_widens_criticality():
    hexagonal = lattice.preset("hexagonal")
    p = 2 / 3 + 1e-6
    assert theory.classify_regime(hexagonal, p).regime is Regime.SUPERDIFFUSIVE
    assert (
        theory.classify_regime(hexagonal, p, eps=1e-5).regime is Regime.CRITICAL
    )


def test_classify_rejects_degenerate_p():
    spec = lattice.preset("hexagonal")
    for p in (0.0, 1.0, -0.1, 1.5):
        with pytest.raises(DomainError):
            theory.classify_regime(spec, p)


def test_lln_drift_values():
    assert np.allclose(theory.lln_drift(lattice.preset("hexagonal")), 0.0, atol=1e-15)
    assert np.allclose(theory.lln_drift(lattice.preset("brick_wall")), 0.0, atol=1e-15)
    assert np.allclose(
        theory.lln_drift(lattice.preset("example6")), [0.1, 0.2], atol=1e-15
    )
    assert np.allclose(
        theory.lln_drift(lattice.preset("triangular")), 0.0, atol=1e-15
    )
