import numpy as np
import pytest

from natred.clifford import (
    build_clifford,
    kahler_form_of_spinor,
    spinor_structure_check,
    spin_lift,
    spinor_connection_dim6,
    volume_element,
)
from natred.lie import StructureTable
from natred.presets import direct_sum, preset
from natred.tangent import TangentMetricParams, tangent_brackets

REP6 = build_clifford(6)
K = REP6.K


def kappa_of(v):
    return np.einsum("i,iab->ab", v, K)


def test_spin_lift_equivariance():
    rng = np.random.default_rng(0)
    for _ in range(10):
        M = rng.normal(size=(6, 6))
        A = M - M.T
        v = rng.normal(size=6)
        rho = spin_lift(A, K)
        assert np.allclose(rho @ kappa_of(v) - kappa_of(v) @ rho, kappa_of(A @ v), atol=1e-12)
        assert np.allclose(rho, -rho.T, atol=1e-14)


def test_spin_lift_is_lie_homomorphism():
    rng = np.random.default_rng(1)
    A, B = (m - m.T for m in rng.normal(size=(2, 6, 6)))
    lhs = spin_lift(A, K) @ spin_lift(B, K) - spin_lift(B, K) @ spin_lift(A, K)
    assert np.allclose(lhs, spin_lift(A @ B - B @ A, K), atol=1e-12)


def test_spinor_connection_abelian_and_biinvariant():
    assert not spinor_connection_dim6(StructureTable(np.zeros((6, 6, 6)))).any()
    g = direct_sum(preset("su2"), preset("abelian3"))
    ops = spinor_connection_dim6(g.table)
    C = g.C
    expect = 0.125 * np.einsum("mij,iab,jbc->mac", C, K, K)
    assert np.allclose(ops, expect, atol=1e-14)


def test_spinor_connection_shape_errors():
    with pytest.raises(ValueError):
        spinor_connection_dim6(preset("su2").table)
    ops = spinor_connection_dim6(tangent_brackets(preset("su2"), TangentMetricParams(1.0, 1.0)))
    assert ops.shape == (6, 8, 8)


def test_kahler_form_of_spinor_is_complex_structure():
    vol = volume_element(REP6)
    phi = np.random.default_rng(2).normal(size=8)
    phi /= np.linalg.norm(phi)
    Jp = kahler_form_of_spinor(phi, K, vol)
    assert np.allclose(Jp, -Jp.T, atol=1e-12)
    assert np.allclose(Jp @ Jp, -np.eye(6), atol=1e-12)


def test_spinor_structure_at_one_one():
    r = spinor_structure_check(TangentMetricParams(1.0, 1.0), starts=16)
    assert r.passed
    assert r["spinor_residual"].value <= 1e-8 and r["eta_norm"].value <= 1e-8
    # alpha' = -2b in the assembled sign, so -alpha'/8 = 1/4
    assert r["S_J_coefficient"].value == pytest.approx(0.25, abs=1e-6)
    assert r["S_identity_coefficient"].value == pytest.approx(0.0, abs=1e-6)
    assert r["dirac_phi_coefficient"].value == pytest.approx(0.0, abs=1e-6)
    assert r["dirac_phi_tilde_coefficient"].value == pytest.approx(1.5, abs=1e-6)
    assert r["S_symmetric_iff_alpha_prime_zero"].value is False


@pytest.mark.parametrize("b", [0.0, 1.0, -1.0])
def test_spinor_structure_symmetry_locus(b):
    r = spinor_structure_check(TangentMetricParams(1.0, b), starts=16)
    assert r.passed
    assert r["S_symmetric_iff_alpha_prime_zero"].value is (b == 0.0)


def test_spinor_structure_flat_dirac_eigenvalue():
    a = 2.0
    r = spinor_structure_check(TangentMetricParams(a, 0.0), starts=16)
    assert r["dirac_phi_coefficient"].value == pytest.approx(3 * a / 4, abs=1e-6)
    assert r["dirac_orthogonal_norm"].value == pytest.approx(0.0, abs=1e-6)


def test_spinor_structure_deterministic():
    p = TangentMetricParams(1.3, 0.7)
    a = spinor_structure_check(p, starts=8).to_dict(include_time=False)
    b = spinor_structure_check(p, starts=8).to_dict(include_time=False)
    assert a == b
