import itertools

import numpy as np
import pytest

from natred.forms import KForm, form_from_dense, interior, two_form_to_endo
from natred.lie import (
    HermitianStructure,
    StructureTable,
    characteristic_connection,
    closure_residual,
    codifferential_levi_civita,
    codifferential_omega,
    connection_skew_residual,
    connection_with_torsion,
    covariant_derivative,
    curvature,
    d_invariant,
    holonomy,
    levi_civita,
    natural_reductivity_check,
    nijenhuis,
    torsion_kernel,
    torsion_of,
    twisted_derivative,
    validate_structure,
)
from natred.presets import catalog, preset
from natred.tangent import (
    TangentMetricParams,
    direct_product_brackets,
    h_forms,
    hermitian_structure,
    tangent_brackets,
    torsion_closed_form,
)

SU2 = preset("su2")


def eps():
    return SU2.C.copy()


def tg(a, b, g=SU2):
    return tangent_brackets(g, TangentMetricParams(a, b))


def char(a, b, g=SU2):
    return characteristic_connection(tg(a, b, g), hermitian_structure(g.dim))


# 0-based frame (x1, x2, x3, y1, y2, y3) = indices 0..5
X1, X2, X3, Y1, Y2, Y3 = range(6)


# validation ------------------------------------------------------------------

def test_validate_su2_and_abelian():
    for C in (eps(), np.zeros((3, 3, 3))):
        d = validate_structure(StructureTable(C), compact=True)
        assert d.passed and d.jacobi == 0 and d.antisymmetry == 0 and d.total_skew == 0


def test_validate_perturbed_epsilon():
    C = eps()
    C[0, 1, 2], C[1, 0, 2] = 1.1, -1.1
    d = validate_structure(StructureTable(C), compact=True)
    assert d.jacobi == 0
    assert d.total_skew == pytest.approx(0.1, abs=1e-15)
    assert not d.passed


def test_validate_detects_broken_jacobi_and_antisymmetry():
    C = np.zeros((3, 3, 3))
    C[0, 1, 1], C[1, 0, 1] = 1.0, -1.0      # [e1, e2] = e2
    C[0, 2, 0], C[2, 0, 0] = 1.0, -1.0      # [e1, e3] = e1
    assert validate_structure(StructureTable(C)).jacobi > 0
    C2 = eps()
    C2[0, 1, 2] = 2.0
    assert validate_structure(StructureTable(C2)).antisymmetry == 1.0


def test_structure_table_shape_and_readonly():
    with pytest.raises(ValueError):
        StructureTable(np.zeros((2, 3, 3)))
    t = StructureTable(eps())
    with pytest.raises(ValueError):
        t.C[0, 0, 0] = 1.0


# Levi-Civita ---------------------------------------------------------------------

def test_levi_civita_abelian_and_biinvariant():
    assert not levi_civita(StructureTable(np.zeros((4, 4, 4)))).any()
    for name in ("su2", "su3", "so4"):
        g = preset(name)
        L = levi_civita(g.table)
        # nabla_{e_i} e_j = 1/2 [e_i, e_j]: L[i][k, j] = C[i, j, k] / 2
        assert np.allclose(L, 0.5 * g.C.transpose(0, 2, 1), atol=1e-15)


def test_levi_civita_direct_product_matches_closed_form_lambda():
    p = TangentMetricParams(1.0, 1.0)
    table = direct_product_brackets(SU2, p)
    ch = characteristic_connection(table, hermitian_structure(3))
    H = h_forms(SU2.C)
    closed = np.concatenate([-(p.b ** 2 / p.a) * H.transpose(0, 2, 1), p.b * H.transpose(0, 2, 1)])
    half_T = np.array([0.5 * two_form_to_endo(interior(i, ch.T)) for i in range(6)])
    assert np.max(np.abs(levi_civita(table) - (closed - half_T))) <= 1e-14


def test_levi_civita_metric_and_torsion_free():
    rng = np.random.default_rng(5)
    for name in catalog():
        g = preset(name)
        for a, b in rng.uniform(-2, 2, size=(3, 2)):
            t = tg(a, b, g)
            L = levi_civita(t)
            assert connection_skew_residual(L) <= 1e-12
            assert np.max(np.abs(torsion_of(L, t.C)), initial=0.0) <= 1e-12


# exterior derivative ---------------------------------------------------------

def test_d_abelian_and_one_form():
    omega = hermitian_structure(2).omega
    assert d_invariant(omega, StructureTable(np.zeros((4, 4, 4)))).is_zero()
    # d eta(X, Y) = -eta([X, Y]); [e2, e3] = e1
    assert d_invariant(KForm.basis(3, 0), SU2.table) == KForm(3, 2, {(1, 2): -1})


def test_d_squared_vanishes():
    rng = np.random.default_rng(2)
    for name in ("su2", "so4", "u2"):
        g = preset(name)
        t = tg(1.3, -0.7, g)
        n = t.dim
        for k in (1, 2):
            w = form_from_dense(_random_form(rng, n, k))
            assert d_invariant(d_invariant(w, t), t).norm() <= 1e-12


def _random_form(rng, n, k):
    A = np.zeros((n,) * k)
    for idx in itertools.combinations(range(n), k):
        v = rng.normal()
        for perm in itertools.permutations(range(k)):
            s = np.linalg.det(np.eye(k)[list(perm)])
            A[tuple(idx[p] for p in perm)] = s * v
    return A


def test_twisted_derivative_su2():
    herm = hermitian_structure(3)
    assert twisted_derivative(herm.omega, herm.J, StructureTable(np.zeros((6, 6, 6)))).is_zero()
    dJ = twisted_derivative(herm.omega, herm.J, tg(1.0, 1.0))
    assert dJ[(X1, X2, X3)] == pytest.approx(3.0, abs=1e-14)
    # closed form -2b (x235 + x145 + x136) in the interleaved labels e1=x1, e2=y1, e3=x2, ...
    for trip in ((Y1, X2, X3), (X1, Y2, X3), (X1, X2, Y3)):
        assert dJ[trip] == pytest.approx(-2.0, abs=1e-14)


# Nijenhuis and torsion --------------------------------------------------------------

def test_nijenhuis_examples():
    J = hermitian_structure(2).J
    assert nijenhuis(J, StructureTable(np.zeros((4, 4, 4)))).form.is_zero()
    herm = hermitian_structure(3)
    assert nijenhuis(herm.J, tg(1.0, 1.0)).form[(X1, X2, X3)] == pytest.approx(0.0, abs=1e-14)
    nr = nijenhuis(herm.J, tg(2.0, 1.0))
    assert nr.form[(X1, X2, X3)] == pytest.approx(1.5, abs=1e-14)
    assert nr.compatible and nr.skew_residual <= 1e-14


def test_nijenhuis_non_skew_flagged():
    # affine algebra [e1, e2] = e2 plus a flat plane, J e1 = e3, J e2 = e4:
    # N(e1, e2) = -[e1, e2] = -e2, so g(N(e1, e2), e2) = -1 is not skew
    C = np.zeros((4, 4, 4))
    C[0, 1, 1], C[1, 0, 1] = 1.0, -1.0
    nr = nijenhuis(hermitian_structure(2).J, StructureTable(C))
    assert nr.dense[0, 1, 1] == pytest.approx(-1.0)
    assert not nr.compatible and nr.skew_residual > 0.1


def test_characteristic_torsion_coefficients():
    ch = char(1.0, 1.0)
    assert ch.T[(X1, X2, X3)] == pytest.approx(3.0, abs=1e-14)
    assert ch.T[(Y1, Y2, Y3)] == pytest.approx(-2.0, abs=1e-14)
    assert ch.T.max_diff(torsion_closed_form(SU2.C, TangentMetricParams(1.0, 1.0))) <= 1e-14
    ch0 = char(1.5, 0.0)
    assert ch0.T.max_diff(KForm(6, 3, {(X1, X2, X3): 1.5})) <= 1e-14


def test_connection_with_zero_torsion_is_levi_civita():
    t = tg(1.2, 0.4)
    lc = levi_civita(t)
    assert np.array_equal(connection_with_torsion(lc, KForm.zero(6, 3)), lc)


def test_connection_lambda_su2():
    ch = char(1.0, 1.0)
    H = h_forms(SU2.C)
    for i in range(3):
        assert np.max(np.abs(ch.L[i] - 2 * H[i].T)) <= 1e-14
        assert np.max(np.abs(ch.L[3 + i])) <= 1e-14


def test_torsion_identity_and_metricity_random():
    rng = np.random.default_rng(8)
    for name in ("su2", "su3", "u2"):
        for a, b in rng.uniform(-3, 3, size=(5, 2)):
            ch = char(a, b, preset(name))
            assert ch.torsion_identity_residual() <= 1e-10
            assert connection_skew_residual(ch.L) <= 1e-12
            assert ch.nabla_J_residual() <= 1e-10


# derivatives, curvature, holonomy -----------------------------------------------

def test_covariant_derivative_zero_connection():
    T = np.random.default_rng(0).normal(size=(4, 4, 4))
    assert not covariant_derivative(np.zeros((4, 4, 4)), T).any()


def test_covariant_derivative_leibniz_on_two_forms():
    # nabla of a 2-form W is -(L^T W + W L) per direction
    rng = np.random.default_rng(4)
    L = rng.normal(size=(5, 5, 5))
    W = rng.normal(size=(5, 5))
    expect = np.array([-(L[m].T @ W + W @ L[m]) for m in range(5)])
    assert np.allclose(covariant_derivative(L, W), expect, atol=1e-13)


def test_curvature_values():
    for (a, b), val in (((1.0, 1.0), 2.0), ((2.0, 1.0), 1.25)):
        ch = char(a, b)
        R = curvature(ch.L, ch.table)
        c, res = R.fit(h_forms(SU2.C))
        assert c == pytest.approx(val, rel=1e-12)
        assert res <= 1e-10 and R.symmetry_residual() <= 1e-12
    ch = char(1.0, 0.0)
    assert curvature(ch.L, ch.table).norm() <= 1e-14


def test_curvature_matrix_symmetric():
    ch = char(0.8, -1.3)
    M = curvature(ch.L, ch.table).matrix()
    assert M.shape == (15, 15) and np.allclose(M, M.T, atol=1e-12)


def test_holonomy_dims():
    t = StructureTable(np.zeros((4, 4, 4)))
    assert holonomy(np.zeros((4, 4, 4)), t).dim == 0
    for name, expected in (("su2", 3), ("su3", 8)):
        ch = char(1.0, 2.0, preset(name))
        hol = holonomy(ch.L, ch.table)
        assert hol.dim == expected
        assert closure_residual(hol.basis) <= 1e-8
        flat = hol.basis.reshape(hol.dim, -1)
        assert np.allclose(flat @ flat.T, np.eye(hol.dim), atol=1e-10)


# codifferential ------------------------------------------------------------------

def _torsion_term_kform(T: KForm, omega: KForm) -> np.ndarray:
    """1/2 sum over ordered pairs of (e_i -| e_j -| T) (e_i -| e_j -| Omega), via KForm contractions."""
    n = T.dim
    acc = np.zeros(n)
    for i, j in itertools.product(range(n), repeat=2):
        if i == j:
            continue
        t1 = interior(i, interior(j, T))
        s = interior(i, interior(j, omega))[()]
        acc += 0.5 * float(s) * t1.to_dense()
    return acc


def test_codifferential_torsion_term_matches_contraction_route():
    rng = np.random.default_rng(9)
    omega = hermitian_structure(3).omega
    for _ in range(5):
        T = form_from_dense(_random_form(rng, 6, 3))
        delta, nab = codifferential_omega(omega, T, np.zeros((6, 6, 6)))
        assert nab == 0.0
        assert np.max(np.abs(delta.to_dense() - _torsion_term_kform(T, omega))) <= 1e-12


def test_codifferential_equals_levi_civita_route():
    # for the characteristic connection the formula must reproduce delta^g computed from nabla^g
    rng = np.random.default_rng(10)
    for name in ("su2", "su3"):
        for a, b in rng.uniform(-2, 2, size=(3, 2)):
            ch = char(a, b, preset(name))
            delta, nab = codifferential_omega(ch.hermitian.omega, ch.T, ch.L)
            ref = codifferential_levi_civita(ch.hermitian.omega, ch.table)
            assert nab <= 1e-10
            assert np.max(np.abs(delta.to_dense() - ref)) <= 1e-10
            assert delta.norm() <= 1e-10


def test_codifferential_trivial():
    omega = hermitian_structure(2).omega
    delta, _ = codifferential_omega(omega, KForm.zero(4, 3), np.zeros((4, 4, 4)))
    assert delta.is_zero()


# reductivity and kernels ---------------------------------------------------------------

def test_natural_reductivity_check():
    assert natural_reductivity_check(SU2.table) == 0
    assert natural_reductivity_check(StructureTable(np.zeros((3, 3, 3)))) == 0
    assert natural_reductivity_check(tg(1.0, 1.0)) > 0.5


def test_torsion_kernel():
    assert torsion_kernel(char(1.0, 1.0).T).shape[0] == 0
    assert torsion_kernel(KForm.zero(6, 3)).shape[0] == 6


def test_hermitian_structure_validation():
    J = hermitian_structure(2).J
    with pytest.raises(ValueError):
        HermitianStructure(form_from_dense(J), 2 * J)
    with pytest.raises(ValueError):
        HermitianStructure(form_from_dense(-J), J)
    assert HermitianStructure.from_J(J).omega == hermitian_structure(2).omega
