import itertools
import json
from importlib import resources

import numpy as np
import pytest

from natred.clifford import (
    as_sphere_point,
    bracket_identity_check,
    build_clifford,
    derive_clifford,
    sphere_frame,
    sphere_sampling_check,
    tau,
    tau_derivative,
    tau_derivative_fd,
    ts7_pipeline,
    ts7_structure,
    vector_field_bracket,
    vector_field_bracket_sign,
)
from natred.errors import DegenerateParameters
from natred.sampling import sphere_points
from natred.tangent import TangentMetricParams

REP = build_clifford(7)
E0 = np.eye(8)[0]


# representation ------------------------------------------------------------------

def test_golden_data_matches_derivation():
    doc = json.loads(resources.files("natred").joinpath("data/clifford7.json").read_text())
    words, kappa = derive_clifford()
    assert words == doc["words"]
    assert np.array_equal(kappa, np.array(doc["kappa"]))
    assert np.array_equal(REP.kappa, kappa)


def test_clifford_relations_exact():
    k = REP.kappa
    assert k.dtype.kind == "i"
    assert REP.relation_residual() == 0 and REP.skew_residual() == 0
    assert not (k[0] @ k[1] + k[1] @ k[0]).any()
    assert np.array_equal(k[0] @ k[0], -np.eye(8, dtype=int))
    for i, j in itertools.combinations(range(7), 2):
        assert not (k[i] @ k[j] + k[j] @ k[i]).any()


def test_dim6_restricts_dim7():
    r6 = build_clifford(6)
    assert r6.n == 6 and np.array_equal(r6.kappa, REP.kappa[:6])
    with pytest.raises(ValueError):
        build_clifford(5)


# sphere frame and tau ----------------------------------------------------------------

def test_frame_at_basis_spinor():
    V = sphere_frame(REP, E0)
    assert np.array_equal(V, REP.K[:, :, 0])
    assert np.array_equal(V @ V.T, np.eye(7)) and not (V @ E0).any()


def test_frame_random_points():
    d = sphere_sampling_check(REP, sphere_points(11, 100))
    assert d["frame_orthonormality"] <= 1e-12 and d["frame_normal_to_x"] <= 1e-12
    assert d["tau_antisymmetry"] <= 1e-12
    assert d["s7_bracket_tangential"] <= 1e-10 and d["s7_bracket_normal"] <= 1e-10


def test_sphere_point_validation():
    assert np.linalg.norm(as_sphere_point(np.arange(8))) == pytest.approx(1.0, abs=1e-15)
    with pytest.raises(ValueError):
        as_sphere_point(np.zeros(8))
    with pytest.raises(ValueError):
        as_sphere_point(np.ones(7))


def test_tau_at_basis_spinor():
    t = tau(REP, E0)
    K = REP.kappa
    for i, j, k in itertools.product(range(7), repeat=3):
        assert t[i, j, k] == 2 * (K[i] @ K[j] @ K[k])[0, 0]
    for i, j in itertools.product(range(7), repeat=2):
        assert t[i, i, j] == 0


def test_tau_derivative_matches_finite_differences():
    rng = np.random.default_rng(7)
    pts = sphere_points(5, 20)
    for x in pts:
        m = int(rng.integers(7))
        i, j, k = rng.integers(7, size=3)
        exact = tau_derivative(REP, x, m)
        fd = tau_derivative_fd(REP, x, m, h=1e-5)
        assert abs(exact[i, j, k] - fd[i, j, k]) <= 1e-7
        assert np.max(np.abs(exact - fd)) <= 1e-7
    assert np.array_equal(tau_derivative(REP, pts[0])[3], tau_derivative(REP, pts[0], 3))


def test_bracket_identity_at_basis_spinor_exact():
    bi = bracket_identity_check(REP, E0)
    assert bi.tangential == 0.0 and bi.normal == 0.0


def test_vector_field_bracket_sign():
    # the bracket of the fields x -> kappa_i x is minus the matrix commutator applied to x
    x = sphere_points(3, 1)[0]
    A, B = REP.K[0], REP.K[1]
    assert np.allclose(vector_field_bracket(A, B, x), -(A @ B - B @ A) @ x, atol=1e-14)
    assert np.allclose(vector_field_bracket(A, B, x, h=1e-6), vector_field_bracket(A, B, x), atol=1e-8)
    assert vector_field_bracket_sign(REP, x) == -1


def test_ts7_structure_conventions():
    p = TangentMetricParams(1.0, 1.0)
    vf = ts7_structure(REP, p, E0)
    pr = ts7_structure(REP, p, E0, convention="commutator")
    assert vf.sign == 1 and pr.sign == -1
    assert np.array_equal(vf.table.C, -pr.table.C)
    with pytest.raises(ValueError):
        ts7_structure(REP, p, E0, convention="other")


# TS^7 pipeline ------------------------------------------------------------------------

def test_ts7_flat_case():
    for x in sphere_points(9, 3):
        r = ts7_pipeline(REP, TangentMetricParams(1.0, 0.0), x)
        assert r.passed
        assert r["flat_curvature_norm"].value <= 1e-12 and r["holonomy_dim"].value == 0


def test_ts7_holonomy_spin7():
    r = ts7_pipeline(REP, TangentMetricParams(1.0, 2.0), sphere_points(10, 1)[0])
    assert r["holonomy_dim"].value == 21 and r["holonomy_closure"].passed


def test_ts7_identities_that_hold():
    for x in sphere_points(12, 4):
        r = ts7_pipeline(REP, TangentMetricParams(1.0, 1.0), x)
        for name in ("torsion_closed_form", "connection_closed_form", "torsion_identity", "nabla_J",
                     "nijenhuis_skew_residual", "nabla_T_antisymmetry", "nabla_T_nonzero",
                     "levi_civita_bianchi", "levi_civita_pair_symmetry", "holonomy_dim"):
            assert r[name].passed, name
        assert r["nabla_T_nonzero"].value >= 0.1


def test_ts7_curvature_claim_recorded_as_failure():
    # the curvature operator of the assembled connection is not a multiple of sum H_k (x) H_k
    r = ts7_pipeline(REP, TangentMetricParams(1.0, 1.0), E0)
    names = {c.name for c in r.failures()}
    assert names == {"curvature_coefficient", "curvature_fit_residual", "curvature_pair_symmetry"}
    assert r["curvature_coefficient"].expected == 8.0


def test_ts7_rejects_zero_a():
    with pytest.raises(DegenerateParameters):
        ts7_pipeline(REP, TangentMetricParams(0.0, 1.0), E0)
