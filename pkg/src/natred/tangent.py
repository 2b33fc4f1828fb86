"""Left-invariant almost Hermitian structures on tangent groups TG = G x| Ad g.

Frame ordering is (x_1..x_n, y_1..y_n) with the orthonormal frame
x_i = a(e_i, 0), y_i = (b e_i, e_i) of the semidirect product.  The almost
complex structure is J x_i = y_i, with fundamental form
Omega = -(x_1 ^ y_1 + ... + x_n ^ y_n).
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateParameters
from .forms import KForm, Tolerance, form_from_dense, sigma_T, wedge
from .lie import (
    Characteristic,
    HermitianStructure,
    StructureTable,
    characteristic_connection,
    closure_residual,
    codifferential_omega,
    covariant_derivative,
    curvature,
    holonomy,
    torsion_kernel,
)
from .presets import AlgebraSpec, center
from .report import VerificationReport

__all__ = [
    "TangentMetricParams",
    "AnsatzParams",
    "Witness",
    "tangent_brackets",
    "direct_product_brackets",
    "hermitian_structure",
    "h_forms",
    "torsion_closed_form",
    "nijenhuis_closed_form",
    "twisted_closed_form",
    "derived_dim",
    "interleaved_order",
    "ansatz_torsion",
    "ansatz_curvature_forms",
    "ansatz_sigma",
    "to_interleaved",
    "run_pipeline",
    "six_dim_crosscheck",
    "run_tangent_family",
    "ansatz_crosscheck",
    "isometry_crosscheck",
    "run_isometry_crosscheck",
    "splitting_check",
    "biinvariance_witness",
]


@dataclass(frozen=True)
class TangentMetricParams:
    a: float
    b: float

    def __post_init__(self):
        if not (math.isfinite(self.a) and math.isfinite(self.b)):
            raise DegenerateParameters("parameters must be finite")
        if self.a == 0:
            raise DegenerateParameters("a = 0 is not allowed (the metric degenerates)")

    @property
    def flat(self) -> bool:
        return self.b == 0

    @property
    def curvature_scalar(self) -> float:
        a, b = self.a, self.b
        return b * b / (a * a) * (a * a + b * b)


@dataclass(frozen=True)
class AnsatzParams:
    alpha: float
    alpha_prime: float
    beta: float

    @classmethod
    def from_metric(cls, p: TangentMetricParams, sign: int = -1) -> "AnsatzParams":
        # sign = -1 reproduces the y-coefficient of the assembled torsion
        return cls(p.a + 2 * p.b ** 2 / p.a, sign * 2 * p.b, p.b ** 2 / p.a)


# bracket tables -----------------------------------------------------------

def tangent_brackets(g: AlgebraSpec, p: TangentMetricParams) -> StructureTable:
    C, n, a, b = g.C, g.dim, p.a, p.b
    T = np.zeros((2 * n,) * 3)
    T[:n, :n, :n] = a * C
    T[:n, n:, n:] = a * C
    T[n:, :n, n:] = -a * np.einsum("jik->ijk", C)
    T[n:, n:, n:] = 2 * b * C
    T[n:, n:, :n] = -(b * b / a) * C
    return StructureTable(T, f"T{g.name}")


def direct_product_brackets(g: AlgebraSpec, p: TangentMetricParams) -> StructureTable:
    C, n, a, b = g.C, g.dim, p.a, p.b
    T = np.zeros((2 * n,) * 3)
    T[:n, :n, :n] = a * C
    T[:n, n:, :n] = b * C
    T[n:, :n, :n] = -b * np.einsum("jik->ijk", C)
    T[n:, n:, :n] = (b * b / a) * C
    return StructureTable(T, f"{g.name}x{g.name}")


def hermitian_structure(n: int) -> HermitianStructure:
    J = np.zeros((2 * n, 2 * n))
    for i in range(n):
        J[n + i, i] = 1.0
        J[i, n + i] = -1.0
    omega = KForm(2 * n, 2, {(i, n + i): -1 for i in range(n)})
    return HermitianStructure(omega, J)


def h_forms(C: np.ndarray) -> np.ndarray:
    """Dense 2-forms H_i = sum_{j<k} C_ijk (x_j ^ x_k + y_j ^ y_k)."""
    n = C.shape[0]
    H = np.zeros((n, 2 * n, 2 * n))
    H[:, :n, :n] = C
    H[:, n:, n:] = C
    return H


def derived_dim(C: np.ndarray, rel_cutoff: float = 1e-8) -> int:
    """dim [g, g]."""
    n = C.shape[0]
    if n == 0:
        return 0
    s = np.linalg.svd(C.reshape(n * n, n), compute_uv=False)
    return 0 if s[0] <= 1e-12 else int(np.sum(s > rel_cutoff * s[0]))


# closed forms, assembled monomial by monomial --------------------------------

def _monomials(C, coeff_fn, n) -> KForm:
    """sum_{i<j<k} C_ijk * (combination built by coeff_fn(x, y, i, j, k))."""
    x = [KForm.basis(2 * n, i) for i in range(n)]
    y = [KForm.basis(2 * n, n + i) for i in range(n)]
    out = KForm.zero(2 * n, 3)
    for i, j, k in itertools.combinations(range(n), 3):
        if C[i, j, k] != 0:
            out = out + float(C[i, j, k]) * coeff_fn(x, y, i, j, k)
    return out


def _w(*fs):
    r = fs[0]
    for f in fs[1:]:
        r = wedge(r, f)
    return r


def _mixed_y(x, y, i, j, k):
    # x_i y_jk + y_i x_j y_k + y_ij x_k
    return _w(x[i], y[j], y[k]) + _w(y[i], x[j], y[k]) + _w(y[i], y[j], x[k])


def _mixed_x(x, y, i, j, k):
    # x_ij y_k + y_i x_jk + x_i y_j x_k
    return _w(x[i], x[j], y[k]) + _w(y[i], x[j], x[k]) + _w(x[i], y[j], x[k])


def torsion_closed_form(C, p: TangentMetricParams) -> KForm:
    a, b = p.a, p.b
    return _monomials(C, lambda x, y, i, j, k: (a + 2 * b * b / a) * _w(x[i], x[j], x[k])
                      - 2 * b * _w(y[i], y[j], y[k])
                      + (b * b / a) * _mixed_y(x, y, i, j, k), C.shape[0])


def nijenhuis_closed_form(C, p: TangentMetricParams) -> KForm:
    a, b = p.a, p.b
    return _monomials(C, lambda x, y, i, j, k: (a - b * b / a) * (_w(x[i], x[j], x[k]) - _mixed_y(x, y, i, j, k))
                      - 2 * b * (_w(y[i], y[j], y[k]) - _mixed_x(x, y, i, j, k)), C.shape[0])


def twisted_closed_form(C, p: TangentMetricParams) -> KForm:
    a, b = p.a, p.b
    return _monomials(C, lambda x, y, i, j, k: a * _mixed_y(x, y, i, j, k)
                      + 3 * b * b / a * _w(x[i], x[j], x[k])
                      - 2 * b * _mixed_x(x, y, i, j, k), C.shape[0])


# six-dimensional ansatz in the interleaved frame e1..e6 = x1, y1, x2, y2, x3, y3

def interleaved_order(n: int) -> list[int]:
    """Frame index of the interleaved basis vector e_{m} (0-based m)."""
    out = []
    for i in range(n):
        out += [i, n + i]
    return out


def ansatz_torsion(q: AnsatzParams) -> KForm:
    """alpha e135 + alpha' e246 + beta (e245 + e236 + e146), 0-based labels."""
    return KForm(6, 3, {(0, 2, 4): q.alpha, (1, 3, 5): q.alpha_prime,
                        (1, 3, 4): q.beta, (1, 2, 5): q.beta, (0, 3, 5): q.beta})


def ansatz_sigma(q: AnsatzParams) -> KForm:
    c = q.beta * (q.beta - q.alpha)
    return KForm(6, 4, {(0, 1, 4, 5): c, (0, 1, 2, 3): c, (2, 3, 4, 5): c})


def ansatz_curvature_forms() -> np.ndarray:
    """Dense 2-forms e35 + e46, e15 + e26, e13 + e24 of the six-dimensional model."""
    out = np.zeros((3, 6, 6))
    for m, ((p, q), (r, s)) in enumerate((((2, 4), (3, 5)), ((0, 4), (1, 5)), ((0, 2), (1, 3)))):
        for u, v in ((p, q), (r, s)):
            out[m, u, v], out[m, v, u] = 1.0, -1.0
    return out


def to_interleaved(arr: np.ndarray) -> np.ndarray:
    n = arr.shape[0] // 2
    p = np.array(interleaved_order(n))
    return arr[np.ix_(*([p] * arr.ndim))]


# pipelines --------------------------------------------------------------------

def _endo_coefficient(M: np.ndarray, H: np.ndarray) -> tuple[float, float]:
    """Best c with M ~ c * endo(H), and the max residual."""
    E = H.T
    ee = float(np.sum(E * E))
    c = float(np.sum(M * E)) / ee if ee else 0.0
    return c, float(np.max(np.abs(M - c * E)))


def run_pipeline(table: StructureTable, herm: HermitianStructure, tol: Tolerance | None = None):
    """Characteristic connection plus curvature, and their covariant derivatives."""
    ch = characteristic_connection(table, herm)
    R = curvature(ch.L, table)
    nT = covariant_derivative(ch.L, ch.Td)
    nR = covariant_derivative(ch.L, R.dense)
    return ch, R, nT, nR


def run_tangent_family(g: AlgebraSpec, p: TangentMetricParams, tol: Tolerance | None = None) -> VerificationReport:
    tight = tol.abs_tol if tol else 1e-8
    rel = tol.rel_tol if tol else 1e-9
    closed_rel = tol.rel_tol if tol else 1e-12
    n = g.dim
    table = tangent_brackets(g, p)
    herm = hermitian_structure(n)
    ch, R, nT, nR = run_pipeline(table, herm)
    rep = VerificationReport("tangent", {"algebra": g.name, "a": p.a, "b": p.b})
    scale = max(1.0, abs(p.a), p.b * p.b / abs(p.a), abs(p.b))

    rep.below("nijenhuis_skew_residual", ch.nijenhuis.skew_residual, tol.abs_tol if tol else 1e-9)
    rep.below("nijenhuis_closed_form", ch.nijenhuis.form.max_diff(nijenhuis_closed_form(g.C, p)), closed_rel * scale)
    rep.below("twisted_derivative_closed_form", ch.dJ.max_diff(twisted_closed_form(g.C, p)), closed_rel * scale)
    rep.below("torsion_closed_form", ch.T.max_diff(torsion_closed_form(g.C, p)), closed_rel * scale)
    rep.below("torsion_identity", ch.torsion_identity_residual(), tight)
    rep.below("nabla_J", ch.nabla_J_residual(), tight)

    H = h_forms(g.C)
    lam_x = p.a + p.b ** 2 / p.a
    fits = [_endo_coefficient(ch.L[i], H[i]) for i in range(n)]
    # central directions have H_i = 0 and carry no coefficient
    coeffs = [c for (c, _), h in zip(fits, H) if np.any(h)]
    if coeffs:
        worst_c = max(coeffs, key=lambda c: abs(c - lam_x))
        rep.compare("lambda_x_coefficient", worst_c, lam_x, rel=closed_rel, abs_=closed_rel)
    rep.below("lambda_x_shape_residual", max((r for _, r in fits), default=0.0), closed_rel * scale)
    rep.below("lambda_y_norm", float(np.max(np.abs(ch.L[n:]), initial=0.0)), closed_rel * scale)

    c, resid = R.fit(H)
    expected = p.curvature_scalar
    if np.any(H):
        rep.compare("curvature_scalar", c, expected, rel=rel, abs_=1e-12)
    else:
        rep.below("abelian_curvature_norm", R.norm(), 1e-12, note="H_k = 0, scalar undetermined")
    rep.below("curvature_fit_residual", resid, tight * max(1.0, expected))
    rep.below("curvature_pair_symmetry", R.symmetry_residual(), tight * max(1.0, expected))
    hol = holonomy(ch.L, table)
    rep.equal("holonomy_dim", hol.dim, 0 if p.flat else derived_dim(g.C),
              note="flat locus" if p.flat else "dim [g,g]")
    rep.below("holonomy_closure", closure_residual(hol.basis), 1e-8)
    rep.below("nabla_T", float(np.max(np.abs(nT))), tight)
    rep.below("nabla_R", float(np.max(np.abs(nR))), tight)
    delta, nabla_omega = codifferential_omega(herm.omega, ch.T, ch.L)
    rep.below("codifferential_omega", delta.norm(), tight)
    rep.below("nabla_omega", nabla_omega, tight)
    if p.flat:
        rep.below("flat_curvature_norm", R.norm(), 1e-12)
    return rep


def ansatz_crosscheck(p: TangentMetricParams) -> dict:
    out = {"alpha": p.a + 2 * p.b ** 2 / p.a, "beta": p.b ** 2 / p.a}
    for name, sign in (("minus", -1), ("plus", 1)):
        q = AnsatzParams.from_metric(p, sign)
        out[f"alpha_prime_{name}"] = q.alpha_prime
        out[f"constraint1_{name}"] = q.alpha_prime ** 2 - 4 * q.beta * (q.alpha - 2 * q.beta)
    q = AnsatzParams.from_metric(p)
    out["constraint2"] = q.beta * (q.alpha - q.beta) - p.curvature_scalar
    out["alpha_ne_2beta"] = q.alpha != 2 * q.beta
    out["beta_nonzero"] = q.beta != 0
    out["degenerate"] = not (out["alpha_ne_2beta"] and out["beta_nonzero"] and q.alpha != q.beta)
    return out


def six_dim_crosscheck(g: AlgebraSpec, p: TangentMetricParams) -> dict:
    """Compare the assembled su(2) data with the six-dimensional model in the interleaved frame."""
    if g.dim != 3:
        raise ValueError("the six-dimensional model needs a three-dimensional algebra")
    ch, R, _, _ = run_pipeline(tangent_brackets(g, p), hermitian_structure(3))
    q = AnsatzParams.from_metric(p)
    T6 = form_from_dense(to_interleaved(ch.Td))
    R6 = to_interleaved(R.dense)
    M = np.einsum("kab,kcd->abcd", *(2 * [ansatz_curvature_forms()]))
    return {
        "torsion_deviation": T6.max_diff(ansatz_torsion(q)),
        "sigma_deviation": sigma_T(T6).max_diff(ansatz_sigma(q)),
        "curvature_deviation": float(np.max(np.abs(R6 - q.beta * (q.alpha - q.beta) * M))),
    }


def isometry_crosscheck(g: AlgebraSpec, p: TangentMetricParams) -> dict:
    n = g.dim
    herm = hermitian_structure(n)
    ts, td = tangent_brackets(g, p), direct_product_brackets(g, p)
    chs, Rs, _, _ = run_pipeline(ts, herm)
    chd, Rd, nTd, nRd = run_pipeline(td, herm)
    Ts, Td = chs.Td, chd.Td
    k = np.unravel_index(np.argmax(np.abs(Ts)), Ts.shape)
    sign = 1 if Ts[k] * Td[k] >= 0 else -1
    H = h_forms(g.C)
    lam_dev = 0.0
    for i in range(n):
        lam_dev = max(lam_dev,
                      float(np.max(np.abs(chd.L[i] + p.b ** 2 / p.a * H[i].T))),
                      float(np.max(np.abs(chd.L[n + i] - p.b * H[i].T))))
    return {
        "sign": sign,
        "torsion_deviation": float(np.max(np.abs(Ts - sign * Td))),
        "curvature_deviation": float(np.max(np.abs(Rs.dense - Rd.dense))),
        "lambda_deviation": lam_dev,
        "tables_differ": float(np.max(np.abs(ts.C - td.C))),
        "nijenhuis_skew_direct": chd.nijenhuis.skew_residual,
        "nabla_T_direct": float(np.max(np.abs(nTd))),
        "nabla_R_direct": float(np.max(np.abs(nRd))),
    }


def run_isometry_crosscheck(g: AlgebraSpec, p: TangentMetricParams, tol: Tolerance | None = None) -> VerificationReport:
    """Semidirect and direct-product brackets describe the same metric: compare both pipelines."""
    bound = tol.abs_tol if tol else 1e-10
    scale = max(1.0, abs(p.a), p.b * p.b / abs(p.a), abs(p.b))
    d = isometry_crosscheck(g, p)
    rep = VerificationReport("direct-product-crosscheck", {"algebra": g.name, "a": p.a, "b": p.b})
    rep.info.update({"torsion_sign": d["sign"], "tables_differ": d["tables_differ"]})
    rep.below("torsion_up_to_sign", d["torsion_deviation"], bound * scale)
    rep.below("curvature_deviation", d["curvature_deviation"], bound * scale ** 2)
    rep.below("direct_lambda_closed_form", d["lambda_deviation"], bound * scale)
    rep.below("direct_nijenhuis_skew_residual", d["nijenhuis_skew_direct"], 1e-9)
    rep.below("direct_nabla_T", d["nabla_T_direct"], 1e-8)
    rep.below("direct_nabla_R", d["nabla_R_direct"], 1e-8)
    return rep


def _adapted(g: AlgebraSpec) -> tuple[AlgebraSpec, int]:
    """Rotate the frame so that an orthonormal basis of the center comes first."""
    Z = center(g)
    p = Z.shape[0]
    if p in (0, g.dim):
        return g, p
    # complete Z to an orthonormal frame
    Q, _ = np.linalg.qr(np.vstack([Z, np.eye(g.dim)]).T)
    Q = Q[:, :g.dim].T
    Q[:p] = Z
    C = np.einsum("ia,jb,abc,kc->ijk", Q, Q, g.C, Q)
    return AlgebraSpec(g.name, StructureTable(C, g.name, g.table.compact), g.provenance), p


def splitting_check(g: AlgebraSpec, p: TangentMetricParams) -> dict:
    ga, zdim = _adapted(g)
    n = ga.dim
    ch = characteristic_connection(tangent_brackets(ga, p), hermitian_structure(n))
    K = torsion_kernel(ch.T)
    lifted = np.zeros(2 * n, dtype=bool)
    lifted[:zdim] = lifted[n:n + zdim] = True
    # part of the kernel outside the lifted center
    outside = float(np.max(np.abs(K[:, ~lifted]), initial=0.0))
    return {"center_dim": zdim, "kernel_dim": int(K.shape[0]),
            "expected_dim": 2 * zdim, "outside_lifted_center": outside}


@dataclass(frozen=True)
class Witness:
    i: int
    j: int
    k: int
    residual: float


def biinvariance_witness(table: StructureTable, tol: float = 1e-10) -> Witness | None:
    """Frame triple maximizing |<[e_i,e_j],e_k> + <e_j,[e_i,e_k]>|, if above tol."""
    C = table.C
    D = np.abs(C + np.einsum("ikj->ijk", C))
    if D.size == 0 or D.max() <= tol:
        return None
    i, j, k = np.unravel_index(np.argmax(D), D.shape)
    return Witness(int(i), int(j), int(k), float(D[i, j, k]))
