"""Naturally reductive structures on G x G realized as (G x G x G) / diag G.

The complement m is spanned by x_i = (e_i, a e_i, b e_i) and
y_i = (e_i, c e_i, d e_i); the metric makes {x_i, yh_i = lam * y_i}
orthonormal and the isotropy is spanned by h_i = (e_i, e_i, e_i).  All bracket
coefficients are obtained by projecting ambient brackets onto x, yh, h.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import asdict, dataclass

import numpy as np

from .errors import DegenerateParameters
from .forms import KForm, Tolerance
from .lie import (
    StructureTable,
    characteristic_connection,
    closure_residual,
    codifferential_omega,
    covariant_derivative,
    curvature,
    holonomy,
    natural_reductivity_check,
)
from .presets import AlgebraSpec
from .report import VerificationReport
from .tangent import _mixed_x, _mixed_y, _w, derived_dim, h_forms, hermitian_structure

__all__ = [
    "ProductParams",
    "CoefficientTable",
    "ReductiveDecomposition",
    "coefficient_table",
    "projected_coefficients",
    "sigma_value",
    "reductive_check",
    "product_brackets",
    "isotropy_endos",
    "torsion_closed_form",
    "nijenhuis_closed_form",
    "twisted_closed_form",
    "lambda_coefficients",
    "closed_form_scale",
    "run_product_family",
]

NAMES = ("alpha", "beta", "gamma", "delta", "sigma", "tau", "xi", "eta", "theta")


@dataclass(frozen=True)
class ProductParams:
    a: float
    b: float
    c: float
    d: float
    lam: float = 1.0

    def __post_init__(self):
        if not all(math.isfinite(v) for v in (self.a, self.b, self.c, self.d, self.lam)):
            raise ValueError("parameters must be finite")
        if self.lam <= 0:
            raise ValueError("lambda must be positive")

    @property
    def delta(self) -> float:
        a, b, c, d = self.a, self.b, self.c, self.d
        return (a - 1) * (d - 1) - (b - 1) * (c - 1)

    def require_nondegenerate(self, eps: float = 1e-12):
        if abs(self.delta) <= eps:
            raise DegenerateParameters(f"Delta = {self.delta} vanishes; m is not a complement of diag g")


@dataclass(frozen=True)
class CoefficientTable:
    alpha: float
    beta: float
    gamma: float
    delta: float
    sigma: float
    tau: float
    xi: float
    eta: float
    theta: float
    Delta: float
    Sigma: float

    def vector(self, lam: float) -> np.ndarray:
        """Bracket coefficients in the orthonormal frame, ordered xx, x yh, yh yh, each (x, yh, h)."""
        return np.array([self.alpha, self.beta / lam, self.gamma,
                         lam * self.delta, self.sigma, lam * self.tau,
                         lam ** 2 * self.xi, lam * self.eta, lam ** 2 * self.theta])

    def as_dict(self) -> dict:
        return asdict(self)


def sigma_value(k: dict, lam: float) -> float:
    """beta^2/lam^2 + lam^4 xi^2 - lam^2 xi (2 sigma - alpha) - beta (2 delta - eta)."""
    return (k["beta"] ** 2 / lam ** 2 + lam ** 4 * k["xi"] ** 2
            - lam ** 2 * k["xi"] * (2 * k["sigma"] - k["alpha"]) - k["beta"] * (2 * k["delta"] - k["eta"]))


def _table(k: dict, Delta: float, lam: float) -> CoefficientTable:
    return CoefficientTable(**{n: float(k[n]) for n in NAMES}, Delta=Delta, Sigma=sigma_value(k, lam))


def coefficient_table(p: ProductParams) -> CoefficientTable:
    """The closed-form coefficient table, taken literally (functions of a, b, c, d only)."""
    p.require_nondegenerate()
    a, b, c, d = p.a, p.b, p.c, p.d
    f = -2 / p.delta
    k = {
        "alpha": f * ((a * a - 1) * (d - 1) - (b * b - 1) * (c - 1)),
        "beta": f * (b - 1) * (a - 1) * (b - a),
        "gamma": f * (a * (d - b * b) + a * a * (b - d) + (b * b - b) * c),
        "delta": f * (c * (a * (d - 1) - b * d + 1) + (b - 1) * d),
        "sigma": -f * ((a - 1) * (1 - b * d) + (a * c - 1) * (b - 1)),
        "tau": -f * (a * c * (d - b) + c * b * (1 - d) + a * d * (b - 1)),
        "xi": f * (c - 1) * (d - 1) * (c - d),
        "eta": f * ((d * d - 1) * (a - 1) - (c * c - 1) * (b - 1)),
        "theta": f * (d * d * (c - a) + c * c * (b - d) + (d * a - c * b)),
    }
    return _table(k, p.delta, p.lam)


def _slot_vectors(p: ProductParams) -> np.ndarray:
    """Slot weights of x, yh, h (rows) in g + g + g."""
    return np.array([[1.0, p.a, p.b], [p.lam, p.lam * p.c, p.lam * p.d], [1.0, 1.0, 1.0]])


def projected_coefficients(p: ProductParams) -> CoefficientTable:
    """Coefficients read off by projecting slotwise products of x, yh onto (x, yh, h)."""
    p.require_nondegenerate()
    V = _slot_vectors(p)
    coords = lambda w: np.linalg.solve(V.T, w)
    xx, xy, yy = coords(V[0] * V[0]), coords(V[0] * V[1]), coords(V[1] * V[1])
    lam = p.lam
    k = {"alpha": xx[0], "beta": lam * xx[1], "gamma": xx[2],
         "delta": xy[0] / lam, "sigma": xy[1], "tau": xy[2] / lam,
         "xi": yy[0] / lam ** 2, "eta": yy[1] / lam, "theta": yy[2] / lam ** 2}
    return _table(k, p.delta, lam)


def closed_form_scale(p: ProductParams) -> float:
    """Least-squares factor s with closed form ~ s * projected."""
    pr = coefficient_table(p).vector(p.lam)
    pj = projected_coefficients(p).vector(p.lam)
    nn = float(pj @ pj)
    return float(pr @ pj) / nn if nn else float("nan")


@dataclass(frozen=True)
class ReductiveDecomposition:
    ambient: np.ndarray     # (3n)^3 structure table of g + g + g
    basis: np.ndarray       # columns: x_1..x_n, yh_1..yh_n, h_1..h_n in ambient coordinates
    n: int

    @classmethod
    def build(cls, p: ProductParams, g: AlgebraSpec) -> "ReductiveDecomposition":
        n = g.dim
        A = np.zeros((3 * n,) * 3)
        for s in range(3):
            blk = slice(s * n, (s + 1) * n)
            A[blk, blk, blk] = g.C
        V = _slot_vectors(p)
        B = np.zeros((3 * n, 3 * n))
        for r in range(3):
            for s in range(3):
                B[s * n:(s + 1) * n, r * n:(r + 1) * n] = V[r, s] * np.eye(n)
        return cls(A, B, n)

    def rank(self, rel_cutoff: float = 1e-10) -> int:
        s = np.linalg.svd(self.basis, compute_uv=False)
        return int(np.sum(s > rel_cutoff * s[0])) if s.size else 0

    def brackets(self) -> np.ndarray:
        """Coordinates (in the adapted basis) of the brackets of adapted basis vectors."""
        B = self.basis
        amb = np.einsum("ai,bj,abc->ijc", B, B, self.ambient, optimize=True)
        return np.linalg.solve(B, amb.reshape(-1, B.shape[0]).T).T.reshape(amb.shape)


def reductive_check(p: ProductParams, g: AlgebraSpec) -> dict:
    dec = ReductiveDecomposition.build(p, g)
    n = g.dim
    rank = dec.rank()
    out = {"rank": rank, "full_rank": rank == 3 * n, "Delta": p.delta}
    if rank == 3 * n:
        br = dec.brackets()
        # h-components of [h_i, m]
        out["reductivity_residual"] = float(np.max(np.abs(br[2 * n:, :2 * n, 2 * n:]), initial=0.0))
    else:
        out["reductivity_residual"] = None
    return out


def product_brackets(p: ProductParams, g: AlgebraSpec) -> tuple[StructureTable, np.ndarray]:
    """m-table on the orthonormal frame {x_i, yh_i} and the h-components of m-brackets."""
    p.require_nondegenerate()
    n = g.dim
    br = ReductiveDecomposition.build(p, g).brackets()
    m = slice(0, 2 * n)
    return StructureTable(br[m, m, m], f"{g.name}x{g.name}/m"), br[m, m, 2 * n:]


def isotropy_endos(p: ProductParams, g: AlgebraSpec) -> np.ndarray:
    """Matrices of ad(h_i) restricted to m."""
    p.require_nondegenerate()
    n = g.dim
    br = ReductiveDecomposition.build(p, g).brackets()
    # lam[i][k, j] = coefficient of e_k in [h_i, e_j]
    return np.ascontiguousarray(br[2 * n:, :2 * n, :2 * n].transpose(0, 2, 1))


# closed forms in terms of the coefficients ---------------------------------

def _sum3(C, fn) -> KForm:
    n = C.shape[0]
    x = [KForm.basis(2 * n, i) for i in range(n)]
    y = [KForm.basis(2 * n, n + i) for i in range(n)]
    out = KForm.zero(2 * n, 3)
    for i, j, k in itertools.combinations(range(n), 3):
        if C[i, j, k] != 0:
            out = out + float(C[i, j, k]) * fn(x, y, i, j, k)
    return out


def nijenhuis_closed_form(C, k: CoefficientTable, lam: float) -> KForm:
    u = lam ** 2 * k.xi + 2 * k.sigma - k.alpha
    v = k.beta / lam + lam * (2 * k.delta - k.eta)
    return _sum3(C, lambda x, y, i, j, l: u * (_w(x[i], x[j], x[l]) - _mixed_y(x, y, i, j, l))
                 + v * (_w(y[i], y[j], y[l]) - _mixed_x(x, y, i, j, l)))


def twisted_closed_form(C, k: CoefficientTable, lam: float) -> KForm:
    return _sum3(C, lambda x, y, i, j, l: -3 * lam ** 2 * k.xi * _w(x[i], x[j], x[l])
                 - 3 * k.beta / lam * _w(y[i], y[j], y[l])
                 + (2 * k.sigma - k.alpha) * _mixed_y(x, y, i, j, l)
                 + lam * (2 * k.delta - k.eta) * _mixed_x(x, y, i, j, l))


def torsion_closed_form(C, k: CoefficientTable, lam: float) -> KForm:
    return _sum3(C, lambda x, y, i, j, l: (-2 * lam ** 2 * k.xi + 2 * k.sigma - k.alpha) * _w(x[i], x[j], x[l])
                 + (-2 * k.beta / lam + lam * (2 * k.delta - k.eta)) * _w(y[i], y[j], y[l])
                 - lam ** 2 * k.xi * _mixed_y(x, y, i, j, l)
                 - k.beta / lam * _mixed_x(x, y, i, j, l))


def lambda_coefficients(k: CoefficientTable, lam: float) -> tuple[float, float]:
    return -lam ** 2 * k.xi + k.sigma, -k.beta / lam + lam * k.delta


# pipeline ----------------------------------------------------------------------

def _fit(M, E):
    ee = float(np.sum(E * E))
    c = float(np.sum(M * E)) / ee if ee else 0.0
    return c, float(np.max(np.abs(M - c * E)))


def run_product_family(p: ProductParams, g: AlgebraSpec, tol: Tolerance | None = None) -> VerificationReport:
    p.require_nondegenerate()
    bound = tol.abs_tol if tol else 1e-9
    rel = tol.rel_tol if tol else 1e-9
    n, lam = g.dim, p.lam
    table, hc = product_brackets(p, g)
    iso = isotropy_endos(p, g)
    herm = hermitian_structure(n)
    ch = characteristic_connection(table, herm)
    R = curvature(ch.L, table, isotropy=(hc, iso))
    H = h_forms(g.C)

    literal = coefficient_table(p)
    k = projected_coefficients(p)
    scale = max(1.0, float(np.max(np.abs(k.vector(lam)))))
    flat = abs(k.Sigma) <= 1e-12 * scale ** 2

    rep = VerificationReport("appendix-gxg", {"algebra": g.name, "a": p.a, "b": p.b, "c": p.c,
                                              "d": p.d, "lambda": lam})
    rep.info.update({"Delta": p.delta, "Sigma_projected": k.Sigma, "Sigma_closed_form": literal.Sigma,
                     "closed_form_over_projected": closed_form_scale(p), "flat_locus": flat,
                     "projected_coefficients": k.as_dict(), "closed_form_coefficients": literal.as_dict(),
                     "m_bracket_skew_defect": natural_reductivity_check(table)})

    rep.below("nijenhuis_skew_residual", ch.nijenhuis.skew_residual, bound)
    rep.below("nijenhuis_closed_form", ch.nijenhuis.form.max_diff(nijenhuis_closed_form(g.C, k, lam)), bound * scale)
    rep.below("twisted_derivative_closed_form", ch.dJ.max_diff(twisted_closed_form(g.C, k, lam)), bound * scale)
    rep.below("torsion_closed_form", ch.T.max_diff(torsion_closed_form(g.C, k, lam)), bound * scale)
    rep.below("torsion_identity", ch.torsion_identity_residual(), bound * scale)
    rep.below("nabla_J", ch.nabla_J_residual(), bound * scale)
    rep.below("isotropy_is_H", float(np.max(np.abs(iso - H.transpose(0, 2, 1)), initial=0.0)), bound)
    if n:
        E = H.transpose(0, 2, 1)
        EE = np.einsum("iab,jbc->ijac", E, E)
        rep.below("H_bracket_relation",
                  float(np.max(np.abs(EE - EE.transpose(1, 0, 2, 3) - np.einsum("ijk,kab->ijab", g.C, E)))), bound)

    lx, ly = lambda_coefficients(k, lam)
    fx = [_fit(ch.L[i], H[i].T) for i in range(n)]
    fy = [_fit(ch.L[n + i], H[i].T) for i in range(n)]
    live = [i for i in range(n) if np.any(H[i])]
    if live:
        cx = max((fx[i][0] for i in live), key=lambda c: abs(c - lx))
        cy = max((fy[i][0] for i in live), key=lambda c: abs(c - ly))
        rep.compare("lambda_x_coefficient", cx, lx, rel=rel, abs_=bound)
        rep.compare("lambda_y_coefficient", cy, ly, rel=rel, abs_=bound)
    rep.below("lambda_shape_residual", max((r for _, r in fx + fy), default=0.0), bound * scale)

    rep.below("nabla_T", float(np.max(np.abs(covariant_derivative(ch.L, ch.Td)), initial=0.0)), bound * scale)
    rep.below("nabla_R", float(np.max(np.abs(covariant_derivative(ch.L, R.dense)), initial=0.0)), bound * scale ** 2)
    c, resid = R.fit(H)
    rep.below("curvature_fit_residual", resid, bound * scale ** 2)
    if np.any(H):
        rep.compare("curvature_vs_sigma_projected", c, k.Sigma, rel=rel, abs_=bound)
        rep.compare("curvature_vs_sigma_closed_form", c, literal.Sigma, rel=rel, abs_=bound,
                    note="coefficients taken literally from the closed-form table")
    else:
        rep.below("abelian_curvature_norm", R.norm(), 1e-10, note="H_k = 0, Sigma undetermined")
    if flat:
        rep.below("flat_curvature_norm", R.norm(), 1e-10)
    hol = holonomy(ch.L, table, isotropy=(hc, iso))
    rep.equal("holonomy_dim", hol.dim, 0 if flat else derived_dim(g.C),
              note="flat locus: Sigma = 0" if flat else "dim [g,g]")
    rep.below("holonomy_closure", closure_residual(hol.basis), 1e-8)
    delta, _ = codifferential_omega(herm.omega, ch.T, ch.L)
    rep.below("codifferential_omega", delta.norm(), bound)
    return rep
