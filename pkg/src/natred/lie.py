"""Metric Lie algebra machinery over an orthonormal frame.

Conventions (all arrays 0-based):

* ``C[i, j, k]`` is the coefficient of ``e_k`` in ``[e_i, e_j]``.
* A connection is an array ``L`` of shape (N, N, N) with ``L[i]`` the matrix of
  ``Lambda(e_i)``, i.e. ``L[i][k, j] = g(Lambda(e_i) e_j, e_k)``.
* Lowered curvature ``R4[i, j, k, l] = g(R(e_i, e_j) e_k, e_l)`` with
  ``R(X, Y) = [Lambda_X, Lambda_Y] - Lambda_[X,Y]``.
* Hermitian structures satisfy ``Omega(X, Y) = g(X, J Y)`` so the dense array
  of ``Omega`` equals the matrix ``J``; the twisted derivative is
  ``dJ Omega = -dOmega(J., J., J.)``.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from .forms import DEFAULT_TOL, KForm, Tolerance, form_from_dense

__all__ = [
    "StructureTable",
    "StructureDiagnostics",
    "HermitianStructure",
    "CurvatureOperator",
    "HolonomyResult",
    "HolonomyError",
    "NijenhuisResult",
    "Characteristic",
    "validate_structure",
    "levi_civita",
    "d_invariant",
    "twisted_derivative",
    "nijenhuis",
    "characteristic_torsion",
    "connection_with_torsion",
    "torsion_of",
    "covariant_derivative",
    "curvature",
    "holonomy",
    "closure_residual",
    "codifferential_omega",
    "codifferential_levi_civita",
    "natural_reductivity_check",
    "torsion_kernel",
    "characteristic_connection",
    "connection_skew_residual",
]


@dataclass(frozen=True)
class StructureTable:
    C: np.ndarray
    name: str = ""
    compact: bool = False

    def __post_init__(self):
        C = np.asarray(self.C, dtype=float)
        if C.ndim != 3 or len(set(C.shape)) != 1:
            raise ValueError(f"structure table must be N x N x N, got shape {C.shape}")
        C.setflags(write=False)
        object.__setattr__(self, "C", C)

    @property
    def dim(self) -> int:
        return self.C.shape[0]

    def bracket(self, u, v) -> np.ndarray:
        return np.einsum("i,j,ijk->k", u, v, self.C)


@dataclass(frozen=True)
class StructureDiagnostics:
    jacobi: float
    antisymmetry: float
    total_skew: float | None
    passed: bool


def jacobi_residual(C: np.ndarray) -> float:
    CC = np.einsum("ijm,mkl->ijkl", C, C)
    J = CC + np.einsum("jkil->ijkl", CC) + np.einsum("kijl->ijkl", CC)
    return float(np.max(np.abs(J), initial=0.0))


def validate_structure(table: StructureTable, compact: bool | None = None,
                       tol: Tolerance = DEFAULT_TOL) -> StructureDiagnostics:
    C = table.C
    compact = table.compact if compact is None else compact
    jac = jacobi_residual(C)
    anti = float(np.max(np.abs(C + C.transpose(1, 0, 2)), initial=0.0))
    skew = None
    if compact:
        skew = float(np.max(np.abs(C + np.einsum("ikj->ijk", C)), initial=0.0))
    ok = jac <= tol.abs_tol and anti <= tol.abs_tol and (skew is None or skew <= tol.abs_tol)
    return StructureDiagnostics(jac, anti, skew, ok)


@dataclass(frozen=True)
class HermitianStructure:
    omega: KForm
    J: np.ndarray

    def __post_init__(self):
        J = np.asarray(self.J, dtype=float)
        n = J.shape[0]
        if J.shape != (n, n) or self.omega.dim != n or self.omega.degree != 2:
            raise ValueError("inconsistent Hermitian structure dimensions")
        if np.max(np.abs(J @ J + np.eye(n))) > 1e-12:
            raise ValueError("J does not square to -1")
        if np.max(np.abs(J.T @ J - np.eye(n))) > 1e-12:
            raise ValueError("J is not orthogonal")
        if np.max(np.abs(self.omega.to_dense() - J)) > 1e-12:
            raise ValueError("Omega(X, Y) != g(X, JY)")
        object.__setattr__(self, "J", J)

    @classmethod
    def from_J(cls, J) -> "HermitianStructure":
        return cls(form_from_dense(J), J)


# connections -------------------------------------------------------------

def levi_civita(table: StructureTable) -> np.ndarray:
    """Koszul formula for a left-invariant metric that is orthonormal in the frame."""
    C = table.C
    K = 0.5 * (C - np.einsum("jki->ijk", C) + np.einsum("kij->ijk", C))
    # K[i, j, k] = g(nabla_i e_j, e_k)
    return np.ascontiguousarray(K.transpose(0, 2, 1))


def connection_skew_residual(L: np.ndarray) -> float:
    return float(np.max(np.abs(L + L.transpose(0, 2, 1)), initial=0.0))


def connection_with_torsion(lc: np.ndarray, T: KForm) -> np.ndarray:
    """Lambda(e_i) = Lambda_lc(e_i) + 1/2 endo(e_i -| T)."""
    return lc + 0.5 * T.to_dense().transpose(0, 2, 1)


def torsion_of(L: np.ndarray, C: np.ndarray) -> np.ndarray:
    """g(Lambda(e_i)e_j - Lambda(e_j)e_i - [e_i, e_j], e_k)."""
    A = np.einsum("ikj->ijk", L)
    return A - A.transpose(1, 0, 2) - C


# forms -------------------------------------------------------------------

def d_invariant(omega: KForm, table: StructureTable) -> KForm:
    """Exterior derivative of a form with constant coefficients in the frame."""
    C = table.C
    n, k = table.dim, omega.degree
    if omega.dim != n:
        raise ValueError("form and structure table differ in dimension")
    if k + 1 > n:
        return KForm.zero(n, k + 1)
    if k == 0:
        return KForm(n, 1)
    W = omega.to_dense()
    tuples = np.array(list(itertools.combinations(range(n), k + 1)), dtype=int)
    vals = np.zeros(len(tuples))
    for p, q in itertools.combinations(range(k + 1), 2):
        rest = [r for r in range(k + 1) if r not in (p, q)]
        Cpq = C[tuples[:, p], tuples[:, q], :]                        # (M, n)
        Wr = W[(slice(None),) + tuple(tuples[:, r] for r in rest)]    # (n, M)
        if not rest:
            Wr = np.broadcast_to(W[:, None], (n, len(tuples)))
        vals += (-1) ** (p + q) * np.einsum("mn,nm->m", Cpq, Wr)
    return KForm(n, k + 1, dict(zip(map(tuple, tuples), vals)))


def twisted_derivative(omega: KForm, J: np.ndarray, table: StructureTable) -> KForm:
    D = d_invariant(omega, table).to_dense()
    return form_from_dense(-np.einsum("abc,ai,bj,ck->ijk", D, J, J, J, optimize=True))


class NijenhuisResult(NamedTuple):
    form: KForm
    skew_residual: float
    compatible: bool
    dense: np.ndarray


def nijenhuis(J: np.ndarray, table: StructureTable, tol: Tolerance = DEFAULT_TOL) -> NijenhuisResult:
    """N(X,Y) = [JX,JY] - J[JX,Y] - J[X,JY] - [X,Y], lowered with the metric.

    ``compatible`` is False when the lowered tensor is not totally skew, i.e.
    the structure is not of the type admitting a characteristic connection.
    """
    C = table.C
    N = (np.einsum("ai,bj,abk->ijk", J, J, C)
         - np.einsum("ai,ajm,km->ijk", J, C, J)
         - np.einsum("bj,ibm,km->ijk", J, C, J)
         - C)
    skew = float(np.max(np.abs(N + np.einsum("ikj->ijk", N)), initial=0.0))
    return NijenhuisResult(form_from_dense(N), skew, skew <= tol.abs_tol, N)


def characteristic_torsion(N: KForm, dJomega: KForm) -> KForm:
    if N.degree != 3 or dJomega.degree != 3:
        raise ValueError("torsion pieces must be 3-forms")
    return N + dJomega


# derivatives and curvature ------------------------------------------------

def covariant_derivative(L: np.ndarray, tensor: np.ndarray, derivative: np.ndarray | None = None) -> np.ndarray:
    """(nabla_{e_m} A)(e_i, ...) with a leading ``m`` axis.

    Algebraic Leibniz rule for left-invariant data; ``derivative[m]`` adds the
    directional derivative of the component functions when they are not
    constant.
    """
    tensor = np.asarray(tensor, dtype=float)
    out = np.zeros((L.shape[0],) + tensor.shape)
    for s in range(tensor.ndim):
        # sum_l L[m][l, i_s] A[..., l, ...]
        term = np.tensordot(L, tensor, axes=([1], [s]))   # (m, i_s, rest...)
        out -= np.moveaxis(term, 1, s + 1)
    if derivative is not None:
        out += derivative
    return out


def curvature_endos(L: np.ndarray, C: np.ndarray, isotropy=None, dL=None) -> np.ndarray:
    """Matrices of R(e_i, e_j), shape (N, N, N, N).

    ``isotropy = (hc, lam)`` adds the homogeneous-space term
    ``-sum_a hc[i, j, a] lam[a]`` where ``hc`` holds the isotropy components of
    brackets.  ``dL[p][q]`` is the derivative of ``L[q]`` along ``e_p``.
    """
    R = np.einsum("iab,jbc->ijac", L, L)
    R = R - R.transpose(1, 0, 2, 3) - np.einsum("ijm,mab->ijab", C, L)
    if isotropy is not None:
        hc, lam = isotropy
        R = R - np.einsum("ija,abc->ijbc", hc, lam)
    if dL is not None:
        R = R + dL - dL.transpose(1, 0, 2, 3)
    return R


@dataclass(frozen=True)
class CurvatureOperator:
    """Lowered curvature ``dense[i, j, k, l] = g(R(e_i, e_j) e_k, e_l)``."""

    dense: np.ndarray
    terms: list = field(default_factory=list)

    @property
    def dim(self) -> int:
        return self.dense.shape[0]

    def norm(self) -> float:
        return float(np.max(np.abs(self.dense), initial=0.0))

    def symmetry_residual(self) -> float:
        return float(np.max(np.abs(self.dense - self.dense.transpose(2, 3, 0, 1)), initial=0.0))

    def matrix(self) -> np.ndarray:
        """The curvature as a bilinear form on the basis e_i ^ e_j (i < j)."""
        pairs = list(itertools.combinations(range(self.dim), 2))
        a = np.array([p[0] for p in pairs])
        b = np.array([p[1] for p in pairs])
        return self.dense[a[:, None], b[:, None], a[None, :], b[None, :]]

    def fit(self, forms: Sequence[np.ndarray]) -> tuple[float, float]:
        """Least-squares c with dense ~ c * sum_k H_k (x) H_k; returns (c, max residual)."""
        H = np.asarray(forms, dtype=float)
        M = np.einsum("kab,kcd->abcd", H, H)
        mm = float(np.sum(M * M))
        if mm == 0:
            return 0.0, self.norm()
        c = float(np.sum(self.dense * M)) / mm
        return c, float(np.max(np.abs(self.dense - c * M)))


def curvature(L: np.ndarray, table: StructureTable, isotropy=None, dL=None) -> CurvatureOperator:
    R = curvature_endos(L, table.C, isotropy, dL)
    return CurvatureOperator(np.ascontiguousarray(R.transpose(0, 1, 3, 2)))


# holonomy ----------------------------------------------------------------

class HolonomyError(RuntimeError):
    pass


@dataclass(frozen=True)
class HolonomyResult:
    basis: np.ndarray       # (dim, N, N), orthonormal for the Frobenius product
    dim: int
    iterations: int


def _extend(basis: np.ndarray, cand: np.ndarray, cutoff: float) -> np.ndarray:
    if cand.size == 0:
        return basis
    if basis.shape[0]:
        cand = cand - (cand @ basis.T) @ basis
    _, s, vt = np.linalg.svd(cand, full_matrices=False)
    new = vt[s > cutoff]
    if not len(new):
        return basis
    if basis.shape[0]:
        new = new - (new @ basis.T) @ basis
        new, _ = np.linalg.qr(new.T)
        new = new.T
    return np.vstack([basis, new])


def holonomy(L: np.ndarray, table: StructureTable, isotropy=None, dL=None,
             rel_cutoff: float = 1e-8, tol: Tolerance = DEFAULT_TOL) -> HolonomyResult:
    """Smallest bracket-closed span containing the curvature endomorphisms
    and stable under brackets with every Lambda(e_i)."""
    n = table.dim
    seeds = curvature_endos(L, table.C, isotropy, dL).reshape(-1, n * n)
    smax = np.linalg.norm(seeds, 2) if seeds.size else 0.0
    if smax <= tol.abs_tol:
        return HolonomyResult(np.zeros((0, n, n)), 0, 0)
    cutoff = rel_cutoff * smax
    basis = _extend(np.zeros((0, n * n)), seeds, cutoff)
    frontier = basis
    max_iter = max(1, n * (n - 1) // 2)
    for it in range(1, max_iter + 1):
        F = frontier.reshape(-1, n, n)
        B = basis.reshape(-1, n, n)
        cands = [np.einsum("gab,hbc->ghac", L, F) - np.einsum("hab,gbc->ghac", F, L)]
        for h in F:
            cands.append(np.einsum("ab,kbc->kac", h, B) - np.einsum("kab,bc->kac", B, h))
        cand = np.concatenate([c.reshape(-1, n * n) for c in cands])
        new = _extend(basis, cand, cutoff)
        if new.shape[0] == basis.shape[0]:
            return HolonomyResult(basis.reshape(-1, n, n), basis.shape[0], it)
        frontier = new[basis.shape[0]:]
        basis = new
    raise HolonomyError(f"holonomy span did not stabilize in {max_iter} iterations")


def closure_residual(basis: np.ndarray) -> float:
    """Largest component of [h_i, h_j] orthogonal to the span of the basis."""
    k = basis.shape[0]
    if k == 0:
        return 0.0
    n = basis.shape[1]
    flat = basis.reshape(k, -1)
    br = np.einsum("iab,jbc->ijac", basis, basis)
    br = (br - br.transpose(1, 0, 2, 3)).reshape(k * k, n * n)
    res = br - (br @ flat.T) @ flat
    return float(np.max(np.abs(res)))


# diagnostics -------------------------------------------------------------

def codifferential_omega(omega: KForm, T: KForm, L: np.ndarray,
                         tol: Tolerance = DEFAULT_TOL) -> tuple[KForm, float]:
    """delta Omega = delta^nabla Omega + 1/2 sum_{i,j} (e_i-|e_j-|T) ^ (e_i-|e_j-|Omega).

    Returns the 1-form and ``max |nabla Omega|``; the first term vanishes when
    the connection preserves Omega.
    """
    W = omega.to_dense()
    Td = T.to_dense()
    nabla_w = covariant_derivative(L, W)
    delta_nabla = -np.einsum("iik->k", nabla_w)
    # e_i -| e_j -| T = T(e_j, e_i, .) and likewise for Omega (a scalar)
    torsion_part = 0.5 * np.einsum("jik,ji->k", Td, W)
    return form_from_dense(delta_nabla + torsion_part, prune=tol.prune), float(np.max(np.abs(nabla_w), initial=0.0))


def codifferential_levi_civita(omega: KForm, table: StructureTable) -> np.ndarray:
    """delta Omega = -sum_i e_i -| nabla^g_{e_i} Omega, as a dense 1-form."""
    nab = covariant_derivative(levi_civita(table), omega.to_dense())
    return -np.einsum("iik->k", nab)


def natural_reductivity_check(table: StructureTable) -> float:
    """max |<[X,Y],Z> + <Y,[X,Z]>| over frame triples."""
    C = table.C
    return float(np.max(np.abs(C + np.einsum("ikj->ijk", C)), initial=0.0))


def torsion_kernel(T: KForm, rel_cutoff: float = 1e-8, tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    """Orthonormal basis (rows) of {v : v -| T = 0}."""
    n = T.dim
    A = T.to_dense().reshape(n, n * n).T      # column i is e_i -| T
    _, s, vt = np.linalg.svd(A)
    smax = s[0] if s.size else 0.0
    if smax <= tol.abs_tol:
        return np.eye(n)
    rank = int(np.sum(s > max(rel_cutoff * smax, tol.abs_tol)))
    return vt[rank:]


# the whole characteristic pipeline ------------------------------------------

@dataclass(frozen=True)
class Characteristic:
    table: StructureTable
    hermitian: HermitianStructure
    nijenhuis: NijenhuisResult
    dJ: KForm
    T: KForm
    lc: np.ndarray
    L: np.ndarray

    @property
    def Td(self) -> np.ndarray:
        return self.T.to_dense()

    def torsion_identity_residual(self) -> float:
        return float(np.max(np.abs(torsion_of(self.L, self.table.C) - self.Td)))

    def nabla_J_residual(self) -> float:
        return float(np.max(np.abs(covariant_derivative(self.L, self.hermitian.J)), initial=0.0))


def characteristic_connection(table: StructureTable, herm: HermitianStructure,
                              tol: Tolerance = DEFAULT_TOL) -> Characteristic:
    nij = nijenhuis(herm.J, table, tol)
    dJ = twisted_derivative(herm.omega, herm.J, table)
    T = characteristic_torsion(nij.form, dJ)
    lc = levi_civita(table)
    return Characteristic(table, herm, nij, dJ, T, lc, connection_with_torsion(lc, T))
