"""Catalog of compact metric Lie algebras and helpers to build new ones."""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path

import numpy as np

from .forms import Tolerance
from .lie import StructureDiagnostics, StructureTable, validate_structure

__all__ = [
    "AlgebraSpec",
    "AlgebraError",
    "preset",
    "catalog",
    "matrix_basis_constants",
    "direct_sum",
    "center",
    "reorder",
    "load_algebra_file",
]

STRICT = Tolerance(1e-12, 1e-12)


class AlgebraError(ValueError):
    pass


@dataclass(frozen=True)
class AlgebraSpec:
    name: str
    table: StructureTable
    provenance: str = "builtin"          # builtin | matrix-generated | file
    diagnostics: StructureDiagnostics | None = None

    @property
    def dim(self) -> int:
        return self.table.dim

    @property
    def C(self) -> np.ndarray:
        return self.table.C


def _spec(name, C, provenance, compact=True, tol=STRICT) -> AlgebraSpec:
    table = StructureTable(C, name=name, compact=compact)
    diag = validate_structure(table, compact=compact, tol=tol)
    if not diag.passed:
        raise AlgebraError(
            f"{name}: structure check failed (jacobi {diag.jacobi:.3g}, "
            f"antisymmetry {diag.antisymmetry:.3g}, total skew {diag.total_skew})")
    return AlgebraSpec(name, table, provenance, diag)


def _levi_civita_symbol() -> np.ndarray:
    eps = np.zeros((3, 3, 3))
    for (i, j, k), s in (((0, 1, 2), 1), ((1, 2, 0), 1), ((2, 0, 1), 1),
                         ((1, 0, 2), -1), ((0, 2, 1), -1), ((2, 1, 0), -1)):
        eps[i, j, k] = s
    return eps


def inner(X, Y) -> float:
    return float(-np.real(np.trace(X @ Y)))


def matrix_basis_constants(basis, name: str = "matrix", tol: Tolerance = Tolerance(1e-10, 1e-10)) -> AlgebraSpec:
    """Structure constants of a matrix Lie algebra in a basis orthonormal for -Re tr(XY)."""
    mats = [np.asarray(b, dtype=complex) for b in basis]
    if not mats:
        return _spec(name, np.zeros((0, 0, 0)), "matrix-generated")
    ortho = []
    for X in mats:
        Y = X - sum(inner(X, E) * E for E in ortho)
        nrm = inner(Y, Y)
        if nrm <= tol.abs_tol:
            raise AlgebraError(f"{name}: basis is linearly dependent")
        ortho.append(Y / np.sqrt(nrm))
    n = len(ortho)
    C = np.zeros((n, n, n))
    resid = 0.0
    for i, j in itertools.combinations(range(n), 2):
        br = ortho[i] @ ortho[j] - ortho[j] @ ortho[i]
        coeff = np.array([inner(br, E) for E in ortho])
        C[i, j], C[j, i] = coeff, -coeff
        rest = br - sum(c * E for c, E in zip(coeff, ortho))
        resid = max(resid, float(np.max(np.abs(rest))))
    if resid > tol.abs_tol:
        raise AlgebraError(f"{name}: basis not closed under brackets (residual {resid:.3g})")
    # drop float dust from the trace products
    C[np.abs(C) < 1e-14] = 0.0
    return _spec(name, C, "matrix-generated")


def _so_basis(n: int):
    out = []
    for i, j in itertools.combinations(range(n), 2):
        A = np.zeros((n, n))
        A[i, j], A[j, i] = -1.0, 1.0
        out.append(A)
    return out


def gell_mann():
    s3 = 1 / np.sqrt(3)
    lam = np.zeros((8, 3, 3), dtype=complex)
    lam[0][0, 1] = lam[0][1, 0] = 1
    lam[1][0, 1], lam[1][1, 0] = -1j, 1j
    lam[2][0, 0], lam[2][1, 1] = 1, -1
    lam[3][0, 2] = lam[3][2, 0] = 1
    lam[4][0, 2], lam[4][2, 0] = -1j, 1j
    lam[5][1, 2] = lam[5][2, 1] = 1
    lam[6][1, 2], lam[6][2, 1] = -1j, 1j
    lam[7] = s3 * np.diag([1, 1, -2])
    return lam


# 3-form preserved by G2: e123 + e145 + e167 + e246 - e257 - e347 - e356
_G2_TERMS = [((0, 1, 2), 1), ((0, 3, 4), 1), ((0, 5, 6), 1), ((1, 3, 5), 1),
             ((1, 4, 6), -1), ((2, 3, 6), -1), ((2, 4, 5), -1)]


def _g2_basis():
    phi = np.zeros((7, 7, 7))
    for (i, j, k), s in _G2_TERMS:
        for perm in itertools.permutations(range(3)):
            idx = (i, j, k)
            sgn = np.linalg.det(np.eye(3)[list(perm)])
            phi[tuple(idx[p] for p in perm)] = s * sgn
    so7 = _so_basis(7)
    # A acts on phi by -phi(A., ., .) - ...; collect the linear map so(7) -> Lambda^3
    cols = []
    for A in so7:
        act = (np.einsum("ai,ajk->ijk", A, phi) + np.einsum("aj,iak->ijk", A, phi)
               + np.einsum("ak,ija->ijk", A, phi))
        cols.append(act.ravel())
    M = np.array(cols).T
    _, s, vt = np.linalg.svd(M)
    rank = int(np.sum(s > 1e-10 * s[0]))
    kern = vt[rank:]
    return [sum(c * A for c, A in zip(v, so7)) for v in kern]


def _abelian(n):
    return lambda: _spec(f"abelian{n}", np.zeros((n, n, n)), "builtin")


_BUILDERS = {
    "su2": lambda: _spec("su2", _levi_civita_symbol(), "builtin"),
    "su3": lambda: matrix_basis_constants([1j * m for m in gell_mann()], "su3"),
    "so3": lambda: matrix_basis_constants(_so_basis(3), "so3"),
    "so4": lambda: matrix_basis_constants(_so_basis(4), "so4"),
    "so5": lambda: matrix_basis_constants(_so_basis(5), "so5"),
    "u2": lambda: direct_sum(preset("abelian1"), preset("su2"), "u2"),
    "su2+su2": lambda: direct_sum(preset("su2"), preset("su2"), "su2+su2"),
    "abelian1": _abelian(1),
    "abelian2": _abelian(2),
    "abelian3": _abelian(3),
    "g2": lambda: matrix_basis_constants(_g2_basis(), "g2"),
}


def catalog() -> list[str]:
    return list(_BUILDERS)


@lru_cache(maxsize=None)
def preset(name: str) -> AlgebraSpec:
    try:
        build = _BUILDERS[name]
    except KeyError:
        raise KeyError(f"unknown algebra {name!r}; available: {', '.join(_BUILDERS)}") from None
    return build()


def direct_sum(a: AlgebraSpec, b: AlgebraSpec, name: str | None = None) -> AlgebraSpec:
    n, m = a.dim, b.dim
    C = np.zeros((n + m,) * 3)
    C[:n, :n, :n] = a.C
    C[n:, n:, n:] = b.C
    prov = "builtin" if {a.provenance, b.provenance} <= {"builtin", "matrix-generated"} else "file"
    compact = a.table.compact and b.table.compact
    return _spec(name or f"{a.name}+{b.name}", C, prov, compact=compact)


def center(a: AlgebraSpec, rel_cutoff: float = 1e-8) -> np.ndarray:
    """Orthonormal basis (rows) of the center, i.e. the kernel of X -> ad X."""
    n = a.dim
    A = a.C.reshape(n, n * n).T
    if n == 0:
        return np.zeros((0, 0))
    _, s, vt = np.linalg.svd(A)
    if s[0] <= 1e-12:
        return np.eye(n)
    return vt[int(np.sum(s > rel_cutoff * s[0])):]


def reorder(a: AlgebraSpec, perm) -> AlgebraSpec:
    """Same algebra in the permuted frame e'_i = e_{perm[i]}."""
    p = np.asarray(perm)
    return AlgebraSpec(a.name, StructureTable(a.C[np.ix_(p, p, p)], a.name, a.table.compact),
                       a.provenance, a.diagnostics)


def load_algebra_file(path, tol: Tolerance = Tolerance(1e-9, 1e-9)) -> AlgebraSpec:
    """Read ``{"name", "dim", "entries": [[i, j, k, value], ...], "compact"?}``, 1-based indices."""
    try:
        doc = json.loads(Path(path).read_text())
        name, dim, entries = str(doc["name"]), int(doc["dim"]), doc["entries"]
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise AlgebraError(f"cannot read algebra file {path}: {exc}") from exc
    if dim < 1:
        raise AlgebraError("dim must be positive")
    C = np.zeros((dim,) * 3)
    given = np.zeros((dim,) * 3, dtype=bool)
    for entry in entries:
        if len(entry) != 4:
            raise AlgebraError(f"entry {entry} is not [i, j, k, value]")
        i, j, k = (int(e) - 1 for e in entry[:3])
        v = float(entry[3])
        if not all(0 <= t < dim for t in (i, j, k)):
            raise AlgebraError(f"entry {entry} has an index outside 1..{dim}")
        if i == j and v != 0:
            raise AlgebraError(f"entry {entry} brackets a vector with itself")
        for (p, q, s) in ((i, j, v), (j, i, -v)):
            if given[p, q, k] and abs(C[p, q, k] - s) > tol.abs_tol:
                raise AlgebraError(f"entry {entry} contradicts antisymmetry")
            C[p, q, k], given[p, q, k] = s, True
    return _spec(name, C, "file", compact=bool(doc.get("compact", False)), tol=tol)
