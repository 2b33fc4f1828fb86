"""Exterior forms on a finite-dimensional inner product space.

Forms are stored sparsely on strictly increasing index tuples (0-based).
Coefficients may be floats or exact rationals (``fractions.Fraction``/``int``);
exact coefficients are never pruned unless they are exactly zero.

Evaluation convention: ``(e_0 ^ e_1)(e_0, e_1) = 1``, i.e. the dense array of a
k-form is the fully antisymmetric tensor whose entry at an increasing tuple is
the stored coefficient.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from numbers import Number
from typing import Iterable, Mapping

import numpy as np

__all__ = [
    "Tolerance",
    "KForm",
    "sort_with_sign",
    "wedge",
    "interior",
    "sigma_T",
    "two_form_to_endo",
    "endo_to_two_form",
    "form_from_dense",
]


@dataclass(frozen=True)
class Tolerance:
    """Absolute/relative tolerance pair used by numeric comparisons."""

    abs_tol: float = 1e-9
    rel_tol: float = 1e-9

    def __post_init__(self):
        if not (self.abs_tol > 0 and self.rel_tol > 0):
            raise ValueError("tolerances must be positive")

    @property
    def prune(self) -> float:
        return self.abs_tol / 10

    def close(self, x, y) -> bool:
        return abs(x - y) <= self.abs_tol + self.rel_tol * max(abs(x), abs(y))


DEFAULT_TOL = Tolerance()


def _exact(v) -> bool:
    return isinstance(v, (int, Fraction)) and not isinstance(v, bool)


def _negligible(v, prune: float) -> bool:
    if v == 0:
        return True
    return not _exact(v) and abs(v) < prune


def sort_with_sign(idx: Iterable[int]) -> tuple[int, tuple[int, ...]]:
    """Sort an index tuple, returning the permutation sign (0 on repeats)."""
    idx = list(idx)
    if len(set(idx)) != len(idx):
        return 0, ()
    sign = 1
    # insertion sort counts transpositions
    for i in range(1, len(idx)):
        j = i
        while j > 0 and idx[j - 1] > idx[j]:
            idx[j - 1], idx[j] = idx[j], idx[j - 1]
            sign = -sign
            j -= 1
    return sign, tuple(idx)


class KForm:
    """A k-form on R^dim with sparse coefficients on increasing index tuples."""

    __slots__ = ("dim", "degree", "_c")

    def __init__(self, dim: int, degree: int, coeffs: Mapping | None = None,
                 prune: float = DEFAULT_TOL.prune):
        if dim < 0 or degree < 0:
            raise ValueError("dim and degree must be non-negative")
        # degree > dim is the zero space; it only arises as a result (e.g. sigma_T in dim 3)
        self.dim = dim
        self.degree = degree
        acc: dict[tuple[int, ...], Number] = {}
        for key, val in (coeffs or {}).items():
            key = tuple(int(k) for k in key)
            if len(key) != degree:
                raise ValueError(f"index {key} does not have length {degree}")
            if any(k < 0 or k >= dim for k in key):
                raise ValueError(f"index {key} out of range for dim {dim}")
            s, skey = sort_with_sign(key)
            if s == 0:
                continue
            acc[skey] = acc.get(skey, 0) + s * val
        self._c = {k: v for k, v in acc.items() if not _negligible(v, prune)}

    # construction helpers
    @classmethod
    def basis(cls, dim: int, *idx: int) -> "KForm":
        return cls(dim, len(idx), {idx: 1})

    @classmethod
    def zero(cls, dim: int, degree: int) -> "KForm":
        return cls(dim, degree)

    # access
    def items(self):
        return self._c.items()

    def __getitem__(self, key) -> Number:
        s, skey = sort_with_sign(key)
        return 0 if s == 0 else s * self._c.get(skey, 0)

    def __len__(self):
        return len(self._c)

    def is_zero(self) -> bool:
        return not self._c

    def norm(self) -> float:
        """Largest absolute coefficient."""
        return max((abs(float(v)) for v in self._c.values()), default=0.0)

    # arithmetic
    def _check(self, other: "KForm"):
        if not isinstance(other, KForm):
            return NotImplemented
        if (self.dim, self.degree) != (other.dim, other.degree):
            raise ValueError("forms differ in dimension or degree")

    def __add__(self, other):
        if self._check(other) is NotImplemented:
            return NotImplemented
        c = dict(self._c)
        for k, v in other._c.items():
            c[k] = c.get(k, 0) + v
        return KForm(self.dim, self.degree, c)

    def __neg__(self):
        return KForm(self.dim, self.degree, {k: -v for k, v in self._c.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, s):
        if not isinstance(s, Number):
            return NotImplemented
        return KForm(self.dim, self.degree, {k: s * v for k, v in self._c.items()})

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, KForm):
            return NotImplemented
        return (self.dim, self.degree) == (other.dim, other.degree) and (self - other).is_zero()

    __hash__ = None

    def allclose(self, other: "KForm", tol: Tolerance = DEFAULT_TOL) -> bool:
        return self.max_diff(other) <= tol.abs_tol

    def max_diff(self, other: "KForm") -> float:
        self._check(other)
        keys = set(self._c) | set(other._c)
        return max((abs(float(self._c.get(k, 0) - other._c.get(k, 0))) for k in keys), default=0.0)

    def to_dense(self) -> np.ndarray:
        arr = np.zeros((self.dim,) * self.degree)
        if self.degree == 0:
            arr[()] = float(self._c.get((), 0))
            return arr
        for key, val in self._c.items():
            for perm in itertools.permutations(range(self.degree)):
                s, _ = sort_with_sign(perm)
                arr[tuple(key[p] for p in perm)] = s * float(val)
        return arr

    def __repr__(self):
        if not self._c:
            return f"KForm(dim={self.dim}, degree={self.degree}, 0)"
        terms = " + ".join(f"{v}*e{''.join(str(i + 1) for i in k) or '()'}"
                           for k, v in sorted(self._c.items()))
        return f"KForm(dim={self.dim}, {terms})"


def form_from_dense(arr: np.ndarray, prune: float = DEFAULT_TOL.prune) -> KForm:
    """Read the increasing-index entries of a (presumed antisymmetric) array."""
    arr = np.asarray(arr, dtype=float)
    k = arr.ndim
    dim = arr.shape[0] if k else 0
    if k == 0:
        return KForm(0, 0, {(): float(arr)}, prune=prune)
    coeffs = {t: arr[t] for t in itertools.combinations(range(dim), k)}
    return KForm(dim, k, coeffs, prune=prune)


def wedge(a: KForm, b: KForm) -> KForm:
    if a.dim != b.dim:
        raise ValueError("wedge of forms on different dimensions")
    deg = a.degree + b.degree
    if deg > a.dim:
        raise ValueError(f"wedge degree {deg} exceeds dimension {a.dim}")
    out: dict[tuple[int, ...], Number] = {}
    for ka, va in a.items():
        for kb, vb in b.items():
            s, key = sort_with_sign(ka + kb)
            if s:
                out[key] = out.get(key, 0) + s * va * vb
    return KForm(a.dim, deg, out)


def interior(v_index: int, a: KForm) -> KForm:
    """Contraction of the basis vector ``e_{v_index}`` into the first slot."""
    if not 0 <= v_index < a.dim:
        raise ValueError(f"vector index {v_index} out of range for dim {a.dim}")
    if a.degree == 0:
        raise ValueError("cannot contract into a 0-form")
    out = {}
    for key, val in a.items():
        if v_index in key:
            p = key.index(v_index)
            out[key[:p] + key[p + 1:]] = (-1) ** p * val
    return KForm(a.dim, a.degree - 1, out)


def sigma_T(T: KForm) -> KForm:
    """sigma_T = 1/2 * sum_i (e_i -| T) ^ (e_i -| T) for a 3-form T."""
    if T.degree != 3:
        raise ValueError("sigma_T needs a 3-form")
    acc = KForm.zero(T.dim, 4)
    if T.dim < 4:
        return acc
    for i in range(T.dim):
        c = interior(i, T)
        if not c.is_zero():
            acc = acc + wedge(c, c)
    half = Fraction(1, 2) if all(_exact(v) for _, v in acc.items()) else 0.5
    return half * acc


def two_form_to_endo(omega: KForm) -> np.ndarray:
    """Skew endomorphism M with M e_j = sum_k omega(e_j, e_k) e_k.

    So ``M[k, j] = omega(e_j, e_k)``; for ``omega = e_1 ^ e_2`` (0-based 0,1)
    this gives ``M e_1 = e_2`` and ``M e_2 = -e_1``.
    """
    if omega.degree != 2:
        raise ValueError("two_form_to_endo needs a 2-form")
    return omega.to_dense().T


def endo_to_two_form(M: np.ndarray, tol: Tolerance = DEFAULT_TOL) -> KForm:
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError("expected a square matrix")
    if np.max(np.abs(M + M.T), initial=0.0) > tol.abs_tol:
        raise ValueError("endomorphism is not skew-symmetric")
    return form_from_dense(M.T, prune=tol.prune)
