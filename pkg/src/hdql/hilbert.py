"""Finite-dimensional complex linear algebra and the lattice of subspaces.

Vectors and matrices are plain ``numpy`` arrays of dtype ``complex128``.
A :class:`Subspace` of C^n is stored as an orthonormal basis together with
its orthogonal projector; in finite dimension every subspace is closed, so
the lattice operations below are exact up to the rank tolerance ``eps``.
"""

from __future__ import annotations

import math
from typing import Iterable, Optional, Sequence

import numpy as np

DEFAULT_EPS = 1e-9


class DimensionError(ValueError):
    """Operands live in ambient spaces of different dimension."""


def as_vector(values) -> np.ndarray:
    v = np.asarray(values, dtype=complex)
    if v.ndim != 1 or v.size == 0:
        raise ValueError(f"expected a nonempty 1-d vector, got shape {v.shape}")
    return v


def as_matrix(values) -> np.ndarray:
    m = np.asarray(values, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] == 0:
        raise ValueError(f"expected a nonempty square matrix, got shape {m.shape}")
    return m


def zero_vector(dim: int) -> np.ndarray:
    return np.zeros(dim, dtype=complex)


def ket(bits: str) -> np.ndarray:
    """Computational basis vector ``|bits>`` (big-endian, ``ket('10') = e_2``)."""
    if not bits or any(b not in "01" for b in bits):
        raise ValueError(f"ket label must be a nonempty bit string, got {bits!r}")
    v = np.zeros(2 ** len(bits), dtype=complex)
    v[int(bits, 2)] = 1.0
    return v


def vectors_equal(a: np.ndarray, b: np.ndarray, eps: float = DEFAULT_EPS) -> bool:
    """Entrywise equality within ``eps``; not equality up to a global phase."""
    if a.shape != b.shape:
        return False
    return bool(np.max(np.abs(a - b), initial=0.0) <= eps)


def matrices_close(a: np.ndarray, b: np.ndarray, eps: float = DEFAULT_EPS) -> bool:
    if a.shape != b.shape:
        return False
    return bool(np.linalg.norm(a - b) <= eps)


def is_unitary(u: np.ndarray, eps: float = DEFAULT_EPS) -> bool:
    u = np.asarray(u, dtype=complex)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        return False
    eye = np.eye(u.shape[0])
    uh = u.conj().T
    return matrices_close(uh @ u, eye, eps) and matrices_close(u @ uh, eye, eps)


def inner(a: np.ndarray, b: np.ndarray) -> complex:
    """Inner product, conjugate-linear in the first argument."""
    return complex(np.vdot(a, b))


def _orthonormal_columns(columns: np.ndarray, eps: float) -> np.ndarray:
    n = columns.shape[0]
    if columns.shape[1] == 0:
        return np.zeros((n, 0), dtype=complex)
    u, s, _ = np.linalg.svd(columns, full_matrices=False)
    if s.size == 0:
        return np.zeros((n, 0), dtype=complex)
    # relative rank cutoff, with an absolute floor so round-off noise is not a direction
    cutoff = eps * max(float(s[0]), 1.0)
    rank = int(np.sum(s > cutoff))
    return u[:, :rank]


class Subspace:
    """A (closed) linear subspace of C^dim.

    Construct through :func:`span`, :meth:`full`, :meth:`zero` or
    :meth:`from_basis`; instances are treated as immutable.
    """

    __slots__ = ("dim", "basis", "_projector")

    def __init__(self, dim: int, basis: np.ndarray):
        self.dim = int(dim)
        self.basis = basis
        self.basis.setflags(write=False)
        self._projector: Optional[np.ndarray] = None

    @classmethod
    def from_basis(cls, basis: np.ndarray, eps: float = DEFAULT_EPS) -> "Subspace":
        basis = np.asarray(basis, dtype=complex)
        return cls(basis.shape[0], _orthonormal_columns(basis, eps))

    @classmethod
    def full(cls, dim: int) -> "Subspace":
        return cls(dim, np.eye(dim, dtype=complex))

    @classmethod
    def zero(cls, dim: int) -> "Subspace":
        return cls(dim, np.zeros((dim, 0), dtype=complex))

    @property
    def rank(self) -> int:
        return self.basis.shape[1]

    @property
    def projector(self) -> np.ndarray:
        if self._projector is None:
            p = self.basis @ self.basis.conj().T
            p.setflags(write=False)
            self._projector = p
        return self._projector

    def is_zero(self) -> bool:
        return self.rank == 0

    def is_full(self) -> bool:
        return self.rank == self.dim

    def vectors(self) -> list[np.ndarray]:
        return [self.basis[:, i].copy() for i in range(self.rank)]

    def __repr__(self) -> str:
        return f"Subspace(dim={self.dim}, rank={self.rank})"


def _check_dims(*dims: int) -> None:
    if len(set(dims)) > 1:
        raise DimensionError(f"dimension mismatch: {sorted(set(dims))}")


def span(vectors: Sequence[np.ndarray], dim: Optional[int] = None,
         eps: float = DEFAULT_EPS) -> Subspace:
    """Smallest subspace containing ``vectors`` (``dim`` is needed when empty)."""
    vs = [as_vector(v) for v in vectors]
    if not vs:
        if dim is None:
            raise ValueError("span of no vectors needs an explicit dimension")
        return Subspace.zero(dim)
    _check_dims(*(v.size for v in vs), *(() if dim is None else (dim,)))
    return Subspace.from_basis(np.column_stack(vs), eps)


def orthocomplement(s: Subspace, eps: float = DEFAULT_EPS) -> Subspace:
    if s.rank == 0:
        return Subspace.full(s.dim)
    if s.rank == s.dim:
        return Subspace.zero(s.dim)
    # columns of the full left singular basis beyond rank(s) span the complement
    u, _, _ = np.linalg.svd(s.basis, full_matrices=True)
    return Subspace(s.dim, u[:, s.rank:].copy())


def _join_bases(s: Subspace, t: Subspace, eps: float) -> Subspace:
    return Subspace.from_basis(np.column_stack([s.basis, t.basis]), eps)


def meet(s: Subspace, t: Subspace, eps: float = DEFAULT_EPS) -> Subspace:
    """Intersection, computed as the complement of span(S^perp u T^perp)."""
    _check_dims(s.dim, t.dim)
    if s.is_full():
        return t
    if t.is_full():
        return s
    joined = _join_bases(orthocomplement(s, eps), orthocomplement(t, eps), eps)
    return orthocomplement(joined, eps)


def direct_sum(s: Subspace, t: Subspace, eps: float = DEFAULT_EPS) -> Subspace:
    """Closed join: (S^perp n T^perp)^perp."""
    _check_dims(s.dim, t.dim)
    return orthocomplement(meet(orthocomplement(s, eps), orthocomplement(t, eps), eps), eps)


def sasaki_hook(s: Subspace, t: Subspace, eps: float = DEFAULT_EPS) -> Subspace:
    """S ~> T = S^perp (+) (S n T)."""
    _check_dims(s.dim, t.dim)
    return direct_sum(orthocomplement(s, eps), meet(s, t, eps), eps)


def project(s: Subspace, w: np.ndarray) -> np.ndarray:
    w = as_vector(w)
    _check_dims(s.dim, w.size)
    return s.basis @ (s.basis.conj().T @ w)


def image_of_projection(s: Subspace, t: Subspace, eps: float = DEFAULT_EPS) -> Subspace:
    """P_S(T) = S n (S^perp (+) T)."""
    _check_dims(s.dim, t.dim)
    return meet(s, direct_sum(orthocomplement(s, eps), t, eps), eps)


def preimage_of_projection(s: Subspace, t: Subspace, eps: float = DEFAULT_EPS) -> Subspace:
    """P_S^{-1}(T) = S^perp (+) (S n T); the same subspace as ``sasaki_hook(s, t)``."""
    return sasaki_hook(s, t, eps)


def contains(s: Subspace, w: np.ndarray, eps: float = DEFAULT_EPS) -> bool:
    w = as_vector(w)
    _check_dims(s.dim, w.size)
    residual = np.linalg.norm(project(s, w) - w)
    return bool(residual <= eps * max(1.0, float(np.linalg.norm(w))))


def is_subspace_of(s: Subspace, t: Subspace, eps: float = DEFAULT_EPS) -> bool:
    _check_dims(s.dim, t.dim)
    if s.rank == 0:
        return True
    residual = s.basis - project_matrix(t, s.basis)
    return bool(np.linalg.norm(residual) <= eps * max(1.0, math.sqrt(s.rank)))


def project_matrix(s: Subspace, m: np.ndarray) -> np.ndarray:
    return s.basis @ (s.basis.conj().T @ m)


def subspaces_equal(s: Subspace, t: Subspace, eps: float = DEFAULT_EPS) -> bool:
    """Projector Frobenius distance within ``eps``."""
    if s.dim != t.dim or s.rank != t.rank:
        return False
    return matrices_close(s.projector, t.projector, eps)


def apply_unitary(u: np.ndarray, s: Subspace, eps: float = DEFAULT_EPS) -> Subspace:
    """Image U·S of a subspace; orthonormality is preserved by unitaries."""
    _check_dims(u.shape[0], s.dim)
    if s.rank == 0 or s.rank == s.dim:
        return s
    return Subspace.from_basis(u @ s.basis, eps)


def probability(s: Subspace, w: np.ndarray) -> float:
    """pr_S(w) = <w, P_S w>, real and non-negative."""
    return float(np.real(inner(w, project(s, w))))


def measure(s: Subspace, w: np.ndarray, eps: float = DEFAULT_EPS) -> Optional[np.ndarray]:
    """Projective measurement P_S(w)/sqrt(pr_S(w)); ``None`` when w is orthogonal to S."""
    w = as_vector(w)
    pw = project(s, w)
    pr = float(np.real(np.vdot(w, pw)))
    if pr <= eps * eps:
        return None
    return pw / math.sqrt(pr)


def is_hermitian_idempotent(p: np.ndarray, eps: float = DEFAULT_EPS) -> bool:
    return matrices_close(p, p.conj().T, eps) and matrices_close(p @ p, p, eps)


def kron_all(factors: Iterable[np.ndarray]) -> np.ndarray:
    out = None
    for f in factors:
        out = f if out is None else np.kron(out, f)
    if out is None:
        raise ValueError("kron_all needs at least one factor")
    return out


def random_unit_vector(rng: np.random.Generator, dim: int) -> np.ndarray:
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return v / np.linalg.norm(v)


def random_subspace(rng: np.random.Generator, dim: int, rank: Optional[int] = None) -> Subspace:
    if rank is None:
        rank = int(rng.integers(0, dim + 1))
    if rank == 0:
        return Subspace.zero(dim)
    m = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    return Subspace.from_basis(m)


def random_unitary(rng: np.random.Generator, dim: int) -> np.ndarray:
    z = (rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))) / math.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))
