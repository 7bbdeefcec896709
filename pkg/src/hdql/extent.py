"""Finitely representable sets of states.

An :class:`Extent` is a finite set of vectors, a subspace, or the union of
both.  ``EMPTY`` (no subspace part, no points) differs from the zero
subspace, which contains the origin.
"""

from __future__ import annotations

from typing import Iterable, Optional, Sequence

import numpy as np

from . import hilbert as hb
from .errors import NotRepresentable
from .hilbert import Subspace

ALL = "ALL"
EMPTY = "EMPTY"
FINITE = "FINITE"
SUBSPACE = "SUBSPACE"
MIXED = "MIXED"


def dedupe(points: Iterable[np.ndarray], eps: float) -> list[np.ndarray]:
    out: list[np.ndarray] = []
    for p in points:
        if not any(hb.vectors_equal(p, q, eps) for q in out):
            out.append(p)
    return out


class Extent:
    __slots__ = ("dim", "space", "points")

    def __init__(self, dim: int, space: Optional[Subspace] = None,
                 points: Sequence[np.ndarray] = (), eps: float = hb.DEFAULT_EPS):
        self.dim = dim
        self.space = space
        pts = dedupe((hb.as_vector(p) for p in points), eps)
        if space is not None:
            pts = [p for p in pts if not hb.contains(space, p, eps)]
        self.points = tuple(pts)

    @classmethod
    def all(cls, dim: int) -> "Extent":
        return cls(dim, Subspace.full(dim))

    @classmethod
    def empty(cls, dim: int) -> "Extent":
        return cls(dim)

    @classmethod
    def of_subspace(cls, s: Subspace) -> "Extent":
        return cls(s.dim, s)

    @classmethod
    def of_points(cls, points: Sequence[np.ndarray], dim: int,
                  eps: float = hb.DEFAULT_EPS) -> "Extent":
        return cls(dim, None, points, eps)

    @property
    def kind(self) -> str:
        if self.space is None:
            return FINITE if self.points else EMPTY
        if self.space.is_full():
            return ALL
        return MIXED if self.points else SUBSPACE

    def is_all(self) -> bool:
        return self.kind == ALL

    def is_empty(self) -> bool:
        return self.kind == EMPTY

    def is_finite(self) -> bool:
        return self.space is None

    def contains(self, w: np.ndarray, eps: float = hb.DEFAULT_EPS) -> bool:
        if self.space is not None and hb.contains(self.space, w, eps):
            return True
        return any(hb.vectors_equal(w, p, eps) for p in self.points)

    def intersect(self, other: "Extent", eps: float = hb.DEFAULT_EPS) -> "Extent":
        if self.is_all():
            return other
        if other.is_all():
            return self
        space = None
        if self.space is not None and other.space is not None:
            space = hb.meet(self.space, other.space, eps)
        pts = [p for p in self.points if other.contains(p, eps)]
        pts += [p for p in other.points if self.contains(p, eps)]
        return Extent(self.dim, space, pts, eps)

    def union(self, other: "Extent", eps: float = hb.DEFAULT_EPS) -> "Extent":
        a, b = self.space, other.space
        if a is None:
            space = b
        elif b is None or hb.is_subspace_of(b, a, eps):
            space = a
        elif hb.is_subspace_of(a, b, eps):
            space = b
        else:
            raise NotRepresentable("union of two incomparable subspaces")
        return Extent(self.dim, space, self.points + other.points, eps)

    def span(self, eps: float = hb.DEFAULT_EPS) -> Subspace:
        vecs = list(self.points)
        if self.space is not None:
            if not self.points:
                return self.space
            vecs += self.space.vectors()
        return hb.span(vecs, self.dim, eps)

    def complement_span(self, eps: float = hb.DEFAULT_EPS) -> "Extent":
        """Orthocomplement of the set, which equals that of its span."""
        return Extent.of_subspace(hb.orthocomplement(self.span(eps), eps))

    def is_subset_of(self, other: "Extent", eps: float = hb.DEFAULT_EPS) -> bool:
        if other.is_all():
            return True
        if self.space is not None:
            if other.space is None or not hb.is_subspace_of(self.space, other.space, eps):
                return False
        return all(other.contains(p, eps) for p in self.points)

    def equals(self, other: "Extent", eps: float = hb.DEFAULT_EPS) -> bool:
        return self.is_subset_of(other, eps) and other.is_subset_of(self, eps)

    def map_unitary(self, u: np.ndarray, eps: float = hb.DEFAULT_EPS) -> "Extent":
        space = None if self.space is None else hb.apply_unitary(u, self.space, eps)
        return Extent(self.dim, space, [u @ p for p in self.points], eps)

    def __repr__(self) -> str:
        rank = "-" if self.space is None else self.space.rank
        return f"Extent({self.kind}, rank={rank}, points={len(self.points)})"
