"""Action semantics, extents and satisfaction over a concrete model.

Two evaluation paths exist.  The pointwise path follows successors of a
single state; the extent path computes the whole set of states satisfying
a sentence when that set is finitely representable (a finite set, a
subspace, or both).  When neither path can decide, an error is raised
instead of a guess.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Mapping, Optional

import numpy as np

from . import hilbert as hb
from .errors import BudgetExceeded, GlobalNotDecidable, NotRepresentable
from .extent import Extent
from .hilbert import Subspace
from .model import Model, TermUniverse, eval_term, ground_terms
from .printer import print_sentence
from .syntax import (And, At, Choice, Forall, GateAct, Implies, MeasAct, Nec, Nominal, Not, Prop,
                     QNot, Seq, Star, Store, apply_substitution, free_vars)

__all__ = ["StarBudget", "successors", "orbit", "preimage_extent", "star_fixpoint", "extent",
           "sat_local", "sat_global", "apply_substitution", "Evaluator"]


@dataclass(frozen=True)
class StarBudget:
    """Bound on star unfolding.

    ``max_unfold`` bounds the number of unfoldings and ``max_states`` the
    number of distinct states a pointwise orbit may visit (branching actions
    under a star can grow the frontier exponentially).  ``eps`` (when set)
    overrides the model tolerance.
    """

    max_unfold: int = 64
    eps: Optional[float] = None
    max_states: int = 4096

    def __post_init__(self):
        if self.max_unfold < 1 or self.max_states < 1:
            raise ValueError("star budgets must be at least 1")


Env = Mapping[str, np.ndarray]


def _eps(m: Model, budget: StarBudget) -> float:
    return m.eps if budget.eps is None else budget.eps


def _dedupe(vs, eps):
    out = []
    for v in vs:
        if not any(hb.vectors_equal(v, u, eps) for u in out):
            out.append(v)
    return out


# --- pointwise action semantics ----------------------------------------------


def orbit(m: Model, body, w: np.ndarray, budget: StarBudget = StarBudget()):
    """States reachable by repeating ``body`` from ``w`` and the number of unfoldings used.

    Stops as soon as an unfolding adds no new state (within eps); raises
    :class:`BudgetExceeded` if that has not happened after ``max_unfold``.
    """
    eps = _eps(m, budget)
    visited = [w]
    seen = w[None, :]
    frontier = [w]
    for step in range(1, budget.max_unfold + 1):
        new = []
        for v in frontier:
            for x in successors(m, body, v, budget):
                if np.max(np.abs(seen - x), axis=1).min() > eps:
                    new.append(x)
                    seen = np.vstack([seen, x])
        if not new:
            return visited, step
        visited += new
        if len(visited) > budget.max_states:
            raise BudgetExceeded(f"star visited more than {budget.max_states} states", body)
        frontier = new
    raise BudgetExceeded(f"star did not close within {budget.max_unfold} unfoldings", body)


def successors(m: Model, a, w: np.ndarray, budget: StarBudget = StarBudget()) -> list[np.ndarray]:
    eps = _eps(m, budget)
    if isinstance(a, GateAct):
        return [m.gates[a.name] @ w]
    if isinstance(a, MeasAct):
        out = hb.measure(m.measurements[a.name], w, eps)
        return [] if out is None else [out]
    if isinstance(a, Seq):
        mid = successors(m, a.first, w, budget)
        return _dedupe((x for v in mid for x in successors(m, a.second, v, budget)), eps)
    if isinstance(a, Choice):
        return _dedupe(successors(m, a.left, w, budget) + successors(m, a.right, w, budget), eps)
    if isinstance(a, Star):
        return orbit(m, a.body, w, budget)[0]
    raise TypeError(f"not an action: {a!r}")


# --- preimages ---------------------------------------------------------------


def _unit_in(x: Subspace, v: np.ndarray, eps: float) -> bool:
    return abs(np.linalg.norm(v) - 1.0) <= 1e3 * eps and hb.contains(x, v, 1e3 * eps)


def _measurement_preimage(x: Subspace, e: Extent, eps: float) -> Extent:
    if e.is_all():
        return e
    if any(_unit_in(x, p, eps) for p in e.points):
        raise NotRepresentable("preimage of a finite set under a measurement")
    if e.space is None:
        # no outcome can land in the set: only states the measurement is undefined on
        return Extent.of_subspace(hb.orthocomplement(x, eps))
    return Extent.of_subspace(hb.preimage_of_projection(x, e.space, eps))


def star_fixpoint(m: Model, body, e: Extent, budget: StarBudget = StarBudget()):
    """Greatest fixpoint Z = e /\\ [body] Z, iterated from ALL; returns (Z, iterations)."""
    eps = _eps(m, budget)
    z = Extent.all(m.dim)
    limit = budget.max_unfold + m.dim + len(e.points) + 2
    for k in range(1, limit + 1):
        nz = e.intersect(preimage_extent(m, body, z, budget), eps)
        if nz.equals(z, eps):
            return z, k
        z = nz
    raise BudgetExceeded("star fixpoint did not stabilise", body)


def preimage_extent(m: Model, a, e: Extent, budget: StarBudget = StarBudget()) -> Extent:
    """{w : every a-successor of w lies in e}."""
    eps = _eps(m, budget)
    if e.is_all():
        return e
    if isinstance(a, GateAct):
        return e.map_unitary(m.adjoint(a.name), eps)
    if isinstance(a, MeasAct):
        return _measurement_preimage(m.measurements[a.name], e, eps)
    if isinstance(a, Seq):
        return preimage_extent(m, a.first, preimage_extent(m, a.second, e, budget), budget)
    if isinstance(a, Choice):
        return preimage_extent(m, a.left, e, budget).intersect(
            preimage_extent(m, a.right, e, budget), eps)
    if isinstance(a, Star):
        return star_fixpoint(m, a.body, e, budget)[0]
    raise TypeError(f"not an action: {a!r}")


# --- the evaluator -----------------------------------------------------------


class Evaluator:
    """Satisfaction and extents over one model.

    ``forall`` ranges over a finite candidate universe: the values of ground
    terms up to ``term_depth`` built from the model's named vectors and the
    literals in ``model_terms``.  This is sound for refuting a universal and
    incomplete for establishing one.
    """

    def __init__(self, m: Model, budget: StarBudget = StarBudget(), term_depth: int = 1,
                 model_terms=(), max_terms: int = 2000):
        self.m = m
        self.budget = budget
        self.eps = _eps(m, budget)
        self.term_depth = term_depth
        self.model_terms = tuple(model_terms)
        self.max_terms = max_terms
        self._universe: Optional[TermUniverse] = None

    @property
    def universe(self) -> TermUniverse:
        if self._universe is None:
            self._universe = ground_terms(self.m, self.term_depth, self.model_terms, self.max_terms)
        return self._universe

    def candidates(self) -> list[np.ndarray]:
        return self.universe.values()

    # -- extents --

    def extent(self, s, env: Optional[Env] = None) -> Extent:
        env = env or {}
        m, eps = self.m, self.eps
        if isinstance(s, Prop):
            return m.prop_extent(s.name)
        if isinstance(s, Nominal):
            return Extent.of_points([eval_term(m, s.term, env)], m.dim, eps)
        if isinstance(s, At):
            ok = self.sat(eval_term(m, s.term, env), s.body, env)
            return Extent.all(m.dim) if ok else Extent.empty(m.dim)
        if isinstance(s, And):
            left = self.extent(s.left, env)
            if left.is_empty():
                return left
            return left.intersect(self.extent(s.right, env), eps)
        if isinstance(s, QNot):
            return self.extent(s.body, env).complement_span(eps)
        if isinstance(s, Not):
            inner = self.extent(s.body, env)
            if inner.is_all():
                return Extent.empty(m.dim)
            if inner.is_empty():
                return Extent.all(m.dim)
            raise NotRepresentable("classical negation of a proper set of states", s)
        if isinstance(s, Implies):
            left = self.extent(s.left, env)
            if left.is_empty():
                return Extent.all(m.dim)
            if left.is_all():
                return self.extent(s.right, env)
            right = self.extent(s.right, env)
            if right.is_all():
                return right
            raise NotRepresentable("implication between proper sets of states", s)
        if isinstance(s, Nec):
            return preimage_extent(m, s.action, self.extent(s.body, env), self.budget)
        if isinstance(s, Store):
            if s.var not in free_vars(s.body):
                return self.extent(s.body, env)
            raise NotRepresentable("store binder with a live variable", s)
        if isinstance(s, Forall):
            if not set(s.vars) & free_vars(s.body):
                return self.extent(s.body, env)
            raise NotRepresentable("universal quantifier with a live variable", s)
        raise TypeError(f"not a sentence: {s!r}")

    # -- local satisfaction --

    def sat(self, w: np.ndarray, s, env: Optional[Env] = None) -> bool:
        env = env or {}
        m, eps = self.m, self.eps
        if isinstance(s, Prop):
            return m.prop_extent(s.name).contains(w, eps)
        if isinstance(s, Nominal):
            return hb.vectors_equal(w, eval_term(m, s.term, env), eps)
        if isinstance(s, At):
            return self.sat(eval_term(m, s.term, env), s.body, env)
        if isinstance(s, And):
            return self.sat(w, s.left, env) and self.sat(w, s.right, env)
        if isinstance(s, Not):
            return not self.sat(w, s.body, env)
        if isinstance(s, Implies):
            return (not self.sat(w, s.left, env)) or self.sat(w, s.right, env)
        if isinstance(s, QNot):
            return self.extent(s, env).contains(w, eps)
        if isinstance(s, Nec):
            try:
                succ = successors(m, s.action, w, self.budget)
            except BudgetExceeded as exc:
                try:
                    return self.extent(s, env).contains(w, eps)
                except NotRepresentable:
                    raise exc from None
            return all(self.sat(v, s.body, env) for v in succ)
        if isinstance(s, Store):
            return self.sat(w, s.body, {**env, s.var: w})
        if isinstance(s, Forall):
            live = [x for x in s.vars if x in free_vars(s.body)]
            if not live:
                return self.sat(w, s.body, env)
            pool = self.candidates()
            for combo in itertools.product(pool, repeat=len(live)):
                if not self.sat(w, s.body, {**env, **dict(zip(live, combo))}):
                    return False
            return True
        raise TypeError(f"not a sentence: {s!r}")

    def sat_global(self, s, env: Optional[Env] = None) -> bool:
        try:
            return self.extent(s, env).is_all()
        except NotRepresentable as exc:
            sub = exc.subject if exc.subject is not None else s
            raise GlobalNotDecidable(
                f"global satisfaction not decidable: {exc} in {print_sentence(sub)}", sub) from exc


# --- functional surface ------------------------------------------------------


def extent(m: Model, s, env: Optional[Env] = None, budget: StarBudget = StarBudget()) -> Extent:
    return Evaluator(m, budget).extent(s, env)


def sat_local(m: Model, w: np.ndarray, s, budget: StarBudget = StarBudget(),
              env: Optional[Env] = None, **kw) -> bool:
    return Evaluator(m, budget, **kw).sat(hb.as_vector(w), s, env)


def sat_global(m: Model, s, budget: StarBudget = StarBudget(), env: Optional[Env] = None,
               **kw) -> bool:
    return Evaluator(m, budget, **kw).sat_global(s, env)
