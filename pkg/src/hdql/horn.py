"""Horn programs: initial-model construction, constraint checking, entailment, queries.

Saturation walks every clause with the set of states at which it must hold
(all states for a top-level axiom) and materialises the positive facts it
forces:

* ``p`` adds the current context to the extent of ``p``;
* ``@ t f`` moves the context to the value of ``t``;
* ``[a] f`` moves the context to its ``a``-successors;
* ``f => g`` fires ``g`` where the basic body ``f`` already holds;
* ``r1 ~> r2`` forces ``r2`` at the projection of the context onto ``r1``
  (a state satisfies the hook iff its projection onto ``r1`` satisfies ``r2``);
* ``forall`` is instantiated over a depth-bounded ground-term universe;
* ``~f`` derives nothing; it is a constraint checked afterwards.

Closed props keep the span of their witnesses.  The loop repeats until no
clause adds a fact.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import hilbert as hb
from .errors import (BudgetExceeded, EvaluationError, GlobalNotDecidable, NotRepresentable,
                     ProgramUnsat, UndefinedMeasurement)
from .evaluator import Evaluator, StarBudget, successors
from .extent import Extent
from .hilbert import Subspace
from .model import (GroundTerm, GroundTermEnumerator, Model, TermUniverse, eval_term,
                    ground_terms, literal_terms)
from .printer import print_sentence, print_term
from .syntax import (HORN, And, At, Choice, Forall, GateAct, GateApp, Implies, MeasAct, MeasApp,
                     Nec, Not, Prop, QNot, Seq, Star, Store, Var, apply_substitution, classify,
                     free_vars, is_closed, match_sasaki, subst_term)

_ZERO_TOL = 1e-12


@dataclass
class HornProgram:
    model: Model
    clauses: list
    term_depth: int = 3
    star_budget: int = 64
    model_terms: tuple = ()
    max_rounds: int = 256
    max_terms: int = 5000

    def __post_init__(self):
        for i, c in enumerate(self.clauses):
            if HORN not in classify(c, self.model.sig.closed_props):
                raise ValueError(f"clause {i} is not a Horn clause: {print_sentence(c)}")
            if free_vars(c):
                raise ValueError(f"clause {i} has free variables: {sorted(free_vars(c))}")
        if not self.model_terms:
            self.model_terms = tuple(literal_terms(self.clauses))

    @classmethod
    def from_program(cls, prog) -> "HornProgram":
        cfg = prog.config
        return cls(prog.model, list(prog.axioms), cfg.term_depth, cfg.star_budget,
                   prog.model_terms)

    @property
    def budget(self) -> StarBudget:
        return StarBudget(self.star_budget)

    def universe(self, extra=()) -> TermUniverse:
        return ground_terms(self.model, self.term_depth, tuple(self.model_terms) + tuple(extra),
                            self.max_terms)


@dataclass
class Fact:
    prop: str
    vector: np.ndarray
    term: Optional[object]
    clause: int
    round: int


@dataclass
class InitialModel:
    """The base model with the derived valuation, plus provenance."""

    model: Model
    facts: list[Fact]
    rounds: int
    warnings: list[str] = field(default_factory=list)
    under_approximation: bool = False

    def extent(self, prop: str) -> Extent:
        return self.model.prop_extent(prop)

    def facts_for(self, prop: str) -> list[Fact]:
        return [f for f in self.facts if f.prop == prop]


class _Saturator:
    def __init__(self, prog: HornProgram):
        self.prog = prog
        base = prog.model
        self.base = base
        self.dim = base.dim
        self.eps = base.eps
        self.closed = base.sig.closed_props
        self.ext: dict[str, Extent] = {p: base.prop_extent(p) for p in base.sig.props}
        self.facts: list[Fact] = []
        self.term_of: dict[tuple, object] = {}
        self.changed = False
        self.round = 0
        self.clause = -1
        self.warnings: list[str] = []
        self.under = False
        self._model: Optional[Model] = None
        self._universe: Optional[TermUniverse] = None

    # -- bookkeeping --

    def key(self, v: np.ndarray) -> tuple:
        return tuple(np.round(np.concatenate([v.real, v.imag]) / (self.eps * 1e3)).astype(np.int64))

    def note(self, v: np.ndarray, t) -> None:
        if t is not None:
            self.term_of.setdefault(self.key(v), t)

    def model(self) -> Model:
        if self._model is None:
            self._model = self.base.with_valuation(self.ext)
        return self._model

    def evaluator(self) -> Evaluator:
        return Evaluator(self.model(), self.prog.budget, self.prog.term_depth,
                         self.prog.model_terms, self.prog.max_terms)

    @property
    def universe(self) -> TermUniverse:
        if self._universe is None:
            self._universe = self.prog.universe()
            if self._universe.exhausted:
                self.warn("TERM-UNIVERSE-EXHAUSTED: the ground-term universe was cut at depth "
                          f"{self.prog.term_depth}; the initial model may be an under-approximation")
        return self._universe

    def warn(self, msg: str) -> None:
        if msg not in self.warnings:
            self.warnings.append(msg)
        if msg.startswith("TERM-UNIVERSE-EXHAUSTED"):
            self.under = True

    def _update(self, prop: str, new: Extent) -> None:
        self.ext[prop] = new
        self.changed = True
        self._model = None

    def add(self, prop: str, ctx: Extent) -> None:
        cur = self.ext[prop]
        if ctx.is_empty() or ctx.is_subset_of(cur, self.eps):
            return
        if prop in self.closed:
            span = hb.direct_sum(cur.span(self.eps), ctx.span(self.eps), self.eps)
            self._update(prop, Extent.of_subspace(span))
        else:
            self._update(prop, cur.union(ctx, self.eps))
        for p in ctx.points:
            if not any(f.prop == prop and hb.vectors_equal(f.vector, p, self.eps)
                       for f in self.facts):
                self.facts.append(Fact(prop, p, self.term_of.get(self.key(p)), self.clause,
                                       self.round))
        if ctx.space is not None:
            for b in ctx.space.vectors() if not ctx.is_all() else []:
                self.facts.append(Fact(prop, b, None, self.clause, self.round))

    # -- images of contexts under actions --

    def succ(self, a, v: np.ndarray) -> list[np.ndarray]:
        """Successors of one state, recording a denoting term for each."""
        t = self.term_of.get(self.key(v))
        m, eps = self.base, self.eps
        if isinstance(a, GateAct):
            out = m.gates[a.name] @ v
            self.note(out, None if t is None else GateApp(a.name, t))
            return [out]
        if isinstance(a, MeasAct):
            out = hb.measure(m.measurements[a.name], v, eps)
            if out is None:
                return []
            self.note(out, None if t is None else MeasApp(a.name, t))
            return [out]
        if isinstance(a, Seq):
            return _dedupe([y for x in self.succ(a.first, v) for y in self.succ(a.second, x)], eps)
        if isinstance(a, Choice):
            return _dedupe(self.succ(a.left, v) + self.succ(a.right, v), eps)
        if isinstance(a, Star):
            visited, frontier = [v], [v]
            for _ in range(self.prog.star_budget):
                new = []
                for x in frontier:
                    for y in self.succ(a.body, x):
                        if not any(hb.vectors_equal(y, u, eps) for u in visited + new):
                            new.append(y)
                if not new:
                    return visited
                visited += new
                frontier = new
            raise BudgetExceeded(f"star did not close within {self.prog.star_budget} unfoldings", a)
        raise TypeError(a)

    def image(self, a, ctx: Extent, closed_ok: bool) -> Extent:
        eps = self.eps
        pts = [y for p in ctx.points for y in self.succ(a, p)]
        out = Extent.of_points(pts, self.dim, eps)
        if ctx.space is None:
            return out
        return out.union(self.image_space(a, ctx.space, closed_ok), eps) if not closed_ok else \
            _closed_union(out, self.image_space(a, ctx.space, closed_ok), eps)

    def image_space(self, a, s: Subspace, closed_ok: bool) -> Extent:
        m, eps = self.base, self.eps
        if isinstance(a, GateAct):
            return Extent.of_subspace(hb.apply_unitary(m.gates[a.name], s, eps))
        if isinstance(a, MeasAct):
            img = hb.image_of_projection(m.measurements[a.name], s, eps)
            if img.is_zero():
                return Extent.empty(self.dim)  # every state is orthogonal: no successors
            if not closed_ok:
                raise NotRepresentable("measurement image of a subspace holds a non-closed prop")
            return Extent.of_subspace(img)
        if isinstance(a, Seq):
            return self.image(a.second, self.image_space(a.first, s, closed_ok), closed_ok)
        if isinstance(a, Choice):
            left = self.image_space(a.left, s, closed_ok)
            right = self.image_space(a.right, s, closed_ok)
            return _closed_union(left, right, eps) if closed_ok else left.union(right, eps)
        if isinstance(a, Star):
            z = Extent.of_subspace(s)
            for _ in range(self.prog.star_budget + self.dim + 1):
                step = self.image(a.body, z, closed_ok)
                nz = _closed_union(z, step, eps) if closed_ok else z.union(step, eps)
                if nz.equals(z, eps):
                    return z
                z = nz
            raise BudgetExceeded("star image did not stabilise", a)
        raise TypeError(a)

    # -- derivation --

    def derive(self, s, ctx: Extent, env: dict, tenv: dict) -> None:
        if ctx.is_empty():
            return
        eps = self.eps
        hook = match_sasaki(s)
        if hook is not None and is_closed(hook[1], self.closed) and is_closed(hook[0], self.closed):
            rho1, rho2 = hook
            s1 = self.evaluator().extent(rho1, env).span(eps)
            self.derive(rho2, _project_context(s1, ctx, eps), env, tenv)
            return
        if isinstance(s, Prop):
            self.add(s.name, ctx)
        elif isinstance(s, And):
            self.derive(s.left, ctx, env, tenv)
            self.derive(s.right, ctx, env, tenv)
        elif isinstance(s, At):
            v = eval_term(self.base, s.term, env)
            self.note(v, subst_term(tenv, s.term))
            self.derive(s.body, Extent.of_points([v], self.dim, eps), env, tenv)
        elif isinstance(s, Nec):
            self.derive(s.body, self.image(s.action, ctx, is_closed(s.body, self.closed)), env, tenv)
        elif isinstance(s, Store):
            if s.var not in free_vars(s.body):
                self.derive(s.body, ctx, env, tenv)
            elif ctx.is_finite():
                for p in ctx.points:
                    t = self.term_of.get(self.key(p))
                    self.derive(s.body, Extent.of_points([p], self.dim, eps),
                                {**env, s.var: p}, {**tenv, s.var: t if t is not None else Var(s.var)})
            else:
                raise NotRepresentable("store over an infinite set of states", s)
        elif isinstance(s, Forall):
            self.derive_forall(s, ctx, env, tenv)
        elif isinstance(s, Implies):
            self.derive(s.right, self.body_holds(s.left, ctx, env), env, tenv)
        elif isinstance(s, (QNot, Not)):
            return  # constraints: checked after saturation
        else:
            raise TypeError(s)

    def body_holds(self, body, ctx: Extent, env: dict) -> Extent:
        """ctx restricted to the states where ``body`` currently holds."""
        ev = self.evaluator()
        eps = self.eps
        if ctx.is_finite():
            return Extent.of_points([p for p in ctx.points if ev.sat(p, body, env)], self.dim, eps)
        try:
            return ctx.intersect(ev.extent(body, env), eps)
        except NotRepresentable:
            # fall back to the states we can name; sound, possibly incomplete
            self.warn("TERM-UNIVERSE-EXHAUSTED: an implication body was only checked on "
                      "term-denotable states")
            pool = [g.value for g in self.universe.terms] + [f.vector for f in self.facts]
            return Extent.of_points([p for p in pool if ctx.contains(p, eps) and ev.sat(p, body, env)],
                                    self.dim, eps)

    def derive_forall(self, s: Forall, ctx: Extent, env: dict, tenv: dict) -> None:
        live = [x for x in s.vars if x in free_vars(s.body)]
        if not live:
            self.derive(s.body, ctx, env, tenv)
            return
        body = s.body
        if (len(live) == 1 and isinstance(body, At) and body.term == Var(live[0])
                and live[0] not in free_vars(body.body)):
            # forall x . @ x f : f holds at every state
            self.derive(body.body, Extent.all(self.dim), env, tenv)
            return
        cap = self.prog.term_depth
        terms: list[GroundTerm] = self.universe.terms
        for combo in itertools.product(terms, repeat=len(live)):
            env2 = {**env, **{x: g.value for x, g in zip(live, combo)}}
            tenv2 = {**tenv, **{x: g.term for x, g in zip(live, combo)}}
            before = self.changed
            self.changed = False
            try:
                self.derive(body, ctx, env2, tenv2)
            except UndefinedMeasurement:
                pass
            if self.changed and any(g.depth >= cap for g in combo):
                self.warn(f"TERM-UNIVERSE-EXHAUSTED: an instance at the depth cap ({cap}) "
                          "derived a new fact; the initial model may be an under-approximation")
            self.changed = self.changed or before

    def run(self) -> InitialModel:
        for r in range(1, self.prog.max_rounds + 1):
            self.round = r
            self.changed = False
            for i, c in enumerate(self.prog.clauses):
                self.clause = i
                self.derive(c, Extent.all(self.dim), {}, {})
            if not self.changed:
                return InitialModel(self.model(), self.facts, r, self.warnings, self.under)
        raise BudgetExceeded(f"saturation did not converge within {self.prog.max_rounds} rounds")


def _dedupe(vs, eps):
    out = []
    for v in vs:
        if not any(hb.vectors_equal(v, u, eps) for u in out):
            out.append(v)
    return out


def _closed_union(a: Extent, b: Extent, eps: float) -> Extent:
    if a.is_empty():
        return b
    if b.is_empty():
        return a
    return Extent.of_subspace(hb.direct_sum(a.span(eps), b.span(eps), eps))


def _project_context(s1: Subspace, ctx: Extent, eps: float) -> Extent:
    """Projections of the context onto ``s1``."""
    pts = [hb.project(s1, p) for p in ctx.points]
    pts = [p for p in pts if np.linalg.norm(p) > _ZERO_TOL]
    space = None
    if ctx.space is not None:
        space = hb.image_of_projection(s1, ctx.space, eps)
    return Extent(ctx.dim, space, pts, eps)


def saturate(prog: HornProgram) -> InitialModel:
    """Least model of the program's positive content (the initial model when satisfiable)."""
    return _Saturator(prog).run()


# --- satisfiability ----------------------------------------------------------

SAT, UNSAT, UNKNOWN = "SAT", "UNSAT", "UNKNOWN"


@dataclass
class Verdict:
    status: str
    clause: Optional[int] = None
    witness: Optional[np.ndarray] = None
    reason: Optional[str] = None
    detail: Optional[str] = None


class _Checker:
    def __init__(self, prog: HornProgram, im: InitialModel):
        self.prog = prog
        self.im = im
        self.eps = im.model.eps
        self.dim = im.model.dim
        self.ev = Evaluator(im.model, prog.budget, prog.term_depth, prog.model_terms,
                            prog.max_terms)
        self._universe = None

    @property
    def universe(self):
        if self._universe is None:
            self._universe = self.prog.universe()
        return self._universe

    def outside(self, ctx: Extent, e: Extent) -> Optional[np.ndarray]:
        """Some state of ``ctx`` not in ``e``, or None when ctx is a subset of e."""
        eps = self.eps
        for p in ctx.points:
            if not e.contains(p, eps):
                return p
        if ctx.space is None or ctx.space.is_zero():
            return None
        if e.space is not None and hb.is_subspace_of(ctx.space, e.space, eps):
            return None
        basis = ctx.space.vectors()
        for b in basis:
            if not e.contains(b, eps):
                return b
        rng = np.random.default_rng(0)
        for _ in range(16):
            v = ctx.space.basis @ (rng.normal(size=ctx.space.rank) + 0j)
            if not e.contains(v, eps):
                return v
        return None

    def check(self, s, ctx: Extent, env: dict) -> Optional[np.ndarray]:
        if ctx.is_empty():
            return None
        try:
            return self.outside(ctx, self.ev.extent(s, env))
        except NotRepresentable:
            pass
        eps = self.eps
        if isinstance(s, And):
            bad = self.check(s.left, ctx, env)
            return bad if bad is not None else self.check(s.right, ctx, env)
        if isinstance(s, At):
            v = eval_term(self.im.model, s.term, env)
            bad = self.check(s.body, Extent.of_points([v], self.dim, eps), env)
            return None if bad is None else _first_point(ctx)
        if isinstance(s, Nec) and ctx.is_finite():
            for p in ctx.points:
                succ = successors(self.im.model, s.action, p, self.prog.budget)
                if self.check(s.body, Extent.of_points(succ, self.dim, eps), env) is not None:
                    return p
            return None
        if isinstance(s, Store) and ctx.is_finite():
            for p in ctx.points:
                if self.check(s.body, Extent.of_points([p], self.dim, eps), {**env, s.var: p}) is not None:
                    return p
            return None
        if isinstance(s, Forall):
            live = [x for x in s.vars if x in free_vars(s.body)]
            b = s.body
            if (len(live) == 1 and isinstance(b, At) and b.term == Var(live[0])
                    and live[0] not in free_vars(b.body)):
                bad = self.check(b.body, Extent.all(self.dim), env)
                return None if bad is None else _first_point(ctx)
            pool = self.universe.values() + [f.vector for f in self.im.facts]
            for combo in itertools.product(pool, repeat=len(live)):
                try:
                    bad = self.check(b, ctx, {**env, **dict(zip(live, combo))})
                except UndefinedMeasurement:
                    continue
                if bad is not None:
                    return bad
            return None
        if isinstance(s, Implies):
            if ctx.is_finite():
                for p in ctx.points:
                    if self.ev.sat(p, s.left, env) and \
                            self.check(s.right, Extent.of_points([p], self.dim, eps), env) is not None:
                        return p
                return None
            return self.check(s.right, ctx.intersect(self.ev.extent(s.left, env), eps), env)
        raise NotRepresentable("cannot check clause over this set of states", s)


def _first_point(ctx: Extent) -> np.ndarray:
    if ctx.points:
        return ctx.points[0]
    return ctx.space.basis[:, 0].copy()


def check_satisfiable(prog: HornProgram, im: Optional[InitialModel] = None) -> Verdict:
    """SAT when every clause holds everywhere in the initial model; UNSAT with a witness state."""
    if im is None:
        im = saturate(prog)
    checker = _Checker(prog, im)
    unknown: Optional[Verdict] = None
    for i, c in enumerate(prog.clauses):
        try:
            bad = checker.check(c, Extent.all(im.model.dim), {})
        except (NotRepresentable, BudgetExceeded) as exc:
            if unknown is None:
                unknown = Verdict(UNKNOWN, i, reason=exc.code, detail=str(exc))
            continue
        if bad is not None:
            return Verdict(UNSAT, i, bad, detail=print_sentence(c))
    if unknown is not None:
        return unknown
    return Verdict(SAT)


# --- entailment and queries --------------------------------------------------


def entails(prog: HornProgram, w, s, im: Optional[InitialModel] = None) -> bool:
    """Truth of ``s`` at the value of term ``w`` in the initial model.

    For basic sentences this decides entailment by the program; for other
    Horn sentences it reports truth in the initial model.
    """
    if im is None:
        im = saturate(prog)
    ev = Evaluator(im.model, prog.budget, prog.term_depth, prog.model_terms, prog.max_terms)
    v = w if isinstance(w, np.ndarray) else eval_term(im.model, w)
    return ev.sat(v, s)


ANSWER, NO_ANSWER = "ANSWER", "NO-ANSWER-AT-DEPTH"


@dataclass
class QueryResult:
    status: str
    substitution: dict = field(default_factory=dict)
    depth: int = 0
    candidates_checked: int = 0
    unknown: int = 0
    reason: Optional[str] = None

    def render(self) -> str:
        if self.status == ANSWER:
            inner = ", ".join(f"{x} -> {print_term(t)}" for x, t in self.substitution.items())
            return f"ANSWER {{{inner}}}"
        return f"{self.status}({self.depth})"


def conjunction(parts):
    parts = list(parts)
    out = parts[-1]
    for p in reversed(parts[:-1]):
        out = And(p, out)
    return out


def candidate_substitutions(universe: TermUniverse, variables) -> list[tuple[GroundTerm, ...]]:
    """All tuples, ordered by largest term depth, then by printed forms."""
    combos = list(itertools.product(universe.terms, repeat=len(variables)))
    combos.sort(key=lambda c: (max(g.depth for g in c), tuple(g.text for g in c)))
    return combos


def _combos_at_depth(terms: list[GroundTerm], d: int, k: int):
    combos = [c for c in itertools.product(terms, repeat=k) if max(g.depth for g in c) == d]
    combos.sort(key=lambda c: tuple(g.text for g in c))
    return combos


def answer_query(prog: HornProgram, q, im: Optional[InitialModel] = None,
                 depth: Optional[int] = None) -> QueryResult:
    """First ground substitution (in enumeration order) under which the program entails the body."""
    if im is None:
        im = saturate(prog)
    verdict = check_satisfiable(prog, im)
    if verdict.status == UNSAT:
        raise ProgramUnsat("program is unsatisfiable", verdict)
    depth = prog.term_depth if depth is None else depth
    extra = tuple(prog.model_terms) + tuple(literal_terms(q.body))
    en = GroundTermEnumerator(prog.model, extra, prog.max_terms)
    ev = Evaluator(im.model, prog.budget, prog.term_depth, prog.model_terms, prog.max_terms)
    body = conjunction(q.body)
    anchor = None if q.anchor is None else eval_term(im.model, q.anchor)
    checked = unknown = 0
    for d in range(depth + 1):
        if d > 0:
            en.next_level()
        if not en.levels[d] and d > 0:
            break
        for combo in _combos_at_depth(en.terms, d, len(q.vars)):
            theta = {x: g.term for x, g in zip(q.vars, combo)}
            inst = apply_substitution(theta, body)
            checked += 1
            try:
                ok = ev.sat(anchor, inst) if anchor is not None else ev.sat_global(inst)
            except (EvaluationError, GlobalNotDecidable):
                unknown += 1
                continue
            if ok:
                return QueryResult(ANSWER, theta, d, checked, unknown)
    reason = None if verdict.status == SAT else verdict.reason
    return QueryResult(NO_ANSWER, {}, depth, checked, unknown, reason)
