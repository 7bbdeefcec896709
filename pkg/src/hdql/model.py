"""Signatures, concrete quantum models, ground-term evaluation and renaming morphisms."""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping, Optional

import numpy as np

from . import hilbert as hb
from .errors import UnboundVariable, UndefinedMeasurement
from .extent import Extent
from .hilbert import Subspace
from .printer import print_term
from .syntax import (And, At, Choice, Forall, GateAct, GateApp, Implies, Inner, Ket, MeasAct,
                     MeasApp, Nec, Nominal, Not, Prop, QNot, SAdd, Scale, SConst, Seq, SLit, SMul,
                     Star, Store, Term, VAdd, VConst, Var, VLit, Zero, subterms, term_depth)

_IDENT = re.compile(r"^[A-Za-z_][A-Za-z0-9_']*$")


@dataclass(frozen=True)
class Signature:
    gates: frozenset[str] = frozenset()
    measurements: frozenset[str] = frozenset()
    vectors: frozenset[str] = frozenset()
    scalars: frozenset[str] = frozenset()
    props: frozenset[str] = frozenset()
    closed_props: frozenset[str] = frozenset()

    def problems(self) -> list[str]:
        out = []
        if not self.closed_props <= self.props:
            out.append("closed props must be declared props: "
                       + ", ".join(sorted(self.closed_props - self.props)))
        groups = [self.gates, self.measurements, self.vectors, self.scalars, self.props]
        for a, b in itertools.combinations(groups, 2):
            for name in sorted(a & b):
                out.append(f"symbol {name!r} declared with two sorts")
        for name in sorted(set().union(*groups)):
            if not _IDENT.match(name):
                out.append(f"bad symbol name {name!r}")
        return out

    def sort_of(self, name: str) -> Optional[str]:
        for sort, names in (("gate", self.gates), ("measurement", self.measurements),
                            ("vector", self.vectors), ("scalar", self.scalars),
                            ("prop", self.props)):
            if name in names:
                return sort
        return None


@dataclass
class Model:
    """A concrete quantum model over C^dim.

    Props missing from ``valuation`` default to the zero subspace when closed
    and to the empty set otherwise.
    """

    sig: Signature
    dim: int
    gates: dict[str, np.ndarray] = field(default_factory=dict)
    measurements: dict[str, Subspace] = field(default_factory=dict)
    vectors: dict[str, np.ndarray] = field(default_factory=dict)
    scalars: dict[str, complex] = field(default_factory=dict)
    valuation: dict[str, Extent] = field(default_factory=dict)
    eps: float = hb.DEFAULT_EPS

    def prop_extent(self, name: str) -> Extent:
        ext = self.valuation.get(name)
        if ext is not None:
            return ext
        if name in self.sig.closed_props:
            return Extent.of_subspace(Subspace.zero(self.dim))
        return Extent.empty(self.dim)

    def with_valuation(self, valuation: Mapping[str, Extent]) -> "Model":
        return replace(self, valuation=dict(valuation))

    def adjoint(self, gate: str) -> np.ndarray:
        return self.gates[gate].conj().T


def validate_model(sig: Signature, m: Model) -> list[str]:
    """All violations of the model conditions; an empty list means valid."""
    out = list(sig.problems())
    n = m.dim
    if n < 1:
        out.append("dimension must be positive")
        return out
    for g in sorted(sig.gates):
        u = m.gates.get(g)
        if u is None:
            out.append(f"gate {g}: not interpreted")
        elif u.shape != (n, n):
            out.append(f"gate {g}: shape {u.shape} does not match dimension {n}")
        elif not hb.is_unitary(u, max(m.eps, 1e-9) * n):
            out.append(f"gate {g}: gate not unitary")
    for q in sorted(sig.measurements):
        x = m.measurements.get(q)
        if x is None:
            out.append(f"measurement {q}: not interpreted")
        elif x.dim != n:
            out.append(f"measurement {q}: dimension {x.dim} does not match {n}")
        elif not hb.is_hermitian_idempotent(x.projector, max(m.eps, 1e-9) * n):
            out.append(f"measurement {q}: not a valid subspace")
    for v in sorted(sig.vectors):
        w = m.vectors.get(v)
        if w is None:
            out.append(f"vector {v}: not interpreted")
        elif w.shape != (n,):
            out.append(f"vector {v}: length {w.size} does not match dimension {n}")
    for c in sorted(sig.scalars):
        if c not in m.scalars:
            out.append(f"scalar {c}: not interpreted")
    for p, ext in sorted(m.valuation.items()):
        if p not in sig.props:
            out.append(f"prop {p}: valuation for undeclared prop")
        elif ext.dim != n:
            out.append(f"prop {p}: extent dimension {ext.dim} does not match {n}")
        elif p in sig.closed_props and (ext.space is None or ext.points):
            out.append(f"prop {p}: closed prop extent not a subspace")
    return out


# --- terms -------------------------------------------------------------------


def eval_term(m: Model, t, binding: Optional[Mapping[str, np.ndarray]] = None):
    """Value of a vector term (ndarray) or scalar term (complex)."""
    env = binding or {}
    if isinstance(t, Var):
        if t.name not in env:
            raise UnboundVariable(f"unbound variable {t.name}", t)
        return env[t.name]
    if isinstance(t, VConst):
        return m.vectors[t.name]
    if isinstance(t, Ket):
        v = hb.ket(t.bits)
        if v.size != m.dim:
            raise hb.DimensionError(f"ket({t.bits}) has dimension {v.size}, model has {m.dim}")
        return v
    if isinstance(t, VLit):
        if len(t.entries) != m.dim:
            raise hb.DimensionError(f"vector literal of length {len(t.entries)} in dimension {m.dim}")
        return np.array(t.entries, dtype=complex)
    if isinstance(t, Zero):
        return hb.zero_vector(m.dim)
    if isinstance(t, GateApp):
        return m.gates[t.gate] @ eval_term(m, t.arg, env)
    if isinstance(t, MeasApp):
        out = hb.measure(m.measurements[t.meas], eval_term(m, t.arg, env), m.eps)
        if out is None:
            raise UndefinedMeasurement(f"measurement {t.meas} undefined on its argument", t)
        return out
    if isinstance(t, VAdd):
        return eval_term(m, t.left, env) + eval_term(m, t.right, env)
    if isinstance(t, Scale):
        return eval_term(m, t.scalar, env) * eval_term(m, t.vector, env)
    if isinstance(t, SConst):
        return complex(m.scalars[t.name])
    if isinstance(t, SLit):
        return complex(t.value)
    if isinstance(t, SAdd):
        return eval_term(m, t.left, env) + eval_term(m, t.right, env)
    if isinstance(t, SMul):
        return eval_term(m, t.left, env) * eval_term(m, t.right, env)
    if isinstance(t, Inner):
        return hb.inner(eval_term(m, t.left, env), eval_term(m, t.right, env))
    raise TypeError(f"not a term: {t!r}")


# --- signature morphisms -----------------------------------------------------


@dataclass(frozen=True)
class Morphism:
    """Symbol renaming between signatures; unlisted symbols map to themselves."""

    source: Signature
    target: Signature
    gates: Mapping[str, str] = field(default_factory=dict)
    measurements: Mapping[str, str] = field(default_factory=dict)
    vectors: Mapping[str, str] = field(default_factory=dict)
    scalars: Mapping[str, str] = field(default_factory=dict)
    props: Mapping[str, str] = field(default_factory=dict)

    def _map(self, table: Mapping[str, str], domain: frozenset[str], codomain: frozenset[str],
             name: str, kind: str) -> str:
        if name not in domain:
            raise KeyError(f"{kind} {name!r} is not in the source signature")
        out = table.get(name, name)
        if out not in codomain:
            raise KeyError(f"{kind} {name!r} maps to {out!r}, missing from the target signature")
        return out

    def gate(self, n: str) -> str:
        return self._map(self.gates, self.source.gates, self.target.gates, n, "gate")

    def meas(self, n: str) -> str:
        return self._map(self.measurements, self.source.measurements,
                         self.target.measurements, n, "measurement")

    def vector(self, n: str) -> str:
        return self._map(self.vectors, self.source.vectors, self.target.vectors, n, "vector")

    def scalar(self, n: str) -> str:
        return self._map(self.scalars, self.source.scalars, self.target.scalars, n, "scalar")

    def prop(self, n: str) -> str:
        return self._map(self.props, self.source.props, self.target.props, n, "prop")

    def problems(self) -> list[str]:
        out = []
        for p in sorted(self.source.props):
            try:
                q = self.prop(p)
            except KeyError as exc:
                out.append(str(exc.args[0]))
                continue
            if (p in self.source.closed_props) != (q in self.target.closed_props):
                out.append(f"prop {p!r} -> {q!r} does not preserve closedness")
        return out

    def then(self, other: "Morphism") -> "Morphism":
        """Composite: first ``self``, then ``other``."""
        def comp(a: Mapping[str, str], b: Mapping[str, str], dom: frozenset[str]):
            return {n: b.get(a.get(n, n), a.get(n, n)) for n in dom}
        s = self.source
        return Morphism(s, other.target,
                        comp(self.gates, other.gates, s.gates),
                        comp(self.measurements, other.measurements, s.measurements),
                        comp(self.vectors, other.vectors, s.vectors),
                        comp(self.scalars, other.scalars, s.scalars),
                        comp(self.props, other.props, s.props))

    @classmethod
    def identity(cls, sig: Signature) -> "Morphism":
        return cls(sig, sig)


def translate(mor: Morphism, x):
    """Rename every signature symbol in a term, action or sentence."""
    if isinstance(x, (Var, Ket, VLit, Zero, SLit)):
        return x
    if isinstance(x, VConst):
        return VConst(mor.vector(x.name), pos=x.pos)
    if isinstance(x, SConst):
        return SConst(mor.scalar(x.name), pos=x.pos)
    if isinstance(x, GateApp):
        return GateApp(mor.gate(x.gate), translate(mor, x.arg), pos=x.pos)
    if isinstance(x, MeasApp):
        return MeasApp(mor.meas(x.meas), translate(mor, x.arg), pos=x.pos)
    if isinstance(x, (VAdd, SAdd, SMul, Inner, And, Implies, Choice)):
        return type(x)(translate(mor, x.left), translate(mor, x.right), pos=x.pos)
    if isinstance(x, Scale):
        return Scale(translate(mor, x.scalar), translate(mor, x.vector), pos=x.pos)
    if isinstance(x, GateAct):
        return GateAct(mor.gate(x.name), pos=x.pos)
    if isinstance(x, MeasAct):
        return MeasAct(mor.meas(x.name), pos=x.pos)
    if isinstance(x, Seq):
        return Seq(translate(mor, x.first), translate(mor, x.second), pos=x.pos)
    if isinstance(x, Star):
        return Star(translate(mor, x.body), pos=x.pos)
    if isinstance(x, Prop):
        return Prop(mor.prop(x.name), pos=x.pos)
    if isinstance(x, Nominal):
        return Nominal(translate(mor, x.term), pos=x.pos)
    if isinstance(x, At):
        return At(translate(mor, x.term), translate(mor, x.body), pos=x.pos)
    if isinstance(x, (Not, QNot)):
        return type(x)(translate(mor, x.body), pos=x.pos)
    if isinstance(x, Nec):
        return Nec(translate(mor, x.action), translate(mor, x.body), pos=x.pos)
    if isinstance(x, Store):
        return Store(x.var, translate(mor, x.body), pos=x.pos)
    if isinstance(x, Forall):
        return Forall(x.vars, translate(mor, x.body), pos=x.pos)
    raise TypeError(f"cannot translate {x!r}")


# --- ground-term universe ----------------------------------------------------


@dataclass(frozen=True)
class GroundTerm:
    term: Term
    value: np.ndarray = field(compare=False)
    depth: int
    text: str


@dataclass
class TermUniverse:
    """Ground vector terms up to a depth, one representative per value.

    Representatives are chosen in (depth, printed form) order, so the
    enumeration is deterministic.  ``exhausted`` is set when the depth cap
    (or the size cap) cut off terms that would have been new values.
    """

    terms: list[GroundTerm]
    depth: int
    exhausted: bool

    def values(self) -> list[np.ndarray]:
        return [g.value for g in self.terms]


def literal_terms(sentences: Iterable) -> list[Term]:
    """Ket and vector literals occurring (as closed subterms) in sentences."""
    from .syntax import sentence_terms  # local: avoids a wide import list above

    out: list[Term] = []
    for s in sentences:
        for t in sentence_terms(s):
            for sub in subterms(t):
                if isinstance(sub, (Ket, VLit)) and sub not in out:
                    out.append(sub)
    return out


def _nested_text(g: GroundTerm, ctx: int) -> str:
    # mirrors the printer: sums wrap above sum level, scalings above scale level
    if isinstance(g.term, VAdd) and ctx > 1 or isinstance(g.term, Scale) and ctx > 2:
        return f"({g.text})"
    return g.text


def _value_keys(values: list[np.ndarray], eps: float) -> list[bytes]:
    if not values:
        return []
    scale = max(eps, 1e-12) * 1e3
    arr = np.asarray(values)
    q = np.round(np.concatenate([arr.real, arr.imag], axis=1) / scale).astype(np.int64)
    q[q == 0] = 0
    return [row.tobytes() for row in q]


class GroundTermEnumerator:
    """Ground vector terms generated level by level, one representative per value.

    Level 0 holds the origin, the named vector constants and the literals in
    ``extra``.  Each further level applies every gate, every measurement
    (where defined), pairwise sums and multiplication by declared scalar
    constants to the previous level.  Representatives are the terms with the
    smallest printed form.  ``capped`` turns true once ``max_terms`` stopped
    the enumeration.
    """

    def __init__(self, m: Model, extra: Iterable[Term] = (), max_terms: int = 20000):
        self.m = m
        self.eps = m.eps
        self.max_terms = max_terms
        self.seen: set[bytes] = set()
        self.levels: list[list[GroundTerm]] = []
        self.capped = False
        base = [("0", Zero(), hb.zero_vector(m.dim))]
        base += [(n, VConst(n), m.vectors[n]) for n in sorted(m.vectors)]
        for t in extra:
            try:
                base.append((print_term(t), t, eval_term(m, t)))
            except (UndefinedMeasurement, UnboundVariable, hb.DimensionError):
                continue
        self._admit(base)

    @property
    def terms(self) -> list[GroundTerm]:
        return [g for lvl in self.levels for g in lvl]

    @property
    def closed(self) -> bool:
        """No further level can add a value (or the size cap was hit)."""
        return self.capped or not self.levels[-1]

    def _admit(self, batch) -> list[GroundTerm]:
        d = len(self.levels)
        best: dict[bytes, tuple] = {}
        for key, item in zip(_value_keys([v for _, _, v in batch], self.eps), batch):
            if key in self.seen:
                continue
            cur = best.get(key)
            if cur is None or item[0] < cur[0]:
                best[key] = item
        fresh = []
        for key, (text, t, v) in sorted(best.items(), key=lambda kv: kv[1][0]):
            if len(self.seen) >= self.max_terms:
                self.capped = True
                break
            self.seen.add(key)
            fresh.append(GroundTerm(t, v, d, text))
        self.levels.append(fresh)
        return fresh

    def _expand(self):
        m, eps = self.m, self.eps
        prev = self.levels[-1]
        older = self.terms
        for g in prev:
            inner = g.text
            for name in sorted(m.gates):
                yield f"{name}({inner})", GateApp(name, g.term), m.gates[name] @ g.value
            for name in sorted(m.measurements):
                out = hb.measure(m.measurements[name], g.value, eps)
                if out is not None:
                    yield f"{name}({inner})", MeasApp(name, g.term), out
            for name in sorted(m.scalars):
                yield (f"{name} * {_nested_text(g, 2)}", Scale(SConst(name), g.term),
                       m.scalars[name] * g.value)
            if isinstance(g.term, Zero):
                continue
            for h in older:
                if isinstance(h.term, Zero):
                    continue
                yield (f"{_nested_text(h, 2)} + {_nested_text(g, 1)}", VAdd(h.term, g.term),
                       h.value + g.value)
                if h is not g:
                    yield (f"{_nested_text(g, 2)} + {_nested_text(h, 1)}", VAdd(g.term, h.term),
                           g.value + h.value)

    def next_level(self) -> list[GroundTerm]:
        if self.closed:
            self.levels.append([])
            return []
        return self._admit(list(self._expand()))

    def has_new_values(self) -> bool:
        """Whether one more level would add a value; stops at the first one found."""
        if self.capped:
            return True
        if not self.levels[-1]:
            return False
        return any(_value_keys([v], self.eps)[0] not in self.seen for _, _, v in self._expand())


def ground_terms(m: Model, depth: int, extra: Iterable[Term] = (),
                 max_terms: int = 20000) -> TermUniverse:
    """Ground vector terms of depth at most ``depth``, ordered by (depth, printed form).

    ``exhausted`` is set when the depth cap (or the size cap) cut off terms
    that would have been new values.
    """
    en = GroundTermEnumerator(m, extra, max_terms)
    while len(en.levels) <= depth and not en.capped:
        en.next_level()
    exhausted = en.capped or en.has_new_values()
    return TermUniverse(en.terms, depth, exhausted)


def max_term_depth(terms: Iterable[Term]) -> int:
    return max((term_depth(t) for t in terms), default=0)
