"""Abstract syntax for terms, actions and sentences, plus grammar classification.

All nodes are frozen dataclasses.  The optional ``pos`` field carries a
``(line, col)`` source position and is ignored by equality, so parsed and
hand-built trees compare structurally.

Abbreviations (possibility, disjunction, existential quantification, the
Sasaki hook, quantum disjunction, Until) are not nodes: the helper functions
below build their core-grammar expansion directly.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterator, Optional, Union

Pos = Optional[tuple[int, int]]


def _pos():
    return field(default=None, compare=False, repr=False)


# --- terms of sort c (scalars) -----------------------------------------------


@dataclass(frozen=True)
class SConst:
    name: str
    pos: Pos = _pos()


@dataclass(frozen=True)
class SLit:
    value: complex
    pos: Pos = _pos()


@dataclass(frozen=True)
class SAdd:
    left: "ScalarTerm"
    right: "ScalarTerm"
    pos: Pos = _pos()


@dataclass(frozen=True)
class SMul:
    left: "ScalarTerm"
    right: "ScalarTerm"
    pos: Pos = _pos()


@dataclass(frozen=True)
class Inner:
    left: "Term"
    right: "Term"
    pos: Pos = _pos()


ScalarTerm = Union[SConst, SLit, SAdd, SMul, Inner]

# --- terms of sort v (vectors) -----------------------------------------------


@dataclass(frozen=True)
class Var:
    name: str
    pos: Pos = _pos()


@dataclass(frozen=True)
class VConst:
    name: str
    pos: Pos = _pos()


@dataclass(frozen=True)
class Ket:
    bits: str
    pos: Pos = _pos()


@dataclass(frozen=True)
class VLit:
    entries: tuple[complex, ...]
    pos: Pos = _pos()


@dataclass(frozen=True)
class Zero:
    pos: Pos = _pos()


@dataclass(frozen=True)
class GateApp:
    gate: str
    arg: "Term"
    pos: Pos = _pos()


@dataclass(frozen=True)
class MeasApp:
    meas: str
    arg: "Term"
    pos: Pos = _pos()


@dataclass(frozen=True)
class VAdd:
    left: "Term"
    right: "Term"
    pos: Pos = _pos()


@dataclass(frozen=True)
class Scale:
    scalar: ScalarTerm
    vector: "Term"
    pos: Pos = _pos()


Term = Union[Var, VConst, Ket, VLit, Zero, GateApp, MeasApp, VAdd, Scale]

# --- actions -----------------------------------------------------------------


@dataclass(frozen=True)
class GateAct:
    name: str
    pos: Pos = _pos()


@dataclass(frozen=True)
class MeasAct:
    name: str
    pos: Pos = _pos()


@dataclass(frozen=True)
class Seq:
    first: "Action"
    second: "Action"
    pos: Pos = _pos()


@dataclass(frozen=True)
class Choice:
    left: "Action"
    right: "Action"
    pos: Pos = _pos()


@dataclass(frozen=True)
class Star:
    body: "Action"
    pos: Pos = _pos()


Action = Union[GateAct, MeasAct, Seq, Choice, Star]

# --- sentences ---------------------------------------------------------------


@dataclass(frozen=True)
class Prop:
    name: str
    pos: Pos = _pos()


@dataclass(frozen=True)
class Nominal:
    """Holds exactly at the state denoted by ``term`` (used by the Until encoding)."""

    term: Term
    pos: Pos = _pos()


@dataclass(frozen=True)
class At:
    term: Term
    body: "Sentence"
    pos: Pos = _pos()


@dataclass(frozen=True)
class And:
    left: "Sentence"
    right: "Sentence"
    pos: Pos = _pos()


@dataclass(frozen=True)
class Not:
    body: "Sentence"
    pos: Pos = _pos()


@dataclass(frozen=True)
class QNot:
    body: "Sentence"
    pos: Pos = _pos()


@dataclass(frozen=True)
class Implies:
    left: "Sentence"
    right: "Sentence"
    pos: Pos = _pos()


@dataclass(frozen=True)
class Nec:
    action: Action
    body: "Sentence"
    pos: Pos = _pos()


@dataclass(frozen=True)
class Store:
    var: str
    body: "Sentence"
    pos: Pos = _pos()


@dataclass(frozen=True)
class Forall:
    vars: tuple[str, ...]
    body: "Sentence"
    pos: Pos = _pos()


Sentence = Union[Prop, Nominal, At, And, Not, QNot, Implies, Nec, Store, Forall]

# --- abbreviations -----------------------------------------------------------


def diamond(action: Action, body: Sentence) -> Sentence:
    return Not(Nec(action, Not(body)))


def disj(left: Sentence, right: Sentence) -> Sentence:
    return Not(And(Not(left), Not(right)))


def exists(vars: tuple[str, ...], body: Sentence) -> Sentence:
    return Not(Forall(tuple(vars), Not(body)))


def sasaki(left: Sentence, right: Sentence) -> Sentence:
    return QNot(And(left, QNot(And(left, right))))


def qdisj(left: Sentence, right: Sentence) -> Sentence:
    return QNot(And(QNot(left), QNot(right)))


def until(action: Action, holds: Sentence, meanwhile: Sentence,
          avoid: frozenset[str] = frozenset()) -> Sentence:
    """store x . <a> store y . (holds /\\ @x [a](<a> y => meanwhile))."""
    used = set(avoid) | sentence_vars(holds) | sentence_vars(meanwhile)
    x = fresh_name("ux", used)
    y = fresh_name("uy", used | {x})
    return Store(x, diamond(action, Store(y, And(
        holds, At(Var(x), Nec(action, Implies(diamond(action, Nominal(Var(y))), meanwhile)))))))


def match_sasaki(s: Sentence) -> Optional[tuple[Sentence, Sentence]]:
    """Recover (rho1, rho2) from the expansion ~(rho1 /\\ ~(rho1 /\\ rho2))."""
    if (isinstance(s, QNot) and isinstance(s.body, And)
            and isinstance(s.body.right, QNot) and isinstance(s.body.right.body, And)
            and s.body.right.body.left == s.body.left):
        return s.body.left, s.body.right.body.right
    return None


def match_diamond(s: Sentence) -> Optional[tuple[Action, Sentence]]:
    if isinstance(s, Not) and isinstance(s.body, Nec) and isinstance(s.body.body, Not):
        return s.body.action, s.body.body.body
    return None


def match_exists(s: Sentence) -> Optional[tuple[tuple[str, ...], Sentence]]:
    if isinstance(s, Not) and isinstance(s.body, Forall) and isinstance(s.body.body, Not):
        return s.body.vars, s.body.body.body
    return None


def match_disj(s: Sentence) -> Optional[tuple[Sentence, Sentence]]:
    if (isinstance(s, Not) and isinstance(s.body, And)
            and isinstance(s.body.left, Not) and isinstance(s.body.right, Not)):
        return s.body.left.body, s.body.right.body
    return None


def match_qdisj(s: Sentence) -> Optional[tuple[Sentence, Sentence]]:
    if (isinstance(s, QNot) and isinstance(s.body, And)
            and isinstance(s.body.left, QNot) and isinstance(s.body.right, QNot)):
        return s.body.left.body, s.body.right.body
    return None


# --- traversal helpers -------------------------------------------------------


def fresh_name(base: str, used: set[str] | frozenset[str]) -> str:
    if base not in used:
        return base
    for i in itertools.count(1):
        cand = f"{base}{i}"
        if cand not in used:
            return cand
    raise AssertionError("unreachable")


def term_vars(t) -> set[str]:
    if isinstance(t, Var):
        return {t.name}
    if isinstance(t, (GateApp, MeasApp)):
        return term_vars(t.arg)
    if isinstance(t, (VAdd, SAdd, SMul, Inner)):
        return term_vars(t.left) | term_vars(t.right)
    if isinstance(t, Scale):
        return term_vars(t.scalar) | term_vars(t.vector)
    return set()


def term_depth(t) -> int:
    if isinstance(t, (GateApp, MeasApp)):
        return 1 + term_depth(t.arg)
    if isinstance(t, (VAdd, SAdd, SMul, Inner)):
        return 1 + max(term_depth(t.left), term_depth(t.right))
    if isinstance(t, Scale):
        return 1 + max(term_depth(t.scalar), term_depth(t.vector))
    return 0


def free_vars(s: Sentence) -> set[str]:
    if isinstance(s, Prop):
        return set()
    if isinstance(s, Nominal):
        return term_vars(s.term)
    if isinstance(s, At):
        return term_vars(s.term) | free_vars(s.body)
    if isinstance(s, (And, Implies)):
        return free_vars(s.left) | free_vars(s.right)
    if isinstance(s, (Not, QNot, Nec)):
        return free_vars(s.body)
    if isinstance(s, Store):
        return free_vars(s.body) - {s.var}
    if isinstance(s, Forall):
        return free_vars(s.body) - set(s.vars)
    raise TypeError(f"not a sentence: {s!r}")


def sentence_vars(s: Sentence) -> set[str]:
    """Every variable name occurring in ``s``, bound or free."""
    if isinstance(s, Store):
        return sentence_vars(s.body) | {s.var}
    if isinstance(s, Forall):
        return sentence_vars(s.body) | set(s.vars)
    if isinstance(s, (And, Implies)):
        return sentence_vars(s.left) | sentence_vars(s.right)
    if isinstance(s, (Not, QNot, Nec)):
        return sentence_vars(s.body)
    if isinstance(s, At):
        return term_vars(s.term) | sentence_vars(s.body)
    if isinstance(s, Nominal):
        return term_vars(s.term)
    return set()


def action_symbols(a: Action) -> Iterator[Union[GateAct, MeasAct]]:
    if isinstance(a, (GateAct, MeasAct)):
        yield a
    elif isinstance(a, (Seq,)):
        yield from action_symbols(a.first)
        yield from action_symbols(a.second)
    elif isinstance(a, Choice):
        yield from action_symbols(a.left)
        yield from action_symbols(a.right)
    elif isinstance(a, Star):
        yield from action_symbols(a.body)


def is_unitary_action(a: Action) -> bool:
    """True iff no measurement symbol occurs in ``a``."""
    return not any(isinstance(x, MeasAct) for x in action_symbols(a))


def sentence_terms(s: Sentence) -> Iterator[Term]:
    if isinstance(s, (At, Nominal)):
        yield s.term
    for child in children(s):
        yield from sentence_terms(child)


def children(s: Sentence) -> tuple[Sentence, ...]:
    if isinstance(s, (And, Implies)):
        return (s.left, s.right)
    if isinstance(s, (Not, QNot, Nec, Store, Forall, At)):
        return (s.body,)
    return ()


def subterms(t) -> Iterator:
    yield t
    if isinstance(t, (GateApp, MeasApp)):
        yield from subterms(t.arg)
    elif isinstance(t, (VAdd, SAdd, SMul, Inner)):
        yield from subterms(t.left)
        yield from subterms(t.right)
    elif isinstance(t, Scale):
        yield from subterms(t.scalar)
        yield from subterms(t.vector)


def sentence_props(s: Sentence) -> set[str]:
    if isinstance(s, Prop):
        return {s.name}
    out: set[str] = set()
    for c in children(s):
        out |= sentence_props(c)
    return out


# --- substitution ------------------------------------------------------------


def subst_term(theta: dict[str, Term], t):
    if isinstance(t, Var):
        return theta.get(t.name, t)
    if isinstance(t, GateApp):
        return GateApp(t.gate, subst_term(theta, t.arg), pos=t.pos)
    if isinstance(t, MeasApp):
        return MeasApp(t.meas, subst_term(theta, t.arg), pos=t.pos)
    if isinstance(t, VAdd):
        return VAdd(subst_term(theta, t.left), subst_term(theta, t.right), pos=t.pos)
    if isinstance(t, Scale):
        return Scale(subst_term(theta, t.scalar), subst_term(theta, t.vector), pos=t.pos)
    if isinstance(t, SAdd):
        return SAdd(subst_term(theta, t.left), subst_term(theta, t.right), pos=t.pos)
    if isinstance(t, SMul):
        return SMul(subst_term(theta, t.left), subst_term(theta, t.right), pos=t.pos)
    if isinstance(t, Inner):
        return Inner(subst_term(theta, t.left), subst_term(theta, t.right), pos=t.pos)
    return t


def apply_substitution(theta: dict[str, Term], s: Sentence) -> Sentence:
    """Capture-avoiding replacement of free variables by terms.

    A binder whose variable occurs free in an incoming term is renamed to
    the first name ``<var>1, <var>2, ...`` unused in the sentence and in the
    substituted terms.
    """
    theta = {x: t for x, t in theta.items() if not (isinstance(t, Var) and t.name == x)}
    if not theta:
        return s
    if isinstance(s, Prop):
        return s
    if isinstance(s, Nominal):
        return Nominal(subst_term(theta, s.term), pos=s.pos)
    if isinstance(s, At):
        return At(subst_term(theta, s.term), apply_substitution(theta, s.body), pos=s.pos)
    if isinstance(s, (And, Implies)):
        return type(s)(apply_substitution(theta, s.left), apply_substitution(theta, s.right), pos=s.pos)
    if isinstance(s, (Not, QNot)):
        return type(s)(apply_substitution(theta, s.body), pos=s.pos)
    if isinstance(s, Nec):
        return Nec(s.action, apply_substitution(theta, s.body), pos=s.pos)
    if isinstance(s, (Store, Forall)):
        bound = (s.var,) if isinstance(s, Store) else s.vars
        inner = {x: t for x, t in theta.items() if x not in bound}
        live = {x: t for x, t in inner.items() if x in free_vars(s.body)}
        incoming: set[str] = set()
        for t in live.values():
            incoming |= term_vars(t)
        body = s.body
        new_bound = []
        used = sentence_vars(s.body) | incoming | set(live)
        for b in bound:
            if b in incoming:
                nb = fresh_name(b, used)
                used.add(nb)
                body = apply_substitution({b: Var(nb)}, body)
                new_bound.append(nb)
            else:
                new_bound.append(b)
        body = apply_substitution(live, body)
        if isinstance(s, Store):
            return Store(new_bound[0], body, pos=s.pos)
        return Forall(tuple(new_bound), body, pos=s.pos)
    raise TypeError(f"not a sentence: {s!r}")


# --- classification ----------------------------------------------------------

BASIC = "BASIC"
CLOSED = "CLOSED"
HORN = "HORN"
GENERAL = "GENERAL"


def is_basic(s: Sentence) -> bool:
    if isinstance(s, Prop):
        return True
    if isinstance(s, And):
        return is_basic(s.left) and is_basic(s.right)
    if isinstance(s, (At, Nec, Store)):
        return is_basic(s.body)
    return False


def is_closed(s: Sentence, closed_props: frozenset[str] | set[str]) -> bool:
    if isinstance(s, Prop):
        return s.name in closed_props
    if isinstance(s, QNot):
        return is_closed(s.body, closed_props)
    if isinstance(s, And):
        return is_closed(s.left, closed_props) and is_closed(s.right, closed_props)
    if isinstance(s, Nec):
        return is_unitary_action(s.action) and is_closed(s.body, closed_props)
    if isinstance(s, Forall):
        return is_closed(s.body, closed_props)
    return False


def is_closed_basic(s: Sentence, closed_props) -> bool:
    """Closed props under conjunction and necessity over unitary actions."""
    if isinstance(s, Prop):
        return s.name in closed_props
    if isinstance(s, And):
        return is_closed_basic(s.left, closed_props) and is_closed_basic(s.right, closed_props)
    if isinstance(s, Nec):
        return is_unitary_action(s.action) and is_closed_basic(s.body, closed_props)
    return False


def is_horn(s: Sentence, closed_props) -> bool:
    hook = match_sasaki(s)
    if hook is not None:
        rho1, rho2 = hook
        if (is_closed_basic(rho1, closed_props) and is_closed(rho2, closed_props)
                and is_horn(rho2, closed_props)):
            return True
    if isinstance(s, Prop):
        return True
    if isinstance(s, QNot):
        return is_basic(s.body)
    if isinstance(s, And):
        return is_horn(s.left, closed_props) and is_horn(s.right, closed_props)
    if isinstance(s, Implies):
        return is_basic(s.left) and is_horn(s.right, closed_props)
    if isinstance(s, (At, Nec, Store, Forall)):
        return is_horn(s.body, closed_props)
    return False


def classify(s: Sentence, closed_props=frozenset()) -> frozenset[str]:
    labels = set()
    if is_basic(s):
        labels.add(BASIC)
    if is_closed(s, closed_props):
        labels.add(CLOSED)
    if is_horn(s, closed_props):
        labels.add(HORN)
    if not labels:
        labels.add(GENERAL)
    return frozenset(labels)
