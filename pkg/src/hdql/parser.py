"""Lexer and recursive-descent parser for spec files, sentences, terms and queries.

Sentence operators from weakest to tightest: ``=>``, ``~>``, ``\\/``,
``(+)``, ``/\\``; all infix operators associate to the right.  Prefix forms
(``!``, ``~``, ``[a]``, ``<a>``, ``@ t``) bind tighter than any infix
operator; ``store``, ``forall`` and ``exists`` extend as far right as
possible.  Actions: ``*`` (postfix) binds tighter than ``;``, which binds
tighter than ``+``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Callable, Optional

from . import declarations as d
from . import syntax as sx
from .errors import ParseError
from .model import Signature

BUILTIN_CONSTANTS = frozenset({"H", "X", "Y", "Z", "S", "T", "CNOT", "SWAP", "pi"})
BUILTIN_FUNCTIONS = frozenset({"I", "sqrt", "exp", "cos", "sin", "adj", "conj"})
SENTENCE_KEYWORDS = frozenset({"store", "forall", "exists", "until", "nom", "ket"})
DECL_KEYWORDS = ("dim", "gate", "measurement", "vector", "scalar", "param", "prop", "closed",
                 "action", "valuation", "axiom", "query", "config")
PARAM_KINDS = ("unit2",)

# --- lexer -------------------------------------------------------------------

_NUM = r"(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?"
_NUM_RE = re.compile(
    rf"(?P<cplx>-?{_NUM}[+-]{_NUM}i(?![\w']))|(?P<imag>-?{_NUM}i(?![\w']))|(?P<real>-?{_NUM})")
_IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_']*")
_SYMBOLS = ("=>", "~>", "\\/", "/\\", "(+)", "(x)", "(", ")", "[", "]", "<", ">", ",", ".", ";",
            "+", "-", "*", "/", "^", "!", "~", "@", "=", ":")


@dataclass(frozen=True)
class Token:
    kind: str  # NUM, IDENT, SYM, EOF
    text: str
    line: int
    col: int
    value: complex = 0j


def _number_value(m: re.Match) -> complex:
    text = m.group(0)
    if m.group("real"):
        return complex(float(text))
    if m.group("imag"):
        return complex(0.0, float(text[:-1]))
    body = text[:-1]
    # split "a+bi" at the sign that is not part of an exponent or a leading minus
    for k in range(len(body) - 1, 0, -1):
        if body[k] in "+-" and body[k - 1] not in "eE":
            return complex(float(body[:k]), float(body[k:]))
    raise AssertionError(text)


def tokenize(text: str, filename: str = "<input>") -> list[Token]:
    tokens: list[Token] = []
    i, line, col = 0, 1, 1
    n = len(text)
    while i < n:
        c = text[i]
        if c == "\n":
            i, line, col = i + 1, line + 1, 1
            continue
        if c.isspace():
            i, col = i + 1, col + 1
            continue
        if c == "#":
            while i < n and text[i] != "\n":
                i += 1
            continue
        prev = tokens[-1] if tokens else None
        operand_before = prev is not None and (
            prev.kind in ("NUM", "IDENT") or prev.text in (")", "]", ">"))
        if c.isdigit() or c == "." and i + 1 < n and text[i + 1].isdigit() or (
                c == "-" and not operand_before and i + 1 < n
                and (text[i + 1].isdigit() or text[i + 1] == ".")):
            m = _NUM_RE.match(text, i)
            if m is not None:
                tokens.append(Token("NUM", m.group(0), line, col, _number_value(m)))
                col += m.end() - i
                i = m.end()
                continue
        if c.isalpha() or c == "_":
            m = _IDENT_RE.match(text, i)
            tokens.append(Token("IDENT", m.group(0), line, col))
            col += m.end() - i
            i = m.end()
            continue
        glued_call = i > 0 and (text[i - 1].isalnum() or text[i - 1] in "_'")
        for sym in _SYMBOLS:
            if glued_call and sym in ("(x)", "(+)"):
                continue  # "u(x)" is an application, not a tensor product
            if text.startswith(sym, i):
                tokens.append(Token("SYM", sym, line, col))
                i += len(sym)
                col += len(sym)
                break
        else:
            raise ParseError(f"unexpected character {c!r}", line, col, filename)
    tokens.append(Token("EOF", "", line, col))
    return tokens


# --- symbol table ------------------------------------------------------------


@dataclass
class Symbols:
    """Names declared so far, with their sorts."""

    dim: Optional[int] = None
    gates: set = field(default_factory=set)
    measurements: set = field(default_factory=set)
    vectors: set = field(default_factory=set)
    scalars: set = field(default_factory=set)
    props: set = field(default_factory=set)
    closed_props: set = field(default_factory=set)
    params: set = field(default_factory=set)
    actions: dict = field(default_factory=dict)

    def sort_of(self, name: str) -> Optional[str]:
        for sort, names in (("gate", self.gates), ("measurement", self.measurements),
                            ("vector", self.vectors), ("scalar", self.scalars),
                            ("prop", self.props), ("parameter", self.params),
                            ("action", self.actions)):
            if name in names:
                return sort
        return None

    def signature(self) -> Signature:
        return Signature(frozenset(self.gates), frozenset(self.measurements),
                         frozenset(self.vectors), frozenset(self.scalars),
                         frozenset(self.props), frozenset(self.closed_props))

    @classmethod
    def of_spec(cls, spec: d.SpecFile) -> "Symbols":
        s = cls()
        for x in spec.decls:
            s.record(x)
        return s

    def record(self, x) -> None:
        if isinstance(x, d.DimDecl):
            self.dim = x.dim
        elif isinstance(x, d.GateDecl):
            self.gates.add(x.name)
        elif isinstance(x, d.MeasDecl):
            self.measurements.add(x.name)
        elif isinstance(x, d.VectorDecl):
            self.vectors.add(x.name)
        elif isinstance(x, d.ScalarDecl):
            self.scalars.add(x.name)
        elif isinstance(x, d.ParamDecl):
            self.params.update(x.names)
        elif isinstance(x, d.PropDecl):
            self.props.update(x.names)
            if x.closed:
                self.closed_props.update(x.names)
        elif isinstance(x, d.ActionDecl):
            self.actions[x.name] = x.action


class _Backtrack(Exception):
    pass


class Parser:
    def __init__(self, text: str, filename: str = "<input>", symbols: Optional[Symbols] = None):
        self.filename = filename
        self.tokens = tokenize(text, filename)
        self.i = 0
        self.sym = symbols if symbols is not None else Symbols()
        self.scope: list[str] = []

    # -- token helpers --

    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def peek(self, k: int = 1) -> Token:
        return self.tokens[min(self.i + k, len(self.tokens) - 1)]

    def at(self, text: str) -> bool:
        t = self.tok
        return t.kind in ("SYM", "IDENT") and t.text == text

    def advance(self) -> Token:
        t = self.tok
        if t.kind != "EOF":
            self.i += 1
        return t

    def error(self, message: str, tok: Optional[Token] = None) -> ParseError:
        t = tok or self.tok
        return ParseError(message, t.line, t.col, self.filename)

    def expect(self, text: str) -> Token:
        if not self.at(text):
            found = "end of input" if self.tok.kind == "EOF" else repr(self.tok.text)
            raise self.error(f"expected {text!r}, found {found}")
        return self.advance()

    def ident(self, what: str = "identifier") -> Token:
        if self.tok.kind != "IDENT":
            found = "end of input" if self.tok.kind == "EOF" else repr(self.tok.text)
            raise self.error(f"expected {what}, found {found}")
        return self.advance()

    def pos(self) -> tuple[int, int]:
        return (self.tok.line, self.tok.col)

    def attempt(self, fn: Callable):
        """Run ``fn``; on a parse error rewind and return None."""
        start, scope = self.i, list(self.scope)
        try:
            return fn()
        except (ParseError, _Backtrack):
            self.i, self.scope = start, scope
            return None

    def finish(self) -> None:
        if self.tok.kind != "EOF":
            raise self.error(f"unexpected {self.tok.text!r}")

    # -- spec files --

    def parse_spec(self) -> d.SpecFile:
        decls = []
        if self.tok.kind == "EOF" or not self.at("dim"):
            raise self.error("missing dimension declaration")
        while self.tok.kind != "EOF":
            x = self.parse_decl()
            decls.append(x)
            self.sym.record(x)
        return d.SpecFile(tuple(decls), self.filename)

    def _declare(self, tok: Token) -> str:
        name = tok.text
        if name in SENTENCE_KEYWORDS or name in DECL_KEYWORDS:
            raise self.error(f"{name!r} is a reserved word", tok)
        if name in BUILTIN_CONSTANTS or name in BUILTIN_FUNCTIONS:
            raise self.error(f"{name!r} is a builtin name", tok)
        if self.sym.sort_of(name) is not None:
            raise self.error(f"{name!r} is already declared as a {self.sym.sort_of(name)}", tok)
        return name

    def _names(self) -> tuple[str, ...]:
        names = [self._declare(self.ident("a name"))]
        while self.tok.kind == "IDENT" and self.tok.text not in DECL_KEYWORDS:
            names.append(self._declare(self.advance()))
        if len(set(names)) != len(names):
            raise self.error("duplicate name in declaration")
        return tuple(names)

    def parse_decl(self):
        p = self.pos()
        kw = self.ident("a declaration keyword")
        k = kw.text
        if k == "dim":
            if self.sym.dim is not None:
                raise self.error("duplicate dimension declaration", kw)
            t = self.tok
            if t.kind != "NUM" or not re.fullmatch(r"\d+", t.text) or int(t.text) < 1:
                raise self.error("dimension must be a positive integer")
            self.advance()
            return d.DimDecl(int(t.text), pos=p)
        if k in ("gate", "vector", "scalar"):
            name = self._declare(self.ident("a name"))
            self.expect("=")
            expr = self.parse_expr()
            cls = {"gate": d.GateDecl, "vector": d.VectorDecl, "scalar": d.ScalarDecl}[k]
            return cls(name, expr, pos=p)
        if k == "measurement":
            name = self._declare(self.ident("a name"))
            self.expect("=")
            return d.MeasDecl(name, self._generator_list("span"), pos=p)
        if k == "param":
            names = self._names()
            self.expect(":")
            kind = self.ident("a parameter kind")
            if kind.text not in PARAM_KINDS:
                raise self.error(f"unknown parameter kind {kind.text!r}", kind)
            if len(names) != 2:
                raise self.error("a unit2 parameter declares exactly two names", kw)
            return d.ParamDecl(names, kind.text, pos=p)
        if k == "closed":
            self.expect("prop")
            return d.PropDecl(self._names(), True, pos=p)
        if k == "prop":
            return d.PropDecl(self._names(), False, pos=p)
        if k == "action":
            name = self._declare(self.ident("a name"))
            self.expect("=")
            return d.ActionDecl(name, self.parse_action(), pos=p)
        if k == "valuation":
            return self._valuation(p)
        if k == "axiom":
            s = self.parse_sentence()
            return d.AxiomDecl(s, pos=p)
        if k == "query":
            return d.QueryDecl(self.parse_query_body(), pos=p)
        if k == "config":
            key = self.ident("a config key")
            if key.text not in d.CONFIG_KEYS:
                raise self.error(f"unknown config key {key.text!r}", key)
            self.expect("=")
            t = self.tok
            if t.kind != "NUM" or t.value.imag != 0 or t.value.real <= 0:
                raise self.error("config value must be a positive real number")
            self.advance()
            return d.ConfigDecl(key.text, t.value.real, pos=p)
        raise self.error(f"unknown declaration {k!r}", kw)

    def _generator_list(self, head: str) -> tuple:
        self.expect(head)
        self.expect("(")
        items = []
        if not self.at(")"):
            items.append(self.parse_expr())
            while self.at(","):
                self.advance()
                items.append(self.parse_expr())
        self.expect(")")
        return tuple(items)

    def _valuation(self, p):
        tok = self.ident("a proposition")
        if tok.text not in self.sym.props:
            raise self._name_error(tok, "proposition")
        self.expect("=")
        if self.at("all") or self.at("empty"):
            return d.ValuationDecl(tok.text, whole=self.advance().text, pos=p)
        points: tuple = ()
        span = None
        if self.at("points"):
            points = self._generator_list("points")
            if self.at("+"):
                self.advance()
                span = self._generator_list("span")
        elif self.at("span"):
            span = self._generator_list("span")
        else:
            raise self.error("expected all, empty, points(...) or span(...)")
        return d.ValuationDecl(tok.text, None, points, span, pos=p)

    # -- model expressions --

    def parse_expr(self):
        return self._e_add()

    def _e_add(self):
        left = self._e_mul()
        while self.at("+") or self.at("-"):
            p = self.pos()
            op = self.advance().text
            left = d.EBin(op, left, self._e_mul(), pos=p)
        return left

    def _e_mul(self):
        left = self._e_kron()
        while self.at("*") or self.at("/"):
            p = self.pos()
            op = self.advance().text
            left = d.EBin(op, left, self._e_kron(), pos=p)
        return left

    def _e_kron(self):
        left = self._e_unary()
        while self.at("(x)"):
            p = self.pos()
            self.advance()
            left = d.EBin("(x)", left, self._e_unary(), pos=p)
        return left

    def _e_unary(self):
        if self.at("-"):
            p = self.pos()
            self.advance()
            return d.ENeg(self._e_unary(), pos=p)
        return self._e_power()

    def _e_power(self):
        base = self._e_atom()
        if self.at("^"):
            p = self.pos()
            self.advance()
            return d.EBin("^", base, self._e_power(), pos=p)
        return base

    def _e_atom(self):
        t = self.tok
        p = self.pos()
        if t.kind == "NUM":
            self.advance()
            return d.ENum(t.value, pos=p)
        if self.at("(x)"):  # "(x)" read as a parenthesised name
            self.advance()
            return self._e_name(Token("IDENT", "x", t.line, t.col + 1), p)
        if self.at("("):
            self.advance()
            items = [self.parse_expr()]
            while self.at(","):
                self.advance()
                items.append(self.parse_expr())
            self.expect(")")
            return items[0] if len(items) == 1 else d.EVec(tuple(items), pos=p)
        if self.at("["):
            self.advance()
            rows = [self._e_row()]
            while self.at(","):
                self.advance()
                rows.append(self._e_row())
            self.expect("]")
            if len({len(r) for r in rows}) != 1:
                raise self.error("matrix rows have different lengths", t)
            return d.EMat(tuple(rows), pos=p)
        if t.kind == "IDENT":
            self.advance()
            if t.text == "ket":
                return d.EKet(self._bits(), pos=p)
            if self.at("(") and t.text in BUILTIN_FUNCTIONS:
                self.advance()
                args = [self.parse_expr()]
                while self.at(","):
                    self.advance()
                    args.append(self.parse_expr())
                self.expect(")")
                return d.ECall(t.text, tuple(args), pos=p)
            return self._e_name(t, p)
        raise self.error("expected an expression")

    def _e_name(self, t: Token, p):
        if t.text in BUILTIN_FUNCTIONS:
            raise self.error(f"builtin {t.text!r} needs arguments", t)
        ok = t.text in BUILTIN_CONSTANTS or self.sym.sort_of(t.text) in (
            "gate", "vector", "scalar", "parameter")
        if not ok:
            raise self._name_error(t, "value")
        return d.EName(t.text, pos=p)

    def _e_row(self):
        self.expect("[")
        row = [self.parse_expr()]
        while self.at(","):
            self.advance()
            row.append(self.parse_expr())
        self.expect("]")
        return tuple(row)

    def _bits(self) -> str:
        self.expect("(")
        t = self.tok
        if t.kind != "NUM" or not re.fullmatch(r"[01]+", t.text):
            raise self.error("ket label must be a bit string")
        self.advance()
        self.expect(")")
        return t.text

    # -- names --

    def _name_error(self, tok: Token, expected: str) -> ParseError:
        sort = self.sym.sort_of(tok.text)
        if sort is None:
            if tok.text in self.scope:
                return self.error(f"sort error: variable {tok.text!r} used as a {expected}", tok)
            if expected in ("vector term", "term"):
                return self.error(f"unbound variable {tok.text!r}", tok)
            return self.error(f"unknown symbol {tok.text!r}", tok)
        return self.error(f"sort error: {tok.text!r} is a {sort}, expected a {expected}", tok)

    # -- actions --

    def parse_action(self):
        left = self._a_seq()
        if self.at("+"):
            p = self.pos()
            self.advance()
            return sx.Choice(left, self.parse_action(), pos=p)
        return left

    def _a_seq(self):
        left = self._a_postfix()
        if self.at(";"):
            p = self.pos()
            self.advance()
            return sx.Seq(left, self._a_seq(), pos=p)
        return left

    def _a_postfix(self):
        a = self._a_atom()
        while self.at("*"):
            p = self.pos()
            self.advance()
            a = sx.Star(a, pos=p)
        return a

    def _a_atom(self):
        p = self.pos()
        if self.at("("):
            self.advance()
            a = self.parse_action()
            self.expect(")")
            return a
        t = self.ident("an action")
        if t.text in self.sym.gates:
            return sx.GateAct(t.text, pos=p)
        if t.text in self.sym.measurements:
            return sx.MeasAct(t.text, pos=p)
        if t.text in self.sym.actions:
            return self.sym.actions[t.text]
        raise self._name_error(t, "gate, measurement or action")

    # -- sentences --

    _LEVELS = (("=>", sx.Implies), ("~>", sx.sasaki), ("\\/", sx.disj), ("(+)", sx.qdisj),
               ("/\\", sx.And))

    def parse_sentence(self):
        return self._s_infix(0)

    def _s_infix(self, k: int):
        if k == len(self._LEVELS):
            return self._s_prefix()
        p = self.pos()
        left = self._s_infix(k + 1)
        op, ctor = self._LEVELS[k]
        if self.at(op):
            self.advance()
            right = self._s_infix(k)
            node = ctor(left, right)
            return _with_pos(node, p)
        return left

    def _s_prefix(self):
        p = self.pos()
        if self.at("!"):
            self.advance()
            return sx.Not(self._s_prefix(), pos=p)
        if self.at("~"):
            self.advance()
            return sx.QNot(self._s_prefix(), pos=p)
        if self.at("["):
            self.advance()
            a = self.parse_action()
            self.expect("]")
            return sx.Nec(a, self._s_prefix(), pos=p)
        if self.at("<"):
            self.advance()
            a = self.parse_action()
            self.expect(">")
            return _with_pos(sx.diamond(a, self._s_prefix()), p)
        if self.at("@"):
            self.advance()
            t = self.parse_term()
            return sx.At(t, self._s_prefix(), pos=p)
        if self.tok.kind == "IDENT" and self.tok.text in ("store", "forall", "exists"):
            return self._s_binder()
        return self._s_atom()

    def _bound_names(self) -> list[str]:
        names = [self.ident("a variable").text]
        while self.tok.kind == "IDENT":
            names.append(self.advance().text)
        for n in names:
            if n in SENTENCE_KEYWORDS or self.sym.sort_of(n) is not None:
                raise self.error(f"cannot bind {n!r}: name is already a {self.sym.sort_of(n) or 'keyword'}")
        if len(set(names)) != len(names):
            raise self.error("duplicate bound variable")
        return names

    def _s_binder(self):
        p = self.pos()
        kw = self.advance().text
        if kw == "store":
            names = [self.ident("a variable").text]
            if names[0] in SENTENCE_KEYWORDS or self.sym.sort_of(names[0]) is not None:
                raise self.error(f"cannot bind {names[0]!r}")
        else:
            names = self._bound_names()
        self.expect(".")
        saved = len(self.scope)
        self.scope.extend(names)
        try:
            body = self.parse_sentence()
        finally:
            del self.scope[saved:]
        if kw == "store":
            return sx.Store(names[0], body, pos=p)
        if kw == "forall":
            return sx.Forall(tuple(names), body, pos=p)
        return _with_pos(sx.exists(tuple(names), body), p)

    def _s_atom(self):
        p = self.pos()
        if self.at("("):
            self.advance()
            s = self.parse_sentence()
            self.expect(")")
            return s
        t = self.ident("a sentence")
        if t.text == "until":
            self.expect("[")
            a = self.parse_action()
            self.expect("]")
            self.expect("(")
            holds = self.parse_sentence()
            self.expect(",")
            meanwhile = self.parse_sentence()
            self.expect(")")
            return _with_pos(sx.until(a, holds, meanwhile, frozenset(self.scope)), p)
        if t.text == "nom":
            self.expect("(")
            term = self.parse_term()
            self.expect(")")
            return sx.Nominal(term, pos=p)
        if t.text in self.sym.props:
            return sx.Prop(t.text, pos=p)
        raise self._name_error(t, "proposition")

    # -- terms --

    def parse_term(self):
        """A vector term."""
        p = self.pos()
        left = self._v_factor()
        if self.at("+"):
            self.advance()
            return sx.VAdd(left, self.parse_term(), pos=p)
        return left

    def _v_factor(self):
        p = self.pos()

        def scaled():
            s = self._s_atom_term()
            if not self.at("*"):
                raise _Backtrack()
            self.advance()
            return sx.Scale(s, self._v_factor(), pos=p)

        out = self.attempt(scaled)
        if out is not None:
            return out
        return self._v_atom()

    def _v_atom(self):
        p = self.pos()
        t = self.tok
        if t.kind == "NUM":
            if t.value == 0 and re.fullmatch(r"0+(\.0*)?", t.text):
                self.advance()
                return sx.Zero(pos=p)
            raise self.error("a number is not a vector (did you mean c * v?)")
        if self.at("(x)"):
            self.advance()
            return self._v_name(Token("IDENT", "x", t.line, t.col + 1), p)
        if self.at("("):
            lit = self.attempt(self._v_literal)
            if lit is not None:
                return lit
            self.advance()
            inner = self.parse_term()
            self.expect(")")
            return inner
        if t.kind == "IDENT":
            self.advance()
            if t.text == "ket":
                bits = self._bits()
                if self.sym.dim is not None and 2 ** len(bits) != self.sym.dim:
                    raise self.error(f"ket({bits}) has dimension {2 ** len(bits)}, "
                                     f"expected {self.sym.dim}", t)
                return sx.Ket(bits, pos=p)
            if t.text in self.sym.gates or t.text in self.sym.measurements:
                self.expect("(")
                arg = self.parse_term()
                self.expect(")")
                if t.text in self.sym.gates:
                    return sx.GateApp(t.text, arg, pos=p)
                return sx.MeasApp(t.text, arg, pos=p)
            return self._v_name(t, p)
        raise self.error("expected a vector term")

    def _v_name(self, t: Token, p):
        if t.text in self.scope:
            return sx.Var(t.text, pos=p)
        if t.text in self.sym.vectors:
            return sx.VConst(t.text, pos=p)
        raise self._name_error(t, "vector term")

    def _v_literal(self):
        p = self.pos()
        self.expect("(")
        entries = [self._number()]
        while self.at(","):
            self.advance()
            entries.append(self._number())
        self.expect(")")
        if len(entries) < 2:
            raise _Backtrack()
        if self.sym.dim is not None and len(entries) != self.sym.dim:
            raise self.error(f"vector literal has {len(entries)} entries, expected {self.sym.dim}")
        return sx.VLit(tuple(entries), pos=p)

    def _number(self) -> complex:
        t = self.tok
        if t.kind != "NUM":
            raise self.error("expected a number")
        self.advance()
        return t.value

    def _s_atom_term(self):
        """Scalar atom: number, scalar constant, <v, v>, or a parenthesised scalar."""
        p = self.pos()
        t = self.tok
        if t.kind == "NUM":
            self.advance()
            return sx.SLit(t.value, pos=p)
        if t.kind == "IDENT" and t.text in self.sym.scalars and t.text not in self.scope:
            self.advance()
            return sx.SConst(t.text, pos=p)
        if self.at("<"):
            self.advance()
            left = self.parse_term()
            self.expect(",")
            right = self.parse_term()
            self.expect(">")
            return sx.Inner(left, right, pos=p)
        if self.at("("):
            self.advance()
            s = self._s_term()
            self.expect(")")
            return s
        raise self.error("expected a scalar")

    def _s_term(self):
        p = self.pos()
        left = self._s_prod()
        if self.at("+"):
            self.advance()
            return sx.SAdd(left, self._s_term(), pos=p)
        return left

    def _s_prod(self):
        p = self.pos()
        left = self._s_atom_term()
        if self.at("*"):
            self.advance()
            return sx.SMul(left, self._s_prod(), pos=p)
        return left

    # -- queries --

    def parse_query_body(self) -> d.Query:
        p = self.pos()
        anchor = None
        if self.at("at"):
            self.advance()
            anchor = self.parse_term()
            self.expect(":")
        if not self.at("exists"):
            raise self.error("a query has the form: exists x ... . E")
        self.advance()
        names = self._bound_names()
        self.expect(".")
        self.scope.extend(names)
        try:
            body = self.parse_sentence()
        finally:
            del self.scope[-len(names):]
        parts = _conjuncts(body)
        for part in parts:
            if not sx.is_basic(part):
                raise ParseError("query body must be a conjunction of basic sentences",
                                 *(part.pos or p), self.filename)
        return d.Query(anchor, tuple(names), tuple(parts), pos=p)


def _conjuncts(s) -> list:
    if isinstance(s, sx.And):
        return _conjuncts(s.left) + _conjuncts(s.right)
    return [s]


def _with_pos(node, p):
    """Attach a position to a freshly built (frozen) node."""
    object.__setattr__(node, "pos", p)
    return node


# --- entry points ------------------------------------------------------------


def parse(text: str, filename: str = "<input>") -> d.SpecFile:
    parser = Parser(text, filename)
    return parser.parse_spec()


def parse_file(path: str) -> d.SpecFile:
    with open(path, encoding="utf-8") as fh:
        return parse(fh.read(), path)


def _fragment(text: str, spec: Optional[d.SpecFile], symbols: Optional[Symbols],
              filename: str) -> Parser:
    if symbols is None:
        symbols = Symbols.of_spec(spec) if spec is not None else Symbols()
    return Parser(text, filename, symbols)


def parse_sentence(text: str, spec: Optional[d.SpecFile] = None, *,
                   symbols: Optional[Symbols] = None, variables=(),
                   filename: str = "<sentence>"):
    p = _fragment(text, spec, symbols, filename)
    p.scope.extend(variables)
    s = p.parse_sentence()
    p.finish()
    return s


def parse_term(text: str, spec: Optional[d.SpecFile] = None, *,
               symbols: Optional[Symbols] = None, variables=(), filename: str = "<term>"):
    p = _fragment(text, spec, symbols, filename)
    p.scope.extend(variables)
    t = p.parse_term()
    p.finish()
    return t


def parse_action(text: str, spec: Optional[d.SpecFile] = None, *,
                 symbols: Optional[Symbols] = None, filename: str = "<action>"):
    p = _fragment(text, spec, symbols, filename)
    a = p.parse_action()
    p.finish()
    return a


def parse_query(text: str, spec: Optional[d.SpecFile] = None, *,
                symbols: Optional[Symbols] = None, filename: str = "<query>") -> d.Query:
    p = _fragment(text, spec, symbols, filename)
    q = p.parse_query_body()
    p.finish()
    return q
