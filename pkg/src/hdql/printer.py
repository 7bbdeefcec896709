"""Canonical text form for terms, actions, sentences and spec files.

The printer re-sugars abbreviation patterns (possibility, disjunction,
existentials, the Sasaki hook, quantum disjunction) and emits the fewest
parentheses that still reparse to the same tree.
"""

from __future__ import annotations

import math

from . import declarations as d
from .syntax import (And, At, Choice, Forall, GateAct, GateApp, Implies, Inner, Ket, MeasAct,
                     MeasApp, Nec, Nominal, Not, Prop, QNot, SAdd, Scale, SConst, Seq, SLit,
                     SMul, Star, Store, VAdd, VConst, Var, VLit, Zero, match_diamond, match_disj,
                     match_exists, match_qdisj, match_sasaki)


def format_real(x: float) -> str:
    x = float(x)
    if math.isnan(x) or math.isinf(x):
        raise ValueError(f"cannot print non-finite number {x}")
    if x == 0:
        x = 0.0  # drop the sign of -0.0
    return repr(x)


def format_complex(z: complex) -> str:
    z = complex(z)
    re, im = z.real, z.imag
    if im == 0:
        return format_real(re)
    if re == 0:
        return format_real(im) + "i"
    sign = "+" if im > 0 else "-"
    return f"{format_real(re)}{sign}{format_real(abs(im))}i"


def _wrap(text: str, needed: bool) -> str:
    return f"({text})" if needed else text


# --- terms -------------------------------------------------------------------

_T_SUM, _T_SCALE, _T_ATOM = 1, 2, 3


def print_term(t, ctx: int = 0) -> str:
    if isinstance(t, (Var, VConst)):
        return t.name
    if isinstance(t, Ket):
        return f"ket({t.bits})"
    if isinstance(t, Zero):
        return "0"
    if isinstance(t, VLit):
        return "(" + ", ".join(format_complex(e) for e in t.entries) + ")"
    if isinstance(t, GateApp):
        return f"{t.gate}({print_term(t.arg)})"
    if isinstance(t, MeasApp):
        return f"{t.meas}({print_term(t.arg)})"
    if isinstance(t, VAdd):
        text = f"{print_term(t.left, _T_SCALE)} + {print_term(t.right, _T_SUM)}"
        return _wrap(text, ctx > _T_SUM)
    if isinstance(t, Scale):
        text = f"{print_scalar(t.scalar, _T_ATOM)} * {print_term(t.vector, _T_SCALE)}"
        return _wrap(text, ctx > _T_SCALE)
    return print_scalar(t, ctx)


def print_scalar(t, ctx: int = 0) -> str:
    if isinstance(t, SConst):
        return t.name
    if isinstance(t, SLit):
        return format_complex(t.value)
    if isinstance(t, Inner):
        return f"<{print_term(t.left)}, {print_term(t.right)}>"
    if isinstance(t, SAdd):
        text = f"{print_scalar(t.left, _T_SCALE)} + {print_scalar(t.right, _T_SUM)}"
        return _wrap(text, ctx > _T_SUM)
    if isinstance(t, SMul):
        text = f"{print_scalar(t.left, _T_ATOM)} * {print_scalar(t.right, _T_SCALE)}"
        return _wrap(text, ctx > _T_SCALE)
    raise TypeError(f"not a term: {t!r}")


# --- actions -----------------------------------------------------------------

_A_CHOICE, _A_SEQ, _A_STAR = 1, 2, 3


def print_action(a, ctx: int = 0) -> str:
    if isinstance(a, (GateAct, MeasAct)):
        return a.name
    if isinstance(a, Choice):
        text = f"{print_action(a.left, _A_SEQ)} + {print_action(a.right, _A_CHOICE)}"
        return _wrap(text, ctx > _A_CHOICE)
    if isinstance(a, Seq):
        text = f"{print_action(a.first, _A_STAR)} ; {print_action(a.second, _A_SEQ)}"
        return _wrap(text, ctx > _A_SEQ)
    if isinstance(a, Star):
        return print_action(a.body, _A_STAR) + "*"
    raise TypeError(f"not an action: {a!r}")


# --- sentences ---------------------------------------------------------------

# binding strength, weakest first; prefix forms and atoms bind tightest
_S_BINDER, _S_IMPL, _S_HOOK, _S_OR, _S_QOR, _S_AND, _S_PREFIX = range(7)

_INFIX = {
    "=>": _S_IMPL,
    "~>": _S_HOOK,
    "\\/": _S_OR,
    "(+)": _S_QOR,
    "/\\": _S_AND,
}


def _anchor(t) -> str:
    simple = isinstance(t, (Var, VConst, Ket, Zero, VLit, GateApp, MeasApp))
    return print_term(t) if simple else f"({print_term(t)})"


def _infix(op: str, left, right, ctx: int, last: bool) -> str:
    level = _INFIX[op]
    text = f"{_sent(left, level + 1, False)} {op} {_sent(right, level, True if ctx > level else last)}"
    return _wrap(text, ctx > level)


def _prefix(head: str, body, last: bool) -> str:
    return head + _sent(body, _S_PREFIX, last)


def _binder(head: str, body, ctx: int, last: bool) -> str:
    text = f"{head} . {_sent(body, _S_BINDER, True)}"
    return _wrap(text, ctx > _S_BINDER and not last)


def _sent(s, ctx: int, last: bool) -> str:
    hook = match_sasaki(s)
    if hook is not None:
        return _infix("~>", *hook, ctx, last)
    qor = match_qdisj(s)
    if qor is not None:
        return _infix("(+)", *qor, ctx, last)
    dia = match_diamond(s)
    if dia is not None:
        return _prefix(f"<{print_action(dia[0])}> ", dia[1], last)
    ex = match_exists(s)
    if ex is not None:
        return _binder("exists " + " ".join(ex[0]), ex[1], ctx, last)
    orr = match_disj(s)
    if orr is not None:
        return _infix("\\/", *orr, ctx, last)

    if isinstance(s, Prop):
        return s.name
    if isinstance(s, Nominal):
        return f"nom({print_term(s.term)})"
    if isinstance(s, And):
        return _infix("/\\", s.left, s.right, ctx, last)
    if isinstance(s, Implies):
        return _infix("=>", s.left, s.right, ctx, last)
    if isinstance(s, Not):
        return _prefix("!", s.body, last)
    if isinstance(s, QNot):
        return _prefix("~", s.body, last)
    if isinstance(s, Nec):
        return _prefix(f"[{print_action(s.action)}] ", s.body, last)
    if isinstance(s, At):
        return _prefix(f"@ {_anchor(s.term)} ", s.body, last)
    if isinstance(s, Store):
        return _binder(f"store {s.var}", s.body, ctx, last)
    if isinstance(s, Forall):
        return _binder("forall " + " ".join(s.vars), s.body, ctx, last)
    raise TypeError(f"not a sentence: {s!r}")


def print_sentence(s) -> str:
    return _sent(s, _S_BINDER, True)


# --- model expressions -------------------------------------------------------

_E_ADD, _E_MUL, _E_KRON, _E_NEG, _E_POW, _E_ATOM = 1, 2, 3, 4, 5, 6
_E_LEVEL = {"+": _E_ADD, "-": _E_ADD, "*": _E_MUL, "/": _E_MUL, "(x)": _E_KRON, "^": _E_POW}


def print_expr(e, ctx: int = 0) -> str:
    if isinstance(e, d.ENum):
        return format_complex(e.value)
    if isinstance(e, d.EName):
        return e.name
    if isinstance(e, d.EKet):
        return f"ket({e.bits})"
    if isinstance(e, d.ECall):
        return f"{e.func}(" + ", ".join(print_expr(a) for a in e.args) + ")"
    if isinstance(e, d.EVec):
        return "(" + ", ".join(print_expr(x) for x in e.entries) + ")"
    if isinstance(e, d.EMat):
        rows = ("[" + ", ".join(print_expr(x) for x in row) + "]" for row in e.rows)
        return "[" + ", ".join(rows) + "]"
    if isinstance(e, d.ENeg):
        body = print_expr(e.body, _E_NEG)
        if body[0].isdigit() or body[0] == ".":
            body = f"({body})"  # keep "-(1.0)" apart from the literal -1.0
        return _wrap("-" + body, ctx > _E_NEG)
    if isinstance(e, d.EBin):
        level = _E_LEVEL[e.op]
        if e.op == "^":  # right associative
            lctx, rctx = level + 1, level
        else:
            lctx, rctx = level, level + 1
        text = f"{print_expr(e.left, lctx)} {e.op} {print_expr(e.right, rctx)}"
        return _wrap(text, ctx > level)
    raise TypeError(f"not an expression: {e!r}")


# --- spec files --------------------------------------------------------------


def _num(x: float) -> str:
    x = float(x)
    return str(int(x)) if x.is_integer() and abs(x) < 2**53 else format_real(x)


def print_query(q: d.Query) -> str:
    head = "" if q.anchor is None else f"at {print_term(q.anchor)} : "
    body = " /\\ ".join(_sent(b, _S_AND + 1, False) for b in q.body)
    return f"{head}exists {' '.join(q.vars)} . {body}"


def print_decl(x) -> str:
    if isinstance(x, d.DimDecl):
        return f"dim {x.dim}"
    if isinstance(x, d.GateDecl):
        return f"gate {x.name} = {print_expr(x.expr)}"
    if isinstance(x, d.MeasDecl):
        return f"measurement {x.name} = span(" + ", ".join(print_expr(g) for g in x.generators) + ")"
    if isinstance(x, d.VectorDecl):
        return f"vector {x.name} = {print_expr(x.expr)}"
    if isinstance(x, d.ScalarDecl):
        return f"scalar {x.name} = {print_expr(x.expr)}"
    if isinstance(x, d.ParamDecl):
        return f"param {' '.join(x.names)} : {x.kind}"
    if isinstance(x, d.PropDecl):
        return ("closed prop " if x.closed else "prop ") + " ".join(x.names)
    if isinstance(x, d.ActionDecl):
        return f"action {x.name} = {print_action(x.action)}"
    if isinstance(x, d.ValuationDecl):
        if x.whole is not None:
            rhs = x.whole
        else:
            parts = []
            if x.points:
                parts.append("points(" + ", ".join(print_expr(p) for p in x.points) + ")")
            if x.span is not None:
                parts.append("span(" + ", ".join(print_expr(p) for p in x.span) + ")")
            rhs = " + ".join(parts)
        return f"valuation {x.prop} = {rhs}"
    if isinstance(x, d.AxiomDecl):
        return f"axiom {print_sentence(x.sentence)}"
    if isinstance(x, d.QueryDecl):
        return f"query {print_query(x.query)}"
    if isinstance(x, d.ConfigDecl):
        return f"config {x.key} = {_num(x.value)}"
    raise TypeError(f"not a declaration: {x!r}")


def print_spec(spec: d.SpecFile) -> str:
    return "".join(print_decl(x) + "\n" for x in spec.decls)


def to_text(obj) -> str:
    """Print any AST node, dispatching on its kind."""
    if isinstance(obj, d.SpecFile):
        return print_spec(obj)
    if isinstance(obj, d.Query):
        return print_query(obj)
    if isinstance(obj, (GateAct, MeasAct, Seq, Choice, Star)):
        return print_action(obj)
    if isinstance(obj, (Var, VConst, Ket, VLit, Zero, GateApp, MeasApp, VAdd, Scale,
                        SConst, SLit, SAdd, SMul, Inner)):
        return print_term(obj)
    if isinstance(obj, (d.ENum, d.EName, d.ECall, d.EBin, d.ENeg, d.EKet, d.EVec, d.EMat)):
        return print_expr(obj)
    return print_sentence(obj)
