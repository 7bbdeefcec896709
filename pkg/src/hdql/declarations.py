"""AST for spec files: model-definition expressions and top-level declarations."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union

from .syntax import Action, Pos, Sentence, Term


def _pos():
    return field(default=None, compare=False, repr=False)


# --- model-definition expressions (numeric, evaluated once) -----------------


@dataclass(frozen=True)
class ENum:
    value: complex
    pos: Pos = _pos()


@dataclass(frozen=True)
class EName:
    name: str
    pos: Pos = _pos()


@dataclass(frozen=True)
class ECall:
    func: str
    args: tuple["Expr", ...]
    pos: Pos = _pos()


@dataclass(frozen=True)
class EBin:
    op: str  # one of + - * / (x) ^
    left: "Expr"
    right: "Expr"
    pos: Pos = _pos()


@dataclass(frozen=True)
class ENeg:
    body: "Expr"
    pos: Pos = _pos()


@dataclass(frozen=True)
class EKet:
    bits: str
    pos: Pos = _pos()


@dataclass(frozen=True)
class EVec:
    entries: tuple["Expr", ...]
    pos: Pos = _pos()


@dataclass(frozen=True)
class EMat:
    rows: tuple[tuple["Expr", ...], ...]
    pos: Pos = _pos()


Expr = Union[ENum, EName, ECall, EBin, ENeg, EKet, EVec, EMat]

# --- declarations ------------------------------------------------------------


@dataclass(frozen=True)
class DimDecl:
    dim: int
    pos: Pos = _pos()


@dataclass(frozen=True)
class GateDecl:
    name: str
    expr: Expr
    pos: Pos = _pos()


@dataclass(frozen=True)
class MeasDecl:
    name: str
    generators: tuple[Expr, ...]
    pos: Pos = _pos()


@dataclass(frozen=True)
class VectorDecl:
    name: str
    expr: Expr
    pos: Pos = _pos()


@dataclass(frozen=True)
class ScalarDecl:
    name: str
    expr: Expr
    pos: Pos = _pos()


@dataclass(frozen=True)
class ParamDecl:
    names: tuple[str, ...]
    kind: str  # "unit2": a uniformly sampled unit vector of C^2
    pos: Pos = _pos()


@dataclass(frozen=True)
class PropDecl:
    names: tuple[str, ...]
    closed: bool = False
    pos: Pos = _pos()


@dataclass(frozen=True)
class ActionDecl:
    name: str
    action: Action
    pos: Pos = _pos()


@dataclass(frozen=True)
class ValuationDecl:
    """Explicit extent for a prop: ``all``, ``empty``, or points and/or a span."""

    prop: str
    whole: Optional[str] = None  # "all" | "empty"
    points: tuple[Expr, ...] = ()
    span: Optional[tuple[Expr, ...]] = None
    pos: Pos = _pos()


@dataclass(frozen=True)
class AxiomDecl:
    sentence: Sentence
    pos: Pos = _pos()


@dataclass(frozen=True)
class Query:
    """exists X . /\\E evaluated at ``anchor``; every body sentence is basic."""

    anchor: Optional[Term]
    vars: tuple[str, ...]
    body: tuple[Sentence, ...]
    pos: Pos = _pos()


@dataclass(frozen=True)
class QueryDecl:
    query: Query
    pos: Pos = _pos()


@dataclass(frozen=True)
class ConfigDecl:
    key: str
    value: float
    pos: Pos = _pos()


Decl = Union[DimDecl, GateDecl, MeasDecl, VectorDecl, ScalarDecl, ParamDecl, PropDecl,
             ActionDecl, ValuationDecl, AxiomDecl, QueryDecl, ConfigDecl]

CONFIG_KEYS = ("epsilon", "star_budget", "term_depth", "samples")


@dataclass(frozen=True)
class SpecFile:
    decls: tuple[Decl, ...]
    filename: str = field(default="<input>", compare=False)

    @property
    def dim(self) -> int:
        return next(d.dim for d in self.decls if isinstance(d, DimDecl))

    @property
    def axioms(self) -> list[Sentence]:
        return [d.sentence for d in self.decls if isinstance(d, AxiomDecl)]

    @property
    def queries(self) -> list[Query]:
        return [d.query for d in self.decls if isinstance(d, QueryDecl)]

    @property
    def config(self) -> dict[str, float]:
        return {d.key: d.value for d in self.decls if isinstance(d, ConfigDecl)}

    def of_type(self, cls) -> list:
        return [d for d in self.decls if isinstance(d, cls)]
