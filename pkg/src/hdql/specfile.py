"""Turn a parsed spec file into a concrete model, a Horn program and queries."""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import declarations as d
from . import hilbert as hb
from .errors import ModelError
from .extent import Extent
from .model import Model, literal_terms
from .parser import Symbols

_S = 1 / math.sqrt(2)
BUILTINS = {
    "H": np.array([[_S, _S], [_S, -_S]], dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
    "S": np.array([[1, 0], [0, 1j]], dtype=complex),
    "T": np.array([[1, 0], [0, cmath.exp(1j * math.pi / 4)]], dtype=complex),
    "CNOT": np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex),
    "SWAP": np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex),
    "pi": complex(math.pi),
}


@dataclass
class Config:
    epsilon: float = hb.DEFAULT_EPS
    star_budget: int = 64
    term_depth: int = 3
    samples: int = 100

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")
        if self.star_budget < 1 or self.term_depth < 0 or self.samples < 1:
            raise ValueError("budgets must be at least 1")

    @classmethod
    def from_spec(cls, spec: d.SpecFile, **overrides) -> "Config":
        cfg = spec.config
        kw = dict(epsilon=cfg.get("epsilon", hb.DEFAULT_EPS),
                  star_budget=int(cfg.get("star_budget", 64)),
                  term_depth=int(cfg.get("term_depth", 3)),
                  samples=int(cfg.get("samples", 100)))
        kw.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**kw)


def _fail(e, message: str, filename: str) -> ModelError:
    if getattr(e, "pos", None):
        line, col = e.pos
        return ModelError(f"{filename}:{line}:{col}: {message}")
    return ModelError(f"{filename}: {message}")


class _ExprEval:
    def __init__(self, env: dict, filename: str):
        self.env = env
        self.filename = filename

    def __call__(self, e):
        try:
            return self._eval(e)
        except ModelError:
            raise
        except (ValueError, TypeError, ArithmeticError, np.linalg.LinAlgError) as exc:
            raise _fail(e, str(exc), self.filename) from None

    def _scalar(self, e) -> complex:
        v = self(e)
        if isinstance(v, np.ndarray):
            raise _fail(e, "expected a scalar", self.filename)
        return v

    def _eval(self, e):
        if isinstance(e, d.ENum):
            return complex(e.value)
        if isinstance(e, d.EName):
            if e.name in self.env:
                return self.env[e.name]
            if e.name in BUILTINS:
                return BUILTINS[e.name]
            raise _fail(e, f"unknown name {e.name!r}", self.filename)
        if isinstance(e, d.EKet):
            return hb.ket(e.bits)
        if isinstance(e, d.EVec):
            return np.array([self._scalar(x) for x in e.entries], dtype=complex)
        if isinstance(e, d.EMat):
            return np.array([[self._scalar(x) for x in row] for row in e.rows], dtype=complex)
        if isinstance(e, d.ENeg):
            return -self(e.body)
        if isinstance(e, d.ECall):
            return self._call(e)
        if isinstance(e, d.EBin):
            a, b = self(e.left), self(e.right)
            return self._binary(e, a, b)
        raise TypeError(f"not an expression: {e!r}")

    def _call(self, e: d.ECall):
        args = [self(a) for a in e.args]
        if len(args) != 1:
            raise _fail(e, f"{e.func} takes one argument", self.filename)
        x = args[0]
        if e.func == "I":
            n = x.real if not isinstance(x, np.ndarray) else None
            if n is None or x.imag != 0 or n < 1 or not float(n).is_integer():
                raise _fail(e, "I(n) needs a positive integer", self.filename)
            return np.eye(int(n), dtype=complex)
        if e.func in ("adj", "conj"):
            if not isinstance(x, np.ndarray):
                return x.conjugate()
            return x.conj().T if (e.func == "adj" and x.ndim == 2) else x.conj()
        if isinstance(x, np.ndarray):
            raise _fail(e, f"{e.func} takes a scalar", self.filename)
        fn = {"sqrt": cmath.sqrt, "exp": cmath.exp, "cos": cmath.cos, "sin": cmath.sin}[e.func]
        return complex(fn(x))

    def _binary(self, e: d.EBin, a, b):
        arr_a, arr_b = isinstance(a, np.ndarray), isinstance(b, np.ndarray)
        op = e.op
        if op in ("+", "-"):
            if arr_a != arr_b or (arr_a and a.shape != b.shape):
                raise _fail(e, f"operands of {op} have different shapes", self.filename)
            return a + b if op == "+" else a - b
        if op == "*":
            if arr_a and arr_b:
                if a.ndim == 1:
                    raise _fail(e, "cannot multiply a vector on the left", self.filename)
                if a.shape[1] != b.shape[0]:
                    raise _fail(e, "matrix product shape mismatch", self.filename)
                return a @ b
            return a * b
        if op == "/":
            if arr_b:
                raise _fail(e, "division by a vector or matrix", self.filename)
            if b == 0:
                raise _fail(e, "division by zero", self.filename)
            return a / b
        if op == "(x)":
            if not (arr_a and arr_b):
                return a * b
            if a.ndim != b.ndim:
                raise _fail(e, "tensor product of a vector and a matrix", self.filename)
            return np.kron(a, b)
        if op == "^":
            if arr_b:
                raise _fail(e, "exponent must be a scalar", self.filename)
            if not arr_a:
                return a ** b
            if a.ndim != 2 or b.imag != 0 or not float(b.real).is_integer():
                raise _fail(e, "matrix power needs a square matrix and an integer", self.filename)
            return np.linalg.matrix_power(a, int(b.real))
        raise TypeError(op)


@dataclass
class Program:
    """Everything a spec file defines, instantiated with concrete parameter values."""

    spec: d.SpecFile
    model: Model
    axioms: list
    queries: list
    config: Config
    symbols: Symbols
    params: dict = field(default_factory=dict)
    model_terms: tuple = ()

    @property
    def closed_props(self) -> frozenset[str]:
        return self.model.sig.closed_props


def param_names(spec: d.SpecFile) -> list[tuple[str, ...]]:
    return [x.names for x in spec.of_type(d.ParamDecl)]


def sample_params(spec: d.SpecFile, rng: np.random.Generator) -> dict[str, complex]:
    """One joint sample: each unit2 pair is a uniformly random unit vector of C^2."""
    out: dict[str, complex] = {}
    for names in param_names(spec):
        v = hb.random_unit_vector(rng, 2)
        out[names[0]], out[names[1]] = complex(v[0]), complex(v[1])
    return out


def default_params(spec: d.SpecFile) -> dict[str, complex]:
    out: dict[str, complex] = {}
    for names in param_names(spec):
        out[names[0]], out[names[1]] = complex(_S), complex(_S)
    return out


def build_program(spec: d.SpecFile, params: Optional[dict] = None, **config_overrides) -> Program:
    """Evaluate every declaration; raises :class:`ModelError` on bad values."""
    config = Config.from_spec(spec, **config_overrides)
    params = dict(default_params(spec) if params is None else params)
    symbols = Symbols.of_spec(spec)
    fn = spec.filename
    dim = spec.dim
    env: dict = dict(params)
    ev = _ExprEval(env, fn)
    gates, meas, vectors, scalars, valuation = {}, {}, {}, {}, {}
    eps = config.epsilon
    for x in spec.decls:
        if isinstance(x, d.GateDecl):
            u = ev(x.expr)
            if not isinstance(u, np.ndarray) or u.ndim != 2 or u.shape != (dim, dim):
                raise _fail(x, f"gate {x.name} must be a {dim}x{dim} matrix", fn)
            gates[x.name] = env[x.name] = u
        elif isinstance(x, d.VectorDecl):
            v = ev(x.expr)
            if not isinstance(v, np.ndarray) or v.shape != (dim,):
                raise _fail(x, f"vector {x.name} must have {dim} entries", fn)
            vectors[x.name] = env[x.name] = v
        elif isinstance(x, d.ScalarDecl):
            c = ev(x.expr)
            if isinstance(c, np.ndarray):
                raise _fail(x, f"scalar {x.name} must be a number", fn)
            scalars[x.name] = env[x.name] = c
        elif isinstance(x, d.MeasDecl):
            meas[x.name] = hb.span(_vectors(ev, x.generators, dim, fn), dim, eps)
        elif isinstance(x, d.ValuationDecl):
            if x.whole == "all":
                valuation[x.prop] = Extent.all(dim)
            elif x.whole == "empty":
                valuation[x.prop] = Extent.empty(dim)
            else:
                pts = _vectors(ev, x.points, dim, fn)
                space = None if x.span is None else hb.span(_vectors(ev, x.span, dim, fn), dim, eps)
                valuation[x.prop] = Extent(dim, space, pts, eps)
    model = Model(symbols.signature(), dim, gates, meas, vectors, scalars, valuation, eps)
    axioms = spec.axioms
    terms = tuple(literal_terms(axioms))
    return Program(spec, model, axioms, spec.queries, config, symbols, params, terms)


def _vectors(ev: _ExprEval, exprs, dim: int, fn: str) -> list[np.ndarray]:
    out = []
    for e in exprs:
        v = ev(e)
        if not isinstance(v, np.ndarray) or v.shape != (dim,):
            raise _fail(e, f"expected a vector with {dim} entries", fn)
        out.append(v)
    return out
