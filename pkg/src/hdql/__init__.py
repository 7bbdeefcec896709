"""Model checking and Horn-clause reasoning for hybrid-dynamic quantum logic."""

from __future__ import annotations

from .errors import (BudgetExceeded, EvaluationError, GlobalNotDecidable, HDQLError, ModelError,
                     NotRepresentable, ParseError, ProgramUnsat, UnboundVariable,
                     UndefinedMeasurement)
from .evaluator import Evaluator, StarBudget, extent, preimage_extent, sat_global, sat_local, successors
from .extent import Extent
from .hilbert import Subspace
from .horn import HornProgram, InitialModel, answer_query, check_satisfiable, entails, saturate
from .model import Model, Morphism, Signature, eval_term, translate, validate_model
from .parser import parse, parse_action, parse_file, parse_query, parse_sentence, parse_term
from .printer import to_text
from .specfile import Config, Program, build_program
from .syntax import classify, is_unitary_action

__version__ = "0.1.0"

__all__ = [
    "BudgetExceeded", "Config", "EvaluationError", "Evaluator", "Extent", "GlobalNotDecidable",
    "HDQLError", "HornProgram", "InitialModel", "Model", "ModelError", "Morphism",
    "NotRepresentable", "ParseError", "Program", "ProgramUnsat", "Signature", "StarBudget",
    "Subspace", "UnboundVariable", "UndefinedMeasurement", "answer_query", "build_program",
    "check_satisfiable", "classify", "entails", "eval_term", "extent", "is_unitary_action",
    "parse", "parse_action", "parse_file", "parse_query", "parse_sentence", "parse_term",
    "preimage_extent", "sat_global", "sat_local", "saturate", "successors", "to_text",
    "translate", "validate_model",
]
