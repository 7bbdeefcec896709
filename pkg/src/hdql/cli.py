"""Command-line front end: ``hdql check|eval|init|query [flags] FILE``.

Exit codes: 0 completed (whatever the verdict), 1 usage error, 2 parse
error, 3 invalid model, 4 unsatisfiable program (query only).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from dataclasses import replace
from importlib import resources
from typing import Optional

import numpy as np

from . import declarations as d
from .errors import EvaluationError, HDQLError, ModelError, ParseError, ProgramUnsat
from .evaluator import Evaluator, StarBudget
from .extent import Extent
from .horn import ANSWER, SAT, UNSAT, HornProgram, answer_query, check_satisfiable, saturate
from .model import eval_term, validate_model
from .parser import parse, parse_query, parse_sentence, parse_term
from .printer import format_complex, print_query, print_sentence, print_term
from .specfile import Program, build_program, param_names, sample_params
from .syntax import BASIC, CLOSED, GENERAL, HORN, classify

EXIT_OK, EXIT_USAGE, EXIT_PARSE, EXIT_MODEL, EXIT_UNSAT = 0, 1, 2, 3, 4
LABEL_ORDER = (BASIC, CLOSED, HORN, GENERAL)
BUNDLED = ("superdense.spec", "teleport.spec", "inconsistent.spec", "reach.spec")


class UsageError(Exception):
    code = "USAGE"


class _ArgumentParser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


# --- JSON helpers ------------------------------------------------------------


def _num(x: float) -> float:
    # 17 significant digits round-trip every double exactly; +0.0 folds away -0.0
    return float(f"{float(x):.17g}") + 0.0


def json_complex(z: complex) -> dict:
    return {"re": _num(z.real), "im": _num(z.imag)}


def json_vector(v: np.ndarray) -> list:
    return [json_complex(complex(z)) for z in np.asarray(v).ravel()]


def json_extent(e: Extent) -> dict:
    out: dict = {"kind": e.kind}
    if e.space is not None:
        out["rank"] = e.space.rank
        out["basis"] = [json_vector(e.space.basis[:, k]) for k in range(e.space.rank)]
    else:
        out["rank"] = None
        out["basis"] = None
    out["points"] = [json_vector(p) for p in e.points]
    return out


def _text_vector(v: np.ndarray) -> str:
    return "(" + ", ".join(format_complex(complex(z)) for z in np.asarray(v).ravel()) + ")"


# --- loading -----------------------------------------------------------------


def resolve_spec_path(path: str) -> str:
    """A path on disk, or the name of a bundled spec (with or without ``.spec``)."""
    if os.path.exists(path):
        return path
    name = path if path.endswith(".spec") else path + ".spec"
    if name in BUNDLED:
        return str(resources.files("hdql") / "specs" / name)
    return path


def read_spec(path: str) -> d.SpecFile:
    real = resolve_spec_path(path)
    try:
        with open(real, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None
    return parse(text, path)


def _overrides(args) -> dict:
    return dict(epsilon=args.epsilon, star_budget=args.star_budget, term_depth=args.term_depth,
                samples=args.samples)


def load_program(spec: d.SpecFile, args, params: Optional[dict] = None) -> Program:
    try:
        prog = build_program(spec, params, **_overrides(args))
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    problems = validate_model(prog.model.sig, prog.model)
    if problems:
        raise ModelError("\n".join(_locate(spec, p) for p in problems))
    return prog


def _locate(spec: d.SpecFile, problem: str) -> str:
    """Prefix a model violation with the position of the declaration it names."""
    kind, _, rest = problem.partition(" ")
    name = rest.partition(":")[0]
    decls = list(spec.decls)
    if kind == "prop":  # valuation problems point at the valuation line
        decls.sort(key=lambda x: not isinstance(x, d.ValuationDecl))
    for x in decls:
        if name in (getattr(x, "name", None), getattr(x, "prop", None)) or \
                name in getattr(x, "names", ()):
            line, col = x.pos or (1, 1)
            return f"{spec.filename}:{line}:{col}: {problem}"
    return f"{spec.filename}:1:1: {problem}"


def _horn(prog: Program) -> Optional[HornProgram]:
    try:
        return HornProgram.from_program(prog)
    except ValueError:
        return None


def _not_horn(prog: Program) -> list[str]:
    closed = prog.model.sig.closed_props
    return [print_sentence(a) for a in prog.axioms if HORN not in classify(a, closed)]


def _labels(s, closed) -> list[str]:
    got = classify(s, closed)
    return [x for x in LABEL_ORDER if x in got]


# --- commands ----------------------------------------------------------------


def cmd_check(args) -> dict:
    spec = read_spec(args.file)
    prog = load_program(spec, args)
    closed = prog.model.sig.closed_props
    m = prog.model
    return {
        "command": "check",
        "status": "OK",
        "file": args.file,
        "dim": m.dim,
        "counts": {"gates": len(m.gates), "measurements": len(m.measurements),
                   "vectors": len(m.vectors), "props": len(m.sig.props),
                   "axioms": len(prog.axioms), "queries": len(prog.queries)},
        "axioms": [{"index": i + 1, "sentence": print_sentence(a), "classes": _labels(a, closed)}
                   for i, a in enumerate(prog.axioms)],
    }


def _eval_once(prog: Program, at: Optional[str], sentence: str, global_: bool):
    """(status, state, printed sentence, reason, detail) for one parameter instance."""
    s = parse_sentence(sentence, symbols=prog.symbols, filename="<sentence>")
    m = prog.model
    hp = _horn(prog) if prog.axioms else None
    if hp is not None:
        m = saturate(hp).model
    ev = Evaluator(m, StarBudget(prog.config.star_budget), prog.config.term_depth,
                   prog.model_terms)
    state = None
    try:
        if global_:
            ok = ev.sat_global(s)
        else:
            t = parse_term(at, symbols=prog.symbols, filename="<at>")
            state = eval_term(m, t)
            ok = ev.sat(state, s)
    except EvaluationError as exc:
        return "UNKNOWN", state, print_sentence(s), exc.code, str(exc)
    return ("TRUE" if ok else "FALSE"), state, print_sentence(s), None, None


def cmd_eval(args) -> dict:
    if args.sentence is not None and args.sentence_pos is not None:
        raise UsageError("give the sentence either positionally or with --sentence, not both")
    sentence = args.sentence if args.sentence is not None else args.sentence_pos
    if sentence is None:
        raise UsageError("eval needs a sentence (positional or --sentence)")
    if args.global_ == (args.at is not None):
        raise UsageError("eval needs exactly one of --at TERM or --global")
    spec = read_spec(args.file)
    out: dict = {"command": "eval", "file": args.file, "mode": "global" if args.global_ else "local",
                 "at": args.at}
    if not param_names(spec):
        prog = load_program(spec, args)
        status, state, text, reason, detail = _eval_once(prog, args.at, sentence, args.global_)
        out.update(status=status, sentence=text,
                   state=None if state is None else json_vector(state))
        if reason:
            out.update(reason=reason, detail=detail)
        return out
    # unknown amplitudes: check by sampling joint parameter instances
    base = load_program(spec, args)
    n = base.config.samples
    rng = np.random.default_rng(args.seed)
    passed, first_bad, first_unknown = 0, None, None
    text = None
    for k in range(n):
        params = sample_params(spec, rng)
        prog = load_program(spec, args, params)
        status, state, text, reason, detail = _eval_once(prog, args.at, sentence, args.global_)
        if status == "TRUE":
            passed += 1
        elif status == "FALSE" and first_bad is None:
            first_bad = (k, params, state)
        elif status == "UNKNOWN" and first_unknown is None:
            first_unknown = (k, reason, detail)
    status = "FALSE" if first_bad else "UNKNOWN" if first_unknown else "TRUE"
    out.update(status=status, sentence=text, state=None)
    out["sampling"] = {
        "note": "parameters are checked by sampling, not symbolically",
        "samples": n, "seed": args.seed, "passed": passed,
    }
    if first_bad:
        k, params, state = first_bad
        out["counterexample"] = {"sample": k,
                                 "params": {p: json_complex(v) for p, v in params.items()},
                                 "state": None if state is None else json_vector(state)}
    elif first_unknown:
        out.update(reason=first_unknown[1], detail=first_unknown[2])
    return out


def _defaults_note(spec: d.SpecFile) -> Optional[str]:
    if param_names(spec):
        return "parameters fixed at their default values 1/sqrt(2)"
    return None


def cmd_init(args) -> dict:
    spec = read_spec(args.file)
    prog = load_program(spec, args)
    out: dict = {"command": "init", "file": args.file}
    note = _defaults_note(spec)
    if note:
        out["note"] = note
    hp = _horn(prog)
    if hp is None:
        out.update(status="UNKNOWN", reason="NOT-HORN", detail="; ".join(_not_horn(prog)))
        return out
    im = saturate(hp)
    v = check_satisfiable(hp, im)
    out["status"] = v.status
    if v.status == UNSAT:
        out["violation"] = {"clause": v.clause + 1, "sentence": v.detail,
                            "witness": json_vector(v.witness)}
        return out
    if v.status != SAT:
        out.update(reason=v.reason, detail=v.detail)
    out["rounds"] = im.rounds
    out["facts"] = len(im.facts)
    out["warnings"] = list(im.warnings)
    out["extents"] = {p: json_extent(im.extent(p)) for p in sorted(im.model.sig.props)}
    return out


def cmd_query(args) -> dict:
    if args.query is not None and args.query_pos is not None:
        raise UsageError("give the query either positionally or with --query, not both")
    text = args.query if args.query is not None else args.query_pos
    spec = read_spec(args.file)
    prog = load_program(spec, args)
    if text is None:
        if not prog.queries:
            raise UsageError("no query given and the spec file declares none")
        queries = list(prog.queries)
    else:
        queries = [parse_query(text, symbols=prog.symbols, filename="<query>")]
    if args.at is not None:
        anchor = parse_term(args.at, symbols=prog.symbols, filename="<at>")
        queries = [replace(q, anchor=anchor) for q in queries]
    out: dict = {"command": "query", "file": args.file}
    note = _defaults_note(spec)
    if note:
        out["note"] = note
    hp = _horn(prog)
    if hp is None:
        out.update(status="UNKNOWN", reason="NOT-HORN", detail="; ".join(_not_horn(prog)),
                   results=[])
        return out
    im = saturate(hp)
    results = []
    for q in queries:
        r = answer_query(hp, q, im)  # raises ProgramUnsat
        entry: dict = {"query": print_query(q), "status": r.status, "depth": r.depth,
                       "candidates_checked": r.candidates_checked, "unknown": r.unknown}
        if r.status == ANSWER:
            entry["substitution"] = {x: print_term(t) for x, t in r.substitution.items()}
        else:
            entry["status"] = f"{r.status}({r.depth})"
        if r.reason:
            entry["reason"] = r.reason
        entry["text"] = r.render()
        results.append(entry)
    out["status"] = results[0]["status"] if len(results) == 1 else (
        ANSWER if all(r["status"] == ANSWER for r in results) else "MIXED")
    out["results"] = results
    return out


# --- text rendering ----------------------------------------------------------


def render_text(res: dict) -> str:
    cmd = res["command"]
    lines: list[str] = []
    if cmd == "check":
        c = res["counts"]
        lines.append(f"{res['file']}: OK (dim {res['dim']}, {c['gates']} gates, "
                     f"{c['measurements']} measurements, {c['props']} props, "
                     f"{c['axioms']} axioms)")
        for a in res["axioms"]:
            lines.append(f"  axiom {a['index']} [{', '.join(a['classes'])}]: {a['sentence']}")
    elif cmd == "eval":
        head = res["status"]
        if res.get("reason"):
            head += f"({res['reason']}): {res['detail']}"
        lines.append(head)
        s = res.get("sampling")
        if s:
            lines.append(f"  checked by sampling {s['samples']} parameter instances "
                         f"(seed {s['seed']}): {s['passed']} passed; this is not a symbolic proof")
            ce = res.get("counterexample")
            if ce:
                ps = ", ".join(f"{k} = {_text_complex(v)}" for k, v in ce["params"].items())
                lines.append(f"  first failing sample {ce['sample']}: {ps}")
    elif cmd == "init":
        if res.get("note"):
            lines.append(f"note: {res['note']}")
        head = res["status"]
        if res.get("reason"):
            head += f"({res['reason']})" + (f": {res['detail']}" if res.get("detail") else "")
        lines.append(head)
        if "violation" in res:
            v = res["violation"]
            lines.append(f"  violated axiom {v['clause']}: {v['sentence']}")
            lines.append(f"  witness: {_text_json_vector(v['witness'])}")
        for w in res.get("warnings", []):
            lines.append(f"  warning: {w}")
        for p, e in res.get("extents", {}).items():
            lines.append(f"  {p}: {e['kind']}")
            if e["basis"] is not None:
                for b in e["basis"]:
                    lines.append(f"    basis {_text_json_vector(b)}")
            for pt in e["points"]:
                lines.append(f"    point {_text_json_vector(pt)}")
    elif cmd == "query":
        if res.get("note"):
            lines.append(f"note: {res['note']}")
        if res.get("reason") and not res["results"]:
            lines.append(f"{res['status']}({res['reason']}): {res['detail']}")
        for r in res["results"]:
            lines.append(r["text"])
    return "\n".join(lines)


def _text_complex(z: dict) -> str:
    return format_complex(complex(z["re"], z["im"]))


def _text_json_vector(v: list) -> str:
    return "(" + ", ".join(_text_complex(z) for z in v) + ")"


# --- argument parsing --------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = _ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="machine-readable output")
    common.add_argument("--epsilon", type=float, help="numerical tolerance (default 1e-9)")
    common.add_argument("--star-budget", type=int, help="maximum star unfoldings (default 64)")
    common.add_argument("--term-depth", type=int, help="ground-term depth bound (default 3)")
    common.add_argument("--samples", type=int, help="parameter samples for eval (default 100)")
    common.add_argument("--seed", type=int, default=0, help="random seed for sampling")

    p = _ArgumentParser(prog="hdql", description="Model checking and Horn-clause reasoning "
                        "for hybrid-dynamic quantum logic.")
    sub = p.add_subparsers(dest="command", parser_class=_ArgumentParser)
    sub.required = True

    c = sub.add_parser("check", parents=[common], help="parse, validate and classify a spec")
    c.add_argument("file")

    e = sub.add_parser("eval", parents=[common], help="evaluate a sentence")
    e.add_argument("file")
    e.add_argument("sentence_pos", nargs="?", metavar="SENTENCE")
    e.add_argument("--sentence", help="sentence to evaluate")
    e.add_argument("--at", help="state term for local satisfaction")
    e.add_argument("--global", dest="global_", action="store_true",
                   help="global satisfaction instead of --at")

    i = sub.add_parser("init", parents=[common], help="build the initial model of the axioms")
    i.add_argument("file")

    q = sub.add_parser("query", parents=[common], help="answer an existential query")
    q.add_argument("file")
    q.add_argument("query_pos", nargs="?", metavar="QUERY")
    q.add_argument("--query", help='query text, e.g. "exists x . @ x p"')
    q.add_argument("--at", help="anchor state for the query body")
    return p


_TRAILING = {"eval": "sentence_pos", "query": "query_pos"}


def _place_trailing(parser, args, extra: list[str]) -> None:
    # argparse fills both positionals from the first run of them, so a sentence
    # written after an option (``eval FILE --at w "[a] p"``) ends up in ``extra``
    slot = _TRAILING.get(args.command)
    if extra and slot and getattr(args, slot) is None and len(extra) == 1 \
            and not extra[0].startswith("--"):
        setattr(args, slot, extra[0])
        return
    if extra:
        raise UsageError(f"{parser.prog}: unrecognized arguments: {' '.join(extra)}")


COMMANDS = {"check": cmd_check, "eval": cmd_eval, "init": cmd_init, "query": cmd_query}


def run(argv=None) -> tuple[int, str, str]:
    """Run one command; returns (exit code, stdout text, stderr text)."""
    parser = build_parser()
    try:
        args, extra = parser.parse_known_args(argv)
        _place_trailing(parser, args, extra)
    except UsageError as exc:
        return EXIT_USAGE, "", f"{exc}\n{parser.format_usage()}"
    except SystemExit as exc:  # --help
        return (EXIT_OK if not exc.code else EXIT_USAGE), "", ""
    t0 = time.perf_counter()
    try:
        res = COMMANDS[args.command](args)
    except UsageError as exc:
        return EXIT_USAGE, _error_json(args, exc), f"hdql: {exc}\n"
    except ParseError as exc:
        return EXIT_PARSE, _error_json(args, exc), f"{exc}\n"
    except ModelError as exc:
        return EXIT_MODEL, _error_json(args, exc), f"{exc}\n"
    except ProgramUnsat as exc:
        v = exc.violation
        msg = f"PROGRAM-UNSAT: {exc}"
        if v is not None and v.witness is not None:
            msg += f"; axiom {v.clause + 1} fails at {_text_vector(v.witness)}"
        return EXIT_UNSAT, _error_json(args, exc, v), msg + "\n"
    except HDQLError as exc:
        return EXIT_USAGE, _error_json(args, exc), f"hdql: {exc}\n"
    elapsed = time.perf_counter() - t0
    if args.json:
        return EXIT_OK, json.dumps(res, indent=2) + "\n", ""
    return EXIT_OK, render_text(res) + "\n", f"time: {elapsed:.3f} s\n"


def _error_json(args, exc: Exception, violation=None) -> str:
    if not getattr(args, "json", False):
        return ""
    out = {"command": args.command, "file": args.file, "status": "ERROR",
           "reason": getattr(exc, "code", "ERROR"), "detail": str(exc)}
    if violation is not None and violation.witness is not None:
        out["status"] = "UNSAT"
        out["violation"] = {"clause": violation.clause + 1, "sentence": violation.detail,
                            "witness": json_vector(violation.witness)}
    return json.dumps(out, indent=2) + "\n"


def main(argv=None) -> int:
    code, out, err = run(argv)
    if out:
        sys.stdout.write(out)
    if err:
        sys.stderr.write(err)
    return code


if __name__ == "__main__":
    sys.exit(main())
