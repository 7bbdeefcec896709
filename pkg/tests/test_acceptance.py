"""Acceptance suite: one test per criterion, each reporting a single PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -s`` to see the lines inline; they are
also repeated in the terminal summary.  ``python3 tests/test_acceptance.py``
runs the suite without pytest.
"""

from __future__ import annotations

import itertools
import json
import time
from pathlib import Path

import numpy as np
import pytest

from hdql import hilbert as hb
from hdql import syntax as sx
from hdql.cli import run
from hdql.errors import BudgetExceeded, HDQLError
from hdql.evaluator import Evaluator, StarBudget, orbit, star_fixpoint, successors
from hdql.extent import Extent
from hdql.horn import ANSWER, HornProgram, answer_query, entails, saturate
from hdql.model import Model, eval_term
from hdql.parser import parse, parse_file, parse_sentence
from hdql.printer import print_sentence, print_spec
from hdql.specfile import build_program

import gen
import oracles as o
from conftest import BUNDLED, bundled_path

RESULTS: list[str] = []


@pytest.fixture(autouse=True)
def _in_tests_dir(monkeypatch):
    monkeypatch.chdir(Path(__file__).parent)


def report(n: int, title: str, ok: bool, detail: str) -> None:
    line = f"criterion {n:2d} [{'PASS' if ok else 'FAIL'}] {title}: {detail}"
    RESULTS.append(line)
    print(line)
    assert ok, line


def _json(argv):
    code, out, err = run(argv + ["--json"])
    return code, json.loads(out)


# --- 1 -----------------------------------------------------------------------


def _superdense_verdicts(m: Model, spec, labels) -> list[bool]:
    ev = Evaluator(m)
    w = m.vectors["bell00"]
    out = []
    for i, j in itertools.product((0, 1), repeat=2):
        s = parse_sentence(f"[s{i};d{j};u0;u1] p{labels(i, j)}", spec)
        out.append(ev.sat(w, s))
    return out


def _live_entries(m: Model, spec) -> list[tuple[str, int, int]]:
    """Gate entries that multiply a nonzero amplitude in some protocol run."""
    live = set()
    for i, j in itertools.product((0, 1), repeat=2):
        v = m.vectors["bell00"]
        for g in (f"s{i}", f"d{j}", "u0", "u1"):
            for c in np.flatnonzero(np.abs(v) > 1e-12):
                for r in range(m.dim):
                    live.add((g, r, int(c)))
            v = m.gates[g] @ v
    return sorted(live)


def _perturbation_flips(prog, labels) -> tuple[int, int]:
    """(perturbed entries, entries whose perturbation flipped some verdict to FALSE)."""
    base = prog.model
    im = saturate(HornProgram.from_program(prog)).model
    entries = _live_entries(base, prog.spec)
    flipped = 0
    for g, r, c in entries:
        u = im.gates[g].copy()
        u[r, c] += 1e-3
        m = Model(im.sig, im.dim, {**im.gates, g: u}, im.measurements, im.vectors, im.scalars,
                  im.valuation, im.eps)
        if not all(_superdense_verdicts(m, prog.spec, labels)):
            flipped += 1
    return len(entries), flipped


def test_criterion_01_superdense():
    t = time.perf_counter()
    verdicts = {}
    for i, j in itertools.product((0, 1), repeat=2):
        _, res = _json(["eval", "superdense", "--epsilon", "1e-8", "--at", "bell00",
                        "--sentence", f"[s{i};d{j};u0;u1] p{i}{j}"])
        verdicts[f"{i}{j}"] = res["status"]
    elapsed = time.perf_counter() - t
    prog = build_program(parse_file(bundled_path("superdense")), epsilon=1e-8)
    total, flipped = _perturbation_flips(prog, lambda i, j: f"{i}{j}")
    ok = all(v == "TRUE" for v in verdicts.values()) and flipped == total and elapsed < 1.0
    detail = (f"verdicts {verdicts}; {flipped}/{total} live-entry perturbations flip a verdict; "
              f"{elapsed:.2f} s")
    report(1, "superdense coding [s_i;d_j;u0;u1] p_ij", ok, detail)


def test_superdense_decoded_labels():
    # the protocol delivers |j i>: checked with the labels swapped
    t = time.perf_counter()
    for i, j in itertools.product((0, 1), repeat=2):
        _, res = _json(["eval", "superdense", "--epsilon", "1e-8", "--at", "bell00",
                        "--sentence", f"[s{i};d{j};u0;u1] p{j}{i}"])
        assert res["status"] == "TRUE"
    assert time.perf_counter() - t < 1.0
    prog = build_program(parse_file(bundled_path("superdense")), epsilon=1e-8)
    total, flipped = _perturbation_flips(prog, lambda i, j: f"{j}{i}")
    assert total > 0 and flipped == total


# --- 2 -----------------------------------------------------------------------


def test_criterion_02_teleport():
    t = time.perf_counter()
    code, res = _json(["eval", "teleport", "--at", "input", "--sentence", "[A] p",
                       "--samples", "100", "--seed", "0"])
    elapsed = time.perf_counter() - t
    s = res.get("sampling", {})
    ok = (code == 0 and res["status"] == "TRUE" and s.get("samples") == 100
          and s.get("passed") == 100 and "sampling" in s.get("note", "") and elapsed < 5.0)
    report(2, "teleportation by sampling", ok,
           f"{s.get('passed')}/{s.get('samples')} samples TRUE ({s.get('note')}); {elapsed:.2f} s")


# --- 3 -----------------------------------------------------------------------


def _subspace_pair(rng, n):
    s = hb.random_subspace(rng, n, int(rng.integers(0, n + 1)))
    t = hb.random_subspace(rng, n, int(rng.integers(0, n + 1)))
    if rng.random() < 0.4 and s.rank and t.rank < n:
        t = hb.span(list(t.vectors()) + [s.basis[:, 0]], n)  # force a shared direction
    return s, t


def test_criterion_03_subspace_identities():
    rng = np.random.default_rng(3)
    worst = 0.0
    count = 0
    for n in (2, 3, 4, 8):
        eye = np.eye(n)
        for _ in range(200):
            x, y = _subspace_pair(rng, n)
            px, py = x.projector, y.projector
            xp = hb.orthocomplement(x)
            errs = []
            # (1) closed iff double complement is itself
            errs.append(o.frob(hb.orthocomplement(xp).projector, px))
            # (2) direct sum equals complement of the meet of complements
            rhs = eye - o.meet_projector(eye - px, eye - py)
            errs.append(o.frob(hb.direct_sum(x, y).projector, rhs))
            # (3) local closure relative to Y containing X
            big = hb.direct_sum(x, y)
            local = hb.meet(big, hb.orthocomplement(hb.meet(big, xp)))
            errs.append(o.frob(local.projector, px))
            # (4) H = X + X-perp
            errs.append(o.frob(hb.direct_sum(x, xp).projector, eye))
            # projection image and preimage
            img_oracle = o.projector_of([px @ b for b in y.vectors()], n)
            img_formula = o.meet_projector(px, o.sum_projector(eye - px, py))
            errs.append(o.frob(hb.image_of_projection(x, y).projector, img_oracle))
            errs.append(o.frob(img_formula, img_oracle))
            pre_formula = o.sum_projector(eye - px, o.meet_projector(px, py))
            errs.append(o.frob(hb.preimage_of_projection(x, y).projector, pre_formula))
            errs.append(o.frob(hb.sasaki_hook(x, y).projector, pre_formula))
            worst = max(worst, *errs)
            count += 1
    report(3, "subspace identities", worst <= 1e-8,
           f"{count} pairs over n in {{2,3,4,8}}; max projector distance {worst:.2e}")


# --- 4 -----------------------------------------------------------------------


def test_criterion_04_sasaki_lemma():
    rng = np.random.default_rng(4)
    inclusions = hook_global = agree = 0
    bad = []
    for k in range(200):
        m = gen.random_model(rng, int(rng.integers(2, 5)))
        r1, r2 = gen.random_closed(rng, 2, 1), gen.random_closed(rng, 2, 1)
        if k % 3 == 0:
            r1 = sx.And(r2, r1)  # make containment likely
        ev = Evaluator(m)
        e1, e2 = ev.extent(r1).span(), ev.extent(r2).span()
        hook = ev.extent(sx.sasaki(r1, r2)).span()
        if not hb.is_subspace_of(hb.meet(e1, hook), e2, 1e-8):
            bad.append(f"item 1 fails for {print_sentence(r1)} ~> {print_sentence(r2)}")
        contained = hb.is_subspace_of(e1, e2, 1e-8)
        glob = ev.sat_global(sx.sasaki(r1, r2))
        inclusions += contained
        hook_global += glob
        agree += contained == glob
        if contained != glob:
            bad.append(f"item 2 fails for {print_sentence(r1)} ~> {print_sentence(r2)}")
    report(4, "Sasaki hook lemma", not bad and agree == 200,
           f"200 pairs, {inclusions} with inclusion, {agree}/200 agree with global hook"
           + (f"; first failure: {bad[0]}" if bad else ""))


# --- 5 -----------------------------------------------------------------------


def test_criterion_05_closed_fragment():
    rng = np.random.default_rng(5)
    failures = []
    checked = 0
    for _ in range(500):
        n = int(rng.integers(2, 4))
        m = gen.random_model(rng, n)
        s = gen.random_closed(rng, int(rng.integers(0, 5)))
        ev = Evaluator(m)
        e = ev.extent(s)
        p = e.span().projector
        if e.points or e.space is None and not e.is_empty():
            failures.append(f"not a subspace: {print_sentence(s)}")
            continue
        if o.frob(p, p.conj().T) > 1e-8 or o.frob(p @ p, p) > 1e-8:
            failures.append(f"not a projector: {print_sentence(s)}")
        try:
            if not ev.sat(np.zeros(n, dtype=complex), s):
                failures.append(f"origin fails {print_sentence(s)}")
            sp = e.span()
            if sp.rank:
                c1 = rng.normal(size=sp.rank) + 1j * rng.normal(size=sp.rank)
                c2 = rng.normal(size=sp.rank) + 1j * rng.normal(size=sp.rank)
                w1, w2 = sp.basis @ c1, sp.basis @ c2
                a = complex(rng.normal(), rng.normal())
                for w in (w1, a * w1, w1 + w2):
                    if not ev.sat(w, s):
                        failures.append(f"closure fails {print_sentence(s)}")
                        break
            checked += 1
        except HDQLError as exc:
            failures.append(f"{exc.code} on {print_sentence(s)}")
    report(5, "closed fragment is closed", not failures,
           f"{checked}/500 sentences with projector, origin, scaling and sum checks"
           + (f"; first failure: {failures[0]}" if failures else ""))


# --- 6 -----------------------------------------------------------------------


def test_criterion_06_inconsistency():
    code, res = _json(["init", "inconsistent"])
    w = np.array([complex(z["re"], z["im"]) for z in res["violation"]["witness"]])
    unsat = res["status"] == "UNSAT" and np.linalg.norm(w) > 0
    sats = {}
    for name in BUNDLED:
        if name != "inconsistent":
            sats[name] = _json(["init", name])[1]["status"]
    ok = unsat and all(v == "SAT" for v in sats.values())
    report(6, "inconsistency detection", ok,
           f"{{p, ~p}} -> {res['status']} witness {np.round(w, 3).tolist()}; protocols {sats}")


# --- 7 -----------------------------------------------------------------------


def test_criterion_07_herbrand():
    rng = np.random.default_rng(7)
    t = time.perf_counter()
    mismatches = []
    answered = 0
    for k in range(100):
        case = gen.random_horn_case(rng)
        prog = build_program(parse(case.text()))
        hp = HornProgram.from_program(prog)
        im = saturate(hp)
        q = prog.queries[0]
        r = answer_query(hp, q, im)
        gates = {n: o.GATE_MATRICES[b] for n, b in case.gates.items()}
        universe = o.herbrand_values(gates, [o.basis_state(b) for b in case.seeds()], case.depth)
        facts = o.chase(gates, case.clauses, universe)
        hits = o.brute_force_answers(gates, facts, case.query, universe)
        found = r.status == ANSWER
        if found != bool(hits) or (hits and r.depth != min(hits)):
            mismatches.append(f"program {k}: engine {r.render()}, brute force {len(hits)} hits")
        if found:
            answered += 1
            body = sx.apply_substitution(r.substitution, _conj(q.body))
            if not entails(hp, sx.Ket("0"), body, im):
                mismatches.append(f"program {k}: answer fails entails()")
    elapsed = time.perf_counter() - t
    report(7, "Herbrand equivalence", not mismatches and elapsed < 60.0,
           f"100 programs, {answered} with answers, {len(mismatches)} mismatches; {elapsed:.2f} s"
           + (f"; first: {mismatches[0]}" if mismatches else ""))


def _conj(parts):
    out = parts[-1]
    for p in reversed(parts[:-1]):
        out = sx.And(p, out)
    return out


# --- 8 -----------------------------------------------------------------------


def _outcome(fn):
    try:
        return fn()
    except HDQLError as exc:
        return exc.code


def test_criterion_08_substitution():
    rng = np.random.default_rng(8)
    agree = decided = 0
    first = None
    for _ in range(500):
        m = gen.random_model(rng, 2)
        xs = ("x", "y")
        gamma = gen.random_sentence(rng, 3, scope=xs)
        theta = {x: gen.random_term(rng, 2, scope=("z",), measurements=False) for x in xs}
        env_y = {"z": hb.random_unit_vector(rng, 2)}
        w = hb.random_unit_vector(rng, 2)
        ev = Evaluator(m, StarBudget(max_states=512))
        reduct = {x: eval_term(m, t, env_y) for x, t in theta.items()}
        left = _outcome(lambda: ev.sat(w, gamma, {**env_y, **reduct}))
        right = _outcome(lambda: ev.sat(w, sx.apply_substitution(theta, gamma), env_y))
        if left == right:
            agree += 1
            decided += isinstance(left, bool)
        elif first is None:
            first = f"{print_sentence(gamma)} under {theta}: {left} vs {right}"
    report(8, "substitution satisfaction condition", agree == 500,
           f"{agree}/500 agree ({decided} boolean verdicts)" + (f"; first: {first}" if first else ""))


# --- 9 -----------------------------------------------------------------------


def test_criterion_09_star_termination():
    rng = np.random.default_rng(9)
    worst = 0
    for _ in range(100):
        n = int(rng.integers(2, 5))
        m = gen.random_model(rng, n)
        a = gen.random_action(rng, 2, unitary=True)
        e = Extent.of_subspace(hb.random_subspace(rng, n))
        _, k = star_fixpoint(m, a, e)
        worst = max(worst, k - (n + 1))
    h = build_program(parse("dim 2\ngate h = H\nprop p\n")).model
    _, steps = orbit(h, sx.GateAct("h"), hb.ket("0"))
    rot = build_program(parse("dim 2\ngate r = [[cos(1), -sin(1)], [sin(1), cos(1)]]\n"
                              "prop p\n")).model
    try:
        successors(rot, sx.Star(sx.GateAct("r")), hb.ket("0"))
        budget = "silent"
    except BudgetExceeded as exc:
        budget = exc.code
    code, res = _json(["eval", "data/irrational.spec", "--at", "ket(0)",
                       "--sentence", "store x . <r ; r*> nom(x)"])
    ok = worst <= 0 and steps == 2 and budget == "BUDGET-EXCEEDED" and \
        res.get("reason") == "BUDGET-EXCEEDED"
    report(9, "star termination", ok,
           f"subspace fixpoints within dim+1 ({'yes' if worst <= 0 else 'no'}); H orbit closes "
           f"in {steps} steps; irrational rotation -> {budget}, CLI {res['status']}"
           f"({res.get('reason')})")


# --- 10 ----------------------------------------------------------------------


def test_criterion_10_round_trip():
    specs_ok = 0
    for name in BUNDLED:
        sp = parse_file(bundled_path(name))
        if parse(print_spec(sp), sp.filename) == sp:
            specs_ok += 1
    rng = np.random.default_rng(10)
    syms = gen.symbols()
    ok_sentences = 0
    for _ in range(1000):
        s = gen.random_sentence(rng, 4)
        if parse_sentence(print_sentence(s), symbols=syms) == s:
            ok_sentences += 1
    report(10, "parser round-trip", specs_ok == len(BUNDLED) and ok_sentences == 1000,
           f"{specs_ok}/{len(BUNDLED)} bundled specs, {ok_sentences}/1000 random sentences")


if __name__ == "__main__":
    import os
    import sys

    os.chdir(os.path.dirname(os.path.abspath(__file__)))
    failed = 0
    for name, fn in sorted(globals().items()):
        if name.startswith("test_criterion_"):
            try:
                fn()
            except AssertionError:
                failed += 1
    sys.exit(1 if failed else 0)
