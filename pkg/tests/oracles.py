"""Independent reference implementations used to derive expected values.

Nothing here imports the package's linear-algebra helpers: each oracle
recomputes its answer from first principles (Gram-Schmidt, null spaces,
explicit state-vector simulation, exhaustive enumeration).
"""

from __future__ import annotations

import itertools
import math

import numpy as np

TOL = 1e-10


def gram_schmidt(vectors, tol: float = TOL) -> np.ndarray:
    """Orthonormal columns spanning the inputs (modified Gram-Schmidt, twice)."""
    basis: list[np.ndarray] = []
    for v in vectors:
        w = np.array(v, dtype=complex)
        for _ in range(2):
            for b in basis:
                w = w - np.vdot(b, w) * b
        n = math.sqrt(float(np.vdot(w, w).real))
        if n > tol:
            basis.append(w / n)
    dim = len(vectors[0]) if len(vectors) else 0
    if not basis:
        return np.zeros((dim, 0), dtype=complex)
    return np.stack(basis, axis=1)


def projector_of(vectors, dim: int) -> np.ndarray:
    if not len(vectors):
        return np.zeros((dim, dim), dtype=complex)
    q = gram_schmidt(vectors)
    return q @ q.conj().T


def null_space(a: np.ndarray, tol: float = 1e-9) -> np.ndarray:
    _, s, vh = np.linalg.svd(a)
    rank = int(np.sum(s > tol * max(1.0, s[0] if s.size else 0.0)))
    return vh[rank:].conj().T


def meet_projector(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Projector onto {w : Pw = w and Qw = w}, via a null space."""
    n = p.shape[0]
    eye = np.eye(n)
    ns = null_space(np.vstack([eye - p, eye - q]))
    return ns @ ns.conj().T


def sum_projector(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Projector onto S + T, via Gram-Schmidt of both column spaces."""
    cols = [p[:, k] for k in range(p.shape[1])] + [q[:, k] for k in range(q.shape[1])]
    return projector_of(cols, p.shape[0])


def frob(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.linalg.norm(a - b))


# --- protocol circuits -------------------------------------------------------

H = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
I2 = np.eye(2, dtype=complex)
CNOT = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)


def basis_state(bits: str) -> np.ndarray:
    v = np.zeros(2 ** len(bits), dtype=complex)
    v[int(bits, 2)] = 1
    return v


def superdense_outcome(i: int, j: int) -> np.ndarray:
    """Explicit simulation of s_i ; d_j ; u0 ; u1 on the Bell pair, gate by gate."""
    bell = (basis_state("00") + basis_state("11")) / math.sqrt(2)
    s = np.kron(np.linalg.matrix_power(X, i), I2)
    dgate = np.kron(np.linalg.matrix_power(Z, j), I2)
    state = s @ bell
    state = dgate @ state
    state = CNOT @ state
    state = np.kron(H, I2) @ state
    return state


def teleport_branches(alpha: complex, beta: complex) -> list[np.ndarray]:
    """Final states of the four measurement branches, by explicit simulation."""
    w = np.array([alpha, beta], dtype=complex)
    bell = (basis_state("00") + basis_state("11")) / math.sqrt(2)
    state = np.kron(w, bell)
    state = np.kron(CNOT, I2) @ state
    state = np.kron(H, np.eye(4)) @ state
    out = []
    for i, j in itertools.product((0, 1), repeat=2):
        proj = np.zeros((8, 8), dtype=complex)
        for c in (0, 1):
            e = basis_state(f"{i}{j}{c}")
            proj += np.outer(e, e.conj())
        v = proj @ state
        pr = float(np.vdot(state, v).real)
        if pr <= 1e-18:
            continue
        v = v / math.sqrt(pr)
        v = np.kron(np.eye(4), np.linalg.matrix_power(X, j)) @ v
        v = np.kron(np.eye(4), np.linalg.matrix_power(Z, i)) @ v
        out.append(v)
    return out


# --- Herbrand chase over small Horn programs --------------------------------

GATE_MATRICES = {
    "X": X,
    "Y": np.array([[0, -1j], [1j, 0]]),
    "Z": Z,
    "H": H,
}


def _key(v: np.ndarray) -> tuple:
    q = np.round(np.concatenate([v.real, v.imag]) * 1e6).astype(np.int64)
    q[q == 0] = 0
    return tuple(q)


def _term_value(t, gates) -> np.ndarray:
    if t[0] == "ket":
        return basis_state(t[1])
    return gates[t[1]] @ _term_value(t[2], gates)


def herbrand_values(gates: dict, seeds, depth: int) -> dict:
    """Values of all ground terms of depth <= ``depth``: key -> (vector, least depth).

    Terms are the origin, the seed literals, gate applications and sums.
    """
    out: dict = {}
    levels = []
    lvl = {}
    for v in [np.zeros(2, dtype=complex)] + [np.asarray(s, dtype=complex) for s in seeds]:
        lvl.setdefault(_key(v), v)
    for k, v in lvl.items():
        out[k] = (v, 0)
    levels.append(list(lvl.values()))
    for d in range(1, depth + 1):
        prev = levels[-1]
        everything = [v for v, _ in out.values()]
        new = {}
        for a in prev:
            for g in gates.values():
                new.setdefault(_key(g @ a), g @ a)
            for b in everything:
                new.setdefault(_key(a + b), a + b)
        fresh = {k: v for k, v in new.items() if k not in out}
        for k, v in fresh.items():
            out[k] = (v, d)
        levels.append(list(fresh.values()))
    return out


def chase(gates: dict, clauses, universe: dict, max_rounds: int = 100) -> dict:
    """Least set of (prop -> keys of witness vectors) closed under the clauses.

    Universal clauses are instantiated over ``universe`` (the depth-bounded
    term values), exactly as a depth-bounded Herbrand chase does.
    """
    facts: dict = {}

    def add(p, v):
        bucket = facts.setdefault(p, {})
        if _key(v) not in bucket:
            bucket[_key(v)] = v
            return True
        return False

    def has(p, v):
        return _key(v) in facts.get(p, {})

    for _ in range(max_rounds):
        changed = False
        for c in clauses:
            kind = c[0]
            if kind == "fact":
                changed |= add(c[2], _term_value(c[1], gates))
            elif kind == "box":
                changed |= add(c[3], gates[c[2]] @ _term_value(c[1], gates))
            elif kind == "step":
                _, p, g, q = c
                for v, _d in list(universe.values()):
                    if has(p, v):
                        changed |= add(q, gates[g] @ v)
            elif kind == "both":
                _, p, q, r = c
                for v, _d in list(universe.values()):
                    if has(p, v) and has(q, v):
                        changed |= add(r, v)
        if not changed:
            return facts
    raise RuntimeError("chase did not converge")


def brute_force_answers(gates: dict, facts: dict, query, universe: dict) -> list[int]:
    """Depths of every universe value satisfying the query body."""
    def has(p, v):
        return _key(v) in facts.get(p, {})

    hits = []
    for v, d in universe.values():
        kind = query[0]
        if kind == "at":
            ok = has(query[1], v)
        elif kind == "both":
            ok = has(query[1], v) and has(query[2], v)
        else:
            ok = has(query[2], gates[query[1]] @ v)
        if ok:
            hits.append(d)
    return hits
