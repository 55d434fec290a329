"""Success probability versus database capacity for a labelled collision finder.

The algorithm under test is a small BHT-style finder. It queries ``k`` points
classically into a table, runs ``g`` Grover iterations over the remaining
points with the same label (marking answers that hit a table value), then
makes one last query and writes the pair (table point, query point) to R
when the answer matches. Its query count is T = k + 2g + 1.

Success is measured with the collision projector on the compressed database:
R names two distinct points, both carry the target label, and their database
entries agree and are non-empty. Capacity V is the mean, over the T queries,
of the expected number of non-empty target-label entries.

``reduced`` runs the table phase by exact bookkeeping rather than coherently:
the table values in W are only ever used as controls, so they may be measured
straight away (deferred measurement), outcomes only matter up to their
equality pattern (the oracle law is invariant under relabelling values), and
each table cell stays in the product state StdDecomp|w> because it is never
queried again. ``coherent`` simulates the same circuit densely without any of
that and is used to check the reduction at small M.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .dense import (
    RegisterLayout,
    apply_alg_perm,
    apply_alg_phase,
    apply_x_matrix,
    basis_state,
    expected_db_size,
    phase_query,
)
from .sparse import SparseState

__all__ = [
    "CapacityPoint",
    "schedule",
    "bht_reduced",
    "bht_coherent",
    "collision_capacity_check",
    "label_points",
]


@dataclass(frozen=True)
class CapacityPoint:
    M: int
    N0: int
    T: int
    label: str
    p: float
    V: float
    V_steps: tuple = field(default=())
    const: float = 20.0

    @property
    def bound(self) -> float:
        return self.const * self.T**2 * self.V / self.N0

    @property
    def holds(self) -> bool:
        return self.p <= self.bound

    @property
    def ratio(self) -> float:
        return self.p / (self.T**2 * self.V) if self.V > 0 else 0.0


def schedule(T: int) -> tuple[int, int]:
    """(table queries k, Grover iterations g) with k + 2g + 1 = T."""
    if T < 1:
        raise ValueError("T must be >= 1")
    if T <= 3:
        return T - 1, 0
    g = (T - 2) // 2
    return T - 1 - 2 * g, g


def label_points(M: int, label: str) -> list[int]:
    """Points carrying the target label: all of [M], or the even ones."""
    if label == "trivial":
        return list(range(M))
    if label == "parity":
        return list(range(0, M, 2))
    raise ValueError(f"unknown label {label!r}")


def _partitions(k: int):
    """Restricted growth strings of length k (one per equality pattern)."""
    if k == 0:
        yield ()
        return
    for head in _partitions(k - 1):
        for v in range(max(head, default=-1) + 2):
            yield head + (v,)


def _diffusion(n: int) -> np.ndarray:
    return 2.0 / n * np.ones((n, n)) - np.eye(n)


def bht_reduced(M: int, N0: int, T: int, label: str = "trivial") -> CapacityPoint:
    k, g = schedule(T)
    pts = label_points(M, label)
    if k >= len(pts):
        raise ValueError("not enough labelled points for the table")
    table, search = pts[:k], pts[k:]
    n = len(search)
    nonempty = 1.0 - 1.0 / N0
    # table cell in state StdDecomp|w>: Pr[cell = v] for v != bot
    same, other = (1 - 1 / N0) ** 2, 1 / N0**2

    p_total = 0.0
    V_total = np.zeros(T)
    for ws in _partitions(k):
        blocks = len(set(ws))
        weight = math.perm(N0, blocks) / N0**k
        V = [nonempty * (i + 1) for i in range(k)]
        st = SparseState(N0, search)
        st.amps = {(x, 0, 0, (N0,) * n): 1 / math.sqrt(n) for x in search}
        table_vals = set(ws)
        for _ in range(g):
            st = st.query()
            V.append(k * nonempty + st.expected_nonempty())
            st = st.phase(lambda key: key[1] in table_vals)
            st = st.query()
            V.append(k * nonempty + st.expected_nonempty())
            st = st.x_unitary(search, _diffusion(n))
        st = st.query()
        V.append(k * nonempty + st.expected_nonempty())

        def write(key):
            x, u, r, d = key
            for j, w in enumerate(ws):
                if u == w:
                    return (x, u, (r + table[j] * M + x) % (M * M), d)
            return key

        st = st.relabel(write)
        pos = st.pos

        def success(key):
            r1, r2 = divmod(key[2], M)
            if key[2] == 0 or r1 == r2:
                return 0.0
            j = table.index(r1)
            v = key[3][pos[r2]]
            if v == N0:
                return 0.0
            return same if v == ws[j] else other

        p_total += weight * st.probability(success)
        V_total += weight * np.asarray(V)
    return CapacityPoint(M, N0, T, label, float(p_total), float(V_total.mean()), tuple(V_total))


def bht_coherent(M: int, N0: int, T: int, label: str = "trivial") -> CapacityPoint:
    """The same circuit as ``bht_reduced`` with every register kept quantum."""
    k, g = schedule(T)
    pts = label_points(M, label)
    table, search = pts[:k], pts[k:]
    mask = [x in pts for x in range(M)]
    L = RegisterLayout(M, N0, w=N0**k, r=M * M, mode="compressed")
    sv = basis_state(L)
    V = []

    def digits(w):
        return [(w // N0**j) % N0 for j in range(k)]

    def move_x(a, b):
        return lambda x, u, w, r: ((b if x == a else a if x == b else x), u, w, r)

    cur = 0
    for j, t in enumerate(table):
        sv = apply_alg_perm(sv, move_x(cur, t))
        cur = t
        sv = phase_query(sv)
        V.append(expected_db_size(sv, mask))

        def swap(x, u, w, r, j=j):
            dj = digits(w)[j]
            return x, dj, w + (u - dj) * N0**j, r

        sv = apply_alg_perm(sv, swap)
    sv = apply_alg_perm(sv, move_x(cur, search[0]))
    s = np.zeros(M)
    s[search] = 1 / math.sqrt(len(search))
    e = np.zeros(M)
    e[search[0]] = 1.0
    v = e - s
    prep = np.eye(M) - 2 * np.outer(v, v) / (v @ v) if v @ v > 1e-12 else np.eye(M)
    sv = apply_x_matrix(sv, prep)
    Pm = np.zeros((M, M))
    Pm[search, search] = 1.0
    diff = 2 * np.outer(s, s) - Pm + (np.eye(M) - Pm)
    for _ in range(g):
        sv = phase_query(sv)
        V.append(expected_db_size(sv, mask))
        sv = apply_alg_phase(sv, lambda x, u, w, r: u in digits(w))
        sv = phase_query(sv)
        V.append(expected_db_size(sv, mask))
        sv = apply_x_matrix(sv, diff)
    sv = phase_query(sv)
    V.append(expected_db_size(sv, mask))

    def write(x, u, w, r):
        for j, dj in enumerate(digits(w)):
            if u == dj:
                return x, u, w, (r + table[j] * M + x) % (M * M)
        return x, u, w, r

    sv = apply_alg_perm(sv, write)
    probs = np.abs(sv.amps) ** 2
    p = 0.0
    for r in range(1, M * M):
        r1, r2 = divmod(r, M)
        if r1 == r2 or not (mask[r1] and mask[r2]):
            continue
        sub = probs[:, :, :, r].sum(axis=(0, 1, 2))
        sub = np.moveaxis(sub, (r1, r2), (0, 1)).reshape(N0 + 1, N0 + 1, -1).sum(axis=2)
        p += float(np.trace(sub[:N0, :N0]))
    return CapacityPoint(M, N0, T, label, p, float(np.mean(V)), tuple(V))


def collision_capacity_check(M: int, N0s, Ts, labels=("trivial", "parity"), const: float = 20.0, method=bht_reduced):
    """Evaluate the finder on a grid; each point carries ``holds`` for p <= const*T^2*V/N0."""
    out = []
    for label in labels:
        for N0 in N0s:
            for T in Ts:
                pt = method(M, N0, T, label)
                out.append(CapacityPoint(pt.M, pt.N0, pt.T, pt.label, pt.p, pt.V, pt.V_steps, const))
    return out
