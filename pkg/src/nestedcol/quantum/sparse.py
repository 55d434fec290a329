"""Sparse exact simulation of compressed-oracle circuits.

Basis labels are ``(x, u, r, d)`` where ``d`` lists the database cells of a
fixed set of tracked points (``N`` stands for the empty symbol). Only labels
with nonzero amplitude are stored, which keeps M=8, N=16 circuits cheap since
the database support never exceeds the number of queries.
"""

from __future__ import annotations

from collections import defaultdict

import numpy as np

from .dense import _hadamard, _sign_table, std_decomp_cell

__all__ = ["SparseState", "standard_query_columns", "PRUNE"]

PRUNE = 1e-13


def standard_query_columns(N: int) -> dict[tuple[int, int], list[tuple[int, int, complex]]]:
    """Columns of one query on a single (U, cell) pair, as V.CPhO.V.

    Returned as ``{(u, d): [(u', d', amplitude), ...]}``.
    """
    sd = std_decomp_cell(N)
    S = _sign_table(N)
    n = N * (N + 1)
    cpho = np.zeros((n, n))
    for u in range(N):
        ph = np.ones(N + 1)
        ph[:N] = S[u]
        block = sd @ np.diag(ph) @ sd
        cpho[u * (N + 1) : (u + 1) * (N + 1), u * (N + 1) : (u + 1) * (N + 1)] = block
    V = np.kron(_hadamard(N), np.eye(N + 1))
    Q = V @ cpho @ V
    cols = {}
    for u in range(N):
        for d in range(N + 1):
            c = Q[:, u * (N + 1) + d]
            nz = np.nonzero(np.abs(c) > 1e-15)[0]
            cols[(u, d)] = [(int(i) // (N + 1), int(i) % (N + 1), float(c[i])) for i in nz]
    return cols


class SparseState:
    def __init__(self, N: int, cells, amps=None):
        self.N = N
        self.cells = tuple(cells)
        self.pos = {x: i for i, x in enumerate(self.cells)}
        self.amps: dict[tuple, complex] = dict(amps or {})
        self._cols = None

    @classmethod
    def basis(cls, N: int, cells, x: int = 0, u: int = 0, r: int = 0) -> "SparseState":
        st = cls(N, cells)
        st.amps[(x, u, r, (N,) * len(st.cells))] = 1.0
        return st

    def _new(self, amps) -> "SparseState":
        out = SparseState(self.N, self.cells)
        out._cols = self._cols
        out.amps = {k: v for k, v in amps.items() if abs(v) > PRUNE}
        return out

    def norm(self) -> float:
        return float(np.sqrt(sum(abs(a) ** 2 for a in self.amps.values())))

    def query(self) -> "SparseState":
        """Standard-form compressed query on the cell named by X."""
        if self._cols is None:
            self._cols = standard_query_columns(self.N)
        out = defaultdict(complex)
        for (x, u, r, d), a in self.amps.items():
            c = self.pos[x]
            head, tail = d[:c], d[c + 1 :]
            for u2, d2, coef in self._cols[(u, d[c])]:
                out[(x, u2, r, head + (d2,) + tail)] += a * coef
        return self._new(out)

    def phase(self, pred) -> "SparseState":
        return self._new({k: (-a if pred(k) else a) for k, a in self.amps.items()})

    def relabel(self, fn) -> "SparseState":
        """Apply a basis permutation given as a function on labels."""
        out = {}
        for k, a in self.amps.items():
            k2 = fn(k)
            if k2 in out:
                raise ValueError("relabel is not injective on the support")
            out[k2] = a
        return self._new(out)

    def x_unitary(self, points, U: np.ndarray) -> "SparseState":
        """Unitary ``U`` on X restricted to ``points`` (X must stay inside them)."""
        idx = {x: i for i, x in enumerate(points)}
        groups = defaultdict(lambda: np.zeros(len(points), dtype=complex))
        for (x, u, r, d), a in self.amps.items():
            groups[(u, r, d)][idx[x]] += a
        out = {}
        for (u, r, d), vec in groups.items():
            new = U @ vec
            for i, v in enumerate(new):
                if abs(v) > PRUNE:
                    out[(points[i], u, r, d)] = v
        return self._new(out)

    def probability(self, weight) -> float:
        """Sum of |amp|^2 * weight(label)."""
        return float(sum(abs(a) ** 2 * weight(k) for k, a in self.amps.items()))

    def expected_nonempty(self) -> float:
        N = self.N
        return self.probability(lambda k: sum(v != N for v in k[3]))

    def max_db_size(self) -> int:
        N = self.N
        return max((sum(v != N for v in k[3]) for k in self.amps), default=0)
