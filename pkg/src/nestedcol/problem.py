"""Valid tuples, witness checking and same-sum enumeration.

A valid tuple is a strictly increasing sequence of ``ell`` points of [M].
Two distinct valid tuples whose H-sums are both ``y`` (mod N) and whose
G-values agree form a nested collision.
"""

from __future__ import annotations

import csv
import io
import json
from collections import defaultdict
from dataclasses import dataclass
from itertools import combinations
from math import comb

import numpy as np

from .oracle import (
    OracleInstance,
    OracleParams,
    ParameterError,
    QueryLedger,
    make_instance,
    query_h,
    tuple_index,
)

__all__ = [
    "TupleError",
    "CollisionWitness",
    "TupleSumIndex",
    "validate_tuple",
    "tuple_sum",
    "verify_witness",
    "enumerate_same_sum_tuples",
    "count_same_sum",
    "count_statistics",
    "same_sum_count",
    "CountStats",
    "write_enumeration_csv",
]


class TupleError(ValueError):
    """A tuple violates the strictly-increasing / arity / range contract."""


def validate_tuple(t, ell: int, M: int) -> tuple[int, ...]:
    t = tuple(int(v) for v in t)
    if len(t) != ell:
        raise TupleError(f"expected {ell} points, got {len(t)}")
    if any(not 0 <= v < M for v in t):
        raise TupleError(f"tuple {t} leaves [0, {M})")
    if any(a >= b for a, b in zip(t, t[1:])):
        raise TupleError(f"tuple {t} is not strictly increasing")
    return t


def tuple_sum(inst: OracleInstance, ledger: QueryLedger, t) -> int:
    p = inst.params
    t = validate_tuple(t, p.ell, p.M)
    return sum(query_h(inst, ledger, x) for x in t) % p.N


@dataclass(frozen=True)
class CollisionWitness:
    a: tuple[int, ...]
    b: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "a", tuple(self.a))
        object.__setattr__(self, "b", tuple(self.b))

    def to_json(self, inst: OracleInstance) -> str:
        gval = inst.peek_g(tuple_index(self.a, inst.params.M))
        return json.dumps({"a": list(self.a), "b": list(self.b), "y": inst.params.y, "gval": gval})

    @classmethod
    def from_json(cls, text: str) -> "CollisionWitness":
        obj = json.loads(text)
        return cls(tuple(obj["a"]), tuple(obj["b"]))


def verify_witness(inst: OracleInstance, w: CollisionWitness) -> bool:
    """Check both sums hit y and G agrees; charges nothing."""
    p = inst.params
    try:
        a = validate_tuple(w.a, p.ell, p.M)
        b = validate_tuple(w.b, p.ell, p.M)
    except TupleError:
        return False
    if a == b:
        return False
    for t in (a, b):
        if sum(inst.peek_h(x) for x in t) % p.N != p.y:
            return False
    return inst.peek_g(tuple_index(a, p.M)) == inst.peek_g(tuple_index(b, p.M))


def _colex_key(t):
    return tuple(reversed(t))


def enumerate_same_sum_tuples(inst: OracleInstance, points, y: int, ledger: QueryLedger | None = None):
    """Brute force over all ell-subsets of ``points``, colexicographic order.

    Each point's H value is fetched once (and charged once if a ledger is given).
    """
    p = inst.params
    pts = sorted(set(points))
    if len(pts) < p.ell:
        return []
    led = ledger if ledger is not None else QueryLedger()
    hv = {x: query_h(inst, led, x) for x in pts}
    out = [t for t in combinations(pts, p.ell) if sum(hv[x] for x in t) % p.N == y]
    out.sort(key=_colex_key)
    return out


def write_enumeration_csv(tuples, inst: OracleInstance, stream=None) -> str:
    """Stream tuples as CSV rows ``sum,x1..xl``; returns the text if no stream."""
    p = inst.params
    buf = stream if stream is not None else io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["sum"] + [f"x{i + 1}" for i in range(p.ell)])
    for t in tuples:
        w.writerow([sum(inst.peek_h(x) for x in t) % p.N, *t])
    return buf.getvalue() if stream is None else ""


class TupleSumIndex:
    """Incremental index of subset sums over a growing point set.

    Partial j-subsets (j < ell) are kept grouped by residue so adding a point
    finds every new complete ell-tuple with a tracked sum in time linear in
    the number of (ell-1)-subsets. Complete tuples are only stored for the
    residues in ``targets`` (all residues if None), since storing every
    ell-tuple would be quadratic or worse.
    """

    def __init__(self, ell: int, N: int, targets=None):
        if ell < 1:
            raise ParameterError("ell must be >= 1")
        self.ell = ell
        self.N = N
        self.targets = None if targets is None else set(targets)
        # partial[j][r] -> list of sorted j-tuples summing to r
        self.partial = [defaultdict(list) for _ in range(ell)]
        self.partial[0][0].append(())
        self.by_sum: dict[int, list[tuple[int, ...]]] = defaultdict(list)
        self.values: dict[int, int] = {}

    def add_point(self, x: int, h: int) -> list[tuple[int, ...]]:
        """Insert point ``x`` with value ``h``; return the new tracked ell-tuples."""
        if x in self.values:
            return []
        self.values[x] = h
        N, ell = self.N, self.ell
        new = []
        top = self.partial[ell - 1]
        residues = self.targets if self.targets is not None else range(N)
        for r in residues:
            need = (r - h) % N
            for t in top.get(need, ()):
                full = tuple(sorted(t + (x,)))
                new.append(full)
                self.by_sum[r].append(full)
        for j in range(ell - 1, 0, -1):
            dst = self.partial[j]
            for r, lst in list(self.partial[j - 1].items()):
                rr = (r + h) % N
                dst[rr].extend(tuple(sorted(t + (x,))) for t in lst)
        return new

    def tuples(self, r: int) -> list[tuple[int, ...]]:
        return sorted(self.by_sum.get(r, []), key=_colex_key)


def count_same_sum(values, ell: int, N: int) -> np.ndarray:
    """Histogram over residues of the sums of all ell-subsets of ``values``.

    Subset-sum DP: ``dp[j][r]`` counts j-subsets with sum r. Exact integers.
    """
    dp = np.zeros((ell + 1, N), dtype=object)
    dp[0, 0] = 1
    for v in values:
        v = int(v) % N
        for j in range(ell, 0, -1):
            dp[j] = dp[j] + np.roll(dp[j - 1], v)
    return dp[ell]


def _count_same_sum_fast(values: np.ndarray, ell: int, N: int) -> np.ndarray:
    # float64 is exact up to 2^53, ample for the tuple counts used here
    dp = np.zeros((ell + 1, N))
    dp[0, 0] = 1.0
    for v in values:
        v = int(v)
        for j in range(ell, 0, -1):
            dp[j] += np.roll(dp[j - 1], v)
    return dp[ell]


def _pair_count(values: np.ndarray, N: int, y: int) -> int:
    hist = np.bincount(values, minlength=N)
    r = np.arange(N)
    ordered = int(hist @ hist[(y - r) % N])
    diag = int(hist[(2 * r) % N == y].sum())
    return (ordered - diag) // 2


def same_sum_count(inst: OracleInstance, T_points: int) -> int:
    """Number of ell-subsets of points 0..T-1 whose H-sum is y."""
    p = inst.params
    vals = np.fromiter((inst.peek_h(x) for x in range(T_points)), dtype=np.int64, count=T_points)
    if p.ell == 2:
        return _pair_count(vals, p.N, p.y)
    return int(_count_same_sum_fast(vals, p.ell, p.N)[p.y])


@dataclass(frozen=True)
class CountStats:
    mean: float
    variance: float
    tail_freq: float
    expected_mean: float
    expected_variance: float
    counts: tuple


def count_statistics(T_points: int, trials: int, params: OracleParams) -> CountStats:
    """Monte Carlo over fresh instances of the number of same-sum-y tuples.

    Trial i uses seed ``params.seed + i`` and queries points 0..T-1; the
    tail frequency is that of K <= C(T, ell)/(2N).
    """
    if trials < 1:
        raise ParameterError("trials must be >= 1")
    if T_points > params.M:
        raise ParameterError(f"T={T_points} exceeds M={params.M}")
    ell, N, y = params.ell, params.N, params.y
    expected = comb(T_points, ell) / N
    counts = [
        same_sum_count(make_instance(OracleParams(params.M, N, params.N0, ell, y, params.seed + i)), T_points)
        for i in range(trials)
    ]
    arr = np.asarray(counts, dtype=float)
    var = float(arr.var(ddof=1)) if trials > 1 else 0.0
    return CountStats(
        mean=float(arr.mean()),
        variance=var,
        tail_freq=float(np.mean(arr <= expected / 2)),
        expected_mean=expected,
        expected_variance=comb(T_points, ell) * (N - 1) / N**2,
        counts=tuple(counts),
    )
