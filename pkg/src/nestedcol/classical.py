"""Classical algorithms: the unbounded-space two-step solver, a segmented
executor with write-only FLIP output, and the same-sum tail bound.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from itertools import combinations
from typing import Protocol

import numpy as np

from .oracle import (
    FlipMemory,
    OracleInstance,
    ParameterError,
    QueryLedger,
    flip,
    index_tuple,
    query_g,
    query_h,
    tuple_index,
)
from .problem import CollisionWitness, TupleSumIndex, verify_witness

__all__ = [
    "RegimeWarning",
    "SpaceViolation",
    "SolverConfig",
    "SolveResult",
    "default_config",
    "solve_unbounded",
    "SegmentPlan",
    "SegmentOracle",
    "SegmentStrategy",
    "RestartBirthday",
    "CarryPoints",
    "CapacityTrace",
    "run_segmented",
    "run_unsegmented",
    "same_sum_capacity",
    "classical_tuple_tail",
    "tail_frequency_mc",
    "UNBOUNDED",
]

UNBOUNDED = math.inf


class RegimeWarning(UserWarning):
    """Parameters fall outside the regime where an asymptotic statement applies."""


class SpaceViolation(RuntimeError):
    def __init__(self, segment: int, bits: int, limit: float):
        super().__init__(f"segment {segment}: carried state of {bits} bits exceeds s_bits={limit}")
        self.segment = segment
        self.bits = bits
        self.limit = limit


# --------------------------------------------------------------------------
# unbounded two-step solver


@dataclass(frozen=True)
class SolverConfig:
    k_target: int
    t1: int
    seed: int = 0

    def validate(self, ell: int) -> None:
        if self.k_target < 1:
            raise ParameterError("k_target must be >= 1")
        if self.t1 < ell:
            raise ParameterError(f"t1={self.t1} is below ell={ell}")


@dataclass
class SolveResult:
    witness: CollisionWitness | None
    ledger: QueryLedger
    tuples_found: int = 0

    @property
    def success(self) -> bool:
        return self.witness is not None


def default_config(N: int, N0: int, ell: int, seed: int = 0, k_factor: float = 1.2, t1_margin: float = 1.25) -> SolverConfig:
    """Budget choice: K = k_factor*sqrt(N0) tuples, and enough H queries to
    expect K same-sum tuples, i.e. C(t1, ell)/N ~ K, inflated by ``t1_margin``.
    """
    k = max(1, math.ceil(k_factor * math.sqrt(N0)))
    t1 = math.ceil(t1_margin * (math.factorial(ell) * k * N) ** (1.0 / ell)) + ell
    return SolverConfig(k_target=k, t1=t1, seed=seed)


def solve_unbounded(inst: OracleInstance, cfg: SolverConfig) -> SolveResult:
    """Step 1: query fresh random points until ``k_target`` tuples with sum y
    are known (or t1 runs out). Step 2: query G on each and stop at the first
    repeated value.
    """
    p = inst.params
    cfg.validate(p.ell)
    if p.ell > 1 and p.N0 > p.N ** (2 / (p.ell - 1)) * 1.0000001:
        warnings.warn(
            f"N0={p.N0} exceeds N^(2/(ell-1)); query count leaves the optimal regime",
            RegimeWarning,
            stacklevel=2,
        )
    rng = np.random.default_rng(cfg.seed)
    ledger = QueryLedger()
    index = TupleSumIndex(p.ell, p.N, targets=(p.y,))
    found: list[tuple[int, ...]] = []
    budget = min(cfg.t1, p.M)
    seen: set[int] = set()
    while ledger.t_h < budget and len(found) < cfg.k_target:
        x = int(rng.integers(p.M))
        if x in seen:
            continue
        seen.add(x)
        found.extend(index.add_point(x, query_h(inst, ledger, x)))
    found = found[: cfg.k_target]

    by_g: dict[int, tuple[int, ...]] = {}
    for t in found:
        g = query_g(inst, ledger, tuple_index(t, p.M))
        prev = by_g.get(g)
        if prev is not None:
            w = CollisionWitness(prev, t)
            assert verify_witness(inst, w)
            return SolveResult(w, ledger, len(found))
        by_g[g] = t
    return SolveResult(None, ledger, len(found))


# --------------------------------------------------------------------------
# segmented executor


@dataclass(frozen=True)
class SegmentPlan:
    L: int
    t_prime: int
    s_bits: float = UNBOUNDED

    def validate(self, N: int) -> None:
        if self.L < 1 or self.t_prime < 1:
            raise ParameterError("L and t_prime must be positive")
        if self.s_bits < math.ceil(math.log2(N)):
            raise ParameterError(f"s_bits={self.s_bits} cannot even hold a target in [N]")

    @property
    def total_budget(self) -> int:
        return self.L * self.t_prime


class SegmentOracle:
    """What a strategy sees during one segment: metered H, FLIP, and coins."""

    def __init__(self, inst: OracleInstance, mem: FlipMemory, ledger: QueryLedger, budget: int, rng):
        self._inst = inst
        self._mem = mem
        self._ledger = ledger
        self._budget = budget
        self.used = 0
        self.declared: set[int] = set()
        self.rng = rng
        self.params = inst.params

    @property
    def remaining(self) -> int:
        return self._budget - self.used

    def query_h(self, x: int) -> int:
        if self.used >= self._budget:
            raise RuntimeError("segment query budget exhausted")
        self.used += 1
        self.declared.add(x)
        return query_h(self._inst, self._ledger, x)

    def flip(self, t) -> int:
        return flip(self._mem, self._ledger, tuple_index(t, self.params.M))


class SegmentStrategy(Protocol):
    def initial_state(self, inst: OracleInstance) -> bytes: ...

    def run_segment(self, state: bytes, oracle: SegmentOracle) -> bytes: ...


def _fresh_points(oracle: SegmentOracle, count: int, avoid=()) -> list[tuple[int, int]]:
    M = oracle.params.M
    out = []
    taken = set(avoid)
    while len(out) < count:
        x = int(oracle.rng.integers(M))
        if x in taken:
            continue
        taken.add(x)
        out.append((x, oracle.query_h(x)))
    return out


class RestartBirthday:
    """Forget everything at each boundary: carried state is (y, counter), 64 bits."""

    def initial_state(self, inst: OracleInstance) -> bytes:
        return inst.params.y.to_bytes(4, "little") + (0).to_bytes(4, "little")

    def run_segment(self, state: bytes, oracle: SegmentOracle) -> bytes:
        y = int.from_bytes(state[:4], "little")
        seg = int.from_bytes(state[4:8], "little")
        p = oracle.params
        idx = TupleSumIndex(p.ell, p.N, targets=(y,))
        for x, h in _fresh_points(oracle, oracle.remaining):
            for t in idx.add_point(x, h):
                oracle.flip(t)
        return y.to_bytes(4, "little") + (seg + 1).to_bytes(4, "little")


class CarryPoints:
    """Carry as many (point, value) pairs as the space bound allows and pair
    new points against them in the next segment. Only tuples with at least
    one new point are flipped, so no bit is toggled twice.
    """

    def __init__(self, s_bits: float):
        self.s_bits = s_bits

    def _layout(self, p):
        xb = max(1, (p.M - 1).bit_length())
        vb = max(1, (p.N - 1).bit_length())
        # state is byte-packed, so only whole bytes of the budget are usable
        cap = 0 if self.s_bits == UNBOUNDED else int(8 * ((self.s_bits - 64) // 8) // (xb + vb))
        return xb, vb, cap

    def initial_state(self, inst: OracleInstance) -> bytes:
        return inst.params.y.to_bytes(4, "little") + (0).to_bytes(4, "little")

    def _unpack(self, state: bytes, p):
        xb, vb, _ = self._layout(p)
        y = int.from_bytes(state[:4], "little")
        n = int.from_bytes(state[4:8], "little")
        blob = int.from_bytes(state[8:], "little")
        pts = []
        for _ in range(n):
            x = blob & ((1 << xb) - 1)
            blob >>= xb
            h = blob & ((1 << vb) - 1)
            blob >>= vb
            pts.append((x, h))
        return y, pts

    def _pack(self, y: int, pts, p) -> bytes:
        xb, vb, _ = self._layout(p)
        blob = 0
        for x, h in reversed(pts):
            blob = (blob << vb | h) << xb | x
        nbytes = (len(pts) * (xb + vb) + 7) // 8
        return y.to_bytes(4, "little") + len(pts).to_bytes(4, "little") + blob.to_bytes(nbytes, "little")

    def run_segment(self, state: bytes, oracle: SegmentOracle) -> bytes:
        p = oracle.params
        _, _, cap = self._layout(p)
        if self.s_bits == UNBOUNDED:
            cap = None
        y, carried = self._unpack(state, p)
        idx = TupleSumIndex(p.ell, p.N, targets=(y,))
        for x, h in carried:
            idx.add_point(x, h)
        new = _fresh_points(oracle, oracle.remaining, avoid=[x for x, _ in carried])
        for x, h in new:
            for t in idx.add_point(x, h):
                oracle.flip(t)
        pool = carried + new
        keep = pool if cap is None else pool[len(pool) - cap:] if cap > 0 else []
        return self._pack(y, keep, p)


@dataclass
class CapacityTrace:
    capacity: list[int] = field(default_factory=list)
    state_bits: list[int] = field(default_factory=list)
    ledger: QueryLedger = field(default_factory=QueryLedger)
    declared: set = field(default_factory=set)

    @property
    def final(self) -> int:
        return self.capacity[-1] if self.capacity else 0


def same_sum_capacity(inst: OracleInstance, mem: FlipMemory, declared) -> int:
    """Largest number of set FLIP bits whose tuples share one H-sum.

    Tuples touching a point the strategy never queried are not credited.
    """
    p = inst.params
    per_sum: dict[int, int] = {}
    for idx in mem.flipped:
        t = index_tuple(idx, p.M, p.ell)
        if any(a >= b for a, b in zip(t, t[1:])) or not all(x in declared for x in t):
            continue
        s = sum(inst.peek_h(x) for x in t) % p.N
        per_sum[s] = per_sum.get(s, 0) + 1
    return max(per_sum.values(), default=0)


def run_segmented(strategy, plan: SegmentPlan, inst: OracleInstance, mem: FlipMemory, seed: int = 0) -> CapacityTrace:
    """Run ``plan.L`` segments of ``plan.t_prime`` H queries each.

    Only the bytes returned by ``run_segment`` cross a boundary; their bit
    length is checked against ``plan.s_bits`` and a breach aborts the run.
    """
    plan.validate(inst.params.N)
    trace = CapacityTrace()
    trace.ledger.s_bits = plan.s_bits
    state = strategy.initial_state(inst)
    seeds = np.random.SeedSequence(seed).spawn(plan.L)
    for seg in range(plan.L):
        bits = 8 * len(state)
        if bits > plan.s_bits:
            raise SpaceViolation(seg, bits, plan.s_bits)
        oracle = SegmentOracle(inst, mem, trace.ledger, plan.t_prime, np.random.default_rng(seeds[seg]))
        state = bytes(strategy.run_segment(bytes(state), oracle))
        trace.declared |= oracle.declared
        trace.state_bits.append(8 * len(state))
        trace.capacity.append(same_sum_capacity(inst, mem, trace.declared))
    if 8 * len(state) > plan.s_bits:
        raise SpaceViolation(plan.L, 8 * len(state), plan.s_bits)
    return trace


def run_unsegmented(strategy, total: int, inst: OracleInstance, mem: FlipMemory, seed: int = 0) -> CapacityTrace:
    return run_segmented(strategy, SegmentPlan(1, total, UNBOUNDED), inst, mem, seed)


# --------------------------------------------------------------------------
# same-sum tail bound


def classical_tuple_tail(T: int, K: int, ell: int, N: int, const: float = 1.0) -> float:
    """(const * T^ell / (K^(1/ell) N)) ^ (K^(1/ell)), capped at 1."""
    if K < 1 or T < 0 or ell < 1 or N < 1:
        raise ParameterError("need K >= 1, T >= 0, ell >= 1, N >= 1")
    if K < math.log(N) ** ell:
        warnings.warn(f"K={K} below (log N)^ell; tail bound outside its stated regime", RegimeWarning, stacklevel=2)
    r = K ** (1.0 / ell)
    base = const * T**ell / (r * N)
    return min(1.0, base**r)


def tail_frequency_mc(T: int, K: int, ell: int, N: int, trials: int, seed: int = 0, target: int | None = None) -> float:
    """Frequency with which T uniform queries yield K tuples sharing one sum.

    With ``target`` set, only tuples summing to it count; otherwise the
    most popular residue is used (the algorithm may pick its own sum).
    """
    rng = np.random.default_rng(seed)
    subsets = np.array(list(combinations(range(T), ell)), dtype=np.int64)
    hits = 0
    chunk = max(1, 2_000_000 // max(1, len(subsets)))
    done = 0
    while done < trials:
        n = min(chunk, trials - done)
        vals = rng.integers(0, N, size=(n, T))
        sums = vals[:, subsets].sum(axis=2) % N
        if target is not None:
            best = (sums == target).sum(axis=1)
        else:
            flat = (sums + N * np.arange(n)[:, None]).ravel()
            best = np.bincount(flat, minlength=n * N).reshape(n, N).max(axis=1)
        hits += int((best >= K).sum())
        done += n
    return hits / trials
