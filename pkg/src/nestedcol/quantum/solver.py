"""Toy-scale quantum nested-collision solver.

Steps 1 to 3 are classical sampling: collect same-sum tuples, read their
G values, then query a fresh batch of H points whose (ell-1)-subsets serve
as prefixes. Step 4 is a simulated Grover search over the last tuple element
for a tuple that hits y, extends a step-3 prefix, and collides on G with a
step-2 tuple.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from ..oracle import OracleInstance, ParameterError, QueryLedger, query_g, query_h, tuple_index
from ..problem import CollisionWitness, TupleSumIndex, verify_witness
from .grover import grover_search, optimal_iterations

__all__ = ["QuantumToyParams", "QuantumSolveResult", "run_quantum_solver", "default_toy_params", "TOY_LIMITS"]

TOY_LIMITS = {"M": 32, "N": 32}


@dataclass(frozen=True)
class QuantumToyParams:
    t1: int
    k_target: int
    t3: int
    seed: int = 0


@dataclass
class QuantumSolveResult:
    witness: CollisionWitness | None
    counts: dict = field(default_factory=dict)
    success_probability: float = 0.0
    marked: int = 0

    @property
    def success(self) -> bool:
        return self.witness is not None


def run_quantum_solver(inst: OracleInstance, toy: QuantumToyParams) -> QuantumSolveResult:
    p = inst.params
    if p.M > TOY_LIMITS["M"] or p.N > TOY_LIMITS["N"] or p.ell < 2:
        raise ParameterError(f"toy regime needs M, N <= 32 and ell >= 2 (got M={p.M}, N={p.N}, ell={p.ell})")
    if toy.t1 + toy.t3 > p.M:
        raise ParameterError("t1 + t3 exceeds the domain")
    rng = np.random.default_rng(toy.seed)
    order = [int(v) for v in rng.permutation(p.M)]
    led1, led2, led3 = QueryLedger(), QueryLedger(), QueryLedger()
    counts = {"T1": 0, "T2": 0, "T3": 0, "T4": 0}

    # step 1
    idx = TupleSumIndex(p.ell, p.N, targets=(p.y,))
    found: list[tuple[int, ...]] = []
    step1 = order[: toy.t1]
    for x in step1:
        if len(found) >= toy.k_target:
            break
        found.extend(idx.add_point(x, query_h(inst, led1, x)))
    found = found[: toy.k_target]
    counts["T1"] = led1.t_h

    # step 2
    g_of: dict[int, tuple[int, ...]] = {}
    for t in found:
        g = query_g(inst, led2, tuple_index(t, p.M))
        if g in g_of:
            counts["T2"] = led2.t_g
            w = CollisionWitness(g_of[g], t)
            assert verify_witness(inst, w)
            return QuantumSolveResult(w, counts, 1.0, 0)
        g_of[g] = t
    counts["T2"] = led2.t_g

    # step 3
    pts3 = order[toy.t1 : toy.t1 + toy.t3]
    h3 = {x: query_h(inst, led3, x) for x in pts3}
    counts["T3"] = led3.t_h
    prefixes = list(combinations(sorted(pts3), p.ell - 1))
    if not prefixes or not g_of:
        return QuantumSolveResult(None, counts)

    # step 4: truth table of the search predicate over the last element
    def hit(x: int):
        hx = inst.peek_h(x)
        for pre in prefixes:
            if x <= pre[-1]:
                continue
            if (sum(h3[q] for q in pre) + hx) % p.N != p.y:
                continue
            t = pre + (x,)
            other = g_of.get(inst.peek_g(tuple_index(t, p.M)))
            if other is not None and other != t:
                return CollisionWitness(other, t)
        return None

    hits = [hit(x) for x in range(p.M)]
    marked = np.array([h is not None for h in hits])
    est = p.M * (len(prefixes) / p.N) * (len(g_of) / p.N0)
    iters = optimal_iterations(p.M, max(est, 1e-9)) if est > 0 else 0
    res = grover_search(marked, iterations=iters, rng=rng)
    counts["T4"] = res.oracle_calls
    if res.found:
        w = hits[res.candidate]
        assert verify_witness(inst, w)
        return QuantumSolveResult(w, counts, res.success_probability, int(marked.sum()))
    return QuantumSolveResult(None, counts, res.success_probability, int(marked.sum()))


def default_toy_params(M: int, N: int, N0: int, ell: int = 2, seed: int = 0) -> QuantumToyParams:
    """Budgets from the asymptotic recipe, K ~ N0^(l/(2l+1)) / N^(1/(2l+1)),
    rounded up and clipped to the toy domain."""
    K = max(1, math.ceil(N0 ** (ell / (2 * ell + 1)) / N ** (1 / (2 * ell + 1))))
    t1 = min(M // 2, math.ceil((math.factorial(ell) * K * N) ** (1 / ell)) + ell)
    t3 = min(M - t1, max(ell - 1, math.ceil((N0 * N / K) ** (1 / (ell + 1)))))
    return QuantumToyParams(t1=t1, k_target=K, t3=t3, seed=seed)
