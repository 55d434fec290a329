"""Exact statevector Grover search over a finite domain."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = ["GroverResult", "grover_search", "optimal_iterations", "closed_form_success"]


@dataclass(frozen=True)
class GroverResult:
    candidate: int
    success_probability: float
    iterations: int
    oracle_calls: int
    found: bool


def optimal_iterations(domain: int, marked: int) -> int:
    """Nearest integer to pi/(4 theta) - 1/2 with sin(theta)^2 = marked/domain."""
    if marked <= 0:
        return 0
    theta = math.asin(math.sqrt(min(1.0, marked / domain)))
    return max(0, round(math.pi / (4 * theta) - 0.5))


def closed_form_success(domain: int, marked: int, iterations: int) -> float:
    if marked == 0:
        return 0.0
    theta = math.asin(math.sqrt(marked / domain))
    return math.sin((2 * iterations + 1) * theta) ** 2


def grover_search(marked, iterations: int | None = None, rng=None, estimate: float | None = None) -> GroverResult:
    """Search the domain ``range(len(marked))`` for a True entry.

    ``marked`` is the predicate's truth table; it is only used as a phase
    flip, one oracle call per iteration. The iteration count defaults to the
    optimum for ``estimate`` marked items (or the true count if no estimate).
    A candidate is Born-sampled when ``rng`` is given, else the most likely
    basis state is returned.
    """
    marked = np.asarray(marked, dtype=bool)
    n = marked.size
    if n == 0:
        raise ValueError("empty search domain")
    if iterations is None:
        m = int(marked.sum()) if estimate is None else estimate
        iterations = optimal_iterations(n, m) if m > 0 else 0
    psi = np.full(n, 1 / math.sqrt(n))
    sign = np.where(marked, -1.0, 1.0)
    for _ in range(iterations):
        psi = psi * sign
        psi = 2 * psi.mean() - psi
    probs = psi**2
    p_succ = float(probs[marked].sum())
    if rng is None:
        cand = int(np.argmax(probs))
    else:
        cand = int(rng.choice(n, p=probs / probs.sum()))
    return GroverResult(cand, p_succ, iterations, iterations, bool(marked[cand]))
