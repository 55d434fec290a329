"""Closed-form bounds: query counts, time-space tradeoffs, separation windows,
tail bounds and the K_sol root. All hidden constants default to 1.0 and the
resulting curves are shape-only.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from fractions import Fraction

__all__ = [
    "RootSpec",
    "TradeoffPoint",
    "root_poly",
    "k_sol_root",
    "k_thd_for",
    "telescoping_identity_check",
    "lower_bound_exponents",
    "eval_lower_bound",
    "eval_upper_bound",
    "upper_bound_exponent",
    "separation_window",
    "exponent_gap",
    "derived_separation_window",
    "segmented_capacity_bound",
    "collision_success_bound",
    "tuple_count_moments",
    "curve_csv",
]


# ------------------------------------------------------------------ K_sol


@dataclass(frozen=True)
class RootSpec:
    K: float
    ks: tuple

    def __post_init__(self):
        object.__setattr__(self, "ks", tuple(self.ks))
        if not self.ks:
            raise ValueError("ks must hold k_1..k_ell (ell >= 1)")
        if any(k < 0 for k in self.ks):
            raise ValueError("structure caps must be non-negative")
        if not self.K > max(self.ks):
            raise ValueError(f"need K > max(ks), got K={self.K}, ks={self.ks}")

    @property
    def ell(self) -> int:
        return len(self.ks)


def root_poly(x: float, K: float, ks) -> float:
    """x^l + sum_{i<l} k_{l-i} x^i - K  with ks = (k_1, ..., k_l)."""
    ell = len(ks)
    val = x**ell - K
    for i in range(ell):
        val += ks[ell - 1 - i] * x**i
    return val


def k_sol_root(spec: RootSpec, tol: float = 1e-13) -> float:
    """Unique non-negative root by bisection (f is increasing on [0, inf))."""
    lo = 0.0
    hi = spec.K ** (1.0 / spec.ell) + sum(spec.ks)
    for _ in range(400):
        mid = 0.5 * (lo + hi)
        if root_poly(mid, spec.K, spec.ks) < 0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= tol * max(1.0, hi):
            break
    return 0.5 * (lo + hi)


def k_thd_for(K: float, ks) -> float:
    """The threshold that makes (K - k_l)/K_thd land on K_sol."""
    return (K - ks[-1]) / k_sol_root(RootSpec(K, ks))


def telescoping_identity_check(K: float, ks, K_thd: float, rtol: float = 1e-8) -> bool:
    """At x = (K - k_l)/K_thd, the lower-arity polynomial with target K_thd
    equals (K_thd/(K - k_l)) times the full one, and both vanish."""
    ks = tuple(ks)
    if len(ks) < 2:
        raise ValueError("telescoping needs ell >= 2")
    x = (K - ks[-1]) / K_thd
    lhs = root_poly(x, K_thd, ks[:-1])
    rhs = K_thd / (K - ks[-1]) * root_poly(x, K, ks)
    scale = max(1.0, abs(K_thd), abs(K))
    return abs(lhs - rhs) <= rtol * scale and abs(lhs) <= rtol * scale and abs(rhs) <= rtol * scale


# -------------------------------------------------------- query tradeoffs


@dataclass(frozen=True)
class TradeoffPoint:
    N: float
    N0: float
    ell: int
    S: float | None
    T: float
    side: str
    setting: str
    regime_ok: bool
    binding: str = ""

    @property
    def value(self) -> float:
        return self.T


def lower_bound_exponents(ell: int, setting: str) -> tuple[Fraction, Fraction, Fraction]:
    """(a, b, c) with S^a * T >= N^b * N0^c."""
    if setting == "classical":
        return Fraction(ell * ell - 1, 2 * ell), Fraction(1, 2 * ell), Fraction(1, 2)
    if setting == "quantum":
        return Fraction(ell + 1, 2), Fraction(1, 2 * (ell + 1)), Fraction(1, 4)
    raise ValueError(f"unknown setting {setting!r}")


def eval_lower_bound(N: float, N0: float, ell: int, S: float, setting: str = "classical", const: float = 1.0) -> TradeoffPoint:
    """Smallest T allowed at memory S by the time-space lower bound."""
    if min(N, N0, S) <= 0 or ell < 1:
        raise ValueError("parameters must be positive")
    a, b, c = lower_bound_exponents(ell, setting)
    T = const * N ** float(b) * N0 ** float(c) / S ** float(a)
    if setting == "classical":
        limit = N ** (1 / (ell * ell - 1)) if ell > 1 else math.inf
    else:
        limit = N ** (1 / ((ell + 1) * (2 * ell + 1)))
    return TradeoffPoint(N, N0, ell, S, T, "lower", setting, S <= limit)


def upper_bound_exponent(ell: int, eps: Fraction, setting: str) -> Fraction:
    """Exponent of N in the best known query count when N0 = N^eps."""
    eps = Fraction(eps)
    if setting == "classical":
        return Fraction(1, ell) + eps / (2 * ell)
    return (2 + eps) / (2 * ell + 1)


def eval_upper_bound(N: float, N0: float, ell: int, setting: str = "classical", const: float = 1.0) -> TradeoffPoint:
    """Query count of the unbounded-space algorithm, with its regime status.

    The quantum case checks N^(1/l) <= N0 <= N^(3/(l-1)) and T3^(l-1) <= N0;
    ``binding`` lists the constraints that fail (or is empty).
    """
    if setting == "classical":
        T = const * N ** (1 / ell) * N0 ** (1 / (2 * ell))
        ok = ell == 1 or N0 <= N ** (2 / (ell - 1)) * (1 + 1e-12)
        return TradeoffPoint(N, N0, ell, None, T, "upper", setting, ok, "" if ok else "N0<=N^(2/(l-1))")
    if ell < 2:
        raise ValueError("the quantum algorithm needs ell >= 2")
    T = const * N ** (2 / (2 * ell + 1)) * N0 ** (1 / (2 * ell + 1))
    K = N0 ** (ell / (2 * ell + 1)) / N ** (1 / (2 * ell + 1))
    T3 = (N0 * N / K) ** (1 / (ell + 1))
    fails = []
    if N0 < N ** (1 / ell) * (1 - 1e-12):
        fails.append("N0>=N^(1/l)")
    if N0 > N ** (3 / (ell - 1)) * (1 + 1e-12):
        fails.append("N0<=N^(3/(l-1))")
    if T3 ** (ell - 1) > N0 * (1 + 1e-9):
        fails.append("T3^(l-1)<=N0")
    return TradeoffPoint(N, N0, ell, None, T, "upper", setting, not fails, ",".join(fails))


def separation_window(ell: int, setting: str):
    """Range of eps (N0 = N^eps) with a time-space separation, as stated for
    the two settings. Returns (lo, hi) meaning (lo, hi], or None if empty."""
    if ell < 2:
        return None
    if setting == "classical":
        lo, hi = Fraction(1, ell), Fraction(2, ell - 1)
    elif setting == "quantum":
        lo, hi = Fraction(4 * ell + 6, 2 * ell * ell - ell - 3), Fraction(3, ell - 1)
    else:
        raise ValueError(f"unknown setting {setting!r}")
    return (lo, hi) if lo < hi else None


def exponent_gap(ell: int, eps, setting: str) -> Fraction:
    """(lower-bound exponent at polylog memory) - (upper-bound exponent).
    Positive means small-memory algorithms must be slower."""
    eps = Fraction(eps)
    _, b, c = lower_bound_exponents(ell, setting)
    return b + c * eps - upper_bound_exponent(ell, eps, setting)


def derived_separation_window(ell: int, setting: str):
    """Where ``exponent_gap`` > 0, intersected with the algorithm's regime."""
    if ell < 2:
        return None
    _, b, c = lower_bound_exponents(ell, setting)
    if setting == "classical":
        slope, const = c - Fraction(1, 2 * ell), b - Fraction(1, ell)
        hi = Fraction(2, ell - 1)
    else:
        slope, const = c - Fraction(1, 2 * ell + 1), b - Fraction(2, 2 * ell + 1)
        hi = Fraction(3, ell - 1)
    if slope <= 0:
        return None
    lo = -const / slope
    return (lo, hi) if lo < hi else None


# ------------------------------------------------------- other closed forms


def segmented_capacity_bound(S: float, T: float, N: float, ell: int, const: float = 1.0) -> float:
    """Expected same-sum capacity c * S^((l^2-1)/l) * T / N^(1/l)."""
    return const * S ** ((ell * ell - 1) / ell) * T / N ** (1 / ell)


def collision_success_bound(T: int, V: float, N0: int, const: float = 20.0) -> float:
    return const * T * T * V / N0


def tuple_count_moments(T: int, ell: int, N: int) -> tuple[float, float]:
    """Mean and variance of the number of ell-subsets of T uniform values summing to y."""
    c = math.comb(T, ell)
    return c / N, c * (N - 1) / N**2


def curve_csv(points, parameter: str) -> str:
    """Curve export: parameter, bound-value, side, regime-flag."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["parameter", "bound-value", "side", "regime-flag"])
    for p in points:
        w.writerow([repr(float(getattr(p, parameter))), repr(float(p.value)), p.side, int(p.regime_ok)])
    return buf.getvalue()
