import itertools
import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nestedcol.classical import (
    UNBOUNDED,
    CarryPoints,
    RegimeWarning,
    RestartBirthday,
    SegmentPlan,
    SolverConfig,
    SpaceViolation,
    classical_tuple_tail,
    default_config,
    run_segmented,
    run_unsegmented,
    same_sum_capacity,
    solve_unbounded,
    tail_frequency_mc,
)
from nestedcol.oracle import FlipMemory, OracleParams, make_instance
from nestedcol.problem import enumerate_same_sum_tuples, verify_witness


def inst(N=256, N0=256, ell=2, y=0, seed=0, M=1 << 20):
    return make_instance(OracleParams(M=M, N=N, N0=N0, ell=ell, y=y, seed=seed))


# ------------------------------------------------------------ solver


@settings(max_examples=30)
@given(st.integers(0, 10_000), st.sampled_from([1, 2, 3]))
def test_solver_witness_always_verifies_and_budget_holds(seed, ell):
    N, N0 = 64, 64
    i = inst(N, N0, ell, y=seed % N, seed=seed)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RegimeWarning)
        cfg = default_config(N, N0, ell, seed=seed)
        res = solve_unbounded(i, cfg)
    assert res.ledger.total == res.ledger.t_h + res.ledger.t_g
    assert res.ledger.t_h <= cfg.t1 and res.ledger.t_g <= cfg.k_target
    assert res.ledger.t_g == (res.tuples_found if not res.success else res.ledger.t_g)
    if res.success:
        assert verify_witness(i, res.witness)


def test_single_tuple_never_collides():
    for s in range(20):
        res = solve_unbounded(inst(seed=s), SolverConfig(k_target=1, t1=500, seed=s))
        assert not res.success
        assert res.ledger.t_g <= 1


def test_config_validation():
    with pytest.raises(ValueError):
        solve_unbounded(inst(), SolverConfig(k_target=0, t1=10))
    with pytest.raises(ValueError):
        solve_unbounded(inst(ell=2), SolverConfig(k_target=1, t1=1))


def test_regime_warning():
    with pytest.warns(RegimeWarning):
        solve_unbounded(inst(N=16, N0=1 << 20, ell=3), SolverConfig(k_target=2, t1=20))


def test_solver_constant_success_small():
    N = 1024
    wins = sum(solve_unbounded(inst(N, N * N, seed=s), default_config(N, N * N, 2, seed=s)).success for s in range(100))
    assert wins >= 30


def test_solver_scaling_slope():
    # log-log slope of median queries vs N (N0 = N^2) is 1/l + eps/(2l) = 1 at l = 2
    meds = []
    Ns = [256, 1024, 4096]
    for N in Ns:
        q = [solve_unbounded(inst(N, N * N, seed=s, y=s % N), default_config(N, N * N, 2, seed=s)).ledger.total for s in range(40)]
        meds.append(np.median(q))
    slope = np.polyfit(np.log(Ns), np.log(meds), 1)[0]
    assert abs(slope - 1.0) < 0.1


def test_solver_deterministic():
    a = solve_unbounded(inst(seed=3), default_config(256, 256, 2, seed=9))
    b = solve_unbounded(inst(seed=3), default_config(256, 256, 2, seed=9))
    assert a.witness == b.witness and a.ledger == b.ledger


# ----------------------------------------------------- segmented executor


def test_single_unbounded_segment_equals_plain_birthday():
    N, T = 1 << 10, 600
    for s in range(5):
        i = inst(N, 2, y=s, seed=s)
        mem = FlipMemory.from_instance(i)
        trace = run_unsegmented(RestartBirthday(), T, i, mem, seed=s)
        # same points, counted by brute force
        pairs = enumerate_same_sum_tuples(i, trace.declared, s)
        assert trace.final == len(pairs) == len(mem.flipped)
        assert trace.ledger.t_h == T


def test_capacity_counts_only_declared_and_valid():
    i = inst(16, 2, seed=1, M=64)
    mem = FlipMemory.from_instance(i)
    mem.flipped |= {1 * 64 + 2, 2 * 64 + 1, 5}  # (1,2) valid, (2,1) invalid, (0,5)
    assert same_sum_capacity(i, mem, {1, 2}) == 1
    assert same_sum_capacity(i, mem, set()) == 0


class Hoarder:
    def initial_state(self, inst):
        return b"\x00" * 8

    def run_segment(self, state, oracle):
        oracle.query_h(0)
        return b"\x00" * 9


def test_space_violation_aborts():
    i = inst(1024, 2)
    with pytest.raises(SpaceViolation) as err:
        run_segmented(Hoarder(), SegmentPlan(3, 4, 64), i, FlipMemory.from_instance(i))
    assert err.value.bits == 72 and err.value.limit == 64


def test_segment_budget_enforced():
    class Greedy(RestartBirthday):
        def run_segment(self, state, oracle):
            for x in range(oracle.remaining + 1):
                oracle.query_h(x)
            return state

    i = inst(1024, 2)
    with pytest.raises(RuntimeError):
        run_segmented(Greedy(), SegmentPlan(1, 5, 64), i, FlipMemory.from_instance(i))


def test_plan_validation():
    with pytest.raises(ValueError):
        SegmentPlan(1, 10, 4).validate(1024)
    with pytest.raises(ValueError):
        SegmentPlan(0, 10).validate(1024)


def test_restart_state_is_64_bits():
    i = inst(1 << 12, 2)
    trace = run_segmented(RestartBirthday(), SegmentPlan(4, 100, 64), i, FlipMemory.from_instance(i))
    assert set(trace.state_bits) == {64}
    assert trace.ledger.t_h == 400


def test_carry_points_roundtrip_and_bound():
    i = inst(1 << 10, 2, M=1 << 16)
    s_bits = 64 + 26 * 10
    strat = CarryPoints(s_bits)
    trace = run_segmented(strat, SegmentPlan(5, 50, s_bits), i, FlipMemory.from_instance(i))
    assert max(trace.state_bits) <= s_bits
    pts = [(x, i.peek_h(x)) for x in range(7)]
    assert strat._unpack(strat._pack(3, pts, i.params), i.params) == (3, pts)


def test_carry_never_double_flips():
    i = inst(64, 2, M=1 << 12, seed=5)
    mem = FlipMemory.from_instance(i)
    trace = run_segmented(CarryPoints(UNBOUNDED), SegmentPlan(6, 20, UNBOUNDED), i, mem)
    all_pairs = enumerate_same_sum_tuples(i, trace.declared, 0)
    assert trace.final == len(all_pairs) == trace.ledger.t_flip


def _mean_capacity(strategy_for, S, L, trials=25, N=1 << 12, t_prime=128):
    caps = []
    for s in range(trials):
        i = inst(N, 2, y=s, seed=500 + s, M=1 << 20)
        caps.append(run_segmented(strategy_for(S), SegmentPlan(L, t_prime, S), i, FlipMemory.from_instance(i), seed=s).final)
    return float(np.mean(caps))


def test_capacity_monotone_in_space_and_time():
    by_space = [_mean_capacity(CarryPoints, S, 6) for S in (64, 64 + 32 * 64, 64 + 32 * 512)]
    assert by_space[0] < by_space[1] < by_space[2]
    by_time = [_mean_capacity(CarryPoints, 64 + 32 * 64, L) for L in (2, 4, 8)]
    assert by_time[0] < by_time[1] < by_time[2]


# ------------------------------------------------------------ tail bound


def test_tail_bound_shapes():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RegimeWarning)
        # l = 1: (c T / (K N))^K
        assert classical_tuple_tail(10, 3, 1, 1000, const=1.0) == pytest.approx((10 / 3000) ** 3)
        # K = 1: c T^l / N
        assert classical_tuple_tail(20, 1, 2, 10_000) == pytest.approx(400 / 10_000)
        assert classical_tuple_tail(16, 4, 2, 64, const=8.0) == 1.0


def test_tail_regime_warning():
    with pytest.warns(RegimeWarning):
        classical_tuple_tail(16, 4, 2, 64)


def _exact_tail(T, K, ell, N):
    hit = 0
    for vals in itertools.product(range(N), repeat=T):
        counts = np.zeros(N, dtype=int)
        for t in itertools.combinations(vals, ell):
            counts[sum(t) % N] += 1
        hit += counts.max() >= K
    return hit / N**T


@pytest.mark.parametrize("T,K,ell,N", [(4, 2, 2, 4), (5, 3, 2, 3), (4, 2, 1, 5)])
def test_tail_mc_matches_exhaustive(T, K, ell, N):
    exact = _exact_tail(T, K, ell, N)
    n = 40_000
    mc = tail_frequency_mc(T, K, ell, N, trials=n, seed=1)
    sd = math.sqrt(max(exact * (1 - exact), 1e-6) / n)
    assert abs(mc - exact) < 5 * sd


def test_tail_mc_target_variant():
    # fixed target: Pr[>= 1 pair summing to 0] for 2 values = 1/N
    n = 50_000
    f = tail_frequency_mc(2, 1, 2, 8, trials=n, seed=2, target=0)
    assert abs(f - 1 / 8) < 5 * math.sqrt(1 / 8 * 7 / 8 / n)
