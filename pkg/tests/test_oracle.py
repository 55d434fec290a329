import itertools
import json
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from nestedcol.oracle import (
    PRF,
    FlipMemory,
    OracleParams,
    ParameterError,
    QueryLedger,
    experiment_record,
    flip,
    index_tuple,
    load_experiment_record,
    make_instance,
    query_g,
    query_h,
    tuple_index,
)


def small(**kw):
    base = dict(M=4, N=4, N0=4, ell=2, y=0, seed=1)
    base.update(kw)
    return make_instance(OracleParams(**base))


def test_fresh_instance_has_no_samples():
    inst = small()
    assert inst.sampled_h == 0 and inst.sampled_g == 0


def test_identical_params_answer_identically():
    a, b = small(M=64), small(M=64)
    la, lb = QueryLedger(), QueryLedger()
    assert [query_h(a, la, x) for x in range(64)] == [query_h(b, lb, x) for x in range(64)]
    assert [query_g(a, la, t) for t in range(0, 64 * 64, 97)] == [query_g(b, lb, t) for t in range(0, 64 * 64, 97)]


def test_different_seeds_differ():
    a, b = small(M=64, seed=1), small(M=64, seed=2)
    assert [a.peek_h(x) for x in range(64)] != [b.peek_h(x) for x in range(64)]


@pytest.mark.parametrize(
    "kw",
    [dict(M=1, ell=2), dict(N=1), dict(N0=1), dict(ell=0), dict(y=4), dict(seed=-1)],
)
def test_invalid_params_rejected(kw):
    with pytest.raises(ParameterError):
        small(**kw)


def test_query_h_consistent_and_counted():
    inst, led = small(), QueryLedger()
    assert query_h(inst, led, 3) == query_h(inst, led, 3)
    assert led.t_h == 2 and led.t_g == 0


def test_query_bounds():
    inst, led = small(), QueryLedger()
    with pytest.raises(IndexError):
        query_h(inst, led, 4)
    with pytest.raises(IndexError):
        query_g(inst, led, 16)
    with pytest.raises(IndexError):
        query_h(inst, led, -1)
    assert led.t_h == 0 and led.t_g == 0


def test_h_uniform_chi_square():
    # 10^5 fresh points, N=16: every residue count within 5 sigma of n/N
    inst = make_instance(OracleParams(M=1 << 20, N=16, N0=2, ell=1, seed=4))
    vals = np.fromiter((inst.peek_h(x) for x in range(100_000)), dtype=np.int64)
    counts = np.bincount(vals, minlength=16)
    mean, sd = 1e5 / 16, math.sqrt(1e5 * (1 / 16) * (15 / 16))
    assert np.all(np.abs(counts - mean) < 5 * sd)


def test_non_power_of_two_range_uniform():
    prf = PRF(9, "t", 12)
    vals = np.array([prf(i) for i in range(60_000)])
    assert vals.min() == 0 and vals.max() == 11
    counts = np.bincount(vals, minlength=12)
    sd = math.sqrt(60_000 / 12 * 11 / 12)
    assert np.all(np.abs(counts - 5000) < 5 * sd)


def test_g_birthday_no_collision_rate():
    # Pr[no collision among 1000 values in 2^20] = exp(-C(1000,2)/2^20) ~ 0.621
    expected = math.exp(-math.comb(1000, 2) / 2**20)
    assert abs(expected - 0.6210) < 1e-3
    trials = 300
    hits = 0
    for s in range(trials):
        inst = make_instance(OracleParams(M=1 << 12, N=2, N0=1 << 20, ell=2, seed=10_000 + s))
        led = QueryLedger()
        vals = [query_g(inst, led, t) for t in range(1000)]
        hits += len(set(vals)) == 1000
    sd = math.sqrt(expected * (1 - expected) / trials)
    assert abs(hits / trials - expected) < 4 * sd


def test_g_consistent():
    inst, led = small(), QueryLedger()
    assert query_g(inst, led, 7) == query_g(inst, led, 7)
    assert led.t_g == 2


def test_flip_parity_and_cached_reply():
    inst, led = small(), QueryLedger()
    mem = FlipMemory.from_instance(inst)
    g1 = flip(mem, led, 5)
    assert mem.bit(5) == 1
    g2 = flip(mem, led, 5)
    assert mem.bit(5) == 0 and g1 == g2 and led.t_flip == 2


def test_flip_three_distinct():
    inst, led = small(), QueryLedger()
    mem = FlipMemory.from_instance(inst)
    for t in (1, 2, 3):
        flip(mem, led, t)
    assert len(mem.flipped) == 3
    with pytest.raises(IndexError):
        flip(mem, led, 16)


def test_flip_reply_is_g():
    inst, led = small(M=8), QueryLedger()
    mem = FlipMemory.from_instance(inst)
    assert flip(mem, led, 9) == inst.peek_g(9)


@given(st.lists(st.integers(0, 7), min_size=1, max_size=30))
def test_ledger_counts_every_call(xs):
    inst, led = small(M=8), QueryLedger()
    for x in xs:
        query_h(inst, led, x)
        query_g(inst, led, x)
    assert led.t_h == len(xs) and led.t_g == len(xs)


@given(st.integers(2, 9), st.integers(1, 4), st.data())
def test_tuple_index_roundtrip(M, ell, data):
    t = tuple(data.draw(st.lists(st.integers(0, M - 1), min_size=ell, max_size=ell)))
    idx = tuple_index(t, M)
    assert 0 <= idx < M**ell
    assert index_tuple(idx, M, ell) == t


def test_experiment_record_roundtrip():
    p = OracleParams(M=8, N=4, N0=4, ell=2, y=1, seed=3)
    led = QueryLedger(t_h=5, t_g=2, t_flip=1, s_bits=64)
    text = experiment_record(p, led)
    assert set(json.loads(text)) == {"params", "ledger"}
    assert load_experiment_record(text) == (p, led)
    inf = QueryLedger(s_bits=float("inf"))
    assert load_experiment_record(experiment_record(p, inf))[1].s_bits == float("inf")


def test_fixed_tables_injected():
    inst = make_instance(OracleParams(M=4, N=4, N0=8, ell=2, y=3, seed=0), fixed_h=[0, 1, 3, 2], fixed_g={2: 7})
    assert [inst.peek_h(x) for x in range(4)] == [0, 1, 3, 2]
    assert inst.peek_g(2) == 7
    with pytest.raises(ParameterError):
        make_instance(OracleParams(M=4, N=4, N0=8, ell=2), fixed_h=[0, 4])


def _toy_prf_table(seed, M, N):
    # every seed in [N^M] spells out one function in base N
    return [(seed // N**x) % N for x in range(M)]


class _LazyToy:
    """Lazy sampler consuming one base-N digit of the seed per fresh query."""

    def __init__(self, seed, N):
        self.seed, self.N, self.table, self.used = seed, N, {}, 0

    def __call__(self, x):
        if x not in self.table:
            self.table[x] = (self.seed // self.N**self.used) % self.N
            self.used += 1
        return self.table[x]


@pytest.mark.parametrize("M,N", [(4, 4), (8, 2), (5, 3)])
def test_lazy_matches_eager_by_exhaustive_enumeration(M, N):
    rng = np.random.default_rng(M * 10 + N)
    for _ in range(5):
        seq = [int(v) for v in rng.integers(0, M, size=2 * M)]
        eager, lazy = {}, {}
        for seed in range(N**M):
            tab = _toy_prf_table(seed, M, N)
            ans = tuple(tab[x] for x in seq)
            eager[ans] = eager.get(ans, 0) + 1
            lz = _LazyToy(seed, N)
            ans = tuple(lz(x) for x in seq)
            lazy[ans] = lazy.get(ans, 0) + 1
        assert eager == lazy


def test_lazy_cache_order_independent():
    a, b = small(M=32), small(M=32)
    la = [a.peek_h(x) for x in range(32)]
    lb = {x: b.peek_h(x) for x in reversed(range(32))}
    assert la == [lb[x] for x in range(32)]
