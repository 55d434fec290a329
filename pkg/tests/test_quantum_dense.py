import json
from functools import reduce

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nestedcol.quantum import dense as q
from nestedcol.quantum.dense import RegisterLayout, Statevector


def sign(u, y):
    return -1.0 if bin(u & y).count("1") % 2 else 1.0


def hadamard(N):
    return np.array([[sign(a, b) for b in range(N)] for a in range(N)]) / np.sqrt(N)


def decomp_by_hand(N):
    # swap |bot> <-> uniform, fix the rest: build it from an explicit basis change
    F = np.zeros((N + 1, N + 1))
    F[:N, :N] = hadamard(N)  # column 0 is the uniform state
    F[N, N] = 1.0
    P = np.eye(N + 1)
    P[[0, N]] = P[[N, 0]]
    return F @ P @ F.T


def test_std_decomp_matches_basis_change():
    for N in (2, 4, 8):
        assert np.allclose(q.std_decomp_cell(N), decomp_by_hand(N), atol=1e-12)


def test_decomp_bot_to_uniform_and_fixes_fourier_states():
    L = RegisterLayout(2, 4, mode="compressed")
    sv = q.std_decomp(q.basis_state(L), 0)
    cell0 = sv.amps[0, 0, 0, 0, :, L.bot]
    assert np.allclose(cell0, [0.5, 0.5, 0.5, 0.5, 0])
    for v in (1, 2, 3):
        uhat = np.append(hadamard(4)[v], 0)
        assert np.allclose(q.std_decomp_cell(4) @ uhat, uhat)
    D = q.operator_matrix(L, q.std_decomp)
    assert np.allclose(D @ D, np.eye(L.dim))


def test_sto_is_involution_and_xors():
    L = RegisterLayout(2, 4)
    S = q.operator_matrix(L, q.apply_sto)
    assert np.allclose(S @ S, np.eye(L.dim))
    sv = q.apply_sto(q.basis_state(L, x=1, u=2, D=(3, 1)))
    assert sv.amps[1, 2 ^ 1, 0, 0, 3, 1] == pytest.approx(1.0)


def test_pho_phase_and_trivial_u():
    L = RegisterLayout(2, 4)
    for u in range(4):
        for h in range(4):
            sv = q.apply_pho(q.basis_state(L, x=0, u=u, D=(h, 2)))
            assert sv.amps[0, u, 0, 0, h, 2] == pytest.approx(sign(u, h))
    sv = q.basis_state(L.with_mode("compressed"), x=1, u=0)
    sv = q.apply_v(sv)  # spread U, then keep only u = 0
    sv.amps[:, 1:] = 0
    sv.amps /= sv.norm()
    assert np.allclose(q.apply_cpho(sv).amps, sv.amps)


def cpho_cell_by_hand(N, u):
    S = decomp_by_hand(N)
    ph = np.ones(N + 1)
    ph[:N] = [sign(u, d) for d in range(N)]
    return S @ np.diag(ph) @ S


@pytest.mark.parametrize("N", [2, 4, 8])
def test_branch_formulas_coefficientwise(N):
    for u in range(N):
        C = q.branch_cell_matrix(N, u)
        ref = cpho_cell_by_hand(N, u)
        assert np.allclose(C, ref, atol=1e-12)
        if u:
            s = np.array([sign(u, y) for y in range(N)])
            # empty cell becomes the u-th Fourier state
            assert np.allclose(C[:, N], np.append(s / np.sqrt(N), 0))
            # a filled cell d: diagonal, off-diagonal and back-to-empty coefficients
            for d in range(N):
                assert C[d, d] == pytest.approx((1 + s[d] * (N - 2)) / N)
                assert C[N, d] == pytest.approx(s[d] / np.sqrt(N))
                for y in range(N):
                    if y != d:
                        assert C[y, d] == pytest.approx((1 - s[y] - s[d]) / N)


def test_cpho_equals_branch_reference_on_full_space():
    L = RegisterLayout(2, 4, mode="compressed")
    A = q.operator_matrix(L, q.apply_cpho)
    B = q.operator_matrix(L, q.apply_cpho_by_branches)
    assert np.abs(A - B).max() < 1e-12


def test_pho_is_v_sto_v():
    for M, N in ((1, 2), (2, 4)):
        L = RegisterLayout(M, N)
        V = q.operator_matrix(L, q.apply_v)
        assert np.allclose(q.operator_matrix(L, q.apply_pho), V @ q.operator_matrix(L, q.apply_sto) @ V)
        Lc = L.with_mode("compressed")
        Vc = q.operator_matrix(Lc, q.apply_v)
        assert np.allclose(q.operator_matrix(Lc, q.apply_cpho), Vc @ q.operator_matrix(Lc, q.apply_csto) @ Vc)


def _cells(layout, per_cell):
    alg = np.eye(layout.alg_dim)
    return np.kron(alg, reduce(np.kron, [per_cell] * layout.M))


def test_hao_two_intertwinings():
    L = RegisterLayout(2, 2)
    Lh, Lc = L.with_mode("hadamard"), L.with_mode("compressed")
    hao = q.operator_matrix(Lh, q.apply_hao)
    # route 1: Fourier transform of every cell conjugates PhO into HaO
    Hc = _cells(L, hadamard(L.N))
    assert np.allclose(hao, Hc @ q.operator_matrix(L, q.apply_pho) @ Hc, atol=1e-12)
    # route 2: W^dagger CPhO W through the empty-label isometry
    W = _cells(L, q.fourier_cell_isometry(L.N))
    assert np.allclose(hao, W.T @ q.operator_matrix(Lc, q.apply_cpho) @ W, atol=1e-12)


def test_hao_label_shift():
    Lh = RegisterLayout(2, 4, mode="hadamard")
    sv = q.apply_hao(q.basis_state(Lh, x=1, u=3, D=(2, 1)))
    assert sv.amps[1, 3, 0, 0, 2, 1 ^ 3] == pytest.approx(1.0)


def test_one_query_fills_one_cell():
    L = RegisterLayout(3, 4, mode="compressed")
    sv = q.basis_state(L)
    assert q.expected_db_size(sv) == 0
    sv = q.apply_cpho(q.basis_state(L, x=2, u=1))
    dist = q.db_size_distribution(sv)
    assert dist[1] == pytest.approx(1.0)
    assert q.expected_db_size(sv, label_mask=[True, True, False]) == pytest.approx(0.0)


def test_decompressed_run_equals_standard_amplitudes():
    rng = np.random.default_rng(4)
    L = RegisterLayout(2, 2, w=2, r=2)
    for T in (0, 1, 2, 3):
        us = q.random_circuit(L, T, rng)
        std = q.embed_standard(q.run_standard(us, L))
        comp = q.decompress_all(q.run_compressed(us, L, query=q.apply_csto))
        assert np.allclose(std.amps, comp.amps, atol=1e-12)


def test_equivalence_zero_queries_and_random():
    rng = np.random.default_rng(8)
    L = RegisterLayout(2, 2, w=2, r=2)
    assert q.equivalence_check(q.random_circuit(L, 0, rng), L) < 1e-12
    assert q.equivalence_check(q.random_circuit(L, 2, rng), L) < 1e-9


def test_negative_control_without_decomposition():
    from nestedcol.quantum.dense import _cpho_prime

    def broken(sv):
        sv = q.apply_v(sv)
        return q.apply_v(Statevector(sv.layout, _cpho_prime(sv.amps, sv.layout)))

    rng = np.random.default_rng(1)
    L = RegisterLayout(2, 2, w=2, r=2)
    tv = max(q.equivalence_check(q.random_circuit(L, 2, rng), L, broken) for _ in range(5))
    assert tv > 1e-3


OPS = st.sampled_from(["cpho", "csto", "v", "decomp", "local"])


@settings(max_examples=25)
@given(st.lists(OPS, min_size=1, max_size=6), st.integers(0, 2**31))
def test_norm_preserved(ops, seed):
    L = RegisterLayout(2, 2, r=2, mode="compressed")
    circuit = [{"op": o, "haar_seed": seed + i} if o == "local" else {"op": o} for i, o in enumerate(ops)]
    sv = q.run_circuit(circuit, q.basis_state(L))
    assert sv.norm() == pytest.approx(1.0, abs=1e-10)
    assert q.db_size_distribution(sv).sum() == pytest.approx(1.0)


def test_run_circuit_rejects_norm_drift():
    L = RegisterLayout(1, 2, mode="compressed")
    bad = [{"op": "local", "matrix": 2 * np.eye(L.alg_dim)}]
    with pytest.raises(FloatingPointError):
        q.run_circuit(bad, q.basis_state(L))


def test_circuit_json_roundtrip():
    L = RegisterLayout(1, 2, mode="compressed")
    U = q.random_circuit(L, 0, np.random.default_rng(0))[0]
    ops = [{"op": "local", "matrix": U}, {"op": "cpho"}, {"op": "decomp", "x": 0}]
    back = q.circuit_from_json(q.circuit_to_json(ops))
    assert np.allclose(back[0]["matrix"], U)
    a = q.run_circuit(ops, q.basis_state(L))
    b = q.run_circuit(back, q.basis_state(L))
    assert np.allclose(a.amps, b.amps)
    with pytest.raises(ValueError):
        q.circuit_from_json(json.dumps([{"op": "teleport"}]))


def test_dimension_cap():
    with pytest.raises(q.DimensionError):
        RegisterLayout(8, 16, mode="compressed")
    with pytest.raises(ValueError):
        RegisterLayout(2, 3)


def test_wrong_mode_rejected():
    with pytest.raises(ValueError):
        q.apply_cpho(q.basis_state(RegisterLayout(1, 2)))


def test_database_measurement_and_csv():
    L = RegisterLayout(2, 2, mode="compressed")
    sv = q.apply_cpho(q.basis_state(L, x=0, u=1))
    dist = q.measure_database(sv)
    assert sum(dist.values()) == pytest.approx(1.0)
    assert dist[(0, None)] == pytest.approx(0.5) and dist[(1, None)] == pytest.approx(0.5)
    sample = q.measure_database(sv, rng=np.random.default_rng(0))
    assert sample in dist
    text = q.distribution_csv(dist)
    assert text.splitlines()[0] == "basis-label,probability"
    rows = dict(line.split(",") for line in text.splitlines()[1:])
    assert set(rows) == {"0|_", "1|_"}
    assert float(rows["0|_"]) == pytest.approx(0.5)
