"""Dense statevector simulation of standard, phase, compressed and Hadamard
oracles over registers X (query), U (answer), W (work), R (output), D (oracle).

Amplitudes live in an array of shape ``(M, N, w, r, c_0, ..., c_{M-1})``.
Cells hold a value in [N] in standard and Hadamard modes; compressed mode
adds the empty symbol at index N. Every operator also accepts a trailing
batch axis, which is how full operator matrices are built.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
from scipy.stats import unitary_group

__all__ = [
    "DimensionError",
    "RegisterLayout",
    "Statevector",
    "basis_state",
    "uniform_oracle_state",
    "apply_sto",
    "apply_pho",
    "apply_csto",
    "apply_cpho",
    "apply_hao",
    "apply_v",
    "apply_local",
    "std_decomp",
    "decompress_all",
    "embed_standard",
    "std_decomp_cell",
    "branch_cell_matrix",
    "apply_cpho_by_branches",
    "fourier_cell_isometry",
    "operator_matrix",
    "r_distribution",
    "db_size_distribution",
    "expected_db_size",
    "database_distribution",
    "measure_database",
    "run_standard",
    "run_compressed",
    "equivalence_check",
    "random_circuit",
    "circuit_to_json",
    "circuit_from_json",
    "run_circuit",
    "distribution_csv",
    "DEFAULT_CAP",
    "apply_alg_perm",
    "apply_alg_phase",
    "apply_x_matrix",
    "phase_query",
]

DEFAULT_CAP = 1 << 24
MODES = ("standard", "compressed", "hadamard")


class DimensionError(ValueError):
    """Requested Hilbert space exceeds the configured amplitude cap."""


@dataclass(frozen=True)
class RegisterLayout:
    M: int
    N: int
    w: int = 1
    r: int = 1
    mode: str = "standard"
    cap: int = DEFAULT_CAP

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        if self.N < 2 or self.N & (self.N - 1):
            raise ValueError("quantum mode needs N a power of two")
        if self.M < 1 or self.w < 1 or self.r < 1:
            raise ValueError("register sizes must be positive")
        if self.dim > self.cap:
            raise DimensionError(f"{self.dim} amplitudes exceeds cap {self.cap} ({self})")

    @property
    def cell(self) -> int:
        return self.N + 1 if self.mode == "compressed" else self.N

    @property
    def bot(self) -> int:
        return self.N

    @property
    def alg_shape(self) -> tuple[int, ...]:
        return (self.M, self.N, self.w, self.r)

    @property
    def alg_dim(self) -> int:
        return self.M * self.N * self.w * self.r

    @property
    def shape(self) -> tuple[int, ...]:
        return self.alg_shape + (self.cell,) * self.M

    @property
    def dim(self) -> int:
        return self.alg_dim * self.cell**self.M

    def with_mode(self, mode: str) -> "RegisterLayout":
        return RegisterLayout(self.M, self.N, self.w, self.r, mode, self.cap)


class Statevector:
    def __init__(self, layout: RegisterLayout, amps: np.ndarray):
        if amps.shape[: len(layout.shape)] != layout.shape:
            raise ValueError(f"amplitude shape {amps.shape} does not match {layout.shape}")
        self.layout = layout
        self.amps = amps

    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))

    def copy(self) -> "Statevector":
        return Statevector(self.layout, self.amps.copy())


def basis_state(layout: RegisterLayout, x=0, u=0, w=0, r=0, D=None) -> Statevector:
    if D is None:
        D = (layout.bot if layout.mode == "compressed" else 0,) * layout.M
    amps = np.zeros(layout.shape, dtype=complex)
    amps[(x, u, w, r, *D)] = 1.0
    return Statevector(layout, amps)


def uniform_oracle_state(layout: RegisterLayout, x=0, u=0, w=0, r=0) -> Statevector:
    """Algorithm basis state tensored with the uniform superposition over all H."""
    if layout.mode != "standard":
        raise ValueError("uniform oracle state lives in standard mode")
    amps = np.zeros(layout.shape, dtype=complex)
    amps[x, u, w, r] = layout.N ** (-layout.M / 2)
    return Statevector(layout, amps)


# ---------------------------------------------------------------- helpers


def _popparity(a: np.ndarray) -> np.ndarray:
    a = np.asarray(a, dtype=np.int64)
    out = np.zeros_like(a)
    while np.any(a):
        out ^= a & 1
        a = a >> 1
    return out


def _sign_table(N: int) -> np.ndarray:
    """S[u, y] = (-1)^<u, y> with <,> the F2 bit inner product."""
    u = np.arange(N)
    return 1.0 - 2.0 * _popparity(u[:, None] & u[None, :])


def _hadamard(N: int) -> np.ndarray:
    return _sign_table(N) / np.sqrt(N)


def _cell_axis(x: int) -> int:
    # axis of cell x inside amps[x] (whose leading axes are U, W, R)
    return 3 + x


def _apply_cell(amps: np.ndarray, x: int, mat: np.ndarray) -> None:
    sub = amps[x]
    ax = _cell_axis(x)
    amps[x] = np.moveaxis(np.tensordot(mat, sub, axes=([1], [ax])), 0, ax)


def _select(amps: np.ndarray, x: int, value: int):
    idx = [slice(None)] * (amps.ndim - 1)
    idx[_cell_axis(x)] = value
    return (x, *idx)


def _need(sv: Statevector, *modes: str) -> None:
    if sv.layout.mode not in modes:
        raise ValueError(f"operator needs mode in {modes}, layout is {sv.layout.mode}")


# ------------------------------------------------------------- operators


def apply_sto(sv: Statevector) -> Statevector:
    """|x, u>|H> -> |x, u xor H(x)>|H>."""
    _need(sv, "standard")
    L = sv.layout
    out = sv.amps.copy()
    u = np.arange(L.N)
    for x in range(L.M):
        for h in range(L.N):
            sel = _select(out, x, h)
            out[sel] = sv.amps[sel][u ^ h]
    return Statevector(L, out)


def _phase_block(sub: np.ndarray, signs_u: np.ndarray) -> np.ndarray:
    return sub * signs_u.reshape((-1,) + (1,) * (sub.ndim - 1))


def apply_pho(sv: Statevector) -> Statevector:
    """|x, u>|H> -> (-1)^<u, H(x)> |x, u>|H>."""
    _need(sv, "standard")
    L = sv.layout
    S = _sign_table(L.N)
    out = sv.amps.copy()
    for x in range(L.M):
        for h in range(L.N):
            sel = _select(out, x, h)
            out[sel] = _phase_block(out[sel], S[:, h])
    return Statevector(L, out)


def apply_v(sv: Statevector) -> Statevector:
    """Hadamard transform on U (real and self-inverse, so V = V^dagger)."""
    amps = np.moveaxis(np.tensordot(_hadamard(sv.layout.N), sv.amps, axes=([1], [1])), 0, 1)
    return Statevector(sv.layout, amps)


def std_decomp_cell(N: int) -> np.ndarray:
    """Swap of |bot> with the uniform state; identity on the other Fourier states."""
    e = np.zeros(N + 1)
    e[N] = 1.0
    f = np.zeros(N + 1)
    f[:N] = 1 / np.sqrt(N)
    return np.eye(N + 1) - np.outer(e, e) - np.outer(f, f) + np.outer(e, f) + np.outer(f, e)


def std_decomp(sv: Statevector, x: int | None = None) -> Statevector:
    """StdDecomp on cell ``x``, or controlled on the X register if ``x`` is None."""
    _need(sv, "compressed")
    L = sv.layout
    S = std_decomp_cell(L.N)
    out = sv.amps.copy()
    if x is None:
        for xx in range(L.M):
            _apply_cell(out, xx, S)
    else:
        ax = 4 + x
        out = np.moveaxis(np.tensordot(S, out, axes=([1], [ax])), 0, ax)
    return Statevector(L, out)


def decompress_all(sv: Statevector) -> Statevector:
    for x in range(sv.layout.M):
        sv = std_decomp(sv, x)
    return sv


def _csto_prime(amps: np.ndarray, L: RegisterLayout) -> np.ndarray:
    out = amps.copy()
    u = np.arange(L.N)
    for x in range(L.M):
        for d in range(L.N):
            sel = _select(out, x, d)
            out[sel] = amps[sel][u ^ d]
    return out


def _cpho_prime(amps: np.ndarray, L: RegisterLayout) -> np.ndarray:
    S = _sign_table(L.N)
    out = amps.copy()
    for x in range(L.M):
        for d in range(L.N):
            sel = _select(out, x, d)
            out[sel] = _phase_block(out[sel], S[:, d])
    return out


def apply_csto(sv: Statevector) -> Statevector:
    _need(sv, "compressed")
    mid = std_decomp(sv)
    mid = Statevector(sv.layout, _csto_prime(mid.amps, sv.layout))
    return std_decomp(mid)


def apply_cpho(sv: Statevector) -> Statevector:
    _need(sv, "compressed")
    mid = std_decomp(sv)
    mid = Statevector(sv.layout, _cpho_prime(mid.amps, sv.layout))
    return std_decomp(mid)


def apply_hao(sv: Statevector) -> Statevector:
    """Hadamard-basis oracle: |x, u>|D> -> |x, u>|D xor (x, u)> on Fourier labels."""
    _need(sv, "hadamard")
    L = sv.layout
    out = sv.amps.copy()
    v = np.arange(L.N)
    for x in range(L.M):
        for u in range(L.N):
            sub = sv.amps[x, u]
            out[x, u] = np.take(sub, v ^ u, axis=2 + x)
    return Statevector(L, out)


def apply_local(sv: Statevector, U: np.ndarray) -> Statevector:
    """A unitary on X, U, W, R jointly (dimension ``alg_dim``)."""
    L = sv.layout
    if U.shape != (L.alg_dim, L.alg_dim):
        raise ValueError(f"local unitary must be {L.alg_dim}x{L.alg_dim}")
    flat = sv.amps.reshape(L.alg_dim, -1)
    return Statevector(L, (U @ flat).reshape(sv.amps.shape))


# ------------------------------------------------- independent references


def branch_cell_matrix(N: int, u: int) -> np.ndarray:
    """Per-cell action of one compressed phase query with answer register u,
    written out branch by branch (empty cell / filled cell / u = 0)."""
    C = np.zeros((N + 1, N + 1))
    if u == 0:
        return np.eye(N + 1)
    s = _sign_table(N)[u]
    C[:N, N] = s / np.sqrt(N)
    for d in range(N):
        C[N, d] = s[d] / np.sqrt(N)
        for y in range(N):
            if y == d:
                C[y, d] = (1 + s[d] * (N - 2)) / N
            else:
                C[y, d] = (1 - s[y] - s[d]) / N
    return C


def apply_cpho_by_branches(sv: Statevector) -> Statevector:
    _need(sv, "compressed")
    L = sv.layout
    out = sv.amps.copy()
    for x in range(L.M):
        for u in range(L.N):
            sub = out[x, u]
            ax = 2 + x
            out[x, u] = np.moveaxis(np.tensordot(branch_cell_matrix(L.N, u), sub, axes=([1], [ax])), 0, ax)
    return Statevector(L, out)


def fourier_cell_isometry(N: int) -> np.ndarray:
    """Columns: label 0 -> |bot>, label v != 0 -> (1/sqrt N) sum_y (-1)^<v,y> |y>."""
    W = np.zeros((N + 1, N))
    W[:N, :] = _hadamard(N)
    W[:N, 0] = 0.0
    W[N, 0] = 1.0
    return W


def embed_standard(sv: Statevector) -> Statevector:
    """Standard-mode state viewed inside the compressed layout (no bot mass)."""
    _need(sv, "standard")
    L = sv.layout.with_mode("compressed")
    amps = np.zeros(L.shape + sv.amps.shape[len(sv.layout.shape):], dtype=complex)
    amps[(slice(None),) * 4 + (slice(0, L.N),) * L.M] = sv.amps
    return Statevector(L, amps)


def operator_matrix(layout: RegisterLayout, op) -> np.ndarray:
    """Full matrix of ``op`` by acting on every basis vector at once."""
    eye = np.eye(layout.dim, dtype=complex).reshape(layout.shape + (layout.dim,))
    res = op(Statevector(layout, eye))
    return res.amps.reshape(layout.dim, layout.dim)


# ----------------------------------------------------------- measurement


def r_distribution(sv: Statevector) -> np.ndarray:
    p = np.abs(sv.amps) ** 2
    axes = tuple(i for i in range(p.ndim) if i != 3)
    return p.sum(axis=axes)


def _db_sizes(L: RegisterLayout) -> np.ndarray:
    sizes = np.zeros((L.cell,) * L.M, dtype=np.int64)
    for x in range(L.M):
        shape = [1] * L.M
        shape[x] = L.cell
        sizes = sizes + (np.arange(L.cell) != L.bot).reshape(shape)
    return sizes


def db_size_distribution(sv: Statevector, label_mask=None) -> np.ndarray:
    """Pr[|D| = k] for k = 0..M (optionally counting only masked cells)."""
    _need(sv, "compressed")
    L = sv.layout
    p = (np.abs(sv.amps) ** 2).reshape((L.alg_dim,) + (L.cell,) * L.M).sum(axis=0)
    if label_mask is None:
        sizes = _db_sizes(L)
    else:
        sizes = np.zeros((L.cell,) * L.M, dtype=np.int64)
        for x in range(L.M):
            if label_mask[x]:
                shape = [1] * L.M
                shape[x] = L.cell
                sizes = sizes + (np.arange(L.cell) != L.bot).reshape(shape)
    return np.bincount(sizes.ravel(), weights=p.ravel(), minlength=L.M + 1)


def expected_db_size(sv: Statevector, label_mask=None) -> float:
    dist = db_size_distribution(sv, label_mask)
    return float(np.arange(len(dist)) @ dist)


def database_distribution(sv: Statevector) -> dict[tuple, float]:
    _need(sv, "compressed")
    L = sv.layout
    p = (np.abs(sv.amps) ** 2).reshape((L.alg_dim,) + (L.cell,) * L.M).sum(axis=0)
    return {idx: float(p[idx]) for idx in zip(*np.nonzero(p > 1e-15))}


def measure_database(sv: Statevector, rng=None):
    """Exact label distribution, or one Born-rule sample if ``rng`` is given.

    Labels use ``None`` for the empty symbol.
    """
    dist = database_distribution(sv)
    bot = sv.layout.bot

    def label(t):
        return tuple(None if int(v) == bot else int(v) for v in t)

    if rng is None:
        return {label(k): v for k, v in dist.items()}
    keys = list(dist)
    probs = np.array([dist[k] for k in keys])
    return label(keys[rng.choice(len(keys), p=probs / probs.sum())])


def distribution_csv(dist: dict) -> str:
    lines = ["basis-label,probability"]
    for k in sorted(dist, key=lambda t: tuple(-1 if v is None else v for v in (t if isinstance(t, tuple) else (t,)))):
        lab = "|".join("_" if v is None else str(v) for v in (k if isinstance(k, tuple) else (k,)))
        lines.append(f"{lab},{dist[k]:.17g}")
    return "\n".join(lines) + "\n"


# --------------------------------------------------------- circuits


def random_circuit(layout: RegisterLayout, T: int, rng) -> list[np.ndarray]:
    """T + 1 Haar-random local unitaries, interleaved with T queries."""
    return [unitary_group.rvs(layout.alg_dim, random_state=rng) for _ in range(T + 1)]


def run_standard(unitaries, layout: RegisterLayout, query=apply_sto) -> Statevector:
    sv = uniform_oracle_state(layout.with_mode("standard"))
    sv = apply_local(sv, unitaries[0])
    for U in unitaries[1:]:
        sv = apply_local(query(sv), U)
    return sv


def run_compressed(unitaries, layout: RegisterLayout, query=None) -> Statevector:
    """Same algorithm, each query realized as V . CPhO . V on an initially empty database."""
    query = query or phase_query
    sv = basis_state(layout.with_mode("compressed"))
    sv = apply_local(sv, unitaries[0])
    for U in unitaries[1:]:
        sv = apply_local(query(sv), U)
    return sv


def equivalence_check(unitaries, layout: RegisterLayout, compressed_query=None) -> float:
    """Total-variation distance between R-register output distributions."""
    p = r_distribution(run_standard(unitaries, layout))
    q = r_distribution(run_compressed(unitaries, layout, compressed_query))
    return 0.5 * float(np.abs(p - q).sum())


_OPS = {
    "sto": apply_sto,
    "pho": apply_pho,
    "cpho": apply_cpho,
    "csto": apply_csto,
    "hao": apply_hao,
    "v": apply_v,
}


def circuit_to_json(ops: list[dict]) -> str:
    def enc(op):
        op = dict(op)
        if "matrix" in op:
            m = np.asarray(op["matrix"])
            op["matrix"] = [[[float(z.real), float(z.imag)] for z in row] for row in m]
        return op

    return json.dumps([enc(o) for o in ops])


def circuit_from_json(text: str) -> list[dict]:
    ops = json.loads(text)
    for op in ops:
        if op.get("op") not in {*_OPS, "decomp", "local"}:
            raise ValueError(f"unknown circuit op {op.get('op')!r}")
        if "matrix" in op:
            op["matrix"] = np.array([[complex(a, b) for a, b in row] for row in op["matrix"]])
    return ops


def run_circuit(ops: list[dict], sv: Statevector, tol: float = 1e-10) -> Statevector:
    """Apply a list of ``{op: ...}`` steps, checking the norm after each."""
    for step in ops:
        name = step["op"]
        if name == "local":
            U = step.get("matrix")
            if U is None:
                U = unitary_group.rvs(sv.layout.alg_dim, random_state=int(step["haar_seed"]))
            sv = apply_local(sv, np.asarray(U))
        elif name == "decomp":
            sv = std_decomp(sv, step.get("x"))
        else:
            sv = _OPS[name](sv)
        if abs(sv.norm() - 1.0) > tol:
            raise FloatingPointError(f"norm drifted to {sv.norm()} after {name}")
    return sv


# ------------------------------------------------ algorithm-side gates


def apply_alg_perm(sv: Statevector, fn) -> Statevector:
    """Basis permutation on (x, u, w, r) given as a function on index tuples."""
    L = sv.layout
    shape = L.alg_shape
    src = np.empty(L.alg_dim, dtype=np.int64)
    seen = np.zeros(L.alg_dim, dtype=bool)
    for i, idx in enumerate(np.ndindex(*shape)):
        j = np.ravel_multi_index(fn(*idx), shape)
        if seen[j]:
            raise ValueError("algorithm permutation is not a bijection")
        seen[j] = True
        src[j] = i
    flat = sv.amps.reshape(L.alg_dim, -1)
    return Statevector(L, flat[src].reshape(sv.amps.shape))


def apply_alg_phase(sv: Statevector, pred) -> Statevector:
    L = sv.layout
    signs = np.array([-1.0 if pred(*idx) else 1.0 for idx in np.ndindex(*L.alg_shape)])
    flat = sv.amps.reshape(L.alg_dim, -1)
    return Statevector(L, (signs[:, None] * flat).reshape(sv.amps.shape))


def apply_x_matrix(sv: Statevector, A: np.ndarray) -> Statevector:
    return Statevector(sv.layout, np.tensordot(A, sv.amps, axes=([1], [0])))


def phase_query(sv: Statevector) -> Statevector:
    """A standard-form query realized with the compressed phase oracle."""
    return apply_v(apply_cpho(apply_v(sv)))
