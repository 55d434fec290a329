"""Seeded random oracles H: [M] -> [N] and G: [M^ell] -> [N0] with lazy sampling.

Every value is a keyed-hash PRF of (seed, oracle tag, index), so an instance
needs no table to answer consistently. Sampled values are still cached per
instance, which is what ``sampled_h`` / ``sampled_g`` report.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field

__all__ = [
    "OracleParams",
    "OracleInstance",
    "QueryLedger",
    "FlipMemory",
    "PRF",
    "ParameterError",
    "make_instance",
    "query_h",
    "query_g",
    "flip",
    "tuple_index",
    "index_tuple",
    "experiment_record",
    "load_experiment_record",
]

_MASK64 = (1 << 64) - 1


class ParameterError(ValueError):
    """Invalid oracle parameters."""


class PRF:
    """Uniform values in ``[size]`` from blake2b keyed by a 64-bit seed.

    Non power-of-two ranges use rejection sampling on 64-bit words, so the
    output is exactly uniform given an ideal hash.
    """

    def __init__(self, seed: int, tag: str, size: int):
        if size < 1:
            raise ParameterError(f"PRF range must be positive, got {size}")
        self.size = size
        self._base = hashlib.blake2b(
            key=(seed & _MASK64).to_bytes(8, "little"),
            person=tag.encode()[:16],
            digest_size=8,
        )
        self._pow2 = size & (size - 1) == 0
        self._limit = (1 << 64) - ((1 << 64) % size)

    def __call__(self, index: int) -> int:
        nbytes = max(1, (index.bit_length() + 7) // 8)
        msg = nbytes.to_bytes(2, "little") + index.to_bytes(nbytes, "little")
        counter = 0
        while True:
            h = self._base.copy()
            h.update(msg)
            if counter:
                h.update(counter.to_bytes(4, "little"))
            word = int.from_bytes(h.digest(), "little")
            if self._pow2:
                return word & (self.size - 1)
            if word < self._limit:
                return word % self.size
            counter += 1


@dataclass(frozen=True)
class OracleParams:
    M: int
    N: int
    N0: int
    ell: int
    y: int = 0
    seed: int = 0

    def validate(self) -> None:
        if self.M < 2 or self.N < 2 or self.N0 < 2:
            raise ParameterError(f"M, N, N0 must be >= 2 (got {self.M}, {self.N}, {self.N0})")
        if self.ell < 1:
            raise ParameterError(f"ell must be >= 1, got {self.ell}")
        if self.M < self.ell:
            raise ParameterError(
                f"no strictly increasing {self.ell}-tuple exists over [{self.M}]"
            )
        if not 0 <= self.y < self.N:
            raise ParameterError(f"target y={self.y} outside [0, {self.N})")
        if not 0 <= self.seed <= _MASK64:
            raise ParameterError("seed must fit in 64 bits")

    @property
    def tuple_space(self) -> int:
        return self.M**self.ell


@dataclass
class QueryLedger:
    t_h: int = 0
    t_g: int = 0
    t_flip: int = 0
    s_bits: float = 0

    @property
    def total(self) -> int:
        return self.t_h + self.t_g + self.t_flip


class OracleInstance:
    """A pair (H, G) of lazily sampled random oracles plus the target y.

    ``fixed_h`` / ``fixed_g`` pin some values explicitly (used to inject
    small hand-written tables in tests); anything not pinned falls back to
    the PRF.
    """

    def __init__(self, params: OracleParams, fixed_h=None, fixed_g=None):
        self.params = params
        self._h_prf = PRF(params.seed, "nc-H", params.N)
        self._g_prf = PRF(params.seed, "nc-G", params.N0)
        self.h_table: dict[int, int] = {}
        self.g_table: dict[int, int] = {}
        self._fixed_h = dict(enumerate(fixed_h)) if fixed_h is not None else {}
        self._fixed_g = dict(fixed_g) if fixed_g is not None else {}

    @property
    def sampled_h(self) -> int:
        return len(self.h_table)

    @property
    def sampled_g(self) -> int:
        return len(self.g_table)

    def peek_h(self, x: int) -> int:
        """H(x) without charging a ledger (for harness-side verification)."""
        v = self.h_table.get(x)
        if v is None:
            v = self._fixed_h[x] if x in self._fixed_h else self._h_prf(x)
            self.h_table[x] = v
        return v

    def peek_g(self, idx: int) -> int:
        v = self.g_table.get(idx)
        if v is None:
            v = self._fixed_g[idx] if idx in self._fixed_g else self._g_prf(idx)
            self.g_table[idx] = v
        return v


def make_instance(params: OracleParams, fixed_h=None, fixed_g=None) -> OracleInstance:
    params.validate()
    if fixed_h is not None:
        if len(fixed_h) > params.M or any(not 0 <= v < params.N for v in fixed_h):
            raise ParameterError("fixed_h must list values in [N] for a prefix of [M]")
    if fixed_g is not None:
        for k, v in dict(fixed_g).items():
            if not 0 <= k < params.tuple_space or not 0 <= v < params.N0:
                raise ParameterError(f"fixed_g entry {k}->{v} out of range")
    return OracleInstance(params, fixed_h, fixed_g)


def query_h(inst: OracleInstance, ledger: QueryLedger, x: int) -> int:
    if not 0 <= x < inst.params.M:
        raise IndexError(f"H query {x} outside [0, {inst.params.M})")
    ledger.t_h += 1
    return inst.peek_h(x)


def query_g(inst: OracleInstance, ledger: QueryLedger, tup: int) -> int:
    if not 0 <= tup < inst.params.tuple_space:
        raise IndexError(f"G query {tup} outside [0, {inst.params.tuple_space})")
    ledger.t_g += 1
    return inst.peek_g(tup)


def tuple_index(xs, M: int) -> int:
    """Mixed-radix index of ``xs`` in [M^len(xs)] (first element most significant)."""
    idx = 0
    for x in xs:
        idx = idx * M + x
    return idx


def index_tuple(idx: int, M: int, ell: int) -> tuple[int, ...]:
    out = []
    for _ in range(ell):
        idx, r = divmod(idx, M)
        out.append(r)
    return tuple(reversed(out))


@dataclass
class FlipMemory:
    """Write-only output memory over [M^ell] tuple indices.

    ``flip`` toggles one bit and answers with a value drawn once per index
    from ``reply`` (by default the instance's G, which is what makes G a
    recording of the computation).
    """

    size: int
    reply: object
    flipped: set = field(default_factory=set)
    g_replies: dict = field(default_factory=dict)

    @classmethod
    def from_instance(cls, inst: OracleInstance) -> "FlipMemory":
        return cls(size=inst.params.tuple_space, reply=inst.peek_g)

    def bit(self, tup: int) -> int:
        return int(tup in self.flipped)


def flip(mem: FlipMemory, ledger: QueryLedger, tup: int) -> int:
    if not 0 <= tup < mem.size:
        raise IndexError(f"FLIP index {tup} outside [0, {mem.size})")
    ledger.t_flip += 1
    if tup in mem.flipped:
        mem.flipped.remove(tup)
    else:
        mem.flipped.add(tup)
    g = mem.g_replies.get(tup)
    if g is None:
        g = mem.g_replies[tup] = mem.reply(tup)
    return g


def experiment_record(params: OracleParams, ledger: QueryLedger) -> str:
    s_bits = ledger.s_bits
    if s_bits == float("inf"):
        s_bits = None
    return json.dumps(
        {
            "params": asdict(params),
            "ledger": {"t_h": ledger.t_h, "t_g": ledger.t_g, "t_flip": ledger.t_flip, "s_bits": s_bits},
        },
        sort_keys=True,
    )


def load_experiment_record(text: str) -> tuple[OracleParams, QueryLedger]:
    obj = json.loads(text)
    params = OracleParams(**obj["params"])
    led = dict(obj["ledger"])
    if led.get("s_bits") is None:
        led["s_bits"] = float("inf")
    return params, QueryLedger(**led)
