"""Sweep driver: spec parsing, seeded parallel execution, statistics, records
and plot data."""

from __future__ import annotations

import csv
import hashlib
import io
import itertools
import json
import math
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from . import bounds
from .classical import (
    FlipMemory,
    RestartBirthday,
    CarryPoints,
    SegmentPlan,
    classical_tuple_tail,
    default_config,
    run_segmented,
    solve_unbounded,
)
from .oracle import OracleParams, make_instance
from .problem import same_sum_count

__all__ = [
    "SCHEMA",
    "KINDS",
    "SpecError",
    "AxisMismatchError",
    "ExperimentSpec",
    "ResultRecord",
    "load_spec",
    "run",
    "emit_plotdata",
    "load_rows",
    "summarize",
    "wilson_interval",
    "worker_count",
]

SCHEMA = "nestedcol-sweep/1"
CANONICAL = ["N", "N0", "ell", "S", "T", "trial", "success", "queries", "capacity"]
WORKERS_ENV = "LAB_WORKERS"


class SpecError(ValueError):
    """Malformed experiment spec or record."""


class AxisMismatchError(ValueError):
    """Overlay curve and record disagree on the swept parameter."""


# ----------------------------------------------------------------- kinds


def _trial_seed(seed: int, point_index: int, trial: int) -> int:
    state = np.random.SeedSequence(seed, spawn_key=(point_index, trial)).generate_state(2, np.uint32)
    return int(state[0]) | int(state[1]) << 32


def _birthday(pt, seed):
    N, ell, T = int(pt["N"]), int(pt.get("ell", 2)), int(pt["T"])
    M = int(pt.get("M", max(T, 1 << 20)))
    inst = make_instance(OracleParams(M, N, int(pt.get("N0", 2)), ell, int(pt.get("y", 0)), seed))
    k = same_sum_count(inst, T)
    mean = math.comb(T, ell) / N
    return {"count": k, "tail": int(k <= mean / 2), "queries": T, "capacity": k}


def _classical_solve(pt, seed):
    N, ell = int(pt["N"]), int(pt.get("ell", 2))
    N0 = int(pt["N0"]) if "N0" in pt else int(round(N ** float(pt["N0_exp"])))
    M = int(pt.get("M", 1 << 24))
    inst = make_instance(OracleParams(M, N, N0, ell, int(pt.get("y", 0)) % N, seed))
    cfg = default_config(N, N0, ell, seed=seed ^ 0x5A5A, k_factor=float(pt.get("k_factor", 1.2)), t1_margin=float(pt.get("t1_margin", 1.25)))
    res = solve_unbounded(inst, cfg)
    return {"N0": N0, "success": int(res.success), "queries": res.ledger.total, "tuples": res.tuples_found}


def _segmented(pt, seed):
    N, ell, S, T = int(pt["N"]), int(pt.get("ell", 2)), float(pt["S"]), int(pt["T"])
    M = int(pt.get("M", 1 << 24))
    t_prime = int(pt["t_prime"]) if "t_prime" in pt else math.ceil(float(pt.get("c_seg", 1.0)) * (S * N) ** (1 / ell))
    L = max(1, T // t_prime)
    inst = make_instance(OracleParams(M, N, int(pt.get("N0", 2)), ell, int(pt.get("y", 0)), seed))
    mem = FlipMemory.from_instance(inst)
    strategy = CarryPoints(S) if pt.get("strategy", "restart") == "carry" else RestartBirthday()
    trace = run_segmented(strategy, SegmentPlan(L, t_prime, S), inst, mem, seed=seed)
    return {"capacity": trace.final, "queries": trace.ledger.t_h, "flips": trace.ledger.t_flip, "t_prime": t_prime}


def _equivalence(pt, seed):
    from .quantum.dense import RegisterLayout, equivalence_check, random_circuit

    L = RegisterLayout(int(pt["M"]), int(pt["N"]), int(pt.get("w", 2)), int(pt.get("r", 2)))
    tv = equivalence_check(random_circuit(L, int(pt["T"]), np.random.default_rng(seed)), L)
    return {"tv": tv, "success": int(tv < 1e-9)}


def _capacity(pt, seed):
    from .quantum.capacity import bht_reduced

    c = bht_reduced(int(pt["M"]), int(pt["N0"]), int(pt["T"]), str(pt.get("label", "trivial")))
    const = float(pt.get("const", 20.0))
    bound = const * c.T**2 * c.V / c.N0
    return {"p": c.p, "V": c.V, "bound": bound, "success": int(c.p <= bound)}


def _quantum_toy(pt, seed):
    from .quantum.solver import QuantumToyParams, default_toy_params, run_quantum_solver

    M, N, N0, ell = int(pt["M"]), int(pt["N"]), int(pt["N0"]), int(pt.get("ell", 2))
    inst = make_instance(OracleParams(M, N, N0, ell, int(pt.get("y", 0)) % N, seed))
    d = default_toy_params(M, N, N0, ell)
    res = run_quantum_solver(inst, QuantumToyParams(d.t1, d.k_target, d.t3, seed=seed ^ 0xA5A5))
    return {"success": int(res.success), "queries": sum(res.counts.values()), "p_exact": res.success_probability}


def _bounds_curve(pt, seed):
    N, N0, ell = float(pt["N"]), float(pt["N0"]), int(pt.get("ell", 2))
    setting = str(pt.get("setting", "classical"))
    if pt.get("side", "lower") == "lower":
        r = bounds.eval_lower_bound(N, N0, ell, float(pt["S"]), setting, float(pt.get("const", 1.0)))
    else:
        r = bounds.eval_upper_bound(N, N0, ell, setting, float(pt.get("const", 1.0)))
    return {"value": r.T, "regime_ok": int(r.regime_ok)}


KINDS = {
    "birthday-count": _birthday,
    "classical-solve": _classical_solve,
    "segmented-capacity": _segmented,
    "oracle-equivalence": _equivalence,
    "capacity-vs-collision": _capacity,
    "quantum-toy": _quantum_toy,
    "bounds-curve": _bounds_curve,
}

PRIMARY_METRIC = {
    "birthday-count": "count",
    "classical-solve": "success",
    "segmented-capacity": "capacity",
    "oracle-equivalence": "tv",
    "capacity-vs-collision": "p",
    "quantum-toy": "success",
    "bounds-curve": "value",
}

BERNOULLI = {"success", "tail"}


# ------------------------------------------------------------------ specs


@dataclass
class ExperimentSpec:
    kind: str
    grid: dict
    trials: int = 1
    seed: int = 0
    output: str | None = None

    def validate(self) -> None:
        if self.kind not in KINDS:
            raise SpecError(f"unknown kind {self.kind!r}; expected one of {sorted(KINDS)}")
        if not self.grid or any(len(v) == 0 for v in self.grid.values()):
            raise SpecError("grid must be nonempty with at least one value per parameter")
        if self.trials < 1:
            raise SpecError("trials must be >= 1")

    def canonical(self) -> dict:
        return {"kind": self.kind, "grid": {k: list(v) for k, v in sorted(self.grid.items())}, "trials": self.trials, "seed": self.seed}

    def hash(self) -> str:
        return hashlib.sha256(json.dumps(self.canonical(), sort_keys=True).encode()).hexdigest()

    def points(self) -> list[dict]:
        keys = sorted(self.grid)
        return [dict(zip(keys, combo)) for combo in itertools.product(*(self.grid[k] for k in keys))]


def _spec_from_obj(obj: dict) -> ExperimentSpec:
    try:
        grid = {k: (v if isinstance(v, list) else [v]) for k, v in dict(obj["grid"]).items()}
        spec = ExperimentSpec(
            kind=obj["kind"], grid=grid, trials=int(obj.get("trials", 1)), seed=int(obj.get("seed", 0)), output=obj.get("output")
        )
    except (KeyError, TypeError) as exc:
        raise SpecError(f"malformed spec: {exc}") from exc
    spec.validate()
    return spec


def load_spec(path) -> ExperimentSpec:
    path = Path(path)
    raw = path.read_bytes()
    try:
        obj = tomllib.loads(raw.decode()) if path.suffix == ".toml" else json.loads(raw)
    except (ValueError, tomllib.TOMLDecodeError) as exc:
        raise SpecError(f"cannot parse {path}: {exc}") from exc
    return _spec_from_obj(obj)


# ------------------------------------------------------------- statistics


def wilson_interval(successes: int, n: int, z: float = 1.96) -> tuple[float, float]:
    p = successes / n
    den = 1 + z * z / n
    centre = (p + z * z / (2 * n)) / den
    half = z * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / den
    return max(0.0, centre - half), min(1.0, centre + half)


def summarize(values, bernoulli: bool = False) -> dict:
    arr = np.asarray(values, dtype=float)
    n = arr.size
    out = {"n": n, "mean": float(arr.mean()), "variance": float(arr.var(ddof=1)) if n > 1 else None}
    if n < 2:
        out.update(ci_low=None, ci_high=None, ci_undefined=True)
    elif bernoulli:
        lo, hi = wilson_interval(int(arr.sum()), n)
        out.update(ci_low=lo, ci_high=hi, ci_undefined=False)
    else:
        half = 1.96 * math.sqrt(out["variance"] / n)
        out.update(ci_low=out["mean"] - half, ci_high=out["mean"] + half, ci_undefined=False)
    return out


# ---------------------------------------------------------------- running


def worker_count() -> int:
    try:
        return max(1, int(os.environ.get(WORKERS_ENV, "1")))
    except ValueError:
        return 1


def _work(item):
    kind, pi, trial, pt, seed = item
    row = {**pt, "trial": trial}
    row.update(KINDS[kind](pt, seed))
    return pi, row


@dataclass
class ResultRecord:
    spec: ExperimentSpec
    spec_hash: str
    rows: list
    aggregates: list
    wall_clock: float
    columns: list = field(default_factory=list)

    def to_json(self) -> str:
        return json.dumps(
            {
                "schema": SCHEMA,
                "spec": self.spec.canonical(),
                "spec_hash": self.spec_hash,
                "columns": self.columns,
                "rows": self.rows,
                "aggregates": self.aggregates,
                "wall_clock": self.wall_clock,
            },
            indent=1,
            sort_keys=True,
        )

    @classmethod
    def from_json(cls, text: str) -> "ResultRecord":
        obj = json.loads(text)
        if obj.get("schema") != SCHEMA:
            raise SpecError(f"unsupported record schema {obj.get('schema')!r}")
        spec = _spec_from_obj(obj["spec"])
        if spec.hash() != obj["spec_hash"]:
            raise SpecError("spec hash does not match the embedded spec")
        return cls(spec, obj["spec_hash"], obj["rows"], obj["aggregates"], obj["wall_clock"], obj.get("columns", []))

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(f"# schema: {SCHEMA}\n")
        w = csv.DictWriter(buf, fieldnames=self.columns, lineterminator="\n", restval="")
        w.writeheader()
        for row in self.rows:
            w.writerow({k: _fmt(v) for k, v in row.items()})
        return buf.getvalue()


def _fmt(v):
    if isinstance(v, float):
        return repr(v)
    return v


def load_rows(path_or_text) -> list[dict]:
    text = path_or_text
    if isinstance(path_or_text, Path) or (isinstance(path_or_text, str) and "\n" not in path_or_text):
        text = Path(path_or_text).read_text()
    first, _, rest = text.partition("\n")
    if first.strip() != f"# schema: {SCHEMA}":
        raise SpecError(f"unknown CSV schema line {first!r}")
    return list(csv.DictReader(io.StringIO(rest)))


def run(spec: ExperimentSpec, workers: int | None = None, write: bool = True) -> ResultRecord:
    spec.validate()
    t0 = time.perf_counter()
    pts = spec.points()
    items = [
        (spec.kind, pi, trial, pt, _trial_seed(spec.seed, pi, trial))
        for pi, pt in enumerate(pts)
        for trial in range(spec.trials)
    ]
    workers = workers or worker_count()
    if workers > 1 and len(items) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_work, items, chunksize=max(1, len(items) // (4 * workers))))
    else:
        results = [_work(it) for it in items]
    rows = [row for _, row in results]

    metric_names = [k for k in rows[0] if k not in spec.grid and k != "trial"]
    aggregates = []
    for pi, pt in enumerate(pts):
        mine = [row for i, row in results if i == pi]
        agg = {"point": pt, "metrics": {}}
        for m in metric_names:
            vals = [r[m] for r in mine if isinstance(r.get(m), (int, float))]
            if vals:
                agg["metrics"][m] = summarize(vals, bernoulli=m in BERNOULLI)
        aggregates.append(agg)

    extra = sorted({k for r in rows for k in r} - set(CANONICAL))
    columns = CANONICAL + extra
    rec = ResultRecord(spec, spec.hash(), rows, aggregates, time.perf_counter() - t0, columns)
    if write and spec.output:
        out = Path(spec.output)
        out.parent.mkdir(parents=True, exist_ok=True)
        out.with_suffix(".csv").write_text(rec.to_csv())
        out.with_suffix(".json").write_text(rec.to_json())
    return rec


# --------------------------------------------------------------- plotdata


def _curve_value(curve: dict, x: float, pt: dict) -> float:
    name = curve["curve"]
    env = {**pt, **curve.get("fixed", {}), curve["x"]: x}
    c = float(curve.get("const", 1.0))
    g = lambda k, d=None: float(env[k]) if k in env else d  # noqa: E731
    if name == "segmented-capacity":
        return bounds.segmented_capacity_bound(g("S"), g("T"), g("N"), int(g("ell", 2)), c)
    if name == "tuple-mean":
        return bounds.tuple_count_moments(int(g("T")), int(g("ell", 2)), int(g("N")))[0]
    if name == "tail-bound":
        return classical_tuple_tail(int(g("T")), int(g("K")), int(g("ell", 2)), int(g("N")), c)
    if name in ("lower-classical", "lower-quantum"):
        return bounds.eval_lower_bound(g("N"), g("N0"), int(g("ell", 2)), g("S"), name.split("-")[1], c).T
    if name in ("upper-classical", "upper-quantum"):
        return bounds.eval_upper_bound(g("N"), g("N0"), int(g("ell", 2)), name.split("-")[1], c).T
    raise SpecError(f"unknown curve {name!r}")


def emit_plotdata(record: ResultRecord, overlays=(), x: str | None = None) -> str:
    """Long-format CSV: series, x_name, x, y. One series for the measured
    primary metric (mean per grid point) and one per overlay curve."""
    varying = [k for k, v in record.spec.grid.items() if len(v) > 1]
    if x is None:
        if len(varying) != 1:
            raise AxisMismatchError(f"record sweeps {varying or 'no parameter'}; name the x axis explicitly")
        x = varying[0]
    if x not in record.spec.grid:
        raise AxisMismatchError(f"x axis {x!r} is not a parameter of the record (axes: {sorted(record.spec.grid)})")
    metric = PRIMARY_METRIC[record.spec.kind]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["series", "x_name", "x", "y"])
    for agg in record.aggregates:
        m = agg["metrics"].get(metric)
        if m is not None:
            w.writerow([f"measured:{metric}", x, repr(float(agg["point"][x])), repr(m["mean"])])
    for curve in overlays:
        if curve.get("x") != x:
            raise AxisMismatchError(f"overlay {curve.get('curve')!r} is over {curve.get('x')!r} but the record is over {x!r}")
        for agg in record.aggregates:
            xv = float(agg["point"][x])
            w.writerow([f"bound:{curve['curve']}", x, repr(xv), repr(_curve_value(curve, xv, agg["point"]))])
    return buf.getvalue()
