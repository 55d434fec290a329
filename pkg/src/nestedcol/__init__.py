"""Simulation and measurement toolkit for nested collision finding:
random oracles, classical and quantum solvers, compressed-oracle simulation
and closed-form time-space bounds."""

from .oracle import OracleParams, QueryLedger, FlipMemory, make_instance, query_h, query_g, flip
from .problem import CollisionWitness, verify_witness, enumerate_same_sum_tuples, tuple_sum

__version__ = "0.1.0"

__all__ = [
    "OracleParams",
    "QueryLedger",
    "FlipMemory",
    "make_instance",
    "query_h",
    "query_g",
    "flip",
    "CollisionWitness",
    "verify_witness",
    "enumerate_same_sum_tuples",
    "tuple_sum",
]
