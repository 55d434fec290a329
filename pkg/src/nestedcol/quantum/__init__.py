"""Exact quantum simulation: oracle forms, database inspection, Grover search,
the toy solver and the capacity experiment."""

from .dense import RegisterLayout, Statevector, DimensionError
from .grover import grover_search
from .solver import run_quantum_solver, QuantumToyParams
from .capacity import collision_capacity_check

__all__ = [
    "RegisterLayout",
    "Statevector",
    "DimensionError",
    "grover_search",
    "run_quantum_solver",
    "QuantumToyParams",
    "collision_capacity_check",
]
