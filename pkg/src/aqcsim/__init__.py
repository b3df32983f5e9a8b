"""Classical simulation of adiabatic quantum optimisation for 3-SAT."""

__version__ = "0.1.0"

from ._kernels import BACKENDS, get_backend, set_backend, use_backend
from .cnf import (
    Assignment,
    Clause,
    CnfInstance,
    Literal,
    brute_force_solutions,
    generate_instance,
    paper_instance,
    parse_dimacs,
    write_dimacs,
)
from .energy import EnergyTable, energy, energy_table_parallel, energy_table_serial, plan_chunks
from .evolve import EvolutionConfig, EvolutionResult, StateVector, initial_state, run
from .hamiltonian import Schedule, build_final, build_initial, interpolate, spectrum
