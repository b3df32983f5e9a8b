"""Schrödinger evolution along the sweep with fixed-step RK4 (hbar = 1).

The state is never renormalised; ``norm_drift`` in the result is the
integrator's own diagnostic.
"""

from __future__ import annotations

import csv
import math
import os
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from . import _kernels
from .cnf import BRUTE_FORCE_CAP, Assignment, CnfInstance, solution_indices
from .hamiltonian import DENSE_CAP, DiagonalHamiltonian, Schedule, build_final, interpolate, lowest_eigenpairs
from .errors import SizeError

NORM_TOLERANCE = 1e-6


@dataclass(frozen=True, eq=False)
class StateVector:
    amplitudes: np.ndarray
    num_variables: int

    def __post_init__(self):
        if self.amplitudes.shape != (1 << self.num_variables,):
            raise ValueError("state length must be 2^n")

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def is_normalized(self, tol: float = NORM_TOLERANCE) -> bool:
        return abs(self.norm() - 1.0) <= tol

    def fidelity(self, other: StateVector) -> float:
        return float(abs(np.vdot(self.amplitudes, other.amplitudes)) ** 2)


@dataclass(frozen=True)
class EvolutionConfig:
    total_time: float
    num_steps: int | None = None
    track_gap: bool = False
    track_ground_overlap: bool = False
    stride: int = 10

    def __post_init__(self):
        if not self.total_time > 0:
            raise ValueError(f"total_time must be > 0, got {self.total_time}")
        if self.num_steps is not None and self.num_steps < 1:
            raise ValueError(f"num_steps must be >= 1, got {self.num_steps}")
        if self.stride < 1:
            raise ValueError(f"stride must be >= 1, got {self.stride}")


@dataclass(eq=False)
class EvolutionResult:
    final_state: StateVector
    success_probability: float
    norm_drift: float
    total_time: float
    num_steps: int
    times: np.ndarray
    norms: np.ndarray
    success_trace: np.ndarray
    overlap_trace: np.ndarray | None = None
    gap_trace: np.ndarray | None = None
    num_solutions: int = 0

    @property
    def s_values(self) -> np.ndarray:
        return self.times / self.total_time

    def write_csv(self, path: str | os.PathLike):
        header = ["t", "s", "norm", "success_probability"]
        columns = [self.times, self.s_values, self.norms, self.success_trace]
        if self.gap_trace is not None:
            header.append("gap")
            columns.append(self.gap_trace)
        if self.overlap_trace is not None:
            header.append("overlap")
            columns.append(self.overlap_trace)
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(header)
            for row in zip(*columns):
                writer.writerow([repr(float(v)) for v in row])


def initial_state(n: int) -> StateVector:
    dim = 1 << n
    return StateVector(np.full(dim, 1.0 / math.sqrt(dim), dtype=np.complex128), n)


def default_num_steps(total_time: float, n: int, m: int) -> int:
    # n + m bounds the spectral radius of H(s); keeps dt * ||H|| <= 0.01
    return max(1000, math.ceil(100.0 * total_time * (n + m)))


def success_probability(state: StateVector, solutions: Iterable[Assignment] | np.ndarray) -> float:
    if isinstance(solutions, np.ndarray):
        idx = solutions.astype(np.int64, copy=False)
    else:
        solutions = list(solutions)
        for a in solutions:
            if a.num_variables != state.num_variables:
                raise ValueError("solution and state dimensions differ")
        idx = np.fromiter((a.bits for a in solutions), dtype=np.int64, count=len(solutions))
    if idx.size == 0:
        return 0.0
    return float(np.sum(np.abs(state.amplitudes[idx]) ** 2))


def step(state: StateVector, schedule: Schedule, t: float, dt: float) -> StateVector:
    """One classical RK4 step of ``i dpsi/dt = H(s(t)) psi``."""
    s = schedule.s_at
    psi = state.amplitudes

    def f(tt, y):
        return -1j * schedule.apply(s(tt), y)

    k1 = f(t, psi)
    k2 = f(t + 0.5 * dt, psi + 0.5 * dt * k1)
    k3 = f(t + 0.5 * dt, psi + 0.5 * dt * k2)
    k4 = f(t + dt, psi + dt * k3)
    return StateVector(psi + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4), state.num_variables)


def _advance(psi, schedule, dt, k0, nsteps):
    if schedule.is_plain_linear:
        _kernels.rk4_segment(psi, schedule.final.diagonal, schedule.num_variables,
                             schedule.total_time, dt, k0, nsteps)
        return psi
    state = StateVector(psi, schedule.num_variables)
    for j in range(nsteps):
        state = step(state, schedule, (k0 + j) * dt, dt)
    psi[:] = state.amplitudes
    return psi


def _ground_diagnostics(schedule, s, psi, degeneracy, want_gap, want_overlap):
    count = degeneracy + 1 if want_gap else degeneracy
    w, v = lowest_eigenpairs(interpolate(schedule, s), count)
    gap = overlap = math.nan
    if want_gap:
        gap = float(w[degeneracy] - w[0]) if len(w) > degeneracy else math.inf
    if want_overlap:
        # project onto the (numerically) degenerate ground manifold
        manifold = v[:, np.abs(w - w[0]) <= 1e-9]
        overlap = float(np.sum(np.abs(manifold.conj().T @ psi) ** 2))
    return gap, overlap


def evolve(
    schedule: Schedule,
    config: EvolutionConfig,
    solutions: np.ndarray,
    psi0: StateVector | None = None,
    num_steps: int | None = None,
) -> EvolutionResult:
    """Integrate from ``t = 0`` to ``total_time`` and record a trace every ``stride`` steps.

    ``schedule.total_time`` is taken as authoritative; ``config.total_time``
    only feeds the step-count default when ``num_steps`` is not given.
    """
    n = schedule.num_variables
    tracking = config.track_gap or config.track_ground_overlap
    if tracking and n > DENSE_CAP:
        raise SizeError(f"ground-state tracking needs dense diagonalisation, n <= {DENSE_CAP}")
    if num_steps is None:
        num_steps = config.num_steps
    if num_steps is None:
        num_steps = default_num_steps(schedule.total_time, n, int(schedule.final.diagonal.max()))
    tau = schedule.total_time
    dt = tau / num_steps
    psi = (psi0 or initial_state(n)).amplitudes.astype(np.complex128, copy=True)
    degeneracy = schedule.final.ground_degeneracy

    marks = list(range(0, num_steps, config.stride)) + [num_steps]
    times, norms, succ, gaps, overlaps = [], [], [], [], []
    done = 0
    for mark in marks:
        if mark > done:
            _advance(psi, schedule, dt, done, mark - done)
            done = mark
        t = done * dt
        times.append(t)
        norms.append(np.linalg.norm(psi))
        succ.append(float(np.sum(np.abs(psi[solutions]) ** 2)) if solutions.size else 0.0)
        if tracking:
            gap, overlap = _ground_diagnostics(
                schedule, min(1.0, schedule.s_at(t)), psi, degeneracy,
                config.track_gap, config.track_ground_overlap,
            )
            gaps.append(gap)
            overlaps.append(overlap)

    final = StateVector(psi, n)
    return EvolutionResult(
        final_state=final,
        success_probability=success_probability(final, solutions),
        norm_drift=abs(final.norm() - 1.0),
        total_time=tau,
        num_steps=num_steps,
        times=np.array(times),
        norms=np.array(norms),
        success_trace=np.array(succ),
        overlap_trace=np.array(overlaps) if config.track_ground_overlap else None,
        gap_trace=np.array(gaps) if config.track_gap else None,
        num_solutions=int(solutions.size),
    )


def run(
    instance: CnfInstance,
    config: EvolutionConfig,
    num_workers: int = 1,
    psi0: StateVector | None = None,
    final: DiagonalHamiltonian | None = None,
) -> EvolutionResult:
    """Evolve the uniform superposition of ``instance`` and score the result.

    Satisfying assignments come from the brute-force oracle up to its cap and
    from the zero set of the energy table beyond it.
    """
    n = instance.num_variables
    if final is None:
        final = build_final(instance, num_workers)
    if n <= BRUTE_FORCE_CAP:
        solutions = solution_indices(instance)
    else:
        solutions = np.flatnonzero(final.diagonal == 0)
    schedule = Schedule(final, config.total_time)
    steps = config.num_steps or default_num_steps(config.total_time, n, instance.num_clauses)
    return evolve(schedule, config, solutions, psi0=psi0, num_steps=steps)
