"""Initial/final Hamiltonians, the linear interpolation between them, and
the low-lying spectrum along the sweep.

Basis index ``i`` is the computational state whose bit ``k`` is ``q_{k+1}``;
``|0>`` and ``|1>`` are the +1 / -1 eigenvectors of sigma_z.  The initial
Hamiltonian is ``sum_k (1 - sigma_x^(k)) / 2``, zero on the uniform
superposition.
"""

from __future__ import annotations

import csv
import os
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
import scipy.linalg

from . import _kernels
from .cnf import CnfInstance
from .energy import TABLE_CAP, EnergyTable, energy_table
from .errors import SizeError

DENSE_CAP = 12
# entries of H_f are integer counts, so anything closer than this is equal
_DEGENERACY_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class DiagonalHamiltonian:
    diagonal: np.ndarray
    num_variables: int

    def __post_init__(self):
        if self.diagonal.shape != (1 << self.num_variables,):
            raise ValueError("diagonal length must be 2^n")

    @classmethod
    def from_table(cls, table: EnergyTable) -> DiagonalHamiltonian:
        return cls(table.values.astype(np.float64), table.num_variables)

    @property
    def ground_energy(self) -> float:
        return float(self.diagonal.min())

    @property
    def ground_degeneracy(self) -> int:
        return int(np.count_nonzero(self.diagonal <= self.ground_energy + _DEGENERACY_TOL))

    def ground_indices(self) -> np.ndarray:
        return np.flatnonzero(self.diagonal <= self.ground_energy + _DEGENERACY_TOL)

    def to_dense(self) -> DenseHamiltonian:
        return DenseHamiltonian(np.diag(self.diagonal).astype(np.complex128), self.num_variables)


@dataclass(frozen=True, eq=False)
class DenseHamiltonian:
    matrix: np.ndarray
    num_variables: int

    def __post_init__(self):
        dim = 1 << self.num_variables
        if self.matrix.shape != (dim, dim):
            raise ValueError(f"matrix must be {dim}x{dim}")

    def hermiticity_error(self) -> float:
        return float(np.max(np.abs(self.matrix - self.matrix.conj().T)))

    def eigvalsh(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.matrix)


def _check_dense(n: int, cap: int = DENSE_CAP):
    if n > cap:
        raise SizeError(f"dense {2**n}x{2**n} matrix exceeds cap n <= {cap}")


def build_final(instance: CnfInstance, num_workers: int = 1, cap: int = TABLE_CAP) -> DiagonalHamiltonian:
    return DiagonalHamiltonian.from_table(energy_table(instance, num_workers, cap))


def build_initial(n: int, cap: int = DENSE_CAP) -> DenseHamiltonian:
    if n < 1:
        raise ValueError("n must be >= 1")
    _check_dense(n, cap)
    dim = 1 << n
    h = np.zeros((dim, dim), dtype=np.complex128)
    idx = np.arange(dim)
    h[idx, idx] = 0.5 * n
    for k in range(n):
        h[idx, idx ^ (1 << k)] = -0.5
    return DenseHamiltonian(h, n)


def linear_sweep(t: float, total_time: float) -> float:
    return t / total_time


@dataclass(frozen=True, eq=False)
class Schedule:
    """``H(s) = (1 - s) H_i + s H_f`` with ``s = sweep(t, total_time)``.

    ``driver`` is an optional extra Hermitian term added with weight
    ``s (1 - s)``; it vanishes at both endpoints and is off by default.
    """

    final: DiagonalHamiltonian
    total_time: float = 1.0
    driver: np.ndarray | None = None
    sweep: Callable[[float, float], float] = field(default=linear_sweep)

    def __post_init__(self):
        if not self.total_time > 0:
            raise ValueError(f"total_time must be > 0, got {self.total_time}")
        dim = 1 << self.final.num_variables
        if self.driver is not None and self.driver.shape != (dim, dim):
            raise ValueError(f"driver must be {dim}x{dim}")

    @property
    def num_variables(self) -> int:
        return self.final.num_variables

    @property
    def is_plain_linear(self) -> bool:
        return self.driver is None and self.sweep is linear_sweep

    def s_at(self, t: float) -> float:
        return self.sweep(t, self.total_time)

    @property
    def initial(self) -> DenseHamiltonian:
        return build_initial(self.num_variables)

    def apply(self, s: float, psi: np.ndarray, out: np.ndarray | None = None) -> np.ndarray:
        """Matrix-free ``H(s) @ psi``."""
        if out is None:
            out = np.empty_like(psi)
        _kernels.apply_h(psi, self.final.diagonal, self.num_variables, 1.0 - s, s, out)
        if self.driver is not None:
            out += (s * (1.0 - s)) * (self.driver @ psi)
        return out


def interpolate(schedule: Schedule, s: float) -> DenseHamiltonian:
    if not 0.0 <= s <= 1.0:
        raise ValueError(f"s must lie in [0, 1], got {s}")
    n = schedule.num_variables
    _check_dense(n)
    h_i = build_initial(n).matrix
    h_f = np.diag(schedule.final.diagonal).astype(np.complex128)
    h = (1.0 - s) * h_i + s * h_f
    if schedule.driver is not None:
        h = h + (s * (1.0 - s)) * schedule.driver
    return DenseHamiltonian(h, n)


def lowest_eigenpairs(h: DenseHamiltonian, count: int):
    count = min(count, h.matrix.shape[0])
    return scipy.linalg.eigh(h.matrix, subset_by_index=[0, count - 1])


@dataclass(frozen=True, eq=False)
class SpectrumReport:
    s_values: np.ndarray
    eigenvalues: np.ndarray  # (len(s_values), k), ascending per row
    gaps: np.ndarray
    min_gap: float
    min_gap_s: float
    ground_degeneracy_final: int

    @property
    def levels(self) -> int:
        return self.eigenvalues.shape[1]

    def write_csv(self, path: str | os.PathLike):
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["s"] + [f"E{j}" for j in range(self.levels)])
            for s, row in zip(self.s_values, self.eigenvalues):
                writer.writerow([repr(float(s))] + [repr(float(e)) for e in row])


def spectrum(schedule: Schedule, s_grid: Sequence[float], k: int = 4) -> SpectrumReport:
    """Lowest ``k`` eigenvalues of ``H(s)`` on ``s_grid`` and the minimum gap.

    The gap at every ``s`` is ``E[g] - E[0]`` with ``g`` the ground
    degeneracy of ``H_f``, so a degenerate final ground manifold is not
    mistaken for a closing gap.  If ``H_f`` is fully degenerate the gap is
    undefined and reported as ``inf``.
    """
    n = schedule.num_variables
    _check_dense(n)
    dim = 1 << n
    if not 1 <= k <= dim:
        raise ValueError(f"k must be in [1, {dim}], got {k}")
    g = schedule.final.ground_degeneracy
    need = min(dim, max(k, g + 1))
    s_values = np.asarray(s_grid, dtype=np.float64)
    eigenvalues = np.empty((s_values.size, k))
    gaps = np.empty(s_values.size)
    for row, s in enumerate(s_values):
        w = scipy.linalg.eigh(interpolate(schedule, float(s)).matrix, eigvals_only=True,
                              subset_by_index=[0, need - 1])
        eigenvalues[row] = w[:k]
        gaps[row] = w[g] - w[0] if g < dim else np.inf
    at = int(np.argmin(gaps))
    return SpectrumReport(
        s_values=s_values,
        eigenvalues=eigenvalues,
        gaps=gaps,
        min_gap=float(gaps[at]),
        min_gap_s=float(s_values[at]),
        ground_degeneracy_final=g,
    )
