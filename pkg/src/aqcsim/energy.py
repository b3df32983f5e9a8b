"""Clause-violation energy and its exhaustive table over all assignments.

The table is filled by one kernel call per contiguous index range.  The
parallel path hands each worker thread its own range and its own slice of
the output buffer; kernels release the GIL, so workers never share mutable
state and the result does not depend on the worker count.
"""

from __future__ import annotations

import os
import struct
import threading
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .cnf import Assignment, Clause, CnfInstance
from .errors import SizeError

TABLE_CAP = 28
TABLE_DTYPE = np.uint32


def clause_energy(clause: Clause, assignment: Assignment) -> int:
    if max(clause.variables) > assignment.num_variables:
        raise ValueError("clause references a variable outside the assignment")
    return 0 if clause.satisfied_by(assignment.bits) else 1


def energy(instance: CnfInstance, assignment: Assignment | int) -> int:
    """Number of clauses of ``instance`` left unsatisfied by ``assignment``."""
    if isinstance(assignment, Assignment):
        if assignment.num_variables != instance.num_variables:
            raise ValueError(
                f"assignment has {assignment.num_variables} variables, "
                f"instance has {instance.num_variables}"
            )
    else:
        assignment = Assignment(int(assignment), instance.num_variables)
    return sum(clause_energy(c, assignment) for c in instance.clauses)


@dataclass(frozen=True)
class ChunkPlan:
    num_workers: int
    ranges: tuple[tuple[int, int], ...]

    @property
    def total(self) -> int:
        return self.ranges[-1][1] if self.ranges else 0


def plan_chunks(total: int, num_workers: int) -> ChunkPlan:
    """Split ``[0, total)`` into ``min(total, num_workers)`` contiguous ranges.

    Sizes differ by at most one; the first ``total % k`` ranges get the
    extra element.
    """
    if total < 1 or num_workers < 1:
        raise ValueError(f"need total >= 1 and num_workers >= 1, got {total}, {num_workers}")
    k = min(total, num_workers)
    base, extra = divmod(total, k)
    ranges = []
    start = 0
    for w in range(k):
        stop = start + base + (1 if w < extra else 0)
        ranges.append((start, stop))
        start = stop
    return ChunkPlan(k, tuple(ranges))


@dataclass(frozen=True, eq=False)
class EnergyTable:
    values: np.ndarray
    num_variables: int

    def __post_init__(self):
        if self.values.shape != (1 << self.num_variables,):
            raise ValueError("energy table length must be 2^n")

    def __eq__(self, other):
        if not isinstance(other, EnergyTable):
            return NotImplemented
        return self.num_variables == other.num_variables and np.array_equal(self.values, other.values)

    def zero_set(self) -> np.ndarray:
        return np.flatnonzero(self.values == 0)

    def dump(self, path: str | os.PathLike):
        """Little-endian: uint32 n, then 2^n uint32 counts."""
        with open(path, "wb") as fh:
            fh.write(struct.pack("<I", self.num_variables))
            fh.write(self.values.astype("<u4", copy=False).tobytes())

    @classmethod
    def load(cls, path: str | os.PathLike) -> EnergyTable:
        with open(path, "rb") as fh:
            raw = fh.read()
        if len(raw) < 4:
            raise ValueError(f"{path}: truncated energy table header")
        (n,) = struct.unpack_from("<I", raw)
        expected = 4 + 4 * (1 << n)
        if len(raw) != expected:
            raise ValueError(f"{path}: expected {expected} bytes for n={n}, got {len(raw)}")
        values = np.frombuffer(raw, dtype="<u4", offset=4).astype(TABLE_DTYPE)
        return cls(values, n)


def _check_size(instance: CnfInstance, cap: int):
    if instance.num_variables > cap:
        raise SizeError(f"energy table of 2^{instance.num_variables} entries exceeds cap n <= {cap}")


def energy_table_serial(instance: CnfInstance, cap: int = TABLE_CAP) -> EnergyTable:
    _check_size(instance, cap)
    masks, falsifiers = instance.bit_masks()
    out = np.empty(1 << instance.num_variables, dtype=TABLE_DTYPE)
    _kernels.energy_range(masks, falsifiers, 0, out)
    return EnergyTable(out, instance.num_variables)


def energy_table_parallel(instance: CnfInstance, num_workers: int, cap: int = TABLE_CAP) -> EnergyTable:
    if num_workers < 1:
        raise ValueError(f"num_workers must be >= 1, got {num_workers}")
    _check_size(instance, cap)
    masks, falsifiers = instance.bit_masks()
    out = np.empty(1 << instance.num_variables, dtype=TABLE_DTYPE)
    plan = plan_chunks(out.shape[0], num_workers)

    errors = []

    def work(start, stop):
        try:
            _kernels.energy_range(masks, falsifiers, start, out[start:stop])
        except BaseException as exc:  # re-raised in the caller
            errors.append(exc)

    threads = [threading.Thread(target=work, args=r) for r in plan.ranges[1:]]
    for t in threads:
        t.start()
    # the calling thread takes the first range
    work(*plan.ranges[0])
    for t in threads:
        t.join()
    if errors:
        raise errors[0]
    return EnergyTable(out, instance.num_variables)


def energy_table(instance: CnfInstance, num_workers: int = 1, cap: int = TABLE_CAP) -> EnergyTable:
    if num_workers == 1:
        return energy_table_serial(instance, cap)
    return energy_table_parallel(instance, num_workers, cap)
