"""Serial-vs-parallel timing sweeps over random instances.

Each point gets one untimed warm-up call (JIT compilation, first-touch page
faults) followed by ``repetitions`` timed calls; records keep min / median /
max.  A point whose warm-up already exceeds ``time_budget`` is recorded as
skipped, and so is every larger ``n`` in the same series.
"""

from __future__ import annotations

import csv
import io
import logging
import os
import statistics
import time
from dataclasses import dataclass, field, fields

import numpy as np

from . import _kernels
from .cnf import generate_instance
from .energy import energy_table_parallel, energy_table_serial
from .evolve import EvolutionConfig, run

log = logging.getLogger(__name__)

TASKS = ("energy_table", "evolve")

CSV_COLUMNS = (
    "n", "m", "seed", "task", "mode", "workers", "rep", "wall_time_s",
    "min_time_s", "max_time_s", "backend", "instance_id", "status",
)


@dataclass(frozen=True)
class BenchmarkRecord:
    instance_id: str
    num_variables: int
    num_clauses: int
    seed: int
    task: str
    mode: str
    workers: int
    backend: str
    repetitions: int
    wall_time: float  # median over repetitions
    min_time: float
    max_time: float
    status: str = "ok"

    @property
    def skipped(self) -> bool:
        return self.status != "ok"

    def as_row(self) -> list[str]:
        return [
            str(self.num_variables), str(self.num_clauses), str(self.seed), self.task,
            self.mode, str(self.workers), str(self.repetitions), repr(self.wall_time),
            repr(self.min_time), repr(self.max_time), self.backend, self.instance_id,
            self.status,
        ]

    @classmethod
    def from_row(cls, row: dict) -> BenchmarkRecord:
        return cls(
            instance_id=row["instance_id"],
            num_variables=int(row["n"]),
            num_clauses=int(row["m"]),
            seed=int(row["seed"]),
            task=row["task"],
            mode=row["mode"],
            workers=int(row["workers"]),
            backend=row["backend"],
            repetitions=int(row["rep"]),
            wall_time=float(row["wall_time_s"]),
            min_time=float(row["min_time_s"]),
            max_time=float(row["max_time_s"]),
            status=row["status"],
        )

    def __eq__(self, other):
        # nan == nan for skipped points so CSV round trips compare equal
        if not isinstance(other, BenchmarkRecord):
            return NotImplemented
        for f in fields(self):
            a, b = getattr(self, f.name), getattr(other, f.name)
            if isinstance(a, float) and isinstance(b, float) and np.isnan(a) and np.isnan(b):
                continue
            if a != b:
                return False
        return True

    __hash__ = None


@dataclass
class SweepSpec:
    n_values: list[int] = field(default_factory=lambda: list(range(8, 21, 2)))
    ratio: float = 4.2
    seeds: list[int] = field(default_factory=lambda: [0])
    workers_list: list[int] = field(default_factory=lambda: [1, 2, 4, 8])
    tasks: list[str] = field(default_factory=lambda: ["energy_table"])
    repetitions: int = 3
    time_budget: float | None = None
    backends: list[str] | None = None
    evolve_tau: float = 1.0
    evolve_steps: int = 200

    def __post_init__(self):
        if any(n < 3 for n in self.n_values):
            raise ValueError("all n must be >= 3")
        if self.repetitions < 1:
            raise ValueError("repetitions must be >= 1")
        if any(w < 1 for w in self.workers_list):
            raise ValueError("worker counts must be >= 1")
        for task in self.tasks:
            if task not in TASKS:
                raise ValueError(f"unknown task {task!r}; choose from {TASKS}")


def _series(spec: SweepSpec):
    """(mode, workers) pairs: one serial baseline plus one parallel run per worker count."""
    yield "serial", 1
    for w in spec.workers_list:
        yield "parallel", w


def _make_call(task, instance, mode, workers, spec):
    if task == "energy_table":
        if mode == "serial":
            return lambda: energy_table_serial(instance)
        return lambda: energy_table_parallel(instance, workers)
    config = EvolutionConfig(spec.evolve_tau, num_steps=spec.evolve_steps)
    return lambda: run(instance, config, num_workers=1 if mode == "serial" else workers)


def time_call(fn, repetitions: int) -> tuple[list[float], object]:
    times = []
    result = None
    for _ in range(repetitions):
        t0 = time.perf_counter()
        result = fn()
        times.append(time.perf_counter() - t0)
    return times, result


def run_sweep(spec: SweepSpec) -> list[BenchmarkRecord]:
    backends = spec.backends or [_kernels.get_backend()]
    records = []
    for backend in backends:
        with _kernels.use_backend(backend):
            for task in spec.tasks:
                for seed in spec.seeds:
                    records.extend(_sweep_series(spec, backend, task, seed))
    return records


def _sweep_series(spec, backend, task, seed):
    over_budget: set[tuple[str, int]] = set()
    for n in sorted(spec.n_values):
        instance = generate_instance(n, spec.ratio, seed)
        label = f"rand3sat-n{n}-r{spec.ratio:g}-s{seed}"
        reference = None
        for mode, workers in _series(spec):
            common = dict(
                instance_id=label, num_variables=n, num_clauses=instance.num_clauses,
                seed=seed, task=task, mode=mode, workers=workers, backend=backend,
            )
            if (mode, workers) in over_budget:
                yield BenchmarkRecord(**common, repetitions=0, wall_time=float("nan"),
                                      min_time=float("nan"), max_time=float("nan"),
                                      status="skipped")
                continue
            fn = _make_call(task, instance, mode, workers, spec)
            t0 = time.perf_counter()
            result = fn()  # warm-up, not recorded
            warm = time.perf_counter() - t0
            if spec.time_budget is not None and warm > spec.time_budget:
                log.info("%s %s w=%d n=%d over budget (%.2fs)", task, mode, workers, n, warm)
                over_budget.add((mode, workers))
                yield BenchmarkRecord(**common, repetitions=0, wall_time=float("nan"),
                                      min_time=float("nan"), max_time=float("nan"),
                                      status="skipped")
                continue
            if task == "energy_table":
                if reference is None:
                    reference = result
                elif result != reference:
                    raise AssertionError(f"{mode} w={workers} table differs from serial at n={n}")
            times, _ = time_call(fn, spec.repetitions)
            yield BenchmarkRecord(
                **common,
                repetitions=spec.repetitions,
                wall_time=statistics.median(times),
                min_time=min(times),
                max_time=max(times),
            )


def write_csv(records, path: str | os.PathLike | None = None) -> str:
    """Serialise records; returns the text and writes it to ``path`` if given."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for record in records:
        writer.writerow(record.as_row())
    text = buf.getvalue()
    if path is not None:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    return text


def parse_csv(text: str) -> list[BenchmarkRecord]:
    reader = csv.DictReader(io.StringIO(text))
    if tuple(reader.fieldnames or ()) != CSV_COLUMNS:
        raise ValueError(f"unexpected benchmark CSV header {reader.fieldnames}")
    return [BenchmarkRecord.from_row(row) for row in reader]


def read_csv(path: str | os.PathLike) -> list[BenchmarkRecord]:
    with open(path, newline="") as fh:
        return parse_csv(fh.read())


def median_time(records, *, n, task="energy_table", mode, workers=None, backend=None):
    for r in records:
        if (r.num_variables == n and r.task == task and r.mode == mode and not r.skipped
                and (workers is None or r.workers == workers)
                and (backend is None or r.backend == backend)):
            return r.wall_time
    return None
