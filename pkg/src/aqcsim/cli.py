"""``aqc-sim`` command line.

Exit codes: 0 success, 1 usage error, 2 input/parse error, 3 size cap or
size precondition violated.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
import time

import numpy as np

from . import __version__, _kernels
from .bench import SweepSpec, run_sweep, write_csv
from .cnf import (
    brute_force_solutions,
    generate_instance,
    generate_unique_instance,
    paper_instance,
    read_dimacs,
    save_dimacs,
    write_dimacs,
)
from .energy import energy_table
from .errors import DimacsError, SizeError
from .evolve import EvolutionConfig, run
from .hamiltonian import Schedule, build_final, spectrum

EXIT_OK, EXIT_USAGE, EXIT_INPUT, EXIT_CAP = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _default_workers() -> int:
    raw = os.environ.get("AQC_SIM_WORKERS")
    if not raw:
        return 1
    try:
        value = int(raw)
    except ValueError:
        raise UsageError(f"AQC_SIM_WORKERS must be an integer, got {raw!r}") from None
    if value < 1:
        raise UsageError(f"AQC_SIM_WORKERS must be >= 1, got {value}")
    return value


def _positive_int(text):
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def _int_range(text):
    """``8:2:20`` (start:step:stop, inclusive), ``8:20`` or ``8,10,12``."""
    try:
        if ":" in text:
            parts = [int(p) for p in text.split(":")]
            if len(parts) == 2:
                start, step, stop = parts[0], 1, parts[1]
            elif len(parts) == 3:
                start, step, stop = parts
            else:
                raise ValueError
            if step < 1:
                raise ValueError
            return list(range(start, stop + 1, step))
        return [int(p) for p in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad range {text!r}; use start:step:stop or a,b,c") from None


def _int_list(text):
    try:
        values = [int(p) for p in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad list {text!r}") from None
    if any(v < 1 for v in values):
        raise argparse.ArgumentTypeError("worker counts must be >= 1")
    return values


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="aqc-sim", description="Adiabatic 3-SAT simulator.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("generate", help="write a random 3-SAT instance in DIMACS format")
    p.add_argument("--vars", type=int, required=True, help="number of variables n (>= 3)")
    p.add_argument("--ratio", type=float, default=4.2, help="clauses per variable (default 4.2)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--unique-solution", action="store_true",
                   help="advance the seed until the instance has exactly one solution")
    p.add_argument("-o", "--output", help="output .cnf path (default: stdout)")

    p = sub.add_parser("solve", help="enumerate all satisfying assignments")
    p.add_argument("cnf")

    p = sub.add_parser("energy", help="fill the unsatisfied-clause table over all assignments")
    p.add_argument("cnf")
    p.add_argument("--workers", type=_positive_int, default=None,
                   help="worker threads (default: $AQC_SIM_WORKERS or 1)")
    p.add_argument("--dump", help="write the table as a little-endian binary file")

    p = sub.add_parser("spectrum", help="lowest eigenvalues of H(s) along the sweep")
    p.add_argument("cnf")
    p.add_argument("--points", type=_positive_int, default=101)
    p.add_argument("--levels", type=_positive_int, default=4)
    p.add_argument("-o", "--output", help="CSV path (columns s, E0..E{k-1})")

    p = sub.add_parser("evolve", help="integrate the Schrodinger equation along the sweep")
    p.add_argument("cnf")
    p.add_argument("--tau", type=float, default=10.0, help="total sweep time")
    p.add_argument("--steps", type=_positive_int, default=None,
                   help="RK4 steps (default: max(1000, ceil(100 tau (n + m))))")
    p.add_argument("--stride", type=_positive_int, default=10, help="steps between trace rows")
    p.add_argument("--track-gap", action="store_true")
    p.add_argument("--track-overlap", action="store_true")
    p.add_argument("--workers", type=_positive_int, default=None)
    p.add_argument("-o", "--output", help="trace CSV path")

    p = sub.add_parser("bench", help="time serial vs parallel runs over instance sizes")
    p.add_argument("--vars", type=_int_range, default=list(range(8, 21, 2)),
                   help="sizes as start:step:stop (inclusive) or a comma list")
    p.add_argument("--ratio", type=float, default=4.2)
    p.add_argument("--seeds", type=_int_range, default=[0])
    p.add_argument("--workers", type=_int_list, default=[1, 2, 4, 8])
    p.add_argument("--task", choices=["energy", "evolve", "both"], default="energy")
    p.add_argument("--reps", type=_positive_int, default=3)
    p.add_argument("--budget", type=float, default=None, help="per-point warm-up time cap, seconds")
    p.add_argument("--backend", default=None,
                   help=f"comma list from {','.join(_kernels.BACKENDS)} (default: active backend)")
    p.add_argument("-o", "--output", help="CSV path")

    p = sub.add_parser("paper-instance", help="export the built-in 6-variable, 27-clause instance")
    p.add_argument("-o", "--output", help="output .cnf path (default: stdout)")
    return parser


class _InputError(Exception):
    pass


def _load(path):
    try:
        return read_dimacs(path)
    except DimacsError as exc:
        raise _InputError(f"{path}: {exc}") from exc


def _emit(text, path):
    if path:
        with open(path, "w", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_generate(args):
    if args.ratio <= 0:
        raise UsageError("--ratio must be positive")
    if args.unique_solution:
        instance, seed = generate_unique_instance(args.vars, args.ratio, args.seed)
    else:
        instance, seed = generate_instance(args.vars, args.ratio, args.seed), args.seed
    comments = [f"random 3-SAT n={args.vars} ratio={args.ratio:g} seed={seed}"]
    if args.output:
        save_dimacs(instance, args.output, comments)
        print(f"wrote {args.output}: n={instance.num_variables} m={instance.num_clauses} seed={seed}")
    else:
        sys.stdout.write(write_dimacs(instance, comments))


def cmd_solve(args):
    instance = _load(args.cnf)
    solutions = sorted(brute_force_solutions(instance))
    if not solutions:
        print("0 solutions: unsatisfiable")
        return
    noun = "solution" if len(solutions) == 1 else "solutions"
    print(f"{len(solutions)} {noun}: " + " ".join(str(a) for a in solutions))


def cmd_energy(args):
    instance = _load(args.cnf)
    workers = args.workers or _default_workers()
    t0 = time.perf_counter()
    table = energy_table(instance, workers)
    elapsed = time.perf_counter() - t0
    zeros = table.zero_set()
    print(f"n={instance.num_variables} m={instance.num_clauses} workers={workers} "
          f"backend={_kernels.get_backend()} time={elapsed:.4f}s")
    print(f"min energy={int(table.values.min())} max energy={int(table.values.max())} "
          f"zero-energy assignments={zeros.size}")
    if args.dump:
        table.dump(args.dump)
        print(f"wrote {args.dump}")


def cmd_spectrum(args):
    instance = _load(args.cnf)
    schedule = Schedule(build_final(instance))
    grid = np.linspace(0.0, 1.0, args.points)
    report = spectrum(schedule, grid, args.levels)
    print(f"ground degeneracy at s=1: {report.ground_degeneracy_final}")
    print(f"min gap {report.min_gap:.6g} at s={report.min_gap_s:.4g}")
    if args.output:
        report.write_csv(args.output)
        print(f"wrote {args.output}")


def cmd_evolve(args):
    instance = _load(args.cnf)
    if not args.tau > 0:
        raise UsageError("--tau must be positive")
    config = EvolutionConfig(
        total_time=args.tau,
        num_steps=args.steps,
        track_gap=args.track_gap,
        track_ground_overlap=args.track_overlap,
        stride=args.stride,
    )
    result = run(instance, config, num_workers=args.workers or _default_workers())
    print(f"tau={result.total_time:g} steps={result.num_steps} solutions={result.num_solutions}")
    print(f"success probability {result.success_probability:.6f}  norm drift {result.norm_drift:.3e}")
    if result.overlap_trace is not None:
        print(f"min ground overlap {np.min(result.overlap_trace):.6f}")
    if result.gap_trace is not None:
        print(f"min gap {np.min(result.gap_trace):.6g}")
    if args.output:
        result.write_csv(args.output)
        print(f"wrote {args.output}")


def cmd_bench(args):
    backends = None
    if args.backend:
        backends = args.backend.split(",")
        for b in backends:
            if b not in _kernels.BACKENDS:
                raise UsageError(f"--backend: unknown backend {b!r}")
    tasks = {"energy": ["energy_table"], "evolve": ["evolve"], "both": ["energy_table", "evolve"]}
    if any(n < 3 for n in args.vars):
        raise SizeError("--vars: every n must be >= 3")
    spec = SweepSpec(
        n_values=args.vars, ratio=args.ratio, seeds=args.seeds, workers_list=args.workers,
        tasks=tasks[args.task], repetitions=args.reps, time_budget=args.budget, backends=backends,
    )
    records = run_sweep(spec)
    for r in records:
        shown = "skipped" if r.skipped else f"{r.wall_time:.6f}s"
        print(f"{r.backend:6s} {r.task:12s} n={r.num_variables:2d} {r.mode:8s} w={r.workers} {shown}")
    if args.output:
        write_csv(records, args.output)
        print(f"wrote {args.output}")


def cmd_paper_instance(args):
    text = write_dimacs(paper_instance(), ["6-variable, 27-clause worked 3-SAT example"])
    _emit(text, args.output)


COMMANDS = {
    "generate": cmd_generate,
    "solve": cmd_solve,
    "energy": cmd_energy,
    "spectrum": cmd_spectrum,
    "evolve": cmd_evolve,
    "bench": cmd_bench,
    "paper-instance": cmd_paper_instance,
}


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
        COMMANDS[args.command](args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except SizeError as exc:
        print(f"aqc-sim: {exc}", file=sys.stderr)
        return EXIT_CAP
    except _InputError as exc:
        print(f"aqc-sim: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        print(f"aqc-sim: {exc.filename or ''}: {exc.strerror or exc}", file=sys.stderr)
        return EXIT_INPUT
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
