"""numba vs pure-numpy kernels: energy tables and RK4 evolution.

    python benchmarks/compare_backends.py --vars 10:2:20 -o backends.csv
"""

import argparse
import statistics
import time

from aqcsim import _kernels
from aqcsim.bench import SweepSpec, median_time, run_sweep, write_csv
from aqcsim.cli import _int_list, _int_range
from aqcsim.cnf import paper_instance
from aqcsim.evolve import EvolutionConfig, run


def evolve_timing(steps, reps):
    inst = paper_instance()
    out = {}
    for name in _kernels.BACKENDS:
        with _kernels.use_backend(name):
            cfg = EvolutionConfig(8.0, num_steps=steps, stride=steps)
            run(inst, cfg)
            times = []
            for _ in range(reps):
                t0 = time.perf_counter()
                run(inst, cfg)
                times.append(time.perf_counter() - t0)
            out[name] = statistics.median(times)
    return out


def main():
    p = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--vars", type=_int_range, default=list(range(10, 21, 2)))
    p.add_argument("--workers", type=_int_list, default=[4])
    p.add_argument("--reps", type=int, default=3)
    p.add_argument("--steps", type=int, default=20_000, help="RK4 steps for the evolution timing")
    p.add_argument("-o", "--output")
    args = p.parse_args()

    spec = SweepSpec(n_values=args.vars, workers_list=args.workers, repetitions=args.reps,
                     backends=list(_kernels.BACKENDS))
    records = run_sweep(spec)
    if args.output:
        write_csv(records, args.output)

    print(f"{'n':>3} {'mode':>10} " + " ".join(f"{b:>10}" for b in _kernels.BACKENDS) + "   speedup")
    for n in args.vars:
        for mode, w in [("serial", 1)] + [("parallel", w) for w in args.workers]:
            t = {b: median_time(records, n=n, mode=mode, workers=w, backend=b) for b in _kernels.BACKENDS}
            label = mode if mode == "serial" else f"par w={w}"
            cells = " ".join(f"{t[b] * 1e3:9.3f}ms" for b in _kernels.BACKENDS)
            ratio = t["numpy"] / t["numba"] if "numba" in t else float("nan")
            print(f"{n:>3} {label:>10} {cells}   {ratio:6.1f}x")

    ev = evolve_timing(args.steps, args.reps)
    cells = " ".join(f"{ev[b]:9.3f}s " for b in _kernels.BACKENDS)
    print(f"evolve paper instance, {args.steps} RK4 steps: {cells}")


if __name__ == "__main__":
    main()
