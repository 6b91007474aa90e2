"""Compare the pure-Python and compiled search kernels on one grid.

Runs the profile solver over generated instances with every available
backend and prints a small table: median wall time per backend plus the
speedup of the compiled kernel when both are present.  Totals are checked
to match across backends while we are at it.

Usage:
    python3 benchmarks/kernel_bench.py
    python3 benchmarks/kernel_bench.py --k 4 --n 20,40 --seeds 5
"""
import argparse
import statistics
import time

from vapep import GeneratorConfig, available_backends, generate, solve


def time_solve(inst, backend: str) -> tuple[float, int]:
    t0 = time.perf_counter()
    res = solve(inst, backend=backend)
    return time.perf_counter() - t0, res.total_weight


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--k", type=int, default=3, help="steps per instance")
    ap.add_argument("--n", default="20,40,80",
                    help="comma-separated user counts")
    ap.add_argument("--seeds", type=int, default=3, help="instances per size")
    args = ap.parse_args()

    backends = available_backends()
    sizes = [int(v) for v in args.n.split(",") if v.strip()]
    print(f"backends: {', '.join(backends)}")
    print(f"{'n':>6} {'k':>3}", end="")
    for b in backends:
        print(f" {b + ' (ms)':>14}", end="")
    if len(backends) > 1:
        print(f" {'speedup':>8}", end="")
    print()

    for n in sizes:
        per_backend = {b: [] for b in backends}
        for seed in range(args.seeds):
            inst = generate(GeneratorConfig(n=n, k=args.k, seed=seed))
            totals = set()
            for b in backends:
                dt, total = time_solve(inst, b)
                per_backend[b].append(dt)
                totals.add(total)
            if len(totals) != 1:
                raise SystemExit(f"backends disagree on n={n} seed={seed}")
        meds = {b: statistics.median(ts) for b, ts in per_backend.items()}
        print(f"{n:>6} {args.k:>3}", end="")
        for b in backends:
            print(f" {meds[b] * 1000:>14.2f}", end="")
        if len(backends) > 1 and meds.get("cython"):
            print(f" {meds['python'] / meds['cython']:>7.1f}x", end="")
        print()
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
