"""Time the compiled and pure-Python census kernels on the same workload.

Both kernels follow the same floating-point evaluation order, so their
outputs must match record for record; this script checks that while
measuring the speed difference.
"""

import argparse
import time

from loopcensus.census import enumerate_orbit
from loopcensus.groups import build_surface_group
from loopcensus.kernels import compiled_available


def time_kernel(group, t, kernel, repeats):
    best = float("inf")
    census = None
    for _ in range(repeats):
        started = time.perf_counter()
        census = enumerate_orbit(group, t, kernel=kernel)
        best = min(best, time.perf_counter() - started)
    return census, best


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--t", type=float, default=9.0, help="census radius")
    parser.add_argument("--genus", type=int, default=2)
    parser.add_argument("--repeats", type=int, default=1,
                        help="keep the best of this many runs")
    args = parser.parse_args()

    group = build_surface_group(args.genus)
    py_census, py_time = time_kernel(group, args.t, "python", args.repeats)
    print(f"python   kernel: {py_census.n_records} records in {py_time:.3f} s")
    if not compiled_available():
        print("compiled kernel not built; nothing to compare")
        return
    c_census, c_time = time_kernel(group, args.t, "compiled", args.repeats)
    print(f"compiled kernel: {c_census.n_records} records in {c_time:.3f} s")
    same = (
        py_census.n_records == c_census.n_records
        and (py_census.matrices == c_census.matrices).all()
        and (py_census.word_arena == c_census.word_arena).all()
    )
    if not same:
        raise SystemExit("kernel outputs disagree")
    print(f"outputs identical; speedup {py_time / c_time:.1f}x")


if __name__ == "__main__":
    main()
