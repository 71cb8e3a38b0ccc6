"""Compare the compiled kernels with the NumPy fallback.

    python benchmarks/bench_kernels.py [--repeat 5] [--sizes 64,128,256] [--json out.json]

Times the three raw kernels and two end-to-end operations (an x-dependent
quantization and the sharp maximal function of complex data) at each size,
checks that both backends agree, and prints a table with the speed-up.
"""

from __future__ import annotations

import argparse
import json
import sys
import timeit

import numpy as np

from psido_lab import _backend
from psido_lab.grid import Field, Grid
from psido_lab.maximal import CubeFamily, sharp_maximal
from psido_lab.quantize import apply_pdo
from psido_lab.symbols import catalog


def cases(n: int, rng: np.random.Generator):
    P = rng.normal(size=(n, 1))
    Q = rng.normal(size=(n, 1))
    amp = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    v = rng.normal(size=n) + 1j * rng.normal(size=n)
    phase = rng.normal(size=(n, n))
    rows = rng.normal(size=(n, 33)) + 1j * rng.normal(size=(n, 33))
    g = Grid(1, 8.0, n)
    u = Field.spatial(g, rng.normal(size=n) + 1j * rng.normal(size=n))
    a = catalog("oscillating_exotic", m=-1.0, delta=0.5)
    F = CubeFamily(g)
    return {
        "bilinear_sum": lambda k, b: k.bilinear_sum(P, Q, 1.0, amp, v),
        "phase_sum": lambda k, b: k.phase_sum(phase, amp, v),
        "min_mean_deviation": lambda k, b: k.min_mean_deviation(rows),
        "apply_pdo": lambda k, b: apply_pdo(a, u, backend=b).values,
        "sharp_maximal": lambda k, b: sharp_maximal(u, F, backend=b),
    }


def best_of(fn, repeat: int) -> float:
    number = 1
    while timeit.timeit(fn, number=number) < 0.05 and number < 1 << 12:
        number *= 2
    return min(timeit.repeat(fn, number=number, repeat=repeat)) / number


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", default="64,128,256")
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--json", help="also write the timings here")
    args = ap.parse_args(argv)

    if "cython" not in _backend.available():
        print("compiled kernels are not built; only the fallback can be timed", file=sys.stderr)
    names = _backend.available()
    rows = []
    print(f"{'kernel':20s} {'n':>5s} " + " ".join(f"{b + ' [ms]':>14s}" for b in names) + "  speed-up")
    for n in [int(s) for s in args.sizes.split(",")]:
        for name, fn in cases(n, np.random.default_rng(n)).items():
            outs, times = {}, {}
            for b in names:
                k = _backend.get(b)
                outs[b] = fn(k, b)
                times[b] = best_of(lambda: fn(k, b), args.repeat)
            if len(names) == 2:
                err = np.max(np.abs(outs["cython"] - outs["python"])) / max(np.max(np.abs(outs["python"])), 1e-300)
                if err > 1e-9:
                    print(f"backends disagree on {name} at n={n}: {err:.2e}", file=sys.stderr)
                    return 1
                speed = f"{times['python'] / times['cython']:8.2f}x"
            else:
                speed = "       -"
            print(f"{name:20s} {n:5d} " + " ".join(f"{1e3 * times[b]:14.3f}" for b in names) + "  " + speed)
            rows.append({"kernel": name, "n": n, **{f"{b}_seconds": times[b] for b in names}})
    if args.json:
        with open(args.json, "w", encoding="utf-8") as fh:
            json.dump(rows, fh, indent=2)
    return 0


if __name__ == "__main__":
    sys.exit(main())
