"""Time the compiled kernels against the numpy fallback.

Usage: python benchmarks/bench_kernels.py [--repeat N]

Each kernel runs on the same inputs under both backends; outputs are
checked for equality before timing. Prints a table of median seconds per
call and the speed-up of the compiled backend.
"""
import argparse
import sys
import timeit

import numpy as np

from efdphantoms import _pykernels as py

try:
    from efdphantoms import _ckernels as cy
except ImportError:
    cy = None


def disk(radius, size):
    yy, xx = np.mgrid[:size, :size] + 0.5
    c = size / 2
    return ((xx - c) ** 2 + (yy - c) ** 2 <= radius**2).astype(np.uint8)


def cases(rng):
    mask = disk(40, 96)
    theta = np.linspace(0, 2 * np.pi, 256, endpoint=False)
    r = 30 * (1 + 0.1 * np.cos(5 * theta))
    xs, ys = 48 + r * np.cos(theta), 48 + r * np.sin(theta)
    a, b = rng.random(40), rng.random(40)
    pts = rng.random((2000, 2)) * 96
    return {
        "trace_boundary (96x96 disk)": ("trace_boundary", (mask,)),
        "scanline_fill (256-gon)": ("scanline_fill", (xs, ys, 96, 96)),
        "dtw_cost (40 x 40)": ("dtw_cost", (a, b)),
        "convex_hull (2000 pts)": ("convex_hull", (pts,)),
    }


def median_time(fn, args, repeat):
    number = max(1, int(0.05 / max(timeit.timeit(lambda: fn(*args), number=1), 1e-6)))
    runs = timeit.repeat(lambda: fn(*args), number=number, repeat=repeat)
    return float(np.median(runs)) / number


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args(argv)
    if cy is None:
        print("compiled extension not built; only the fallback is timed", file=sys.stderr)
    rng = np.random.default_rng(0)
    print(f"{'kernel':<30}{'python [s]':>14}{'cython [s]':>14}{'speed-up':>10}")
    for label, (name, inputs) in cases(rng).items():
        t_py = median_time(getattr(py, name), inputs, args.repeat)
        if cy is None:
            print(f"{label:<30}{t_py:>14.2e}{'-':>14}{'-':>10}")
            continue
        np.testing.assert_array_equal(getattr(py, name)(*inputs), getattr(cy, name)(*inputs))
        t_cy = median_time(getattr(cy, name), inputs, args.repeat)
        print(f"{label:<30}{t_py:>14.2e}{t_cy:>14.2e}{t_py / t_cy:>9.1f}x")


if __name__ == "__main__":
    main()
