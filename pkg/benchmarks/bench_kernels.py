"""Compare the compiled triangular Stein/Sylvester kernels with the numpy
fallback.

    python benchmarks/bench_kernels.py [--sizes 8 32 128] [--repeat 20]
"""
import argparse
import timeit

import numpy as np

from wienerhopf._core import _pykernels

try:
    from wienerhopf._core import _ckernels
except ImportError:
    _ckernels = None


def triangular_pair(n, seed, rho=0.9):
    rng = np.random.default_rng(seed)

    def tri():
        T = np.triu(rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / (2 * np.sqrt(n))
        d = rng.uniform(0.1, rho, n) * np.exp(2j * np.pi * rng.random(n))
        np.fill_diagonal(T, d)
        return T

    F = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return tri(), tri(), F


def bench(fn, args, repeat):
    return min(timeit.repeat(lambda: fn(*args), number=1, repeat=repeat))


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sizes", type=int, nargs="+", default=[8, 32, 128])
    parser.add_argument("--repeat", type=int, default=20)
    args = parser.parse_args(argv)
    if _ckernels is None:
        print("compiled kernels not built; run `pip install -e . --no-build-isolation` first")
        return 1
    print(f"{'kernel':<12}{'n':>6}{'python [ms]':>14}{'cython [ms]':>14}{'speedup':>10}{'max diff':>12}")
    for n in args.sizes:
        TA, TB, F = triangular_pair(n, n)
        # Sylvester needs disjoint spectra; shift TB off the unit disc
        TB_syl = TB + 2.0 * np.eye(n)
        cases = [
            ("stein", (TA, TB, F)),
            ("sylvester", (TA, TB_syl, F)),
        ]
        for name, data in cases:
            py = getattr(_pykernels, f"{name}_triangular")
            cy = getattr(_ckernels, f"{name}_triangular")
            diff = np.max(np.abs(py(*data) - cy(*data)))
            t_py, t_cy = bench(py, data, args.repeat), bench(cy, data, args.repeat)
            print(f"{name:<12}{n:>6}{1e3 * t_py:>14.3f}{1e3 * t_cy:>14.3f}{t_py / t_cy:>10.1f}{diff:>12.1e}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
