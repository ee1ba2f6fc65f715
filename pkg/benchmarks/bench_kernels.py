"""Time the compiled Airy kernels against the numpy fallback.

    python benchmarks/bench_kernels.py [--repeat N]

Reports the best of N wall-clock timings per kernel and the maximum
absolute difference between the two backends.
"""

from __future__ import annotations

import argparse
import timeit

import numpy as np

from anharmonic import _backend


def _best(fn, repeat):
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)

    if _backend.BACKEND != "cython":
        print("compiled extension not available; only the fallback can be timed")
    rng = np.random.default_rng(0)
    x = rng.uniform(-60.0, 20.0, 1_000_000)
    xs = np.linspace(-40.0, 40.0, 4001)
    mu = np.sort(rng.uniform(0.0, 60.0, 400))
    coef = rng.standard_normal(400)

    cases = [
        ("airy_arrays  (1e6 points)", lambda f: f(x), _backend.python_airy_arrays, _backend._c_airy_arrays),
        ("weighted_rows (4001 x 400)", lambda f: f(xs, mu, coef), _backend.python_weighted_rows,
         _backend._c_weighted_rows),
    ]
    print(f"{'kernel':28s} {'numpy [s]':>10s} {'cython [s]':>11s} {'speedup':>8s} {'max |diff|':>11s}")
    for name, call, py, cy in cases:
        t_py = _best(lambda: call(py), args.repeat)
        if _backend.BACKEND == "cython":
            t_c = _best(lambda: call(cy), args.repeat)
            a, b = call(py), call(cy)
            a, b = (a[0], b[0]) if isinstance(a, tuple) else (a, b)
            diff = float(np.max(np.abs(a - b)))
            print(f"{name:28s} {t_py:10.4f} {t_c:11.4f} {t_py / t_c:8.1f} {diff:11.1e}")
        else:
            print(f"{name:28s} {t_py:10.4f} {'-':>11s}")


if __name__ == "__main__":
    main()
