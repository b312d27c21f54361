"""Compare the compiled and pure-Python kernel backends.

Run with ``python benchmarks/bench_kernels.py [--n 2000] [--repeat 5]``.
Each kernel is timed on inputs shaped like one N-dimensional trial, and the
two backends' outputs are checked to agree before timing.
"""

import argparse
import time

import numpy as np

from sparse_ssk import kernels


def _inputs(n, seed=0):
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((n, n)) / np.sqrt(2 * n)
    ev = np.linalg.eigvalsh(x + x.T)[::-1]
    gaps = np.ascontiguousarray(ev[0] - ev)
    d = rng.standard_normal(n)
    e = rng.standard_normal(n)
    e[-1] = 0.0
    return gaps, d, e


def _cases(n):
    gaps, d, e = _inputs(n)
    dist = np.ascontiguousarray(gaps + 1e-3)
    return {
        "gap_log_sum": lambda m: m.gap_log_sum(1e-3, gaps),
        "gap_inv_power_sum": lambda m: m.gap_inv_power_sum(1e-3, gaps, 2),
        "contour_log1p_sum": lambda m: m.contour_log1p_sum(-0.01, 0.05, dist),
        "tridiagonal_ql": lambda m: m.tridiagonal_ql(d.copy(), e.copy(), 30 * n),
    }


def _best(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=2000)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    try:
        fast = kernels.get_backend("cython")
    except ImportError:
        print("compiled backend not built; run `python setup.py build_ext --inplace` first")
        return 1
    slow = kernels.get_backend("python")
    print(f"N = {args.n}, best of {args.repeat}")
    print(f"{'kernel':<20} {'python [ms]':>12} {'cython [ms]':>12} {'speedup':>9}")
    for name, call in _cases(args.n).items():
        a, b = call(slow), call(fast)
        if name == "tridiagonal_ql":
            gaps, d, e = _inputs(args.n)
            da, db = d.copy(), d.copy()
            slow.tridiagonal_ql(da, e.copy(), 30 * args.n)
            fast.tridiagonal_ql(db, e.copy(), 30 * args.n)
            assert np.allclose(np.sort(da), np.sort(db), atol=1e-10)
        else:
            assert np.allclose(a, b, rtol=1e-12), (name, a, b)
        ts = _best(lambda: call(slow), args.repeat)
        tf = _best(lambda: call(fast), args.repeat)
        print(f"{name:<20} {1e3 * ts:>12.3f} {1e3 * tf:>12.3f} {ts / tf:>8.1f}x")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
