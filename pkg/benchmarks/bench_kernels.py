"""Compare the compiled and pure-Python K-set kernels.

    python3 benchmarks/bench_kernels.py [--p 61] [--d 4] [--repeat 3]
"""
import argparse
import math
import time

import numpy as np

from qfa_lab import _kernels
from qfa_lab.kset import TIE_QUANTUM, acceptance_table, candidate_values


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--p", type=int, default=61)
    ap.add_argument("--d", type=int, default=4)
    ap.add_argument("--sets", type=int, default=200_000, help="batch size for evaluate_sets")
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)

    ks = candidate_values(args.p, dedup=False)
    table = acceptance_table(ks, args.p, math.pi / args.p)
    m = len(ks)
    total = math.comb(m, args.d)
    rng = np.random.default_rng(0)
    combos = np.sort(np.array([rng.choice(m, args.d, replace=False) for _ in range(args.sets)]), axis=1)

    print(f"p={args.p} d={args.d}: {total} subsets exhaustive, {args.sets} sampled sets")
    print(f"{'backend':<8} {'exhaustive_min':>16} {'evaluate_sets':>15}")
    ref = None
    timings = {}
    for name in _kernels.available_backends():
        kern = _kernels.get_backend(name)
        t_ex, res = best_of(lambda: kern.exhaustive_min(table, args.d, 0, m, TIE_QUANTUM), args.repeat)
        t_ev, vals = best_of(lambda: kern.evaluate_sets(table, combos), args.repeat)
        timings[name] = (t_ex, t_ev)
        print(f"{name:<8} {t_ex:>14.3f} s {t_ev:>13.3f} s")
        if ref is None:
            ref = (res[:3], np.asarray(vals))
        else:
            assert res[:3] == ref[0] and np.array_equal(np.asarray(vals), ref[1]), "backends disagree"
    if "cython" in timings and "python" in timings:
        sx = timings["python"][0] / timings["cython"][0]
        sv = timings["python"][1] / timings["cython"][1]
        print(f"speed-up: exhaustive x{sx:.1f}, batch x{sv:.1f} (results identical)")


if __name__ == "__main__":
    main()
