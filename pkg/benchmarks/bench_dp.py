"""Wall-clock comparison of the compiled and numpy DP kernels.

Usage::

    python3 benchmarks/bench_dp.py [--sizes 250 500 1000 2000] [--cells 3] [--repeat 3]
"""

import argparse
import time

from cellquant.channel import BinaryPrior, ChannelSpec, default_range, discretize, gaussian
from cellquant.constraints import SeparableConstraint
from cellquant.dp_solver import available_backends, solve


def _best_of(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[250, 500, 1000, 2000])
    ap.add_argument("--cells", type=int, default=3)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)

    ch = ChannelSpec(BinaryPrior(0.5), gaussian(1, 1), gaussian(-1, 1))
    constraint = SeparableConstraint.entropy(0.1)
    backends = available_backends()
    print(f"N={args.cells}, best of {args.repeat}; backends: {', '.join(backends)}")
    print(f"{'M':>6}" + "".join(f"{b + ' [s]':>14}" for b in backends) + f"{'speedup':>10}")
    for m in args.sizes:
        grid = discretize(ch, *default_range(ch), m)
        times, bounds = {}, set()
        for b in backends:
            times[b], res = _best_of(lambda: solve(grid, args.cells, 1.0, constraint, backend=b), args.repeat)
            bounds.add(res.boundaries)
        if len(bounds) != 1:
            raise SystemExit(f"backends disagree at M={m}: {bounds}")
        speed = times["python"] / times["cython"] if "cython" in times else float("nan")
        print(f"{m:>6}" + "".join(f"{times[b]:>14.4f}" for b in backends) + f"{speed:>9.1f}x")


if __name__ == "__main__":
    main()
