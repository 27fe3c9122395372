"""Timing comparison of the compiled and numpy kernel backends.

Runs each batch kernel at a representative problem size against every
available backend and prints a table of best-of-``--repeats`` wall times
with the compiled speedup.  Sizes can be scaled with ``--scale`` to probe
larger workloads.
"""
import argparse
import time

import numpy as np

from pmfrisk import kernels
from pmfrisk.kernels import available_backends, load_backend


def bench(fn, args, repeats):
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - start)
    return best


def make_cases(scale, seed):
    rng = np.random.default_rng(seed)
    n_draws = int(200_000 * scale)
    n_rows = int(20_000 * scale)
    n_pairs = int(200_000 * scale)

    verts = rng.random((120, 4, 3))
    sel = rng.integers(0, 120, size=n_draws)
    spacings = rng.exponential(size=(n_draws, 4))

    pmfs = rng.dirichlet(np.ones(5), size=n_rows)

    a = rng.dirichlet(np.ones(5), size=n_pairs)
    b = rng.dirichlet(np.ones(5), size=n_pairs)

    return [
        (f"barycentric_points ({n_draws} draws, 120 tetrahedra)",
         "barycentric_points", (verts, sel, spacings)),
        (f"self_convolve ({n_rows} rows, 5 states, 10 steps)",
         "self_convolve", (pmfs, 10)),
        (f"relative_entropy_pairs ({n_pairs} pairs, 5 states)",
         "relative_entropy_pairs", (a, b)),
    ]


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeats", type=int, default=5,
                        help="take the best of this many runs (default 5)")
    parser.add_argument("--scale", type=float, default=1.0,
                        help="multiply all problem sizes (default 1.0)")
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    backends = available_backends()
    impls = {name: load_backend(name) for name in backends}
    cases = make_cases(args.scale, args.seed)

    width = max(len(label) for label, _, _ in cases)
    header = f"{'kernel':<{width}}"
    for name in backends:
        header += f"  {name:>12}"
    if "cython" in backends:
        header += f"  {'speedup':>8}"
    print(header)
    print("-" * len(header))

    for label, fn_name, fn_args in cases:
        times = {}
        wrapper = getattr(kernels, fn_name)
        for name in backends:
            def fn(*a, _impl=impls[name]):
                return wrapper(*a, impl=_impl)

            # one warm-up call, then timed repeats
            fn(*fn_args)
            times[name] = bench(fn, fn_args, args.repeats)
        row = f"{label:<{width}}"
        for name in backends:
            row += f"  {times[name] * 1e3:>10.3f}ms"
        if "cython" in backends:
            row += f"  {times['python'] / times['cython']:>7.2f}x"
        print(row)


if __name__ == "__main__":
    main()
