"""Compare the compiled and pure-Python coefficient kernels.

Times each operator builder, series evaluation and a full Example-1
assembly on both backends and prints a table of best-of-``--repeat`` times.

    python benchmarks/bench_backends.py --orders 25 50 100
"""
import argparse
import timeit

import numpy as np

from kernelseries import _backend
from kernelseries.assembler import assemble
from kernelseries.examples import example1
from kernelseries.taylor import UniSeries
from kernelseries.triseries import (TriSeries, build_mul_x, build_mul_xi, build_partial, build_trace,
                                    evaluate, idx_l)


def cases(N, rng):
    lam = UniSeries(rng.normal(size=N + 1))
    s = TriSeries(rng.normal(size=idx_l(N)), N)
    x, xi = rng.uniform(0, 1, 10_000), rng.uniform(0, 1, 10_000)
    return {
        "partial(2,0)": lambda b: build_partial(N, 2, 0, b),
        "mul_xi": lambda b: build_mul_xi(lam, N, N - 2, backend=b),
        "mul_x": lambda b: build_mul_x(lam, N, N - 2, backend=b),
        "trace(1,-0.2)": lambda b: build_trace(1.0, -0.2, N, b),
        "eval 10k pts": lambda b: evaluate(s, x, xi, backend=b),
    }


def best(fn, repeat):
    n, _ = timeit.Timer(fn).autorange()
    return min(timeit.repeat(fn, number=n, repeat=repeat)) / n


def assembly_time(N, backend, repeat):
    saved = _backend.kernels
    _backend.kernels = _backend.get_kernels(backend)
    try:
        return best(lambda: assemble(example1(), N), repeat)
    finally:
        _backend.kernels = saved


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--orders", type=int, nargs="+", default=[25, 50, 100])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    if _backend.compiled_kernels is None:
        raise SystemExit("compiled kernels are not built; run `pip install -e . --no-build-isolation`")
    rng = np.random.default_rng(0)
    print(f"{'N':>4}  {'operation':<16}{'python [ms]':>12}{'cython [ms]':>12}{'speedup':>9}")
    for N in args.orders:
        rows = {name: (best(lambda: f("python"), args.repeat), best(lambda: f("cython"), args.repeat))
                for name, f in cases(N, rng).items()}
        rows["assemble ex1"] = (assembly_time(N, "python", args.repeat), assembly_time(N, "cython", args.repeat))
        for name, (tp, tc) in rows.items():
            print(f"{N:>4}  {name:<16}{tp * 1e3:>12.3f}{tc * 1e3:>12.3f}{tp / tc:>8.1f}x")


if __name__ == "__main__":
    main()
