"""Compiled vs pure-Python kernels on the workloads the experiments run.

    python benchmarks/bench_kernels.py [--repeat 5]

Each kernel is timed on identical inputs in both backends and the outputs
are compared before any timing is reported.
"""
from __future__ import annotations

import argparse
import statistics
import time

import numpy as np

from gibbspost import _kernels_py, bernoulli_measure
from gibbspost.cocycle import CocycleSpec
from gibbspost.families import markov_matrix
from gibbspost.sampling import sampling_tables
from gibbspost.thermo import markov_measure

try:
    from gibbspost import _kernels as compiled
except ImportError:  # the extension was not built
    compiled = None

SEED = 20240611


def workloads():
    chain = sampling_tables(markov_measure(markov_matrix(0.7, 0.4)))
    coin = sampling_tables(bernoulli_measure(2, [0.5, 0.5]))
    mats = CocycleSpec((0.03, -0.05)).matrices
    words = _kernels_py.chain_batch(*coin, SEED, 0, 1024, 2000)
    cps = np.arange(200, 2001, 200, dtype=np.int64)
    return {
        "splitmix_uniform 1e6": lambda k: k.splitmix_uniform(SEED, 0, 1_000_000),
        "chain_batch 1024 x 2000 (Markov)": lambda k: k.chain_batch(*chain, SEED, 0, 1024, 2000),
        "chain_batch 32 x 10000 (Bernoulli)": lambda k: k.chain_batch(*coin, SEED, 0, 32, 10_000),
        "cocycle_lognorms 1024 x 2000": lambda k: k.cocycle_lognorms(mats, words, cps),
    }


def median_time(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return statistics.median(times)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    if compiled is None:
        print("compiled extension not available; build with Cython to compare")
        return 1
    print(f"{'kernel':<38}{'python s':>11}{'cython s':>11}{'speedup':>9}  outputs")
    for name, run in workloads().items():
        a, b = run(_kernels_py), run(compiled)
        same = np.array_equal(a, b) if a.dtype.kind in "iu" else np.allclose(a, b, rtol=0, atol=1e-12)
        tp = median_time(lambda: run(_kernels_py), args.repeat)
        tc = median_time(lambda: run(compiled), args.repeat)
        print(f"{name:<38}{tp:>11.4f}{tc:>11.4f}{tp / tc:>8.1f}x  {'match' if same else 'DIFFER'}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
