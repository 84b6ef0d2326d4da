#!/usr/bin/env python3
"""Benchmark the alignment DP kernels across lattice sizes.

Times the Viterbi search and the forward-sum (with and without the
backward pass) on column-stochastic log-probability matrices.
"""

import argparse
import time

import numpy as np

from alignkit import forward_sum, log_soft_alignment, mas


def bench(t_src: int, t_trg: int, repeats: int, rng: np.random.Generator) -> None:
    lp = log_soft_alignment(rng.uniform(0.0, 4.0, size=(t_src, t_trg))).data

    def timeit(fn):
        best = min(_timed(fn) for _ in range(repeats))
        return best

    def _timed(fn):
        start = time.perf_counter()
        fn()
        return time.perf_counter() - start

    t_mas = timeit(lambda: mas(lp))
    t_fwd = timeit(lambda: forward_sum(lp, with_gradient=False))
    t_grad = timeit(lambda: forward_sum(lp))
    cells = t_src * t_trg / 1e6
    print(
        f"{t_src:5d} x {t_trg:5d}  mas {t_mas * 1e3:8.2f} ms"
        f"  forward {t_fwd * 1e3:8.2f} ms"
        f"  forward+grad {t_grad * 1e3:8.2f} ms"
        f"  ({cells:.1f}M cells)"
    )


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=3)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    rng = np.random.default_rng(args.seed)
    for t_src, t_trg in ((100, 400), (250, 1000), (500, 2000), (1000, 4000)):
        bench(t_src, t_trg, args.repeats, rng)


if __name__ == "__main__":
    main()
