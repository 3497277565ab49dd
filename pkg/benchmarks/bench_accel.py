"""Time the block convolution and marching solve with and without numba.

    python3 benchmarks/bench_accel.py [N ...]
"""
import sys
import time

import numpy as np

from bgacq import _accel


def best_of(f, repeat=3):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        f()
        times.append(time.perf_counter() - t0)
    return min(times)


def main(Ns):
    if not _accel.HAVE_NUMBA:
        print("numba unavailable or disabled; only the numpy path is timed")
    m = 4
    rng = np.random.default_rng(0)
    print(f"{'N':>6} {'op':>9} {'numpy [s]':>10} {'numba [s]':>10} {'speedup':>8}")
    for N in Ns:
        W = rng.standard_normal((N + 1, m, m)) / (1 + np.arange(N + 1))[:, None, None]
        W[0] += 3 * np.eye(m)
        G = rng.standard_normal((N, m))
        W0inv = np.linalg.inv(W[0])
        ops = {
            "convolve": lambda use: _accel.block_convolve(W, G, use_numba=use),
            "march": lambda use: _accel.block_march(W, W0inv, G, use_numba=use),
        }
        for name, op in ops.items():
            t_np = best_of(lambda: op(False))
            if _accel.HAVE_NUMBA:
                op(True)  # compile outside the timing
                t_nb = best_of(lambda: op(True))
                print(f"{N:6d} {name:>9} {t_np:10.4f} {t_nb:10.4f} {t_np / t_nb:8.1f}")
            else:
                print(f"{N:6d} {name:>9} {t_np:10.4f} {'-':>10} {'-':>8}")


if __name__ == "__main__":
    main([int(x) for x in sys.argv[1:]] or [256, 1024, 4096])
