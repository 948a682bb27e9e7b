"""Compare the numba and numpy pulse-composition backends.

    python benchmarks/bench_kernels.py [--repeats N]
"""

import argparse
import math
import time

import numpy as np

from exchange_only import _kernels
from exchange_only.synthesis import synthesize


def best_of(fn, repeats):
    best = math.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeats", type=int, default=20)
    args = ap.parse_args()

    full = synthesize(math.pi, "fig9b").full
    pairs = np.array([p.pair for p in full], dtype=np.int64)
    times = np.array([p.t for p in full])
    rng = np.random.default_rng(0)
    k = rng.integers(0, 5, size=400)
    rpairs = np.stack([k, k + 1], axis=1)
    rtimes = rng.uniform(0, 2 * math.pi, size=400)

    cases = [("41-pulse CPhase, 6 sites", 6, pairs, times), ("400 random pulses, 6 sites", 6, rpairs, rtimes)]
    backends = ["numpy"] + (["numba"] if _kernels.HAVE_NUMBA else [])
    if _kernels.HAVE_NUMBA:
        _kernels.compose_pulses(6, pairs[:2], times[:2], backend="numba")  # compile outside the timing

    print(f"{'case':32s}" + "".join(f"{b:>14s}" for b in backends))
    for name, n, p, t in cases:
        row = [best_of(lambda: _kernels.compose_pulses(n, p, t, backend=b), args.repeats) for b in backends]
        print(f"{name:32s}" + "".join(f"{x * 1e3:11.3f} ms" for x in row))
        if len(row) == 2:
            ref = _kernels.compose_pulses(n, p, t, backend="numpy")
            dev = np.max(np.abs(ref - _kernels.compose_pulses(n, p, t, backend="numba")))
            print(f"{'':32s}speedup {row[0] / row[1]:.1f}x, max deviation {dev:.1e}")


if __name__ == "__main__":
    main()
