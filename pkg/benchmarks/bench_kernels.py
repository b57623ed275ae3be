"""Compare the numba-compiled kernels with their numpy fallbacks.

Usage: python3 benchmarks/bench_kernels.py [--repeat N]

Each kernel is called once to trigger compilation, then timed with
``timeit``.  The script also checks that both implementations agree.
"""

import argparse
import timeit

import numpy as np

from su11pt import _kernels as K
from su11pt.algebra import Sector, build_rep


def cases():
    rep = build_rep(Sector.boson_even(), 48)
    amp = rep.amp
    sz = rep.sz_diag
    times = np.linspace(0.0, 2 * np.pi, 9)
    values = np.cos(np.linspace(0.0, 3.0, 4097))
    return [
        ("ladder_exp dim=48", K.ladder_exp_numpy, K._ladder_exp_jit, (amp, 0.3 + 0.2j)),
        ("rk4_group 20000 steps/period", K.rk4_group_numpy, K._rk4_group_jit,
         (1.0, 1.0, 1.0, times, 20000 / (2 * np.pi))),
        ("rk4_truncated dim=16 2000 steps", K.rk4_truncated_numpy, K._rk4_truncated_jit,
         (sz[:16], amp[:15], 1.0, 0.3, 1.0, 1.0, 2000)),
        ("simpson 4096 intervals", K.simpson_numpy, K._simpson_checked_jit, (values, 3.0 / 4096)),
    ]


def _max_diff(a, b):
    if isinstance(a, tuple):
        return max(_max_diff(x, y) for x, y in zip(a, b))
    a, b = np.asarray(a), np.asarray(b)
    return float(np.max(np.abs(a - b)) / max(np.max(np.abs(a)), 1.0))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    print(f"numba available: {K.HAVE_NUMBA}, active backend: {K.BACKEND}")
    print(f"{'kernel':34s} {'numpy [s]':>11s} {'numba [s]':>11s} {'speedup':>8s} {'rel diff':>10s}")
    for name, slow, fast, call_args in cases():
        ref = slow(*call_args)
        got = fast(*call_args)  # compiles on first call when numba is active
        t_slow = min(timeit.repeat(lambda: slow(*call_args), number=1, repeat=args.repeat))
        t_fast = min(timeit.repeat(lambda: fast(*call_args), number=1, repeat=args.repeat))
        print(f"{name:34s} {t_slow:11.5f} {t_fast:11.5f} {t_slow / t_fast:8.1f} {_max_diff(ref, got):10.2e}")


if __name__ == "__main__":
    main()
