#!/usr/bin/env python3
"""Timing comparison of the numba and numpy kernel backends.

Times the four hot kernels on sweep-sized inputs and prints per-call
latencies, the speedup, and the worst numerical deviation between the two
implementations.  Runs fine without numba installed (numpy column only).

Usage: python benchmarks/bench_backends.py [--repeats N] [--batch N]
"""

import argparse
import math
import time

import numpy as np

from multibeam_noma import _kernels


def make_cases(rng, batch):
    """One pre-drawn argument tuple per trial so timing excludes setup."""
    m_ue, m_bs = 10, 128
    vhh, seg, sweep, pattern = [], [], [], []
    m1_values = np.arange(50, 67, dtype=np.int64)
    offsets = np.array([0, 50], dtype=np.int64)
    lengths = np.array([50, 78], dtype=np.int64)
    cos_angles = np.cos(np.pi * (np.arange(2048) + 1.0) / 2049.0)
    for _ in range(batch):
        num_paths = 31
        gains = rng.normal(size=num_paths) + 1j * rng.normal(size=num_paths)
        aods = rng.uniform(0.05, math.pi - 0.05, size=num_paths)
        aoas = rng.uniform(0.05, math.pi - 0.05, size=num_paths)
        vhh.append((gains, aods, aoas, m_ue, m_bs))
        row = _kernels.vhh_row_numpy(gains, aods, aoas, m_ue, m_bs)
        cos_steers = np.cos(np.sort(rng.uniform(0.05, math.pi - 0.05, size=2)))
        seg.append((row, cos_steers, offsets, lengths, m_bs))
        sweep.append((row, cos_steers[0], cos_steers[1], m1_values, m_bs))
        w = np.exp(1j * rng.uniform(0.0, 2 * math.pi, size=m_bs)) / math.sqrt(m_bs)
        pattern.append((w, cos_angles))
    return {"vhh_row": vhh, "segment_gains": seg,
            "two_segment_sweep": sweep, "pattern_mags": pattern}


def time_batch(fn, cases, repeats):
    best = math.inf
    for _ in range(repeats):
        start = time.perf_counter()
        for args in cases:
            fn(*args)
        best = min(best, time.perf_counter() - start)
    return best / len(cases)


def max_deviation(fn_a, fn_b, cases):
    worst = 0.0
    for args in cases:
        a = np.atleast_1d(fn_a(*args))
        b = np.atleast_1d(fn_b(*args))
        worst = max(worst, float(np.abs(a - b).max()))
    return worst


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeats", type=int, default=5,
                        help="timing repetitions, best is kept (default 5)")
    parser.add_argument("--batch", type=int, default=2000,
                        help="pre-drawn inputs per kernel (default 2000)")
    args = parser.parse_args()

    rng = np.random.default_rng(0)
    cases = make_cases(rng, args.batch)
    pairs = {
        "vhh_row": (_kernels.vhh_row_numpy, _kernels.vhh_row_numba),
        "segment_gains": (_kernels.segment_gains_numpy, _kernels.segment_gains_numba),
        "two_segment_sweep": (_kernels.two_segment_sweep_numpy,
                              _kernels.two_segment_sweep_numba),
        "pattern_mags": (_kernels.pattern_mags_numpy, _kernels.pattern_mags_numba),
    }

    if _kernels.HAVE_NUMBA:
        for name, (_, jitted) in pairs.items():
            jitted(*cases[name][0])  # compile outside the clock
        header = f"{'kernel':<18} {'numpy':>12} {'numba':>12} {'speedup':>8} {'max dev':>10}"
    else:
        print("numba not installed, timing the numpy backend only")
        header = f"{'kernel':<18} {'numpy':>12}"
    print(header)
    print("-" * len(header))

    for name, (plain, jitted) in pairs.items():
        t_numpy = time_batch(plain, cases[name], args.repeats)
        if _kernels.HAVE_NUMBA:
            t_numba = time_batch(jitted, cases[name], args.repeats)
            dev = max_deviation(plain, jitted, cases[name])
            print(f"{name:<18} {t_numpy*1e6:>10.2f}us {t_numba*1e6:>10.2f}us "
                  f"{t_numpy/t_numba:>7.2f}x {dev:>10.2e}")
        else:
            print(f"{name:<18} {t_numpy*1e6:>10.2f}us")

    print(f"\nactive backend for the package: {_kernels.BACKEND}")


if __name__ == "__main__":
    main()
