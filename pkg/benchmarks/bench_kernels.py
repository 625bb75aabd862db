"""Wall-clock comparison of the numba and pure-numpy kernels.

    python3 benchmarks/bench_kernels.py [--superframes 200] [--repeat 3]

Both backends are imported directly, so the CHIMSIM_PURE_NUMPY flag does not
matter here. The first jit call (compilation or cache load) is excluded.
"""
import argparse
import time

import numpy as np

from chimsim import _kernels
from chimsim.latin import family_for
from chimsim.schedule import chim_setup
from chimsim.simcore import NetworkModel


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def chim_args(N, superframes, alpha=0.2, seed=0, K=20, M=16):
    rng = np.random.default_rng(seed)
    net = NetworkModel.probabilistic(N, K, alpha, rng)
    fam = family_for(M, K)
    scheds = chim_setup(N, K, M, fam, rng)
    dfc = np.array([s.default_channel for s in scheds], dtype=np.int64)
    bkc = np.stack([s.backup_channel for s in scheds])
    bkts = np.stack([s.backup_slot for s in scheds]) - 1
    return (net.relation, K, fam.q, K + fam.q, superframes, _kernels.CHIM,
            dfc, bkc, bkts, net.slot_offsets)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--superframes", type=int, default=200)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    if not _kernels.HAS_NUMBA:
        raise SystemExit("numba is not installed; nothing to compare")

    print(f"{'kernel':<10}{'N':>5}{'numpy s':>12}{'numba s':>12}{'speedup':>10}")
    for N in (5, 20, 50):
        a = chim_args(N, args.superframes)
        _kernels.simulate_jit(*a)
        ref = _kernels.simulate_numpy(*a)
        assert all(np.array_equal(x, y) for x, y in zip(ref, _kernels.simulate_jit(*a)))
        tn = best_of(lambda: _kernels.simulate_numpy(*a), args.repeat)
        tj = best_of(lambda: _kernels.simulate_jit(*a), args.repeat)
        print(f"{'simulate':<10}{N:>5}{tn:>12.4f}{tj:>12.4f}{tn / tj:>10.1f}")

    rng = np.random.default_rng(1)
    rel = rng.random((1050, 1050)) < 0.2
    for n in (5, 20, 50):
        src = rng.choice(1050, n, replace=False)
        dst = rng.integers(0, 1050, n)
        ch = rng.integers(1, 17, n)
        _kernels.resolve_jit(src, dst, ch, rel)
        reps = 2000
        tn = best_of(lambda: [_kernels.resolve_numpy(src, dst, ch, rel) for _ in range(reps)], args.repeat)
        tj = best_of(lambda: [_kernels.resolve_jit(src, dst, ch, rel) for _ in range(reps)], args.repeat)
        print(f"{'resolve':<10}{n:>5}{tn / reps * 1e6:>10.1f}us{tj / reps * 1e6:>10.1f}us{tn / tj:>10.1f}")


if __name__ == "__main__":
    main()
