"""Compare the numba kernels with the pure numpy fallback.

Usage: python benchmarks/bench_kernels.py [--repeat N] [--seed S]

Both implementations are called in one process on the same inputs and their
outputs are checked for equality before any timing is reported.  Setting
CQAC_KERNEL=numpy for the library only switches which one ``saturate`` and
``ordered_partitions`` dispatch to; this script always runs both.
"""

import argparse
import time

import numpy as np

from cqac import kernels


def saturation_inputs(rng, n_terms, density, count):
    """Facts sampled from a hidden assignment, so every instance is consistent."""
    cases = []
    for _ in range(count):
        vals = rng.integers(0, n_terms // 2 + 1, size=n_terms)
        pick = rng.random((n_terms, n_terms)) < density
        lt = pick & (vals[:, None] < vals[None, :])
        le = (pick & (vals[:, None] <= vals[None, :])) | lt
        ne = rng.random((n_terms, n_terms)) < density / 2
        ne &= vals[:, None] != vals[None, :]
        ne |= ne.T
        np.fill_diagonal(le, True)
        cases.append((le, lt, ne, ne.copy()))
    return cases


def partition_inputs(rng, n_vars, n_consts, count):
    m = n_vars + n_consts
    cases = []
    for _ in range(count):
        req_lt = np.zeros((m, m), dtype=np.bool_)
        req_le = np.zeros((m, m), dtype=np.bool_)
        req_ne = np.zeros((m, m), dtype=np.bool_)
        for _ in range(n_vars):
            a, b = rng.integers(0, m, size=2)
            if a != b:
                [req_lt, req_le, req_ne][rng.integers(0, 3)][a, b] = True
        cases.append((n_vars, m, req_lt, req_le, req_ne))
    return cases


def run_saturate(fn, cases):
    out = []
    for le, lt, ne, nbase in cases:
        a, b, c = le.copy(), lt.copy(), ne.copy()
        ok = bool(fn(a, b, c, nbase.copy(), True))
        # after an early exit the partial matrices are implementation detail
        out.append((ok, a.tobytes(), b.tobytes(), c.tobytes()) if ok else (ok,))
    return out


def run_orders(fn, cases):
    out = []
    for n, m, req_lt, req_le, req_ne in cases:
        dummy = np.zeros((1, m + 1), dtype=np.int64)
        count = fn(n, m, req_lt, req_le, req_ne, dummy, False)
        rows = np.zeros((count, m + 1), dtype=np.int64)
        if count:
            fn(n, m, req_lt, req_le, req_ne, rows, True)
        out.append(rows.tobytes())
    return out


def timed(fn, *args, repeat=3):
    best, result = float("inf"), None
    for _ in range(repeat):
        t = time.perf_counter()
        result = fn(*args)
        best = min(best, time.perf_counter() - t)
    return best, result


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    if kernels.nb is None:
        raise SystemExit("numba is not importable; nothing to compare")
    rng = np.random.default_rng(args.seed)

    print(f"{'kernel':<34}{'numpy (s)':>12}{'numba (s)':>12}{'speedup':>10}")
    for n_terms, count in ((8, 400), (16, 200), (32, 50)):
        cases = saturation_inputs(rng, n_terms, 0.15, count)
        run_saturate(kernels._saturate_jit, cases[:1])  # compile outside the timing
        t_py, r_py = timed(run_saturate, kernels._saturate_py, cases, repeat=args.repeat)
        t_jit, r_jit = timed(run_saturate, kernels._saturate_jit, cases, repeat=args.repeat)
        assert r_py == r_jit, "saturation kernels disagree"
        label = f"saturate {n_terms} terms x{count}"
        print(f"{label:<34}{t_py:>12.4f}{t_jit:>12.4f}{t_py / t_jit:>9.1f}x")

    for n_vars, n_consts, count in ((4, 3, 50), (5, 3, 10), (6, 3, 3)):
        cases = partition_inputs(rng, n_vars, n_consts, count)
        run_orders(kernels._orders_jit, cases[:1])
        t_py, r_py = timed(run_orders, kernels._orders_impl, cases, repeat=args.repeat)
        t_jit, r_jit = timed(run_orders, kernels._orders_jit, cases, repeat=args.repeat)
        assert r_py == r_jit, "partition kernels disagree"
        label = f"orders {n_vars} vars {n_consts} consts x{count}"
        print(f"{label:<34}{t_py:>12.4f}{t_jit:>12.4f}{t_py / t_jit:>9.1f}x")


if __name__ == "__main__":
    main()
