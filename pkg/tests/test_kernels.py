import os
import subprocess
import sys

import numpy as np
import pytest

from cqac import kernels


def _random_instance(rng, n):
    vals = rng.integers(0, n, size=n)
    pick = rng.random((n, n)) < 0.2
    lt = pick & (vals[:, None] < vals[None, :])
    le = (pick & (vals[:, None] <= vals[None, :])) | lt
    np.fill_diagonal(le, True)
    ne = (rng.random((n, n)) < 0.1) & (vals[:, None] != vals[None, :])
    ne |= ne.T
    return le, lt, ne


@pytest.mark.skipif(kernels.nb is None, reason="numba unavailable")
def test_saturation_kernels_agree():
    rng = np.random.default_rng(0)
    for _ in range(50):
        le, lt, ne = _random_instance(rng, 10)
        a = [m.copy() for m in (le, lt, ne)]
        b = [m.copy() for m in (le, lt, ne)]
        ok_py = kernels._saturate_py(*a, ne.copy(), True)
        ok_jit = kernels._saturate_jit(*b, ne.copy(), True)
        assert bool(ok_py) == bool(ok_jit)
        if ok_py:
            for x, y in zip(a, b):
                assert np.array_equal(x, y)


@pytest.mark.skipif(kernels.nb is None, reason="numba unavailable")
def test_partition_kernels_agree():
    rng = np.random.default_rng(1)
    for _ in range(20):
        n, k = 3, 2
        m = n + k
        reqs = [np.zeros((m, m), dtype=np.bool_) for _ in range(3)]
        for _ in range(2):
            a, b = rng.integers(0, m, size=2)
            if a != b:
                reqs[rng.integers(0, 3)][a, b] = True
        outs = []
        for fn in (kernels._orders_impl, kernels._orders_jit):
            dummy = np.zeros((1, m + 1), dtype=np.int64)
            count = fn(n, m, *reqs, dummy, False)
            rows = np.zeros((count, m + 1), dtype=np.int64)
            if count:
                fn(n, m, *reqs, rows, True)
            outs.append(rows)
        assert np.array_equal(outs[0], outs[1])


def test_ordered_partitions_counts_weak_orders():
    # three unconstrained variables and no constants: 13 weak orders
    z = np.zeros((3, 3), dtype=np.bool_)
    assert len(kernels.ordered_partitions(3, 0, z, z, z)) == 13


def test_env_flag_selects_fallback():
    code = "from cqac import kernels; print(kernels.USE_JIT)"
    env = dict(os.environ, CQAC_KERNEL="numpy")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "False"


def test_fallback_gives_same_verdicts():
    code = ("from cqac.selftest import containment_suite; r = containment_suite(30, 7); "
            "print(r.checked, len(r.discrepancies), sorted(r.stats.items()))")
    outs = []
    for flag in ("numpy", "numba"):
        env = dict(os.environ, CQAC_KERNEL=flag)
        outs.append(subprocess.run([sys.executable, "-c", code], env=env, capture_output=True,
                                   text=True, check=True).stdout)
    assert outs[0] == outs[1]
    assert outs[0].split()[1] == "0"
