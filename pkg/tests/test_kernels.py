import os
import subprocess
import sys

import numpy as np
import pytest

from nielsen_kit import _backend
from nielsen_kit import _kernels_py as pure
from nielsen_kit import torus as T
from nielsen_kit.corpus import smooth_corpus

compiled = pytest.mark.skipif(not _backend.COMPILED, reason="compiled kernels not built")


def _product_args(dims, pools):
    data = np.concatenate([pools[d].ravel() for d in dims]).astype(np.int64)
    offs, pos = [], 0
    for d in dims:
        offs.append(pos)
        pos += pools[d].size
    sizes = [len(pools[d]) for d in dims]
    return data, np.array(offs, dtype=np.int64), np.array(sizes, dtype=np.int64), sizes


@compiled
@pytest.mark.parametrize("dims", [(1, 2), (2, 2), (1, 1, 2)])
def test_product_chunks_agree(dims):
    pools = {1: T.matrix_pool(1, nondegenerate=True), 2: T.matrix_pool(2)[::5]}
    data, offs, sizes, plain = _product_args(dims, pools)
    total = int(np.prod(plain))
    step = max(1, total // 400) | 1
    a = _backend.kernels.product_chunk(data, offs, sizes, np.array(dims, dtype=np.int64), 0,
                                       total, step)
    b = pure.product_chunk(data, offs, plain, list(dims), 0, total, step)
    assert a[:3] == b[:3] and a[1] == 0
    assert list(a[4]) == list(b[4])


@compiled
@pytest.mark.parametrize("d,m", [(1, 3), (2, 2), (2, 3)])
def test_cyclic_chunks_agree(d, m):
    pool = T.matrix_pool(d)[::3] if d == 2 else T.matrix_pool(d)
    size = len(pool)
    data = np.ascontiguousarray(pool.ravel(), dtype=np.int64)
    step = max(1, size ** m // 400) | 1
    a = _backend.kernels.cyclic_chunk(data, size, d, m, 0, size ** m, step)
    b = pure.cyclic_chunk(data, size, d, m, 0, size ** m, step)
    assert a[:3] == b[:3] and a[1] == 0


@compiled
def test_compiled_flags_overflow_instead_of_guessing():
    pool = np.array([[[40000, 1], [1, 40001]], [[3, 70000], [1, 2]]], dtype=np.int64)
    data = np.ascontiguousarray(pool.ravel())
    checked, failures, _, overflow, _, ids = _backend.kernels.cyclic_chunk(data, 2, 2, 3, 0, 8)
    assert checked == 8 and failures == 0 and overflow > 0 and len(ids) == overflow


@compiled
def test_newton_kernels_agree_on_corpus():
    rng = np.random.default_rng(5)
    for f in smooth_corpus()[::4]:
        seeds = rng.random((64, f.dim))
        targets = np.zeros_like(seeds)
        a = _backend.kernels.newton_batch(*f.arrays(), seeds, targets, 1e-12, 60)
        b = pure.newton_batch(*f.arrays(), seeds, targets, 1e-12, 60)
        assert np.array_equal(a[1], b[1])
        ok = a[1] == 1
        assert np.allclose(a[0][ok], b[0][ok], atol=1e-10)


def _env(**extra):
    env = dict(os.environ)
    env.update(extra)
    return env


def test_pure_mode_selected_by_environment():
    code = "from nielsen_kit import _backend; print(_backend.COMPILED, _backend.kernels.__name__)"
    out = subprocess.run([sys.executable, "-c", code], env=_env(NIELSEN_KIT_PURE="1"),
                         capture_output=True, text=True, check=True).stdout.split()
    assert out == ["False", "nielsen_kit._kernels_py"]


def test_pure_mode_gives_same_sweep_result():
    code = ("from nielsen_kit import torus as T; import json; "
            "print(json.dumps(T.cyclic_sweep_pattern(2, 2, step=49999).to_json(), sort_keys=True))")
    pure_out = subprocess.run([sys.executable, "-c", code], env=_env(NIELSEN_KIT_PURE="1"),
                              capture_output=True, text=True, check=True).stdout
    default_out = subprocess.run([sys.executable, "-c", code], env=_env(),
                                 capture_output=True, text=True, check=True).stdout
    assert pure_out == default_out


def test_thread_cap(monkeypatch):
    monkeypatch.setenv("NIELSEN_KIT_THREADS", "1")
    assert _backend.thread_count() == 1
    monkeypatch.setenv("NIELSEN_KIT_THREADS", "junk")
    assert _backend.thread_count() >= 1
