"""Acceptance suite: one test per criterion, one pass/fail line per criterion.

Run with ``pytest tests/test_acceptance.py`` (the lines appear in the
"acceptance criteria" summary section) or directly with
``python3 tests/test_acceptance.py``.
"""
import json
import math
import random
import shutil
import subprocess
import sys
import time
from contextlib import contextmanager

import pytest

from nielsen_kit import homology as H
from nielsen_kit import torus as T
from nielsen_kit import verify
from nielsen_kit.bounds import SurfaceSpec, hyperbolic_product_bound
from nielsen_kit.exact_linalg import IntMatrix, block_cyclic, product_chain
from oracles import det_leibniz, group_automorphism_count, torus_classes

import conftest


@contextmanager
def criterion(cid: int, name: str):
    t0 = time.perf_counter()
    status = "FAIL"
    try:
        yield
        status = "PASS"
    finally:
        line = f"[{status}] criterion {cid:>2}: {name} ({time.perf_counter() - t0:.1f}s)"
        conftest.ACCEPTANCE_LINES.append(line)
        print(line)


def _ok(chk):
    assert chk["pass"], json.dumps(chk["details"], indent=1)[:4000]


def test_criterion_01_block_determinant_identity():
    with criterion(1, "det(I - N) = det(I - N_m...N_1) on 1000 random block tuples"):
        t0 = time.perf_counter()
        chk = verify.criterion_1()
        assert time.perf_counter() - t0 < 10
        _ok(chk)
        assert chk["details"]["tuples"] == 1000 and chk["details"]["failures"] == 0
        # second route: Leibniz expansion on the tuples small enough for it
        small = [b for b in verify.random_block_tuples(1000, 0) if b[0].rows * len(b) <= 5]
        assert len(small) > 50
        for blocks in small:
            N = block_cyclic(blocks)
            C = product_chain(blocks)
            big = [[(i == j) - N[i, j] for j in range(N.rows)] for i in range(N.rows)]
            sm = [[(i == j) - C[i, j] for j in range(C.rows)] for i in range(C.rows)]
            assert det_leibniz(big) == det_leibniz(sm)


def test_criterion_02_product_automorphisms():
    with criterion(2, "Aut of S3^2, S3xD5, S3xS4: round trip and order formula"):
        t0 = time.perf_counter()
        chk = verify.criterion_2()
        assert time.perf_counter() - t0 < 60
        _ok(chk)
        d = chk["details"]
        assert d["s3_squared_automorphisms"] == 72 and d["roundtrip_failures"] == 0
        assert [o["enumerated"] for o in d["aut_orders"]] == [72, 120, 144]
        # factor automorphism counts from a permutation search, formula by hand
        from nielsen_kit.groups import dihedral_group, symmetric_group
        a3 = group_automorphism_count(symmetric_group(3).table)
        a5 = group_automorphism_count(dihedral_group(5).table)
        assert (a3 ** 2 * 2, a3 * a5) == (72, 120)


def test_criterion_03_unfactorizable_equivalence():
    with criterion(3, "unfactorizable iff centerless and indecomposable on the group corpus"):
        chk = verify.criterion_3()
        _ok(chk)
        assert chk["details"]["max_order"] == 60 and chk["details"]["discrepancies"] == []


def _oracle_product_check(As):
    # brute-force lifts of the block-diagonal map against the factor class counts
    n = sum(len(A) for A in As)
    big = [[0] * n for _ in range(n)]
    pos = 0
    for A in As:
        for i, row in enumerate(A):
            big[pos + i][pos:pos + len(A)] = row
        pos += len(A)
    whole = torus_classes(big)
    parts = [torus_classes(A) for A in As]
    return len(whole) == math.prod(len(p) for p in parts)


def test_criterion_04_product_formulas():
    with criterion(4, "product sweep: N, L and class indices multiply (exact)"):
        t0 = time.perf_counter()
        chk = verify.criterion_4()
        assert time.perf_counter() - t0 < 300
        _ok(chk)
        d = chk["details"]
        assert d["failures"] == 0 and d["exhaustive_checked"] > 4_000_000
        rng = random.Random(4)
        pools = {k: [a.tolist() for a in T.matrix_pool(k, nondegenerate=True)] for k in (1, 2)}
        for _ in range(40):
            dims = [rng.choice((1, 2)) for _ in range(rng.randint(1, 2))]
            assert _oracle_product_check([rng.choice(pools[k]) for k in dims])


def test_criterion_05_cyclic_reduction():
    with criterion(5, "cyclic sweep: L, N, index multisets and rho bijection (exact)"):
        chk = verify.criterion_5()
        _ok(chk)
        d = chk["details"]
        assert d["failures"] == 0 and d["exhaustive_checked"] > 5_000_000
        assert all(r["pass"] for r in d["smooth_block_jacobian"])
        # second route: brute-force fixed point count of the whole cyclic matrix
        rng = random.Random(5)
        pool = [a.tolist() for a in T.matrix_pool(1)]
        for _ in range(30):
            As = [rng.choice(pool) for _ in range(rng.randint(1, 3))]
            N = block_cyclic([IntMatrix.from_rows(A) for A in As]).to_lists()
            comp = T.analyze(T.CyclicTorusMap.of(As).composed())
            whole = torus_classes(N)
            assert (whole is None) == comp.degenerate
            if whole is not None:
                assert len(whole) == comp.nielsen


def test_criterion_06_lefschetz_hopf():
    with criterion(6, "smooth corpus: index sums equal det(I - A), Jacobians match FD"):
        chk = verify.criterion_6()
        _ok(chk)
        rows = chk["details"]["rows"]
        assert len(rows) >= 20
        assert all(r["index_sum"] == r["lefschetz"] and r["fd_max_relative"] <= 1e-5 for r in rows)


def test_criterion_07_surface_bound_checker():
    with criterion(7, "index multiset checker accepts valid and names violated clauses"):
        chk = verify.criterion_7()
        _ok(chk)
        valid = chk["details"]["valid"]
        assert {"indices": [-3, -2, 1, 1], "chi": -2, "verdict": True} in valid
        six = next(b for b in chk["details"]["violating"] if b["indices"] == [-6])
        assert six["rejected"] and "interval" in six["named"]


def test_criterion_08_hyperbolic_product_bound():
    with criterion(8, "hyperbolic product bound: 25 for genus 2 squared, 45 for 2 x 3"):
        _ok(verify.criterion_8())
        assert hyperbolic_product_bound([SurfaceSpec.of_genus(2), SurfaceSpec.of_genus(2)]) == 25
        assert abs(2 * (2 - 2 * 2) - 1) * abs(2 * (2 - 2 * 3) - 1) == 45


def test_criterion_09_homology():
    with criterion(9, "L(identity) = chi on four triangulations; degree-2 circle map L = -1"):
        t0 = time.perf_counter()
        chk = verify.criterion_9()
        assert time.perf_counter() - t0 < 10
        _ok(chk)
        assert [r["chi"] for r in chk["details"]["identity"]] == [1, 0, 0, -2]
        assert chk["details"]["degree_two"]["lefschetz"] == -1
        K, sub, f = H.degree_two_circle_map()
        assert H.hopf_trace(K, f, sub) == -1


def test_criterion_10_verify_all():
    with criterion(10, "verify-all exits 0 in under 5 minutes"):
        exe = shutil.which("nielsen-kit")
        cmd = [exe] if exe else [sys.executable, "-m", "nielsen_kit.cli"]
        t0 = time.perf_counter()
        proc = subprocess.run(cmd + ["verify-all"], capture_output=True, text=True, timeout=600)
        elapsed = time.perf_counter() - t0
        assert proc.returncode == 0, proc.stderr[-3000:]
        assert elapsed < 300, f"took {elapsed:.0f}s"
        rep = json.loads(proc.stdout)
        assert [c["id"] for c in rep["checks"]] == list(range(1, 11))
        assert all(c["pass"] for c in rep["checks"])


if __name__ == "__main__":
    code = pytest.main([__file__, "-q"])
    print("\n".join(conftest.ACCEPTANCE_LINES))
    sys.exit(code)
