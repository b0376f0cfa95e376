import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from nielsen_kit import torus as T
from nielsen_kit.exact_linalg import IntMatrix, det_exact
from oracles import det_leibniz, torus_classes

CAT = [[2, 1], [1, 1]]
TWO = [[2, 1], [1, 0]]


def mats(n, lo=-3, hi=3):
    return st.lists(st.lists(st.integers(lo, hi), min_size=n, max_size=n), min_size=n, max_size=n)


any_mat = st.integers(1, 3).flatmap(lambda n: mats(n, -2, 2) if n == 3 else mats(n))


def test_analyze_examples():
    s = T.analyze(T.TorusMap.of(CAT))
    assert (s.lefschetz, s.nielsen, s.index_multiset, s.degenerate) == (-1, 1, (-1,), False)
    s = T.analyze(T.TorusMap.of([[1, 0], [0, 1]]))
    assert s.degenerate and s.lefschetz == 0 and s.nielsen == 0 and s.classes == ()
    s = T.analyze(T.TorusMap.of(TWO))
    assert (s.lefschetz, s.nielsen, s.index_multiset) == (-2, 2, (-1, -1))


@given(any_mat)
def test_analyze_matches_brute_force_lifts(A):
    n = len(A)
    s = T.analyze(T.TorusMap.of(A))
    d = det_leibniz([[(i == j) - A[i][j] for j in range(n)] for i in range(n)])
    classes = torus_classes(A)
    if d == 0:
        assert s.degenerate and classes is None
        return
    sign = 1 if d > 0 else -1
    assert s.lefschetz == d and s.nielsen == abs(d) == len(classes) == len(s.classes)
    # one fixed point per class, each of index sgn det(I - A)
    assert all(len(cl) == 1 for cl in classes)
    assert all(c.index == sign and c.essential for c in s.classes)
    assert sum(c.index for c in s.classes) == s.lefschetz


@given(any_mat)
def test_labels_are_the_brute_force_classes(A):
    f = T.TorusMap.of(A)
    s = T.analyze(f)
    if s.degenerate:
        return
    from nielsen_kit.exact_linalg import cokernel
    cok = cokernel(IntMatrix.identity(f.dim) - f.linear_part)
    brute = {cok.reduce(cl[0][1]) for cl in torus_classes(A)}
    assert brute == {c.label for c in s.classes}
    for c in s.classes:
        x = f.fixed_point(c.label)
        Ax = [sum(a * t for a, t in zip(row, x)) for row in A]
        assert all((u - t).denominator == 1 for u, t in zip(Ax, x))


def test_product_examples():
    rep = T.analyze_product([T.TorusMap.of(CAT), T.TorusMap.of(TWO)])
    assert rep.passed
    assert (rep.direct.nielsen, rep.direct.lefschetz) == (2, 2)
    assert all(c.index == 1 for c in rep.direct.classes)
    rep = T.analyze_product([T.TorusMap.of(CAT), T.TorusMap.of([[1, 0], [0, 1]])])
    assert rep.passed and rep.direct.degenerate and rep.direct.nielsen == 0
    rep = T.analyze_product([T.TorusMap.of([[2]]), T.TorusMap.of([[3]]), T.TorusMap.of([[4]])])
    assert rep.passed and rep.direct.nielsen == 6
    assert [s.nielsen for s in rep.factors] == [1, 2, 3]


@given(st.lists(st.integers(1, 2).flatmap(mats), min_size=1, max_size=3))
def test_product_identities(As):
    rep = T.analyze_product([T.TorusMap.of(A) for A in As])
    assert rep.passed
    assert rep.direct.lefschetz == math.prod(s.lefschetz for s in rep.factors)
    if not rep.direct.degenerate:
        picks = [p for _, p in rep.correspondence]
        assert len(set(picks)) == len(picks) == rep.direct.nielsen


def test_cyclic_examples():
    f = T.CyclicTorusMap.of([[[1, 1], [0, 1]], [[1, 0], [1, 1]]])
    assert f.composed().linear_part.to_lists() == [[1, 1], [1, 2]]
    rep = T.analyze_cyclic(f)
    assert rep.passed and rep.composed.lefschetz == rep.cyclic.lefschetz == -1
    assert rep.cyclic.nielsen == 1 and f.total().dim == 4
    pairs = T.rho_correspondence(f)
    assert len(pairs) == 1 and pairs[0].composed.index == pairs[0].cyclic.index == -1

    rep = T.analyze_cyclic(T.CyclicTorusMap.of([[[2]], [[2]], [[2]]]))
    assert rep.passed and rep.cyclic.lefschetz == -7 and rep.cyclic.nielsen == 7

    one = T.CyclicTorusMap.of([TWO])
    assert T.analyze_cyclic(one).cyclic == T.analyze(T.TorusMap.of(TWO))
    assert [(p.composed.label, p.cyclic.label) for p in T.rho_correspondence(one)] == \
        [(c.label, c.label) for c in T.analyze(T.TorusMap.of(TWO)).classes]

    pairs = T.rho_correspondence(T.CyclicTorusMap.of([TWO, [[1, 0], [0, 1]]]))
    assert len(pairs) == 2 and len({p.cyclic.label for p in pairs}) == 2


def test_rho_needs_nondegenerate_composition():
    with pytest.raises(T.DegenerateInputError):
        T.rho_correspondence(T.CyclicTorusMap.of([[[1, 0], [0, 1]], [[1, 0], [0, 1]]]))
    rep = T.analyze_cyclic(T.CyclicTorusMap.of([[[1]], [[1]]]))
    assert rep.correspondence is None and rep.passed


@given(st.integers(1, 2).flatmap(lambda n: st.lists(mats(n, -2, 2), min_size=1, max_size=3)))
def test_cyclic_identities(As):
    f = T.CyclicTorusMap.of(As)
    rep = T.analyze_cyclic(f)
    assert rep.passed


@given(st.integers(1, 2).flatmap(lambda n: st.lists(mats(n, -2, 2), min_size=2, max_size=3)))
def test_rho_sends_fixed_points_to_fixed_points(As):
    # exact check on actual points: rho(a) is fixed by the cyclic map
    f = T.CyclicTorusMap.of(As)
    comp = f.composed()
    s = T.analyze(comp)
    if s.degenerate:
        return
    for c in s.classes[:6]:
        a = comp.fixed_point(c.label)
        pts = f.rho(a)
        # cyclic map: slot 0 gets f_m(a_m), slot i gets f_i(a_{i-1})
        images = [f.components[-1].linear_part.apply(pts[-1])] + [
            f.components[i].linear_part.apply(pts[i]) for i in range(f.m - 1)]
        for p, q in zip(pts, images):
            assert all((u - v).denominator == 1 for u, v in zip(p, q))


def test_json_round_trip():
    f = T.CyclicTorusMap.of([CAT, TWO])
    assert T.CyclicTorusMap.from_json(f.to_json()) == f
    assert T.TorusMap.from_json({"dim": 2, "linear_part": CAT}) == T.TorusMap.of(CAT)
    with pytest.raises(ValueError):
        T.TorusMap.from_json({"dim": 3, "linear_part": CAT})
    with pytest.raises(ValueError):
        T.CyclicTorusMap.of([CAT, [[2]]])


def test_matrix_pools():
    assert len(T.matrix_pool(1)) == 7
    assert len(T.matrix_pool(1, nondegenerate=True)) == 6
    pool = T.matrix_pool(2, nondegenerate=True)
    assert len(pool) == 2142
    assert all(det_exact(IntMatrix.identity(2) - IntMatrix.from_rows(a.tolist())) != 0
               for a in pool[::97])


@pytest.mark.parametrize("dims", [(1,), (1, 1), (1, 2), (2, 1), (1, 1, 1)])
def test_small_product_sweeps_exhaustive(dims):
    res = T.product_sweep_pattern(dims)
    assert res.passed and res.exhaustive and res.checked == res.total


@pytest.mark.parametrize("d,m", [(1, 1), (2, 1), (1, 2), (1, 3)])
def test_small_cyclic_sweeps_exhaustive(d, m):
    res = T.cyclic_sweep_pattern(d, m)
    assert res.passed and res.checked == res.total == 7 ** (d * d * m)


def test_sweep_result_counts_match_exact_oracle():
    # the degenerate count of the m=1 sweep is the number of 2x2 matrices with det(I-A)=0
    res = T.cyclic_sweep_pattern(2, 1)
    zero = sum(1 for a in T.matrix_pool(2)
               if det_exact(IntMatrix.identity(2) - IntMatrix.from_rows(a.tolist())) == 0)
    assert res.degenerate == zero


def test_overflowing_tuples_are_rechecked_exactly():
    big = np.array([[[40000, 1], [1, 40001]], [[3, 70000], [1, 2]]], dtype=np.int64)
    pools = {2: big}
    res = T.cyclic_sweep_pattern(2, 3, pools=pools)
    assert res.checked == 8 and res.failures == 0
    from nielsen_kit import _backend
    if _backend.COMPILED:
        assert res.overflow > 0


def test_sweep_threads_do_not_change_result():
    a = T.cyclic_sweep_pattern(2, 2, step=997, threads=1)
    b = T.cyclic_sweep_pattern(2, 2, step=997, threads=3)
    assert a.to_json() == b.to_json()


def test_structural_label_check_agrees_with_enumeration(monkeypatch):
    from nielsen_kit import _kernels_py as K
    pool = T.matrix_pool(2, nondegenerate=True)[:40]
    listed = K.cyclic_chunk(pool, len(pool), 2, 2, 0, 1600, 7)
    monkeypatch.setattr(K, "ENUMERATION_LIMIT", 0)
    assert K.cyclic_chunk(pool, len(pool), 2, 2, 0, 1600, 7) == listed
    assert listed[1] == 0
    pp = np.concatenate([pool.ravel(), pool.ravel()])
    args = (pp, [0, pool.size], [40, 40], [2, 2], 0, 1600, 7)
    monkeypatch.setattr(K, "ENUMERATION_LIMIT", 1 << 14)
    listed = K.product_chunk(*args)
    monkeypatch.setattr(K, "ENUMERATION_LIMIT", 0)
    assert K.product_chunk(*args) == listed and listed[1] == 0
