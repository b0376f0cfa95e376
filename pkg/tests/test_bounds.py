import itertools
import math

import pytest
from hypothesis import assume, given, strategies as st

from nielsen_kit import bounds as B
from nielsen_kit import torus as T
from nielsen_kit.corpus import VALID_MULTISETS, VIOLATING_MULTISETS

negative_chi = st.integers(-12, -1)


def test_interval_examples():
    assert B.surface_index_interval(-2) == (-5, 1)
    assert B.surface_index_interval(-1) == (-3, 1)
    for chi in (0, 2):
        with pytest.raises(B.DomainError):
            B.surface_index_interval(chi)


def test_checker_examples():
    rep = B.check_index_multiset(B.IndexMultiset.of([-3, -2, 1, 1], -2))
    assert rep.verdict and rep.aggregate == -3 and (rep.lefschetz, rep.nielsen) == (-3, 4)
    rep = B.check_index_multiset(B.IndexMultiset.of([-6], -2))
    assert not rep.verdict and "interval" in rep.violated_clauses
    rep = B.check_index_multiset(B.IndexMultiset.of([], -1))
    assert rep.verdict and (rep.lefschetz, rep.nielsen) == (0, 0)


@pytest.mark.parametrize("ms", VALID_MULTISETS, ids=str)
def test_bundled_valid_multisets(ms):
    assert B.check_index_multiset(ms).verdict


@pytest.mark.parametrize("ms,clauses", VIOLATING_MULTISETS, ids=str)
def test_bundled_violations_name_their_clauses(ms, clauses):
    rep = B.check_index_multiset(ms)
    assert not rep.verdict and tuple(rep.violated_clauses) == clauses


def test_checker_refuses_non_surface_data():
    with pytest.raises(B.DomainError):
        B.check_index_multiset(B.IndexMultiset.of([-1, -1], 0))


def test_product_bound_examples():
    assert B.product_bound([5, 5]) == 25
    assert B.product_bound([1, 1, 1]) == 1
    assert B.product_bound([3, 5, 7]) == 105
    for bad in ([], [0, 3]):
        with pytest.raises(B.DomainError):
            B.product_bound(bad)


def test_hyperbolic_bound_examples():
    g2, g3 = B.SurfaceSpec.of_genus(2), B.SurfaceSpec.of_genus(3)
    assert B.hyperbolic_product_bound([B.SurfaceSpec.of_genus(2, 2)]) == 25
    assert B.hyperbolic_product_bound([g2, g3]) == 45
    assert B.hyperbolic_product_bound([g2]) == 5
    with pytest.raises(B.DomainError):
        B.SurfaceSpec(0)
    with pytest.raises(B.DomainError):
        B.SurfaceSpec.of_genus(1)
    with pytest.raises(B.DomainError):
        B.hyperbolic_product_bound([])


def test_surface_json():
    assert B.SurfaceSpec.from_json({"genus": 3, "multiplicity": 2}) == B.SurfaceSpec(-4, 2, 3)
    assert B.SurfaceSpec.from_json({"chi": -1}).chi == -1
    with pytest.raises(B.DomainError):
        B.SurfaceSpec.from_json({"genus": 2, "chi": -4})
    with pytest.raises(B.DomainError):
        B.SurfaceSpec.from_json({})


@given(negative_chi, negative_chi)
def test_interval_monotone(a, b):
    lo, hi = sorted((a, b))
    assert B.surface_index_interval(lo)[0] <= B.surface_index_interval(hi)[0]
    assert B.surface_index_interval(lo)[1] == B.surface_index_interval(hi)[1] == 1


@given(st.lists(st.integers(1, 50), min_size=1, max_size=5), st.randoms())
def test_product_bound_permutation_and_multiplicativity(bs, rnd):
    shuffled = list(bs)
    rnd.shuffle(shuffled)
    assert B.product_bound(bs) == B.product_bound(shuffled)
    k = len(bs) // 2
    if k:
        assert B.product_bound(bs) == B.product_bound(bs[:k]) * B.product_bound(bs[k:])


surfaces = st.lists(st.builds(B.SurfaceSpec, negative_chi, st.integers(1, 3)), min_size=1, max_size=4)


@given(surfaces, surfaces)
def test_hyperbolic_bound_multiplicative(a, b):
    assert B.hyperbolic_product_bound(a + b) == \
        B.hyperbolic_product_bound(a) * B.hyperbolic_product_bound(b)
    assert B.hyperbolic_product_bound(a[::-1]) == B.hyperbolic_product_bound(a)
    # n copies of one surface count like n separate entries
    s = a[0]
    ones = [B.SurfaceSpec(s.chi)] * s.multiplicity
    assert B.hyperbolic_product_bound([s]) == B.hyperbolic_product_bound(ones)


@given(st.lists(st.integers(-12, 3), max_size=10), negative_chi)
def test_passing_multisets_satisfy_ln(indices, chi):
    ms = B.IndexMultiset.of(indices, chi)
    rep = B.check_index_multiset(ms)
    if rep.verdict:
        assert abs(ms.lefschetz - chi) <= ms.nielsen - chi


@given(st.lists(st.integers(-12, 3), max_size=10), negative_chi)
def test_ln_never_fails_alone(indices, chi):
    # upper end 1 plus the aggregate clause imply the L/N inequality
    rep = B.check_index_multiset(B.IndexMultiset.of(indices, chi))
    if rep.aggregate_ok and all(i <= 1 for i in indices):
        assert rep.ln_inequality_ok


@given(st.lists(st.integers(-12, 3), max_size=10), negative_chi)
def test_report_matches_direct_arithmetic(indices, chi):
    rep = B.check_index_multiset(B.IndexMultiset.of(indices, chi))
    assert rep.interval_ok == all(2 * chi - 1 <= i <= 1 for i in indices)
    assert rep.aggregate_ok == (sum(i + 1 for i in indices if i < -1) >= 2 * chi)
    L, N = sum(indices), sum(1 for i in indices if i)
    assert rep.ln_inequality_ok == (abs(L - chi) <= N - chi)


def test_cross_check_on_torus_products():
    mats = [[[2]], [[3]], [[-1]], [[2, 1], [1, 1]], [[0, -1], [1, 0]]]
    obs = []
    for combo in itertools.product(mats, repeat=2):
        rep = T.analyze_product([T.TorusMap.of(A) for A in combo])
        if rep.direct.degenerate:
            continue
        for (_, picks), c in zip(rep.correspondence, rep.direct.classes):
            inds = [rep.factors[i].classes[j].index for i, j in enumerate(picks)]
            obs.append((inds, c.index))
    out = B.cross_check_with_oracle(obs, VALID_MULTISETS)
    assert out["pass"] and out["max_abs_index"] == 1 and out["product_classes"] == len(obs)
    assert B.cross_check_with_oracle([])["pass"]
    assert not B.cross_check_with_oracle([([1, -1], 1)])["pass"]
    # non-surface multisets are skipped, not judged
    assert B.cross_check_with_oracle([], [B.IndexMultiset.of([7], 0)])["surface_multisets"] == 0
    bad = B.cross_check_with_oracle([], [VIOLATING_MULTISETS[0][0]])
    assert not bad["pass"] and bad["surface_failures"] == 1
