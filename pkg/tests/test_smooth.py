import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from nielsen_kit import _backend
from nielsen_kit import smooth as S
from nielsen_kit import torus as T
from nielsen_kit.corpus import cyclic_smooth_corpus, smooth_corpus
from oracles import torus_classes

CAT = [[2, 1], [1, 1]]
TWO = [[2, 1], [1, 0]]
SMALL = S.SolverConfig(grid=8)


def test_cat_map_single_fixed_point():
    res = S.find_fixed_points(S.SmoothTorusMap.of(CAT), SMALL)
    assert res.verdict and len(res.points) == 1
    p = res.points[0]
    assert np.allclose(p.coordinates, 0.0, atol=1e-12) and p.index == -1
    assert p.class_label == (0, 0)


def test_two_fixed_points_under_small_perturbation():
    f = S.SmoothTorusMap.of(TWO, [(0, (1, 0), 1e-3, 0.0), (1, (0, 1), 0.0, 1e-3)])
    res = S.find_fixed_points(f, SMALL)
    assert res.verdict and [p.index for p in res.points] == [-1, -1]
    assert res.index_sum == -2
    assert len({p.class_label for p in res.points}) == 2


def test_rotation_has_two_positive_points():
    rep = S.lefschetz_hopf_check(S.SmoothTorusMap.of([[0, -1], [1, 0]]), SMALL)
    assert rep["pass"] and rep["lefschetz"] == 2 and rep["points"] == 2


def test_degenerate_and_oversized_perturbation_rejected():
    with pytest.raises(S.PreconditionError):
        S.find_fixed_points(S.SmoothTorusMap.of([[1, 0], [0, 1]], [(0, (1, 0), 1e-3, 0.0)]))
    with pytest.raises(S.PreconditionError):
        S.find_fixed_points(S.SmoothTorusMap.of(CAT, [(0, (1, 0), 0.2, 0.0)]))


def test_label_ambiguous_off_fixed_points():
    with pytest.raises(S.LabelAmbiguousError):
        S.class_label(S.SmoothTorusMap.of(CAT), [0.3, 0.1])


@pytest.mark.parametrize("f", smooth_corpus(), ids=lambda f: str(f.linear_part.to_lists()))
def test_corpus_indices_and_labels_match_exact_oracle(f):
    res = S.find_fixed_points(f)
    exact = T.analyze(T.TorusMap(f.linear_part))
    assert res.verdict and res.count_ok
    assert res.index_sum == exact.lefschetz
    assert sorted(p.index for p in res.points) == sorted(exact.index_multiset)
    assert {p.class_label for p in res.points} == {c.label for c in exact.classes}
    assert all(p.residual <= 1e-9 for p in res.points)


@pytest.mark.parametrize("f", smooth_corpus()[::3], ids=lambda f: str(f.linear_part.to_lists()))
def test_labels_continue_from_unperturbed_points(f):
    # track each perturbed point back to the linear map's nearest fixed point
    lin = S.SmoothTorusMap(f.linear_part)
    base = S.find_fixed_points(lin, SMALL).points
    for p in S.find_fixed_points(f, SMALL).points:
        q = min(base, key=lambda b: S._torus_dist(np.array(b.coordinates), np.array(p.coordinates)))
        assert q.class_label == p.class_label


def test_unperturbed_points_are_the_brute_force_points():
    for A in (TWO, [[0, -1], [1, 0]], [[3, 1], [1, 2]]):
        pts = sorted(tuple(float(v) for v in x) for x, _ in
                     (cl[0] for cl in torus_classes(A)))
        found = [p.coordinates for p in S.find_fixed_points(S.SmoothTorusMap.of(A), SMALL).points]
        assert np.allclose(sorted(found), pts, atol=1e-10)


@pytest.mark.parametrize("f", smooth_corpus(), ids=lambda f: str(f.linear_part.to_lists()))
def test_corpus_jacobians_match_finite_differences(f):
    rng = np.random.default_rng(0)
    for x in rng.random((5, f.dim)):
        assert S.jacobian_fd_check(f, x)["pass"]


def test_fd_examples():
    x = [0.3, 0.7]
    rep = S.jacobian_fd_check(S.SmoothTorusMap.of(CAT), x)
    assert rep["max_abs_deviation"] < 1e-9
    rep = S.jacobian_fd_check(S.SmoothTorusMap.of(CAT, [(0, (1, 0), 0.01, 0.0)]), x)
    assert rep["max_abs_deviation"] <= 1e-6
    rep = S.jacobian_fd_check(S.SmoothTorusMap.of(CAT, [(1, (5, 0), 0.01, 0.02)]), x, step=1e-6)
    assert rep["relative_deviation"] <= 1e-5


@given(st.lists(st.floats(-0.02, 0.02), min_size=4, max_size=4), st.integers(0, 3))
def test_guard_keeps_fixed_point_count(coefs, shift):
    A = [[2, 1], [1, 0]] if shift % 2 else [[3, 1], [1, 2]]
    f = S.SmoothTorusMap.of(A, [(0, (1, 0), coefs[0], coefs[1]), (1, (shift, 1), coefs[2], coefs[3])])
    cfg = S.SolverConfig(grid=6)
    if not f.guard()["ok"]:
        with pytest.raises(S.PreconditionError):
            S.find_fixed_points(f, cfg)
        return
    res = S.find_fixed_points(f, cfg)
    assert res.verdict and res.index_sum == T.analyze(T.TorusMap(f.linear_part)).lefschetz


def test_search_is_deterministic():
    f = smooth_corpus()[10]
    a = json.dumps(S.find_fixed_points(f).to_json(), sort_keys=True)
    b = json.dumps(S.find_fixed_points(f).to_json(), sort_keys=True)
    assert a == b


def test_compiled_newton_matches_fallback():
    f = smooth_corpus()[15]
    seeds = np.random.default_rng(1).random((200, 2))
    targets = np.zeros((200, 2))
    a = _backend.kernels.newton_batch(*f.arrays(), seeds, targets, 1e-12, 60)
    b = _backend.fallback.newton_vectorized(f.evaluate, seeds, targets, 1e-12, 60)
    assert np.array_equal(a[1], b[1])
    ok = a[1] == 1
    assert np.allclose(a[0][ok], b[0][ok], atol=1e-10)


def test_config_json():
    cfg = S.SolverConfig.from_json({"grid": 8, "tol": 1e-11})
    assert S.SolverConfig.from_json(cfg.to_json()) == cfg
    with pytest.raises(ValueError):
        S.SolverConfig.from_json({"grid": 8, "bogus": 1})
    f = smooth_corpus()[8]
    assert S.SmoothTorusMap.from_json(json.loads(json.dumps(f.to_json()))) == f


def test_composed_map_matches_exact_composition():
    f = cyclic_smooth_corpus()[2]
    C = f.composed()
    x = np.array([0.2, 0.6])
    F1, J1 = f.components[0].lift(x)
    F2, J2 = f.components[1].lift(F1)
    F, J = C.lift(x)
    assert np.allclose(F, F2) and np.allclose(J, J2 @ J1)
    assert S.jacobian_fd_check(C, x)["pass"]


@pytest.mark.parametrize("f", cyclic_smooth_corpus(), ids=lambda f: f"m{f.m}d{f.dim}")
def test_cyclic_corpus_block_identity(f):
    rep = S.cyclic_jacobian_check(f)
    assert rep["pass"] and rep["found"] == rep["expected"]
    exact = T.analyze(T.TorusMap(f.composed().linear_part))
    assert sorted(r["cyclic_index"] for r in rep["points"]) == sorted(exact.index_multiset)


def test_cyclic_unipotent_example():
    f = cyclic_smooth_corpus()[0]
    rep = S.cyclic_jacobian_check(f)
    assert len(rep["points"]) == 1
    r = rep["points"][0]
    assert r["composed_index"] == r["cyclic_index"] == -1
    assert abs(r["det_cyclic"] + 1) < 1e-12 and abs(r["det_composed"] + 1) < 1e-12


def test_cyclic_map_searched_directly():
    # solve on the whole mn-torus and compare with the composed map's count
    for f in cyclic_smooth_corpus()[:3]:
        cfg = S.SolverConfig(grid=4, enforce_guard=False)
        whole = S.find_fixed_points(f.as_smooth_map(), cfg)
        comp = S.find_fixed_points(f.composed())
        assert whole.verdict and len(whole.points) == len(comp.points)
        assert sorted(p.index for p in whole.points) == sorted(p.index for p in comp.points)


def test_random_block_jacobians_m3():
    rng = np.random.default_rng(2024)
    for _ in range(200):
        jacs = rng.normal(size=(3, 2, 2))
        rep = S.block_jacobian_sign_check(jacs)
        assert rep["sign_equal"] and rep["values_equal"]


@given(st.integers(1, 3), st.integers(1, 4), st.integers(0, 2**32 - 1))
def test_block_identity_property(n, m, seed):
    jacs = np.random.default_rng(seed).uniform(-2, 2, size=(m, n, n))
    rep = S.block_jacobian_sign_check(jacs)
    assert rep["values_equal"]
    if not rep["inconclusive"]:
        assert rep["sign_equal"]


def test_zero_jacobian_gives_unit_determinants():
    rep = S.block_jacobian_sign_check([np.zeros((2, 2)), np.eye(2) * 3, np.zeros((2, 2))])
    assert rep["det_cyclic"] == rep["det_composed"] == 1.0 and rep["sign_equal"]
