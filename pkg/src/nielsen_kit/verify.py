"""The acceptance sweep behind ``nielsen-kit verify-all``.

Each criterion returns a check dict ``{"id", "name", "pass", "details"}``.
Wall-clock times are returned separately so reports stay byte-identical
between runs; only the within-limit verdict goes into the report.
"""
from __future__ import annotations

import random
import time

from . import _backend, corpus, homology, torus
from .bounds import SurfaceSpec, check_index_multiset, hyperbolic_product_bound
from .exact_linalg import IntMatrix, cyclic_det_identity_check
from .groups import (automorphisms, aut_order_check, compose_product_automorphism,
                     decompose_product_automorphism, unfactorizable_equivalence_check)
from .smooth import (SolverConfig, cyclic_jacobian_check, find_fixed_points, jacobian_fd_check)

SCHEMA_VERSION = 1

LIMITS = {1: 10.0, 2: 60.0, 9: 10.0}
TOTAL_LIMIT = 300.0
QUICK_LIMIT = 30.0


def _check(cid: int, name: str, passed: bool, details: dict) -> dict:
    return {"id": cid, "name": name, "pass": bool(passed), "details": details}


def random_block_tuples(count: int, seed: int, max_k: int = 4, max_m: int = 5, bound: int = 9):
    rng = random.Random(seed)
    out = []
    for _ in range(count):
        k = rng.randint(1, max_k)
        m = rng.randint(1, max_m)
        out.append([IntMatrix.from_rows([[rng.randint(-bound, bound) for _ in range(k)]
                                         for _ in range(k)]) for _ in range(m)])
    return out


def criterion_1(seed: int = 0, count: int = 1000) -> dict:
    failures = []
    for i, blocks in enumerate(random_block_tuples(count, seed)):
        rep = cyclic_det_identity_check(blocks)
        if not rep.equal:
            failures.append(i)
    return _check(1, "block determinant identity", not failures,
                  {"tuples": count, "seed": seed, "failures": len(failures),
                   "failing_tuples": failures[:16]})


def criterion_2() -> dict:
    specs = corpus.aut_corpus()
    s3sq = specs[0]
    P = s3sq.group()
    auts = automorphisms(P, cap=P.order)
    roundtrip_fail = 0
    for phi in auts:
        pa = decompose_product_automorphism(s3sq, phi)
        if compose_product_automorphism(s3sq, pa) != phi:
            roundtrip_fail += 1
    orders = []
    for spec in specs:
        rep = aut_order_check(spec)
        orders.append({"spec": "x".join(f"{G.name}^{n}" if n > 1 else G.name
                                         for G, n in spec.factors), **rep.to_json()})
    ok = len(auts) == 72 and roundtrip_fail == 0 and all(o["equal"] for o in orders)
    return _check(2, "product automorphism decomposition", ok,
                  {"s3_squared_automorphisms": len(auts), "roundtrip_failures": roundtrip_fail,
                   "aut_orders": orders})


def criterion_3() -> dict:
    rows = []
    for G in corpus.group_corpus():
        rep = unfactorizable_equivalence_check(G)
        rows.append({"group": G.name, "order": G.order, **rep.to_json()})
    bad = [r["group"] for r in rows if not r["consistent"]]
    return _check(3, "unfactorizable iff centerless and indecomposable", not bad,
                  {"groups": len(rows), "max_order": max(r["order"] for r in rows),
                   "discrepancies": bad, "table": rows})


def _sweep_details(results) -> dict:
    return {"patterns": [r.to_json() for r in results],
            "checked": sum(r.checked for r in results),
            "failures": sum(r.failures for r in results),
            "exhaustive_checked": sum(r.checked for r in results if r.exhaustive)}


def criterion_4(quick: bool = False) -> dict:
    examples = [
        ([[[2, 1], [1, 1]], [[2, 1], [1, 0]]], 2, 2),
        ([[[2]], [[3]], [[4]]], -6, 6),
        ([[[2, 1], [1, 1]], [[1, 0], [0, 1]]], 0, 0),
    ]
    ex_ok = []
    for mats, L, N in examples:
        rep = torus.analyze_product([torus.TorusMap.of(a) for a in mats])
        ex_ok.append(rep.passed and rep.direct.lefschetz == L and rep.direct.nielsen == N)
    results = torus.product_sweep(quick=quick)
    details = _sweep_details(results)
    details["examples_ok"] = ex_ok
    ok = all(ex_ok) and all(r.passed for r in results)
    return _check(4, "product formulas for L, N and class indices", ok, details)


def criterion_5(quick: bool = False, cfg: SolverConfig | None = None) -> dict:
    examples = [
        ([[[1, 1], [0, 1]], [[1, 0], [1, 1]]], -1, 1),
        ([[[2]], [[2]], [[2]]], -7, 7),
        ([[[2, 1], [1, 0]], [[1, 0], [0, 1]]], -2, 2),
    ]
    ex_ok = []
    for mats, L, N in examples:
        rep = torus.analyze_cyclic(torus.CyclicTorusMap.of(mats))
        ex_ok.append(rep.passed and rep.cyclic.lefschetz == L and rep.cyclic.nielsen == N)
    results = torus.cyclic_sweep(quick=quick)
    details = _sweep_details(results)
    details["examples_ok"] = ex_ok
    smooth_rows = []
    for f in corpus.cyclic_smooth_corpus():
        rep = cyclic_jacobian_check(f, cfg)
        smooth_rows.append({"m": f.m, "dim": f.dim, "points": rep["found"],
                            "expected": rep["expected"], "pass": rep["pass"]})
    details["smooth_block_jacobian"] = smooth_rows
    ok = all(ex_ok) and all(r.passed for r in results) and all(r["pass"] for r in smooth_rows)
    return _check(5, "cyclic reduction and rho correspondence", ok, details)


def criterion_6(cfg: SolverConfig | None = None) -> dict:
    cfg = cfg or SolverConfig()
    rows = []
    for f in corpus.smooth_corpus():
        search = find_fixed_points(f, cfg)
        L = torus.analyze(torus.TorusMap(f.linear_part))
        fd = [jacobian_fd_check(f, p.coordinates) for p in search.points]
        labels_match = sorted(p.class_label for p in search.points) == sorted(
            c.label for c in L.classes)
        rows.append({
            "dim": f.dim, "linear_part": f.linear_part.to_lists(), "modes": len(f.perturbation),
            "lefschetz": L.lefschetz, "index_sum": search.index_sum,
            "points": len(search.points), "transversal": search.transversal,
            "labels_match_oracle": labels_match,
            "fd_max_relative": max(r["relative_deviation"] for r in fd) if fd else 0.0,
            "pass": (search.index_sum == L.lefschetz and search.verdict and labels_match
                     and all(r["pass"] for r in fd)),
        })
    for r in rows:
        r["fd_max_relative"] = float(f"{r['fd_max_relative']:.3e}")
    ok = len(rows) >= 20 and all(r["pass"] for r in rows)
    return _check(6, "Lefschetz-Hopf sums and Jacobian checks on smooth maps", ok,
                  {"maps": len(rows), "rows": rows})


def criterion_7() -> dict:
    valid = []
    for ms in corpus.VALID_MULTISETS:
        valid.append({**ms.to_json(), "verdict": check_index_multiset(ms).verdict})
    bad = []
    for ms, clauses in corpus.VIOLATING_MULTISETS:
        rep = check_index_multiset(ms)
        bad.append({**ms.to_json(), "expected": list(clauses), "named": rep.violated_clauses,
                    "rejected": not rep.verdict})
    ok = all(v["verdict"] for v in valid) and all(
        b["rejected"] and b["named"] == b["expected"] for b in bad)
    return _check(7, "surface index bound checker", ok, {"valid": valid, "violating": bad})


def criterion_8() -> dict:
    a = hyperbolic_product_bound([SurfaceSpec.of_genus(2, 2)])
    b = hyperbolic_product_bound([SurfaceSpec.of_genus(2), SurfaceSpec.of_genus(3)])
    return _check(8, "hyperbolic product bound", a == 25 and b == 45,
                  {"genus2_squared": a, "genus2_times_genus3": b})


def criterion_9() -> dict:
    rows = []
    for name, K in [("point", homology.point()), ("circle", homology.circle(3)),
                    ("torus", homology.grid_torus(3, 3)), ("genus2", homology.genus_two_surface())]:
        ident = homology.SimplicialMap(tuple(range(K.vertices)))
        L = homology.lefschetz_number(K, ident)
        chi = homology.euler_characteristic(K)
        rows.append({"complex": name, "simplices": len(K.simplices), "lefschetz": int(L),
                     "chi": chi, "pass": L == chi})
    K, sub, f = homology.degree_two_circle_map()
    L2 = homology.lefschetz_number(K, f, sub)
    H2 = homology.hopf_trace(K, f, sub)
    deg2 = {"lefschetz": int(L2), "hopf_trace": int(H2), "pass": L2 == -1 == H2}
    ok = all(r["pass"] for r in rows) and deg2["pass"]
    return _check(9, "Lefschetz numbers from homology", ok, {"identity": rows, "degree_two": deg2})


def run_all(quick: bool = False, seed: int = 0, log=None) -> tuple[dict, dict]:
    """Run criteria 1-9; returns (report, timings in seconds)."""
    def note(msg):
        if log:
            log(msg)

    steps = [
        (1, lambda: criterion_1(seed)),
        (2, criterion_2),
        (3, criterion_3),
        (4, lambda: criterion_4(quick)),
        (5, lambda: criterion_5(quick)),
        (6, criterion_6),
        (7, criterion_7),
        (8, criterion_8),
        (9, criterion_9),
    ]
    checks, times = [], {}
    start = time.perf_counter()
    for cid, fn in steps:
        t0 = time.perf_counter()
        chk = fn()
        dt = time.perf_counter() - t0
        times[cid] = dt
        if cid in LIMITS:
            chk["details"]["runtime_limit_s"] = LIMITS[cid]
            chk["details"]["within_limit"] = dt < LIMITS[cid]
            chk["pass"] = chk["pass"] and dt < LIMITS[cid]
        checks.append(chk)
        note(f"[{'PASS' if chk['pass'] else 'FAIL'}] {cid}. {chk['name']} ({dt:.1f}s)")
    total = time.perf_counter() - start
    times["total"] = total
    limit = QUICK_LIMIT if quick else TOTAL_LIMIT
    checks.append(_check(10, "verify-all within time budget", total < limit,
                         {"limit_s": limit, "within_limit": total < limit}))
    note(f"[{'PASS' if total < limit else 'FAIL'}] 10. total {total:.1f}s (limit {limit:.0f}s)")
    passed = all(c["pass"] for c in checks)
    report = {
        "schema_version": SCHEMA_VERSION,
        "command": "verify-all",
        "inputs": {"quick": quick, "seed": seed},
        "results": {"compiled_kernels": _backend.COMPILED, "all_pass": passed},
        "checks": checks,
        "exit_code": 0 if passed else 1,
    }
    return report, times
