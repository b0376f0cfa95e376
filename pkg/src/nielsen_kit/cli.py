"""Command-line entry point: ``nielsen-kit <command> <action> [options]``.

Every command prints one JSON report on stdout and a short summary on
stderr. Exit codes: 0 all checks pass, 1 some check failed, 2 bad input.
"""
from __future__ import annotations

import argparse
import json
import sys

from . import __version__, bounds, groups, homology, smooth, torus
from .exact_linalg import (DimensionError, IntMatrix, cokernel, cyclic_det_identity_check,
                           det_exact, smith_normal_form)
from .verify import SCHEMA_VERSION, run_all


class InputError(Exception):
    pass


INPUT_ERRORS = (InputError, ValueError, KeyError, TypeError, IndexError, OSError,
                json.JSONDecodeError)


def _load(path: str | None):
    try:
        if path is None or path == "-":
            return json.load(sys.stdin)
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as e:
        raise InputError(f"malformed JSON in {path or 'stdin'}: {e}") from None


def _report(command: str, inputs, results, checks=None) -> dict:
    checks = checks or []
    code = 0 if all(c["pass"] for c in checks) else 1
    return {"schema_version": SCHEMA_VERSION, "command": command, "inputs": inputs,
            "results": results, "checks": checks, "exit_code": code}


def _chk(name: str, passed: bool, details=None) -> dict:
    return {"name": name, "pass": bool(passed), "details": details or {}}


# -- linalg -----------------------------------------------------------------

def cmd_linalg(args) -> dict:
    if args.action == "block-det-identity":
        obj = _load(args.blocks or args.input)
        blocks = [IntMatrix.from_json(b) for b in (obj["blocks"] if isinstance(obj, dict) else obj)]
        rep = cyclic_det_identity_check(blocks)
        return _report("linalg block-det-identity", obj,
                       {"lhs": str(rep.lhs), "rhs": str(rep.rhs), "equal": rep.equal},
                       [_chk("det(I - N) == det(I - N_m...N_1)", rep.equal)])
    obj = _load(args.input)
    M = IntMatrix.from_json(obj)
    if args.action == "det":
        if not M.is_square:
            raise DimensionError("det needs a square matrix")
        return _report("linalg det", obj, {"det": str(det_exact(M))})
    snf = smith_normal_form(M)
    res = {"diagonal": [str(d) for d in snf.diagonal], "rank": snf.rank,
           "U": snf.U.to_json(), "V": snf.V.to_json(), "D": snf.D.to_json()}
    ok = snf.U @ M @ snf.V == snf.D
    if M.is_square:
        c = cokernel(M)
        res["cokernel_order"] = str(c.order)
    return _report("linalg snf", obj, res, [_chk("U M V == D", ok)])


# -- groups -----------------------------------------------------------------

def cmd_group(args) -> dict:
    a = args.action
    if a in ("check", "aut", "conj-classes"):
        obj = _load(args.input)
        G = groups.FiniteGroup.from_json(obj)
        if a == "check":
            rep = groups.unfactorizable_equivalence_check(G)
            _, w = groups.is_unfactorizable(G)
            res = {"order": G.order, "center": sorted(groups.center(G)), **rep.to_json()}
            if w is not None:
                res["witness"] = {"H": sorted(w.H), "K": sorted(w.K)}
            return _report("group check", obj, res,
                           [_chk("unfactorizable iff centerless and indecomposable", rep.consistent)])
        if a == "aut":
            auts = groups.automorphisms(G, args.cap)
            return _report("group aut", obj, {"count": len(auts),
                                              "automorphisms": [list(x.images) for x in auts]})
        classes = groups.conjugacy_classes(G)
        ok = sum(map(len, classes)) == G.order and all(G.order % len(c) == 0 for c in classes)
        return _report("group conj-classes", obj, {"count": len(classes), "classes": classes},
                       [_chk("classes partition G with sizes dividing |G|", ok)])
    spec_obj = _load(args.spec)
    spec = groups.ProductGroupSpec.from_json(spec_obj)
    if a == "aut-order-check":
        rep = groups.aut_order_check(spec, args.cap)
        return _report("group aut-order-check", spec_obj, rep.to_json(),
                       [_chk("enumerated |Aut| equals formula", rep.equal)])
    aut_obj = _load(args.aut)
    if "images" in aut_obj:
        phi = groups.GroupAutomorphism(spec.group(), tuple(int(x) for x in aut_obj["images"]))
    else:
        pa_in = _product_aut_from_json(spec, aut_obj)
        phi = groups.compose_product_automorphism(spec, pa_in)
    pa = groups.decompose_product_automorphism(spec, phi)
    back = groups.compose_product_automorphism(spec, pa)
    return _report("group decompose", {"spec": spec_obj, "aut": aut_obj}, pa.to_json(),
                   [_chk("compose(decompose(phi)) == phi", back == phi)])


def _product_aut_from_json(spec, obj) -> groups.ProductAutomorphism:
    sigmas = tuple(tuple(int(x) for x in s) for s in obj["sigmas"])
    comps = []
    for (G, n), blk in zip(spec.factors, obj["components"]):
        comps.append(tuple(groups.GroupAutomorphism(G, tuple(int(x) for x in im)) for im in blk))
    return groups.ProductAutomorphism(sigmas, tuple(comps))


# -- torus / smooth -----------------------------------------------------------

def cmd_torus(args) -> dict:
    obj = _load(args.input)
    if args.action == "analyze":
        s = torus.analyze(torus.TorusMap.from_json(obj))
        hopf = sum(c.index for c in s.classes) == s.lefschetz
        return _report("torus analyze", obj, s.to_json(),
                       [_chk("sum of class indices equals L", hopf)])
    if args.action == "product":
        maps = [torus.TorusMap.from_json(m) for m in obj["factors"]]
        rep = torus.analyze_product(maps)
        return _report("torus product", obj, rep.to_json(),
                       [_chk("L multiplicative", rep.lefschetz_ok),
                        _chk("N multiplicative", rep.nielsen_ok),
                        _chk("class index is the product of factor indices", rep.index_ok)])
    rep = torus.analyze_cyclic(torus.CyclicTorusMap.from_json(obj))
    return _report("torus cyclic", obj, rep.to_json(),
                   [_chk("L equal", rep.lefschetz_equal), _chk("N equal", rep.nielsen_equal),
                    _chk("index multisets equal", rep.multiset_equal),
                    _chk("det(I - N) == det(I - A_m...A_1)", rep.det_identity),
                    _chk("rho is an index-preserving bijection", rep.correspondence_ok)])


def _solver_config(path) -> smooth.SolverConfig:
    return smooth.SolverConfig.from_json(_load(path)) if path else smooth.SolverConfig()


def cmd_smooth(args) -> dict:
    cfg = _solver_config(args.config)
    obj = _load(args.map)
    if args.action == "cyclic":
        f = smooth.CyclicSmoothMap.from_json(obj)
        rep = smooth.cyclic_jacobian_check(f, cfg)
        return _report("smooth cyclic", {"map": obj, "config": cfg.to_json()}, rep,
                       [_chk("block Jacobian signs agree at every rho point", rep["pass"])])
    f = smooth.SmoothTorusMap.from_json(obj)
    search = smooth.find_fixed_points(f, cfg)
    if args.action == "find":
        return _report("smooth find", {"map": obj, "config": cfg.to_json()}, search.to_json(),
                       [_chk("|det(I - A)| transversal fixed points", search.verdict)])
    L = det_exact(IntMatrix.identity(f.dim) - f.linear_part)
    fd = [smooth.jacobian_fd_check(f, p.coordinates) for p in search.points]
    res = {"lefschetz": L, "index_sum": search.index_sum, "points": len(search.points),
           "fd": fd}
    return _report("smooth check", {"map": obj, "config": cfg.to_json()}, res,
                   [_chk("sum of indices equals det(I - A)", search.index_sum == L and search.verdict),
                    _chk("Jacobians match finite differences", all(r["pass"] for r in fd))])


# -- bounds / homology --------------------------------------------------------

def cmd_bounds(args) -> dict:
    a = args.action
    if a == "interval":
        lo, hi = bounds.surface_index_interval(args.chi)
        return _report("bounds interval", {"chi": args.chi}, {"lower": lo, "upper": hi})
    obj = _load(args.input)
    if a == "check":
        rep = bounds.check_index_multiset(bounds.IndexMultiset.from_json(obj))
        return _report("bounds check", obj, rep.to_json(),
                       [_chk(f"clause {c}", False) for c in rep.violated_clauses]
                       or [_chk("all clauses", True)])
    if a == "product":
        vals = obj["bounds"] if isinstance(obj, dict) else obj
        return _report("bounds product", obj, {"bound": bounds.product_bound([int(v) for v in vals])})
    surfaces = [bounds.SurfaceSpec.from_json(s) for s in obj["surfaces"]]
    return _report("bounds hyperbolic-product", obj,
                   {"bound": bounds.hyperbolic_product_bound(surfaces)})


def cmd_homology(args) -> dict:
    cobj = _load(args.complex)
    K = homology.SimplicialComplex.from_json(cobj)
    if args.action == "chi":
        return _report("homology chi", cobj, {"chi": homology.euler_characteristic(K),
                                              "betti": homology.betti_numbers(K)})
    mobj = _load(args.map)
    f = homology.SimplicialMap.from_json(mobj)
    sub = homology.barycentric_subdivision(K) if (args.subdivide or mobj.get("subdivided")) else None
    L = homology.lefschetz_number(K, f, sub)
    H = homology.hopf_trace(K, f, sub)
    return _report("homology lefschetz", {"complex": cobj, "map": mobj},
                   {"lefschetz": L, "hopf_trace": H},
                   [_chk("homology trace equals chain-level trace", L == H)])


def cmd_verify(args) -> dict:
    log = (lambda m: print(m, file=sys.stderr, flush=True))
    report, _ = run_all(quick=args.quick, seed=args.seed, log=log)
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(report, fh, indent=2, sort_keys=True)
            fh.write("\n")
    return report


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="nielsen-kit", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    q = sub.add_parser("linalg", help="determinants, Smith form, block-cyclic identity")
    q.add_argument("action", choices=["snf", "det", "block-det-identity"])
    q.add_argument("--input", help="matrix JSON (default stdin)")
    q.add_argument("--blocks", help="list of block matrices")
    q.set_defaults(fn=cmd_linalg)

    q = sub.add_parser("group", help="finite groups and product automorphisms")
    q.add_argument("action", choices=["check", "aut", "decompose", "conj-classes", "aut-order-check"])
    q.add_argument("--input", help="group JSON")
    q.add_argument("--spec", help="product spec JSON")
    q.add_argument("--aut", help="automorphism JSON for decompose")
    q.add_argument("--cap", type=int, default=None, help="size cap for enumeration")
    q.set_defaults(fn=cmd_group)

    q = sub.add_parser("torus", help="exact Nielsen theory of linear torus maps")
    q.add_argument("action", choices=["analyze", "product", "cyclic"])
    q.add_argument("--input")
    q.set_defaults(fn=cmd_torus)

    q = sub.add_parser("smooth", help="numerical fixed points of perturbed torus maps")
    q.add_argument("action", choices=["find", "check", "cyclic"])
    q.add_argument("--map", "--input", dest="map")
    q.add_argument("--config", help="solver config JSON")
    q.set_defaults(fn=cmd_smooth)

    q = sub.add_parser("bounds", help="surface index bounds and product bounds")
    q.add_argument("action", choices=["interval", "check", "product", "hyperbolic-product"])
    q.add_argument("--input")
    q.add_argument("--chi", type=int)
    q.set_defaults(fn=cmd_bounds)

    q = sub.add_parser("homology", help="Lefschetz numbers of simplicial maps")
    q.add_argument("action", choices=["lefschetz", "chi"])
    q.add_argument("--complex", required=True)
    q.add_argument("--map")
    q.add_argument("--subdivide", action="store_true",
                   help="the map is defined on the barycentric subdivision")
    q.set_defaults(fn=cmd_homology)

    q = sub.add_parser("verify-all", help="run the full acceptance sweep")
    q.add_argument("--quick", action="store_true", help="strided sweeps, under 30 s")
    q.add_argument("--json", help="also write the report to this file")
    q.add_argument("--seed", type=int, default=0)
    q.set_defaults(fn=cmd_verify)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "cap", "absent") is None:
        args.cap = groups.DEFAULT_PRODUCT_CAP if args.action == "aut-order-check" else groups.DEFAULT_AUT_CAP
    if args.command == "bounds" and args.action == "interval" and args.chi is None:
        parser.error("bounds interval needs --chi")
    if args.command == "homology" and args.action == "lefschetz" and not args.map:
        parser.error("homology lefschetz needs --map")
    try:
        report = args.fn(args)
    except INPUT_ERRORS as e:
        msg = str(e) if not isinstance(e, KeyError) else f"missing field {e}"
        report = {"schema_version": SCHEMA_VERSION, "command": args.command,
                  "error": f"{type(e).__name__}: {msg}", "exit_code": 2}
        print(json.dumps(report, sort_keys=True))
        print(f"input error: {msg}", file=sys.stderr)
        return 2
    print(json.dumps(report, sort_keys=True))
    failed = [c["name"] for c in report.get("checks", []) if not c["pass"]]
    status = "ok" if not failed else "FAILED: " + ", ".join(failed)
    print(f"{report['command']}: {status}", file=sys.stderr)
    return report["exit_code"]


if __name__ == "__main__":
    sys.exit(main())
