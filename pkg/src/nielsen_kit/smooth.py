"""Fixed points of smooth perturbed torus maps, found numerically.

The lift is F(x) = A x + p(x) with p a trigonometric polynomial of period 1.
Fixed points on the torus are the solutions of F(x) - x = w for integer w;
Newton is run from a seed grid for every w in a box large enough to contain
all of them. Indices come from sgn det(I - DF) and labels from rounding
F(x) - x and reducing it modulo (I - A)Z^n.

Guard: if Lip(p) < 1/2 sigma_min(I - A) then x -> (A - I)x + p(x) is a
homeomorphism of R^n whose Jacobian never changes sign, so the fixed points
and their indices are exactly those of the linear map.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from . import _backend
from .exact_linalg import (IntMatrix, as_int_matrix, block_cyclic, cokernel, det_exact,
                           float_det, product_chain)


class PreconditionError(ValueError):
    pass


class LabelAmbiguousError(ValueError):
    pass


@dataclass(frozen=True)
class SolverConfig:
    grid: int = 32
    tol: float = 1e-12
    dedupe_radius: float = 1e-8
    transversality: float = 1e-8
    label_tol: float = 1e-6
    maxiter: int = 60
    guard_fraction: float = 0.5
    enforce_guard: bool = True

    @classmethod
    def from_json(cls, obj: dict) -> "SolverConfig":
        known = set(cls.__dataclass_fields__)
        extra = set(obj) - known
        if extra:
            raise ValueError(f"unknown solver config keys: {sorted(extra)}")
        return cls(**obj)

    def to_json(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class Mode:
    """One term s*sin(2 pi k.x) + c*cos(2 pi k.x) added to output coordinate."""

    coordinate: int
    k: tuple[int, ...]
    sin: float = 0.0
    cos: float = 0.0

    @classmethod
    def from_json(cls, obj: dict) -> "Mode":
        return cls(int(obj["coordinate"]), tuple(int(v) for v in obj["k"]),
                   float(obj.get("sin", 0.0)), float(obj.get("cos", 0.0)))

    def to_json(self) -> dict:
        return {"coordinate": self.coordinate, "k": list(self.k), "sin": self.sin, "cos": self.cos}


def _sigma_min(M) -> float:
    return float(np.linalg.svd(np.asarray(M, dtype=float), compute_uv=False)[-1])


def _op_norm(M) -> float:
    return float(np.linalg.norm(np.asarray(M, dtype=float), 2))


class _LiftMixin:
    linear_part: IntMatrix

    @property
    def dim(self) -> int:
        return self.linear_part.rows

    def evaluate(self, X):
        raise NotImplementedError

    def lift(self, x):
        F, J = self.evaluate(np.asarray(x, dtype=float)[None, :])
        return F[0], J[0]

    def guard(self, fraction: float = 0.5) -> dict:
        n = self.dim
        M = np.eye(n) - np.array(self.linear_part.to_lists(), dtype=float)
        smin = _sigma_min(M)
        lip = self.periodic_lipschitz()
        return {"lipschitz": lip, "sigma_min": smin, "limit": fraction * smin,
                "ok": lip < fraction * smin}


@dataclass(frozen=True)
class SmoothTorusMap(_LiftMixin):
    linear_part: IntMatrix
    perturbation: tuple[Mode, ...] = ()

    def __post_init__(self):
        n = self.linear_part.rows
        if not self.linear_part.is_square:
            raise ValueError("linear part must be square")
        for md in self.perturbation:
            if not 0 <= md.coordinate < n or len(md.k) != n:
                raise ValueError(f"mode {md} does not fit dimension {n}")

    @classmethod
    def of(cls, A, modes: Sequence = ()) -> "SmoothTorusMap":
        ms = tuple(m if isinstance(m, Mode) else Mode(m[0], tuple(m[1]), m[2], m[3]) for m in modes)
        return cls(as_int_matrix(A), ms)

    @classmethod
    def from_json(cls, obj: dict) -> "SmoothTorusMap":
        A = IntMatrix.from_json(obj["linear_part"])
        if "dim" in obj and int(obj["dim"]) != A.rows:
            raise ValueError("dim does not match linear_part")
        return cls(A, tuple(Mode.from_json(m) for m in obj.get("perturbation", [])))

    def to_json(self) -> dict:
        return {"dim": self.dim, "linear_part": self.linear_part.to_json(),
                "perturbation": [m.to_json() for m in self.perturbation]}

    def arrays(self):
        n = self.dim
        M = len(self.perturbation)
        A = np.array(self.linear_part.to_lists(), dtype=float).reshape(n, n)
        mcoord = np.array([m.coordinate for m in self.perturbation], dtype=np.int64)
        mk = np.array([m.k for m in self.perturbation], dtype=float).reshape(M, n)
        msin = np.array([m.sin for m in self.perturbation], dtype=float)
        mcos = np.array([m.cos for m in self.perturbation], dtype=float)
        return A, mcoord, mk, msin, mcos

    def evaluate(self, X):
        return _backend.fallback.trig_eval(*self.arrays(), np.atleast_2d(X))

    def periodic_lipschitz(self) -> float:
        """Bound on the operator norm of Dp: 2 pi sum (|s| + |c|) |k|_1."""
        return 2 * math.pi * sum((abs(m.sin) + abs(m.cos)) * sum(abs(v) for v in m.k)
                                 for m in self.perturbation)

    def periodic_sup(self) -> float:
        """Bound on max_i |p_i(x)|."""
        per = [0.0] * self.dim
        for m in self.perturbation:
            per[m.coordinate] += abs(m.sin) + abs(m.cos)
        return max(per, default=0.0)


@dataclass(frozen=True)
class ComposedTorusMap(_LiftMixin):
    """f_m o ... o f_1 for smooth maps of one torus; lift is the composed lift."""

    maps: tuple[SmoothTorusMap, ...]

    @property
    def linear_part(self) -> IntMatrix:
        return product_chain([f.linear_part for f in self.maps])

    def evaluate(self, X):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        S, n = X.shape
        J = np.broadcast_to(np.eye(n), (S, n, n)).copy()
        F = X
        for f in self.maps:
            F, Jf = f.evaluate(F)
            J = Jf @ J
        return F, J

    def periodic_lipschitz(self) -> float:
        # (F2 o F1) - A2 A1 x = A2 p1 + p2(F1); bound it one factor at a time
        lip = 0.0
        A = None
        for f in self.maps:
            if A is None:
                lip = f.periodic_lipschitz()
                A = np.array(f.linear_part.to_lists(), dtype=float)
                continue
            Af = np.array(f.linear_part.to_lists(), dtype=float)
            lip = _op_norm(Af) * lip + f.periodic_lipschitz() * (_op_norm(A) + lip)
            A = Af @ A
        return lip

    def periodic_sup(self) -> float:
        sup = 0.0
        for f in self.maps:
            Af = np.abs(np.array(f.linear_part.to_lists(), dtype=float))
            sup = float(np.max(Af.sum(axis=1))) * sup + f.periodic_sup()
        return sup


@dataclass(frozen=True)
class FixedPointNumeric:
    coordinates: tuple[float, ...]
    jacobian: tuple[tuple[float, ...], ...]
    det: float
    index: int
    class_label: tuple[int, ...]
    residual: float
    transversal: bool

    def to_json(self) -> dict:
        return {"coordinates": list(self.coordinates),
                "jacobian": [list(r) for r in self.jacobian],
                "det_I_minus_Df": self.det, "index": self.index,
                "class_label": list(self.class_label), "residual": self.residual,
                "transversal": self.transversal}


@dataclass
class FixedPointSearch:
    points: list[FixedPointNumeric]
    expected: int
    seeds: int
    unconverged: int
    singular: int
    merged: int
    guard: dict = field(default_factory=dict)

    @property
    def transversal(self) -> bool:
        return all(p.transversal for p in self.points)

    @property
    def count_ok(self) -> bool:
        return len(self.points) == self.expected

    @property
    def verdict(self) -> bool:
        return self.transversal and self.count_ok

    @property
    def index_sum(self) -> int:
        return sum(p.index for p in self.points)

    def to_json(self) -> dict:
        return {"points": [p.to_json() for p in self.points], "expected": self.expected,
                "found": len(self.points), "seeds": self.seeds,
                "unconverged_seeds": self.unconverged, "singular_seeds": self.singular,
                "merged": self.merged, "guard": self.guard, "index_sum": self.index_sum,
                "transversal": self.transversal, "verdict": self.verdict}


def _torus_dist(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    d = np.abs(a - b) % 1.0
    return np.max(np.minimum(d, 1.0 - d), axis=-1)


def _wrap(X: np.ndarray) -> np.ndarray:
    Y = X - np.floor(X)
    Y[Y >= 1.0] = 0.0
    return Y


def _offset_box(f, cfg: SolverConfig):
    """Integer w with F(x) - x = w possible for x in [0,1)^n."""
    n = f.dim
    M = np.array(f.linear_part.to_lists(), dtype=float) - np.eye(n)
    pad = f.periodic_sup() + 1e-9
    lo = np.minimum(M, 0).sum(axis=1) - pad
    hi = np.maximum(M, 0).sum(axis=1) + pad
    ranges = [np.arange(math.floor(a), math.ceil(b) + 1) for a, b in zip(lo, hi)]
    grids = np.meshgrid(*ranges, indexing="ij")
    return np.stack([g.ravel() for g in grids], axis=1).astype(float)


def _seed_grid(n: int, g: int) -> np.ndarray:
    ticks = (np.arange(g) + 0.5) / g
    grids = np.meshgrid(*([ticks] * n), indexing="ij")
    return np.stack([x.ravel() for x in grids], axis=1)


def _newton(f, seeds, targets, cfg: SolverConfig):
    if isinstance(f, SmoothTorusMap):
        return _backend.kernels.newton_batch(*f.arrays(), seeds, targets, cfg.tol, cfg.maxiter)
    return _backend.fallback.newton_vectorized(f.evaluate, seeds, targets, cfg.tol, cfg.maxiter)


def class_label(f, point, cfg: SolverConfig | None = None, cok=None) -> tuple[int, ...]:
    """Canonical coset of F(x) - x in Z^n / (I - A)Z^n."""
    cfg = cfg or SolverConfig()
    F, _ = f.lift(point)
    v = F - np.asarray(point, dtype=float)
    r = np.rint(v)
    if np.max(np.abs(v - r), initial=0.0) > cfg.label_tol:
        raise LabelAmbiguousError(f"F(x) - x = {v.tolist()} is not within {cfg.label_tol} of Z^n")
    if cok is None:
        cok = cokernel(IntMatrix.identity(f.dim) - f.linear_part)
    return cok.reduce([int(x) for x in r])


def find_fixed_points(f, cfg: SolverConfig | None = None) -> FixedPointSearch:
    cfg = cfg or SolverConfig()
    n = f.dim
    M = IntMatrix.identity(n) - f.linear_part
    det = det_exact(M)
    if det == 0:
        raise PreconditionError("det(I - A) = 0: the linear part is degenerate")
    guard = f.guard(cfg.guard_fraction)
    if cfg.enforce_guard and not guard["ok"]:
        raise PreconditionError(
            f"perturbation too large: Lipschitz bound {guard['lipschitz']:.3g} is not below "
            f"{cfg.guard_fraction} * sigma_min(I - A) = {guard['limit']:.3g}")
    cok = cokernel(M)

    offsets = _offset_box(f, cfg)
    base = _seed_grid(n, cfg.grid)
    seeds = np.tile(base, (len(offsets), 1))
    targets = np.repeat(offsets, len(base), axis=0)
    X, status, resid = _newton(f, seeds, targets, cfg)
    ok = status == 1
    unconverged = int(np.sum(status == 0))
    singular = int(np.sum(status == 2))

    P = _wrap(X[ok])
    R = resid[ok]
    # deterministic reduction: canonical coordinate order, then greedy clustering
    order = np.lexsort(P.T[::-1])
    P, R = P[order], R[order]
    reps: list[int] = []
    alive = np.ones(len(P), dtype=bool)
    merged = 0
    for i in range(len(P)):
        if not alive[i]:
            continue
        near = _torus_dist(P, P[i]) <= cfg.dedupe_radius
        near &= alive
        idx = np.flatnonzero(near)
        best = idx[np.argmin(R[idx])]
        reps.append(int(best))
        merged += len(idx) - 1
        alive[idx] = False

    points = []
    for i in reps:
        x = P[i]
        F, J = f.lift(x)
        D = np.eye(n) - J
        dv = float_det(D)
        v = F - x
        res = float(np.max(np.abs(v - np.rint(v)), initial=0.0))
        points.append(FixedPointNumeric(
            tuple(float(t) for t in x), tuple(tuple(float(t) for t in row) for row in J),
            dv, 1 if dv > 0 else -1, class_label(f, x, cfg, cok), res,
            abs(dv) >= cfg.transversality))
    points.sort(key=lambda p: p.coordinates)
    return FixedPointSearch(points, abs(det), len(seeds), unconverged, singular, merged, guard)


# -- checks -----------------------------------------------------------------

def lefschetz_hopf_check(f, cfg: SolverConfig | None = None) -> dict:
    search = find_fixed_points(f, cfg)
    L = det_exact(IntMatrix.identity(f.dim) - f.linear_part)
    total = search.index_sum
    passed = total == L and search.verdict
    return {"lefschetz": L, "index_sum": total, "points": len(search.points),
            "expected": search.expected, "transversal": search.transversal, "pass": passed,
            "failing_points": [] if passed else [p.to_json() for p in search.points]}


def jacobian_fd_check(f, point, step: float = 1e-5, tol: float = 1e-5) -> dict:
    """Analytic Jacobian against central differences; deviation relative to max(1, |Df|)."""
    x = np.asarray(point, dtype=float)
    n = len(x)
    _, J = f.lift(x)
    H = np.eye(n) * step
    Fp, _ = f.evaluate(x[None, :] + H)
    Fm, _ = f.evaluate(x[None, :] - H)
    fd = ((Fp - Fm) / (2 * step)).T
    dev = float(np.max(np.abs(J - fd)))
    rel = dev / max(1.0, float(np.max(np.abs(J))))
    return {"max_abs_deviation": dev, "relative_deviation": rel, "step": step,
            "tolerance": tol, "pass": rel <= tol}


def block_jacobian_sign_check(jacobians: Sequence, threshold: float = 1e-8,
                              rel_tol: float = 1e-8) -> dict:
    """Compare det(I - N) for the block-cyclic N with det(I - N_m ... N_1)."""
    Ns = [np.asarray(J, dtype=float) for J in jacobians]
    k = Ns[0].shape[0]
    big = block_cyclic(Ns)
    lhs = float_det(np.eye(big.shape[0]) - big)
    C = np.eye(k)
    for N in Ns:
        C = N @ C
    rhs = float_det(np.eye(k) - C)
    inconclusive = min(abs(lhs), abs(rhs)) < threshold
    rel = abs(lhs - rhs) / max(1.0, abs(lhs), abs(rhs))
    return {"det_cyclic": lhs, "det_composed": rhs, "relative_gap": rel,
            "sign_equal": bool(np.sign(lhs) == np.sign(rhs)), "values_equal": rel <= rel_tol,
            "inconclusive": bool(inconclusive)}


@dataclass(frozen=True)
class CyclicSmoothMap:
    """tau o (f_1 x ... x f_m): (a_1..a_m) -> (f_m a_m, f_1 a_1, ..., f_{m-1} a_{m-1})."""

    components: tuple[SmoothTorusMap, ...]

    def __post_init__(self):
        if not self.components:
            raise ValueError("need at least one component")
        if len({f.dim for f in self.components}) != 1:
            raise ValueError("components must share a dimension")

    @property
    def m(self) -> int:
        return len(self.components)

    @property
    def dim(self) -> int:
        return self.components[0].dim

    @classmethod
    def from_json(cls, obj: dict) -> "CyclicSmoothMap":
        return cls(tuple(SmoothTorusMap.from_json(c) for c in obj["components"]))

    def to_json(self) -> dict:
        return {"components": [f.to_json() for f in self.components]}

    def composed(self) -> ComposedTorusMap:
        return ComposedTorusMap(self.components)

    def as_smooth_map(self) -> SmoothTorusMap:
        """The cyclic map itself, as one smooth map of the mn-torus."""
        n, m = self.dim, self.m
        A = block_cyclic([f.linear_part for f in self.components])
        modes = []
        for i, f in enumerate(self.components):
            dst = (i + 1) % m
            for md in f.perturbation:
                k = [0] * (n * m)
                k[i * n:(i + 1) * n] = md.k
                modes.append(Mode(dst * n + md.coordinate, tuple(k), md.sin, md.cos))
        return SmoothTorusMap(A, tuple(modes))

    def rho(self, a):
        """a_1 -> (a_1, f_1 a_1, f_2 f_1 a_1, ...), with component Jacobians along the way."""
        pts, jacs = [np.asarray(a, dtype=float)], []
        for f in self.components:
            F, J = f.lift(pts[-1])
            jacs.append(J)
            pts.append(_wrap(F[None, :])[0])
        return pts, jacs


def cyclic_jacobian_check(f: CyclicSmoothMap, cfg: SolverConfig | None = None) -> dict:
    cfg = cfg or SolverConfig()
    search = find_fixed_points(f.composed(), cfg)
    if not search.transversal:
        raise PreconditionError("composed map has a non-transversal fixed point")
    whole = f.as_smooth_map()
    rows = []
    for p in search.points:
        pts, jacs = f.rho(p.coordinates)
        x = np.concatenate(pts[:-1])
        F, _ = whole.lift(x)
        v = F - x
        fixed_res = float(np.max(np.abs(v - np.rint(v))))
        rep = block_jacobian_sign_check(jacs, cfg.transversality)
        rep.update({"composed_point": list(p.coordinates), "composed_index": p.index,
                    "cyclic_point": x.tolist(), "cyclic_residual": fixed_res,
                    "cyclic_index": 1 if rep["det_cyclic"] > 0 else -1})
        rep["pass"] = (rep["sign_equal"] and rep["values_equal"] and not rep["inconclusive"]
                       and rep["cyclic_index"] == p.index and fixed_res <= cfg.label_tol)
        rows.append(rep)
    return {"points": rows, "expected": search.expected, "found": len(rows),
            "pass": search.count_ok and all(r["pass"] for r in rows)}
