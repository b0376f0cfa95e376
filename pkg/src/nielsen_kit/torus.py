"""Exact Nielsen theory for linear maps of flat tori.

A map x -> Ax of T^n has lift x~ -> A x~. A fixed point x~ satisfies
(A - I) x~ = w for an integer vector w, and two fixed points lie in the same
class exactly when their w agree modulo (I - A)Z^n. So the classes are the
cosets of the cokernel of I - A, and every class holds one point of index
sgn det(I - A).
"""
from __future__ import annotations

import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import _backend
from .exact_linalg import (DimensionError, IntMatrix, as_int_matrix, block_cyclic, block_diag,
                           cokernel, cyclic_det_identity_check, det_exact, product_chain)


class DegenerateInputError(ValueError):
    """Raised when an operation needs det(I - A) != 0."""


def _sign(x: int) -> int:
    return (x > 0) - (x < 0)


@dataclass(frozen=True)
class TorusMap:
    linear_part: IntMatrix

    def __post_init__(self):
        if not self.linear_part.is_square:
            raise DimensionError("linear part must be square")

    @classmethod
    def of(cls, rows) -> "TorusMap":
        return cls(as_int_matrix(rows))

    @property
    def dim(self) -> int:
        return self.linear_part.rows

    @classmethod
    def from_json(cls, obj: dict) -> "TorusMap":
        A = IntMatrix.from_json(obj["linear_part"])
        if "dim" in obj and int(obj["dim"]) != A.rows:
            raise DimensionError(f"dim {obj['dim']} does not match a {A.rows}x{A.cols} matrix")
        return cls(A)

    def to_json(self) -> dict:
        return {"dim": self.dim, "linear_part": self.linear_part.to_json()}

    def fixed_point(self, label: Sequence[int]) -> tuple[Fraction, ...]:
        """The fixed point in [0,1)^n whose lift satisfies A x - x = label."""
        M = self.linear_part - IntMatrix.identity(self.dim)
        x = _solve_fraction(M, label)
        return tuple(v - math.floor(v) for v in x)


@dataclass(frozen=True)
class FixedPointClass:
    label: tuple[int, ...]
    index: int

    @property
    def essential(self) -> bool:
        return self.index != 0

    def to_json(self) -> dict:
        return {"label": list(self.label), "index": self.index, "essential": self.essential}


@dataclass(frozen=True)
class NielsenSummary:
    lefschetz: int
    nielsen: int
    classes: tuple[FixedPointClass, ...]
    degenerate: bool

    @property
    def index_multiset(self) -> tuple[int, ...]:
        return tuple(sorted(c.index for c in self.classes))

    def to_json(self) -> dict:
        return {"lefschetz": self.lefschetz, "nielsen": self.nielsen,
                "degenerate": self.degenerate,
                "classes": [c.to_json() for c in self.classes]}


def analyze(f: TorusMap) -> NielsenSummary:
    n = f.dim
    M = IntMatrix.identity(n) - f.linear_part
    d = det_exact(M)
    if d == 0:
        return NielsenSummary(0, 0, (), True)
    s = _sign(d)
    classes = tuple(FixedPointClass(rep, s) for rep in cokernel(M).coset_representatives)
    return NielsenSummary(d, abs(d), classes, False)


def _solve_fraction(M: IntMatrix, b: Sequence[int]) -> list[Fraction]:
    n = M.rows
    A = [[Fraction(x) for x in row] + [Fraction(int(v))] for row, v in zip(M.entries, b)]
    for c in range(n):
        p = next((r for r in range(c, n) if A[r][c] != 0), None)
        if p is None:
            raise DegenerateInputError("singular system")
        A[c], A[p] = A[p], A[c]
        for r in range(n):
            if r != c and A[r][c] != 0:
                t = A[r][c] / A[c][c]
                A[r] = [a - t * b for a, b in zip(A[r], A[c])]
    return [A[i][n] / A[i][i] for i in range(n)]


# -- products ---------------------------------------------------------------

@dataclass(frozen=True)
class ProductReport:
    factors: tuple[NielsenSummary, ...]
    direct: NielsenSummary
    lefschetz_ok: bool
    nielsen_ok: bool
    index_ok: bool
    correspondence: tuple[tuple[tuple[int, ...], tuple[int, ...]], ...]

    @property
    def passed(self) -> bool:
        return self.lefschetz_ok and self.nielsen_ok and self.index_ok

    def to_json(self) -> dict:
        return {
            "direct": self.direct.to_json(),
            "factors": [s.to_json() for s in self.factors],
            "checks": {"lefschetz": self.lefschetz_ok, "nielsen": self.nielsen_ok,
                       "class_indices": self.index_ok},
            "correspondence": [{"product_label": list(a), "factor_classes": list(b)}
                               for a, b in self.correspondence],
        }


def analyze_product(fs: Sequence[TorusMap]) -> ProductReport:
    """Direct analysis of f_1 x ... x f_k against the factor summaries.

    Each direct class label splits into per-factor labels; the report records
    which factor classes it lands in and checks the index is the product.
    """
    if not fs:
        raise DimensionError("need at least one factor")
    factors = tuple(analyze(f) for f in fs)
    big = TorusMap(block_diag([f.linear_part for f in fs]))
    direct = analyze(big)
    L_ok = direct.lefschetz == math.prod(s.lefschetz for s in factors)
    N_ok = direct.nielsen == math.prod(s.nielsen for s in factors)

    index_ok = True
    pairs = []
    if not direct.degenerate:
        coks = [cokernel(IntMatrix.identity(f.dim) - f.linear_part) for f in fs]
        lookups = [{cok.key(c.label): (i, c.index) for i, c in enumerate(s.classes)}
                   for cok, s in zip(coks, factors)]
        seen = set()
        for c in direct.classes:
            pos, picks, prod = 0, [], 1
            for f, cok, table in zip(fs, coks, lookups):
                part = c.label[pos:pos + f.dim]
                pos += f.dim
                i, ind = table[cok.key(part)]
                picks.append(i)
                prod *= ind
            pairs.append((c.label, tuple(picks)))
            seen.add(tuple(picks))
            index_ok = index_ok and c.index == prod
        index_ok = index_ok and len(seen) == len(direct.classes) == math.prod(
            len(s.classes) for s in factors)
    return ProductReport(factors, direct, L_ok, N_ok, index_ok, tuple(pairs))


# -- cyclic maps ------------------------------------------------------------

@dataclass(frozen=True)
class CyclicTorusMap:
    """(a_1, ..., a_m) -> (f_m(a_m), f_1(a_1), ..., f_{m-1}(a_{m-1}))."""

    components: tuple[TorusMap, ...]

    def __post_init__(self):
        if not self.components:
            raise DimensionError("need at least one component")
        if len({f.dim for f in self.components}) != 1:
            raise DimensionError("components must share a dimension")

    @classmethod
    def of(cls, mats) -> "CyclicTorusMap":
        return cls(tuple(TorusMap.of(a) for a in mats))

    @property
    def m(self) -> int:
        return len(self.components)

    @property
    def dim(self) -> int:
        return self.components[0].dim

    @property
    def cycle(self) -> tuple[int, ...]:
        """tau as a 0-based image list: slot i goes to slot i+1 mod m."""
        return tuple((i + 1) % self.m for i in range(self.m))

    def composed(self) -> TorusMap:
        return TorusMap(product_chain([f.linear_part for f in self.components]))

    def total(self) -> TorusMap:
        return TorusMap(block_cyclic([f.linear_part for f in self.components]))

    @classmethod
    def from_json(cls, obj: dict) -> "CyclicTorusMap":
        return cls(tuple(TorusMap.from_json(c) for c in obj["components"]))

    def to_json(self) -> dict:
        return {"components": [f.to_json() for f in self.components]}

    def rho(self, x: Sequence) -> tuple:
        """a -> (a, f_1 a, f_2 f_1 a, ...) on the torus (exact for Fractions)."""
        out = [tuple(x)]
        for f in self.components[:-1]:
            y = f.linear_part.entries
            prev = out[-1]
            img = tuple(sum(r[j] * prev[j] for j in range(len(prev))) for r in y)
            out.append(tuple(v - math.floor(v) for v in img))
        return tuple(out)


@dataclass(frozen=True)
class RhoPair:
    composed: FixedPointClass
    cyclic: FixedPointClass

    def to_json(self) -> dict:
        return {"composed": self.composed.to_json(), "cyclic": self.cyclic.to_json()}


def rho_correspondence(f: CyclicTorusMap) -> list[RhoPair]:
    """Send each class of f_m...f_1 to the class of the cyclic map it lifts to.

    The fixed lift x~ = (a, A_1 a, A_2 A_1 a, ...) of the cyclic map satisfies
    N x~ - x~ = (C a - a, 0, ..., 0), so composed label w goes to (w, 0, ..., 0).
    """
    comp = analyze(f.composed())
    if comp.degenerate:
        raise DegenerateInputError("composed map has det(I - A) = 0")
    total = f.total()
    cyc = analyze(total)
    cok = cokernel(IntMatrix.identity(total.dim) - total.linear_part)
    by_key = {cok.key(c.label): c for c in cyc.classes}
    pad = (0,) * (total.dim - f.dim)
    return [RhoPair(c, by_key[cok.key(c.label + pad)]) for c in comp.classes]


@dataclass(frozen=True)
class CyclicReport:
    composed: NielsenSummary
    cyclic: NielsenSummary
    det_lhs: int
    det_rhs: int
    correspondence: tuple[RhoPair, ...] | None

    @property
    def lefschetz_equal(self) -> bool:
        return self.composed.lefschetz == self.cyclic.lefschetz

    @property
    def nielsen_equal(self) -> bool:
        return self.composed.nielsen == self.cyclic.nielsen

    @property
    def multiset_equal(self) -> bool:
        return self.composed.index_multiset == self.cyclic.index_multiset

    @property
    def det_identity(self) -> bool:
        return self.det_lhs == self.det_rhs

    @property
    def correspondence_ok(self) -> bool:
        if self.correspondence is None:
            return self.composed.degenerate and self.cyclic.degenerate
        images = {p.cyclic.label for p in self.correspondence}
        return (len(images) == len(self.correspondence) == len(self.cyclic.classes)
                and all(p.composed.index == p.cyclic.index for p in self.correspondence))

    @property
    def passed(self) -> bool:
        return (self.lefschetz_equal and self.nielsen_equal and self.multiset_equal
                and self.det_identity and self.correspondence_ok)

    def to_json(self) -> dict:
        return {
            "composed": self.composed.to_json(),
            "cyclic": self.cyclic.to_json(),
            "det_identity": {"lhs": str(self.det_lhs), "rhs": str(self.det_rhs)},
            "checks": {"lefschetz": self.lefschetz_equal, "nielsen": self.nielsen_equal,
                       "index_multiset": self.multiset_equal, "det_identity": self.det_identity,
                       "rho_bijection": self.correspondence_ok},
            "correspondence": None if self.correspondence is None
            else [p.to_json() for p in self.correspondence],
        }


def analyze_cyclic(f: CyclicTorusMap) -> CyclicReport:
    composed = analyze(f.composed())
    cyclic = analyze(f.total())
    det = cyclic_det_identity_check([c.linear_part for c in f.components])
    corr = None if composed.degenerate else tuple(rho_correspondence(f))
    return CyclicReport(composed, cyclic, det.lhs, det.rhs, corr)


# -- exhaustive sweeps ------------------------------------------------------

ENTRY_RANGE = 3


def matrix_pool(d: int, entry_range: int = ENTRY_RANGE, nondegenerate: bool = False) -> np.ndarray:
    """All d x d integer matrices with entries in [-r, r], lexicographic order."""
    vals = range(-entry_range, entry_range + 1)
    out = []
    for e in itertools.product(vals, repeat=d * d):
        A = np.array(e, dtype=np.int64).reshape(d, d)
        if nondegenerate:
            M = IntMatrix.identity(d) - IntMatrix.from_rows(A.tolist())
            if det_exact(M) == 0:
                continue
        out.append(A)
    return np.array(out, dtype=np.int64).reshape(len(out), d, d)


@dataclass
class SweepResult:
    name: str
    total: int
    step: int
    checked: int = 0
    failures: int = 0
    degenerate: int = 0
    overflow: int = 0
    failure_ids: list = field(default_factory=list)

    @property
    def exhaustive(self) -> bool:
        return self.step == 1

    @property
    def passed(self) -> bool:
        return self.failures == 0 and self.checked > 0

    def to_json(self) -> dict:
        return {"name": self.name, "tuples": self.total, "step": self.step,
                "exhaustive": self.exhaustive, "checked": self.checked,
                "failures": self.failures, "degenerate": self.degenerate,
                "overflow_rechecked": self.overflow, "failure_ids": self.failure_ids}


def _collect(fn, a: int, b: int, step: int):
    """Run one chunk; split it when more overflow ids occurred than were recorded."""
    out = fn(a, b)
    c, f, dg, oc, fi, oi = out
    if oc <= len(oi) or len(range(a, b, step)) <= 1:
        return c, f, dg, list(fi), list(oi)
    count = len(range(a, b, step))
    per = -(-count // 16)
    c = f = dg = 0
    fi, oi = [], []
    for i in range(16):
        lo = a + i * per * step
        hi = min(b, a + (i + 1) * per * step)
        if lo >= hi:
            break
        c2, f2, d2, fi2, oi2 = _collect(fn, lo, hi, step)
        c, f, dg = c + c2, f + f2, dg + d2
        fi.extend(fi2)
        oi.extend(oi2)
    return c, f, dg, fi, oi


def _run_chunks(fn, total: int, step: int, threads: int | None):
    """Split range(0, total, step) into contiguous chunks and sum the results.

    Aggregation is order-independent, so the thread count never changes the report.
    """
    threads = threads or _backend.thread_count()
    count = len(range(0, total, step))
    nchunks = max(1, min(threads * 4, count // 20000))
    per = -(-count // nchunks)
    bounds = [(i * per * step, min(total, (i + 1) * per * step)) for i in range(nchunks)]
    bounds = [(a, b) for a, b in bounds if a < b]
    if threads > 1 and len(bounds) > 1:
        with ThreadPoolExecutor(threads) as ex:
            parts = list(ex.map(lambda ab: _collect(fn, ab[0], ab[1], step), bounds))
    else:
        parts = [_collect(fn, a, b, step) for a, b in bounds]
    checked = failures = degenerate = 0
    fail_ids, over_ids = [], []
    for c, f, dg, fi, oi in parts:
        checked += c
        failures += f
        degenerate += dg
        fail_ids.extend(int(x) for x in fi)
        over_ids.extend(int(x) for x in oi)
    return checked, failures, degenerate, fail_ids, over_ids


def _finish(res: "SweepResult", exact, swept) -> "SweepResult":
    """Fold in kernel counts; tuples that overflowed int64 are redone exactly."""
    checked, failures, degenerate, fail_ids, over_ids = swept
    res.checked, res.failures, res.degenerate = checked, failures, degenerate
    for tid in over_ids:
        _, f, dg, _, fi, _ = exact(tid, tid + 1)
        res.overflow += 1
        res.failures += f
        res.degenerate += dg
        fail_ids.extend(int(x) for x in fi)
    res.failure_ids = sorted(set(fail_ids))[:16]
    return res


def product_sweep_pattern(dims: Sequence[int], step: int = 1, threads: int | None = None,
                          pools: dict | None = None, kernels=None) -> SweepResult:
    """Check the product identities for every tuple of non-degenerate factors."""
    kernels = kernels or _backend.kernels
    pools = pools if pools is not None else {}
    for d in set(dims):
        if d not in pools:
            pools[d] = matrix_pool(d, nondegenerate=True)
    flat = [pools[d].ravel() for d in dims]
    offsets = np.cumsum([0] + [a.size for a in flat[:-1]]).astype(np.int64)
    data = np.ascontiguousarray(np.concatenate(flat), dtype=np.int64)
    sizes = np.array([len(pools[d]) for d in dims], dtype=np.int64)
    dims_arr = np.array(dims, dtype=np.int64)
    total = int(np.prod(sizes))
    name = "product(" + ",".join(map(str, dims)) + ")"
    res = SweepResult(name, total, step)

    def fn(a, b, mod=kernels):
        return mod.product_chunk(data, offsets, sizes, dims_arr, a, b, step)

    def exact(a, b):
        return _backend.fallback.product_chunk(data, offsets, sizes, dims_arr, a, b, 1)

    return _finish(res, exact, _run_chunks(fn, total, step, threads))


def cyclic_sweep_pattern(d: int, m: int, step: int = 1, threads: int | None = None,
                         pools: dict | None = None, kernels=None) -> SweepResult:
    """Check the cyclic reduction for every m-tuple of d x d components."""
    kernels = kernels or _backend.kernels
    pools = pools if pools is not None else {}
    if d not in pools:
        pools[d] = matrix_pool(d)
    pool = pools[d]
    data = np.ascontiguousarray(pool.ravel(), dtype=np.int64)
    size = len(pool)
    total = size ** m
    res = SweepResult(f"cyclic(d={d},m={m})", total, step)

    def fn(a, b, mod=kernels):
        return mod.cyclic_chunk(data, size, d, m, a, b, step)

    def exact(a, b):
        return _backend.fallback.cyclic_chunk(data, size, d, m, a, b, 1)

    return _finish(res, exact, _run_chunks(fn, total, step, threads))


# Patterns with total dimension <= 4 are swept exhaustively. Bigger ones
# (three factors with two of dim 2, or m=3 cycles of 2x2 blocks) have 1e10
# tuples, so they are sampled with a fixed prime stride instead.
PRODUCT_PLAN = [
    ((1,), 1), ((2,), 1), ((1, 1), 1), ((1, 2), 1), ((2, 1), 1), ((2, 2), 1),
    ((1, 1, 1), 1), ((1, 1, 2), 1), ((1, 2, 1), 1), ((2, 1, 1), 1),
    ((1, 2, 2), 271), ((2, 1, 2), 271), ((2, 2, 1), 271), ((2, 2, 2), 99991),
]
CYCLIC_PLAN = [((1, 1), 1), ((2, 1), 1), ((1, 2), 1), ((2, 2), 1), ((1, 3), 1), ((2, 3), 100003)]
QUICK_STRIDE = 53


def _plan_step(step: int, total: int, quick: bool) -> int:
    if not quick or total < 20000:
        return step
    return step * QUICK_STRIDE


def product_sweep(quick: bool = False, threads: int | None = None, kernels=None) -> list[SweepResult]:
    pools: dict = {}
    out = []
    for dims, step in PRODUCT_PLAN:
        for d in set(dims):
            if d not in pools:
                pools[d] = matrix_pool(d, nondegenerate=True)
        total = math.prod(len(pools[d]) for d in dims)
        out.append(product_sweep_pattern(dims, _plan_step(step, total, quick), threads, pools, kernels))
    return out


def cyclic_sweep(quick: bool = False, threads: int | None = None, kernels=None) -> list[SweepResult]:
    pools: dict = {}
    out = []
    for (d, m), step in CYCLIC_PLAN:
        if d not in pools:
            pools[d] = matrix_pool(d)
        total = len(pools[d]) ** m
        out.append(cyclic_sweep_pattern(d, m, _plan_step(step, total, quick), threads, pools, kernels))
    return out
