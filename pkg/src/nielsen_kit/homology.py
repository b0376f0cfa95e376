"""Simplicial homology over Q and Lefschetz numbers of simplicial maps.

Simplices are stored as sorted vertex tuples; the sorted order is the
orientation. Homology bases come from integer Smith decompositions of the
boundary maps, and traces on H_q are computed as trace on cycles minus trace
on boundaries, exactly over the rationals.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Sequence

from .exact_linalg import IntMatrix, smith_normal_form

MAX_SIMPLICES = 2000


class ValidationError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class SimplicialComplex:
    vertices: int
    simplices: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        simp = tuple(sorted({tuple(sorted(s)) for s in self.simplices}, key=lambda s: (len(s), s)))
        if len(simp) != len(self.simplices):
            raise ValidationError("duplicate simplices")
        if len(simp) > MAX_SIMPLICES:
            raise ValidationError(f"{len(simp)} simplices exceeds the cap of {MAX_SIMPLICES}")
        object.__setattr__(self, "simplices", simp)
        present = set(simp)
        for s in simp:
            if not s or len(set(s)) != len(s):
                raise ValidationError(f"malformed simplex {s}")
            if s[0] < 0 or s[-1] >= self.vertices:
                raise ValidationError(f"simplex {s} uses a vertex outside 0..{self.vertices - 1}")
            for face in itertools.combinations(s, len(s) - 1):
                if face and face not in present:
                    raise ValidationError(f"face {face} of {s} is missing")
        for v in range(self.vertices):
            if (v,) not in present:
                raise ValidationError(f"vertex {v} is not listed as a 0-simplex")

    @classmethod
    def from_maximal(cls, facets: Iterable[Iterable[int]], vertices: int | None = None) -> "SimplicialComplex":
        out = set()
        for f in facets:
            f = tuple(sorted(f))
            for k in range(1, len(f) + 1):
                out.update(itertools.combinations(f, k))
        if vertices is None:
            vertices = 1 + max(v for s in out for v in s)
        return cls(vertices, tuple(out))

    @classmethod
    def from_json(cls, obj: dict) -> "SimplicialComplex":
        return cls(int(obj["vertices"]), tuple(tuple(int(v) for v in s) for s in obj["simplices"]))

    def to_json(self) -> dict:
        return {"vertices": self.vertices, "simplices": [list(s) for s in self.simplices]}

    @property
    def dimension(self) -> int:
        return max(len(s) for s in self.simplices) - 1

    @cached_property
    def by_dim(self) -> list[list[tuple[int, ...]]]:
        out: list[list[tuple[int, ...]]] = [[] for _ in range(self.dimension + 1)]
        for s in self.simplices:
            out[len(s) - 1].append(s)
        return out

    @cached_property
    def index(self) -> list[dict[tuple[int, ...], int]]:
        return [{s: i for i, s in enumerate(layer)} for layer in self.by_dim]

    def __contains__(self, s) -> bool:
        s = tuple(sorted(s))
        q = len(s) - 1
        return 0 <= q <= self.dimension and s in self.index[q]


@dataclass(frozen=True)
class SimplicialMap:
    vertex_images: tuple[int, ...]

    @classmethod
    def from_json(cls, obj: dict) -> "SimplicialMap":
        return cls(tuple(int(v) for v in obj["vertex_images"]))


def boundary_matrices(K: SimplicialComplex) -> list[IntMatrix]:
    """d_q : C_q -> C_{q-1} for q = 1..dim; rows index (q-1)-simplices."""
    out = []
    for q in range(1, K.dimension + 1):
        rows = K.by_dim[q - 1]
        idx = K.index[q - 1]
        mat = [[0] * len(K.by_dim[q]) for _ in rows]
        for j, s in enumerate(K.by_dim[q]):
            for i in range(len(s)):
                mat[idx[s[:i] + s[i + 1:]]][j] = (-1) ** i
        out.append(IntMatrix.from_rows(mat, len(K.by_dim[q])))
    return out


def euler_characteristic(K: SimplicialComplex) -> int:
    return sum((-1) ** q * len(layer) for q, layer in enumerate(K.by_dim))


def _rank(M: IntMatrix) -> int:
    if M.rows == 0 or M.cols == 0:
        return 0
    return smith_normal_form(M).rank


def betti_numbers(K: SimplicialComplex) -> list[int]:
    d = boundary_matrices(K)
    ranks = [_rank(m) for m in d]
    out = []
    for q in range(K.dimension + 1):
        z = len(K.by_dim[q]) - (ranks[q - 1] if q >= 1 else 0)
        b = ranks[q] if q < len(ranks) else 0
        out.append(z - b)
    return out


def _sorted_sign(verts: Sequence[int]) -> tuple[int, tuple[int, ...]]:
    """Sign of the permutation sorting verts, and the sorted tuple. Sign 0 on repeats."""
    if len(set(verts)) != len(verts):
        return 0, ()
    v = list(verts)
    sign = 1
    for i in range(len(v)):
        for j in range(len(v) - 1 - i):
            if v[j] > v[j + 1]:
                v[j], v[j + 1] = v[j + 1], v[j]
                sign = -sign
    return sign, tuple(v)


def chain_map(source: SimplicialComplex, target: SimplicialComplex,
              f: SimplicialMap) -> list[IntMatrix]:
    """f_# on C_q for q = 0..dim(source); collapsed simplices go to zero."""
    if len(f.vertex_images) != source.vertices:
        raise ValidationError(
            f"map has {len(f.vertex_images)} vertex images, complex has {source.vertices} vertices")
    for v in f.vertex_images:
        if not 0 <= v < target.vertices:
            raise ValidationError(f"vertex image {v} outside the target")
    out = []
    for q in range(source.dimension + 1):
        tq = target.by_dim[q] if q <= target.dimension else []
        tidx = target.index[q] if q <= target.dimension else {}
        mat = [[0] * len(source.by_dim[q]) for _ in tq]
        for j, s in enumerate(source.by_dim[q]):
            img = [f.vertex_images[v] for v in s]
            if set(img) and tuple(sorted(set(img))) not in target:
                raise ValidationError(f"image of simplex {s} is not a simplex of the target")
            sign, key = _sorted_sign(img)
            if sign:
                mat[tidx[key]][j] = sign
        out.append(IntMatrix.from_rows(mat, len(source.by_dim[q])))
    return out


# -- barycentric subdivision ---------------------------------------------------

@dataclass(frozen=True)
class Subdivision:
    """Sd K together with the subdivision chain map C_q(K) -> C_q(Sd K)."""

    base: SimplicialComplex
    complex: SimplicialComplex
    chain_maps: tuple[IntMatrix, ...]
    barycenter: dict  # simplex of K -> vertex of Sd K


def barycentric_subdivision(K: SimplicialComplex) -> Subdivision:
    """Vertices of Sd K: original vertices keep their indices, then barycenters in simplex order."""
    bary = {}
    for s in K.simplices:
        if len(s) == 1:
            bary[s] = s[0]
    nxt = K.vertices
    for s in K.simplices:
        if len(s) > 1:
            bary[s] = nxt
            nxt += 1
    facets = []
    for s in K.simplices:
        # maximal flags ending at s are enough once we take the face closure
        for perm in itertools.permutations(s):
            flag = [tuple(sorted(perm[:k])) for k in range(1, len(s) + 1)]
            facets.append([bary[f] for f in flag])
    SdK = SimplicialComplex.from_maximal(facets, nxt)

    cache: dict[tuple[int, ...], dict[tuple[int, ...], int]] = {}

    def sd(s: tuple[int, ...]) -> dict[tuple[int, ...], int]:
        if s in cache:
            return cache[s]
        if len(s) == 1:
            res = {(s[0],): 1}
        else:
            res: dict[tuple[int, ...], int] = {}
            b = bary[s]
            for i in range(len(s)):
                face = s[:i] + s[i + 1:]
                for simp, c in sd(face).items():
                    sign, key = _sorted_sign((b,) + simp)
                    res[key] = res.get(key, 0) + (-1) ** i * c * sign
            res = {k: v for k, v in res.items() if v}
        cache[s] = res
        return res

    maps = []
    for q in range(K.dimension + 1):
        idx = SdK.index[q]
        mat = [[0] * len(K.by_dim[q]) for _ in SdK.by_dim[q]]
        for j, s in enumerate(K.by_dim[q]):
            for simp, c in sd(s).items():
                mat[idx[simp]][j] = c
        maps.append(IntMatrix.from_rows(mat, len(K.by_dim[q])))
    return Subdivision(K, SdK, tuple(maps), bary)


# -- traces on homology ----------------------------------------------------------

def _solve_restricted(W: list[list[Fraction]], FW: list[list[Fraction]]) -> list[list[Fraction]]:
    """C with W C = FW for a full-column-rank W (normal equations, exact)."""
    k = len(W[0])
    Wt = list(zip(*W))
    G = [[sum(a * b for a, b in zip(Wt[i], Wt[j])) for j in range(k)] for i in range(k)]
    FWt = list(zip(*FW))
    R = [[sum(a * b for a, b in zip(Wt[i], FWt[j])) for j in range(k)] for i in range(k)]
    # Gauss-Jordan on [G | R]
    aug = [G[i] + R[i] for i in range(k)]
    for c in range(k):
        p = next(r for r in range(c, k) if aug[r][c] != 0)
        aug[c], aug[p] = aug[p], aug[c]
        pv = aug[c][c]
        aug[c] = [x / pv for x in aug[c]]
        for r in range(k):
            if r != c and aug[r][c] != 0:
                f = aug[r][c]
                aug[r] = [x - f * y for x, y in zip(aug[r], aug[c])]
    C = [row[k:] for row in aug]
    check = [[sum(W[i][t] * C[t][j] for t in range(k)) for j in range(k)] for i in range(len(W))]
    if check != [list(r) for r in FW]:
        raise ValidationError("subspace is not invariant under the chain map")
    return C


def _restricted_trace(F: IntMatrix, basis: list[tuple[int, ...]]) -> Fraction:
    if not basis:
        return Fraction(0)
    W = [[Fraction(basis[j][i]) for j in range(len(basis))] for i in range(len(basis[0]))]
    FW = [[Fraction(x) for x in F.apply(b)] for b in basis]
    FW = [list(r) for r in zip(*FW)]
    C = _solve_restricted(W, FW)
    return sum((C[i][i] for i in range(len(C))), Fraction(0))


def homology_traces(K: SimplicialComplex, chain_maps: Sequence[IntMatrix]) -> list[Fraction]:
    """Trace of the induced map on H_q(K; Q) for each q, given a chain map C(K) -> C(K)."""
    d = boundary_matrices(K)
    traces = []
    for q in range(K.dimension + 1):
        nq = len(K.by_dim[q])
        if q == 0:
            cycles = [tuple(int(i == j) for i in range(nq)) for j in range(nq)]
        else:
            s = smith_normal_form(d[q - 1])
            Vt = s.V.transpose().entries
            cycles = [Vt[j] for j in range(s.rank, nq)]
        if q < K.dimension:
            s = smith_normal_form(d[q])
            Uit = s.U_inv.transpose().entries
            bounds = [Uit[i] for i in range(s.rank)]
        else:
            bounds = []
        F = chain_maps[q]
        traces.append(_restricted_trace(F, cycles) - _restricted_trace(F, bounds))
    return traces


def _self_chain_map(K: SimplicialComplex, f: SimplicialMap,
                    subdivision: Subdivision | None) -> list[IntMatrix]:
    if subdivision is None:
        return chain_map(K, K, f)
    if subdivision.base is not K:
        raise ValidationError("subdivision was built for a different complex")
    fs = chain_map(subdivision.complex, K, f)
    return [fq @ sq for fq, sq in zip(fs, subdivision.chain_maps)]


def lefschetz_number(K: SimplicialComplex, f: SimplicialMap,
                     subdivision: Subdivision | None = None) -> int:
    """sum_q (-1)^q tr(f_* on H_q(K; Q)).

    With a subdivision, f is a simplicial map Sd K -> K and the self-map of
    |K| is f composed with the identification |Sd K| = |K|.
    """
    tr = homology_traces(K, _self_chain_map(K, f, subdivision))
    total = sum((-1) ** q * t for q, t in enumerate(tr))
    if total.denominator != 1:
        raise ValidationError(f"non-integral Lefschetz number {total}")
    return int(total)


def hopf_trace(K: SimplicialComplex, f: SimplicialMap,
               subdivision: Subdivision | None = None) -> int:
    """Alternating sum of chain-level traces (Hopf trace formula); an independent check."""
    maps = _self_chain_map(K, f, subdivision)
    return sum((-1) ** q * sum(m.entries[i][i] for i in range(m.rows)) for q, m in enumerate(maps))


# -- standard triangulations ------------------------------------------------------

def point() -> SimplicialComplex:
    return SimplicialComplex(1, ((0,),))


def circle(n: int = 3) -> SimplicialComplex:
    return SimplicialComplex.from_maximal([(i, (i + 1) % n) for i in range(n)], n)


def filled_triangle() -> SimplicialComplex:
    return SimplicialComplex.from_maximal([(0, 1, 2)])


def grid_torus(p: int = 3, q: int = 3) -> SimplicialComplex:
    """p x q grid on the torus, each square cut along its diagonal (p, q >= 3)."""
    v = lambda i, j: (i % p) * q + (j % q)
    facets = []
    for i in range(p):
        for j in range(q):
            facets.append((v(i, j), v(i + 1, j), v(i + 1, j + 1)))
            facets.append((v(i, j), v(i, j + 1), v(i + 1, j + 1)))
    return SimplicialComplex.from_maximal(facets, p * q)


def moebius_torus() -> SimplicialComplex:
    """The 7-vertex torus."""
    facets = [(i, (i + 1) % 7, (i + 3) % 7) for i in range(7)]
    facets += [(i, (i + 2) % 7, (i + 3) % 7) for i in range(7)]
    return SimplicialComplex.from_maximal(facets, 7)


def genus_two_surface() -> SimplicialComplex:
    """Connected sum of two 3x3 grid tori glued along a removed triangle."""
    T = grid_torus(3, 3)
    tris = T.by_dim[2]
    cut = tris[0]
    first = [t for t in tris if t != cut]
    # second copy: vertices of the cut triangle are shared, the rest shifted by 9
    relabel = {v: (v if v in cut else v + 9) for v in range(9)}
    second = [tuple(relabel[v] for v in t) for t in tris if t != cut]
    used = sorted({v for t in first + second for v in t})
    compact = {v: i for i, v in enumerate(used)}
    facets = [tuple(compact[v] for v in t) for t in first + second]
    return SimplicialComplex.from_maximal(facets, len(used))


def degree_two_circle_map() -> tuple[SimplicialComplex, Subdivision, SimplicialMap]:
    """Sd of the 3-vertex circle (6 vertices) wrapped twice around the 3-vertex circle."""
    K = circle(3)
    sub = barycentric_subdivision(K)
    b = sub.barycenter
    walk = [0, b[(0, 1)], 1, b[(1, 2)], 2, b[(0, 2)]]
    images = [0] * sub.complex.vertices
    for pos, v in enumerate(walk):
        images[v] = pos % 3
    return K, sub, SimplicialMap(tuple(images))
