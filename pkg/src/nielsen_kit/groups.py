"""Finite groups given by Cayley tables, and automorphisms of direct products.

A group is a multiplication table on element indices 0..order-1. Products of
groups index their elements in mixed radix with the first coordinate most
significant.
"""
from __future__ import annotations

import itertools
import math
from collections import Counter, deque
from dataclasses import InitVar, dataclass, field
from functools import cached_property
from typing import Iterator, Sequence

DEFAULT_AUT_CAP = 120
DEFAULT_PRODUCT_CAP = 5000


class GroupError(ValueError):
    pass


class SizeCapError(GroupError):
    pass


class PreconditionError(GroupError):
    pass


class DecompositionError(GroupError):
    """An automorphism that does not split as permutation times components."""


@dataclass(frozen=True, eq=False)
class FiniteGroup:
    table: tuple[tuple[int, ...], ...]
    identity: int = 0
    name: str | None = None
    inverse: tuple[int, ...] = field(init=False, repr=False)
    check: InitVar[bool] = True

    def __post_init__(self, check):
        if check:
            self._validate()
        t, e = self.table, self.identity
        object.__setattr__(self, "inverse", tuple(row.index(e) for row in t))

    def _validate(self):
        n = len(self.table)
        if n == 0:
            raise GroupError("empty table")
        rng = range(n)
        for row in self.table:
            if len(row) != n or sorted(row) != list(rng):
                raise GroupError("every table row must be a permutation of the elements")
        for j in rng:
            if sorted(self.table[i][j] for i in rng) != list(rng):
                raise GroupError("every table column must be a permutation of the elements")
        e = self.identity
        if tuple(self.table[e]) != tuple(rng) or any(self.table[i][e] != i for i in rng):
            raise GroupError("identity row/column is not the identity permutation")
        t = self.table
        for a in rng:
            ta = t[a]
            for b in rng:
                tab = t[ta[b]]
                tb = t[b]
                if any(tab[c] != ta[tb[c]] for c in rng):
                    raise GroupError(f"table is not associative (a={a}, b={b})")

    @classmethod
    def from_table(cls, table, identity: int | None = None, name: str | None = None) -> "FiniteGroup":
        table = tuple(tuple(int(x) for x in r) for r in table)
        if identity is None:
            identity = next((i for i, r in enumerate(table) if list(r) == list(range(len(table)))), 0)
        return cls(table, identity, name)

    @classmethod
    def from_permutations(cls, degree: int, generators, name: str | None = None) -> "FiniteGroup":
        """Close the generators under composition; elements sorted lexicographically."""
        ident = tuple(range(degree))
        gens = [tuple(int(x) for x in g) for g in generators]
        for g in gens:
            if sorted(g) != list(ident):
                raise GroupError(f"{g} is not a permutation of degree {degree}")
        seen = {ident}
        queue = deque([ident])
        while queue:
            p = queue.popleft()
            for g in gens:
                q = tuple(p[g[i]] for i in range(degree))
                if q not in seen:
                    seen.add(q)
                    queue.append(q)
        elems = sorted(seen)
        index = {p: i for i, p in enumerate(elems)}
        # (a*b)(x) = a(b(x))
        table = [[index[tuple(a[b[i]] for i in range(degree))] for b in elems] for a in elems]
        return cls.from_table(table, index[ident], name)

    @classmethod
    def from_json(cls, obj: dict) -> "FiniteGroup":
        if "table" in obj:
            return cls.from_table(obj["table"], obj.get("identity"), obj.get("name"))
        if "generators" in obj:
            return cls.from_permutations(int(obj["degree"]), obj["generators"], obj.get("name"))
        raise GroupError("group JSON needs either 'table' or 'degree'+'generators'")

    def to_json(self) -> dict:
        out = {"order": self.order, "table": [list(r) for r in self.table]}
        if self.name:
            out["name"] = self.name
        return out

    @property
    def order(self) -> int:
        return len(self.table)

    def mul(self, a: int, b: int) -> int:
        return self.table[a][b]

    def element_order(self, a: int) -> int:
        k, x = 1, a
        while x != self.identity:
            x = self.table[x][a]
            k += 1
        return k

    def generated(self, gens: Sequence[int]) -> frozenset[int]:
        seen = {self.identity}
        queue = deque([self.identity])
        t = self.table
        while queue:
            x = queue.popleft()
            for g in gens:
                y = t[x][g]
                if y not in seen:
                    seen.add(y)
                    queue.append(y)
        return frozenset(seen)

    def is_abelian(self) -> bool:
        t = self.table
        return all(t[a][b] == t[b][a] for a in range(self.order) for b in range(a))

    def __repr__(self):
        return f"FiniteGroup(order={self.order}, name={self.name!r})"


# -- standard constructors ---------------------------------------------------

def cyclic_group(n: int) -> FiniteGroup:
    return FiniteGroup.from_table([[(a + b) % n for b in range(n)] for a in range(n)], 0, f"Z{n}")


def dihedral_group(n: int) -> FiniteGroup:
    """Symmetries of the n-gon, order 2n."""
    if n < 3:
        if n == 1:
            return FiniteGroup.from_table(cyclic_group(2).table, 0, "D1")
        return FiniteGroup.from_table(direct_product([cyclic_group(2), cyclic_group(2)]).table, 0, "D2")
    rot = [(i + 1) % n for i in range(n)]
    ref = [(-i) % n for i in range(n)]
    return FiniteGroup.from_permutations(n, [rot, ref], f"D{n}")


def symmetric_group(n: int) -> FiniteGroup:
    if n == 1:
        return FiniteGroup.from_table([[0]], 0, "S1")
    gens = [[1, 0] + list(range(2, n)), list(range(1, n)) + [0]]
    return FiniteGroup.from_permutations(n, gens, f"S{n}")


def alternating_group(n: int) -> FiniteGroup:
    if n < 3:
        return FiniteGroup.from_table([[0]], 0, f"A{n}")
    gens = [[(i + 1) % 3 if i < 3 else i for i in range(n)]]
    for k in range(3, n):
        # 3-cycles (0 1 k) generate A_n
        p = list(range(n))
        p[0], p[1], p[k] = 1, k, 0
        gens.append(p)
    return FiniteGroup.from_permutations(n, gens, f"A{n}")


def quaternion_group() -> FiniteGroup:
    # left regular representation of Q8 on {1,-1,i,-i,j,-j,k,-k}
    i = [2, 3, 1, 0, 6, 7, 5, 4]
    j = [4, 5, 7, 6, 1, 0, 2, 3]
    return FiniteGroup.from_permutations(8, [i, j], "Q8")


def dicyclic_group(n: int) -> FiniteGroup:
    """Dic_n of order 4n: <a, x | a^{2n} = 1, x^2 = a^n, x a x^-1 = a^-1>."""
    # elements a^k x^e encoded as (k, e) -> k + 2n*e; build the table directly
    def mul(p, q):
        (k1, e1), (k2, e2) = p, q
        if e1 == 0:
            return ((k1 + k2) % (2 * n), e2)
        k = (k1 - k2) % (2 * n)
        if e2 == 0:
            return (k, 1)
        return ((k + n) % (2 * n), 0)
    elems = [(k, e) for e in (0, 1) for k in range(2 * n)]
    idx = {p: i for i, p in enumerate(elems)}
    table = [[idx[mul(p, q)] for q in elems] for p in elems]
    return FiniteGroup.from_table(table, 0, f"Dic{n}")


def direct_product(groups: Sequence[FiniteGroup], name: str | None = None) -> FiniteGroup:
    orders = [g.order for g in groups]
    coords = list(itertools.product(*[range(o) for o in orders]))
    strides = _strides(orders)
    table = []
    for a in coords:
        row = []
        for b in coords:
            row.append(sum(g.table[x][y] * s for g, x, y, s in zip(groups, a, b, strides)))
        table.append(row)
    ident = sum(g.identity * s for g, s in zip(groups, strides))
    if name is None:
        name = "x".join(g.name or "?" for g in groups)
    # factors are already validated; a product of groups is a group
    return FiniteGroup(tuple(map(tuple, table)), ident, name, False)


def _strides(orders: Sequence[int]) -> list[int]:
    strides = [1] * len(orders)
    for i in range(len(orders) - 2, -1, -1):
        strides[i] = strides[i + 1] * orders[i + 1]
    return strides


# -- subgroups, center, conjugacy -------------------------------------------

def center(G: FiniteGroup) -> frozenset[int]:
    t = G.table
    n = G.order
    return frozenset(g for g in range(n) if all(t[g][h] == t[h][g] for h in range(n)))


def centralizer(G: FiniteGroup, S) -> frozenset[int]:
    t = G.table
    return frozenset(g for g in range(G.order) if all(t[g][h] == t[h][g] for h in S))


def subgroups(G: FiniteGroup) -> list[frozenset[int]]:
    """All subgroups, by repeatedly joining known subgroups with cyclic ones.

    Sorted by (order, sorted elements).
    """
    cyclic = {G.generated([g]) for g in range(G.order)}
    found = set(cyclic)
    layer = set(cyclic)
    while layer:
        nxt = set()
        for H in layer:
            Hl = sorted(H)
            for C in cyclic:
                if C <= H:
                    continue
                K = G.generated(Hl + sorted(C))
                if K not in found:
                    found.add(K)
                    nxt.add(K)
        layer = nxt
    return sorted(found, key=lambda H: (len(H), sorted(H)))


def conjugacy_classes(G: FiniteGroup) -> list[list[int]]:
    t, inv = G.table, G.inverse
    seen: set[int] = set()
    classes = []
    for g in range(G.order):
        if g in seen:
            continue
        cls = sorted({t[t[h][g]][inv[h]] for h in range(G.order)})
        seen.update(cls)
        classes.append(cls)
    return classes


def _commute(G: FiniteGroup, H, K) -> bool:
    t = G.table
    return all(t[h][k] == t[k][h] for h in H for k in K)


@dataclass(frozen=True)
class FactorizationWitness:
    H: frozenset[int]
    K: frozenset[int]


def find_factorization(G: FiniteGroup) -> FactorizationWitness | None:
    """Nontrivial commuting subgroups H, K with HK = G, smallest first; None if none exist."""
    subs = [H for H in subgroups(G) if len(H) > 1]
    n = G.order
    for H in subs:
        for K in subs:
            if len(H) * len(K) < n or n * len(H & K) != len(H) * len(K):
                continue
            if _commute(G, H, K):
                return FactorizationWitness(H, K)
    return None


def is_unfactorizable(G: FiniteGroup) -> tuple[bool, FactorizationWitness | None]:
    w = find_factorization(G)
    return w is None, w


def find_direct_decomposition(G: FiniteGroup) -> FactorizationWitness | None:
    subs = [H for H in subgroups(G) if 1 < len(H) < G.order]
    for H in subs:
        for K in subs:
            if len(H) * len(K) != G.order or len(H & K) != 1:
                continue
            if _commute(G, H, K):
                return FactorizationWitness(H, K)
    return None


def is_indecomposable(G: FiniteGroup) -> bool:
    return find_direct_decomposition(G) is None


@dataclass(frozen=True)
class UnfactorizableReport:
    unfactorizable: bool
    centerless: bool
    indecomposable: bool

    @property
    def consistent(self) -> bool:
        return self.unfactorizable == (self.centerless and self.indecomposable)

    def to_json(self) -> dict:
        return {"unfactorizable": self.unfactorizable, "centerless": self.centerless,
                "indecomposable": self.indecomposable, "consistent": self.consistent}


def unfactorizable_equivalence_check(G: FiniteGroup) -> UnfactorizableReport:
    unf, _ = is_unfactorizable(G)
    return UnfactorizableReport(unf, len(center(G)) == 1, is_indecomposable(G))


# -- homomorphism search -----------------------------------------------------

def generating_set(G: FiniteGroup) -> list[int]:
    """Greedy generators: highest element order first, ties by index."""
    by_order = sorted(range(G.order), key=lambda g: (-G.element_order(g), g))
    gens: list[int] = []
    H = frozenset([G.identity])
    for g in by_order:
        if len(H) == G.order:
            break
        if g not in H:
            gens.append(g)
            H = G.generated(gens)
    return gens


def _injective_homs(G: FiniteGroup, H: FiniteGroup) -> Iterator[tuple[int, ...]]:
    """Backtracking over generator images, extending the partial map by closure."""
    gens = generating_set(G)
    tg, th = G.table, H.table
    orders_h = [H.element_order(h) for h in range(H.order)]
    candidates = [[h for h in range(H.order) if orders_h[h] == G.element_order(g)] for g in gens]

    def extend(img, used, level, image):
        img = img[:]
        used = set(used)
        if img[gens[level]] != -1:
            if img[gens[level]] != image:
                return None
        elif image in used:
            return None
        assigned = gens[:level + 1]
        assigned_img = [image if i == level else img[g] for i, g in enumerate(assigned)]
        img[gens[level]] = image
        used.add(image)
        queue = deque(x for x in range(G.order) if img[x] != -1)
        while queue:
            x = queue.popleft()
            ix = img[x]
            for g, ig in zip(assigned, assigned_img):
                y = tg[x][g]
                iy = th[ix][ig]
                if img[y] == -1:
                    if iy in used:
                        return None
                    img[y] = iy
                    used.add(iy)
                    queue.append(y)
                elif img[y] != iy:
                    return None
        return img, used

    start = [-1] * G.order
    start[G.identity] = H.identity

    def rec(level, img, used):
        if level == len(gens):
            yield tuple(img)
            return
        for c in candidates[level]:
            nxt = extend(img, used, level, c)
            if nxt is not None:
                yield from rec(level + 1, *nxt)

    if not gens:
        yield tuple(start)
        return
    yield from rec(0, start, {H.identity})


def is_isomorphic(G: FiniteGroup, H: FiniteGroup) -> bool:
    if G.order != H.order:
        return False
    sig = lambda K: sorted(Counter(K.element_order(x) for x in range(K.order)).items())
    if sig(G) != sig(H):
        return False
    return next(_injective_homs(G, H), None) is not None


@dataclass(frozen=True)
class GroupAutomorphism:
    group: FiniteGroup
    images: tuple[int, ...]

    def __post_init__(self):
        t = self.group.table
        im = self.images
        n = self.group.order
        if len(im) != n or sorted(im) != list(range(n)):
            raise GroupError("automorphism images must be a permutation of the elements")
        for a in range(n):
            for b in range(n):
                if im[t[a][b]] != t[im[a]][im[b]]:
                    raise GroupError(f"map is not a homomorphism at ({a}, {b})")

    def __call__(self, g: int) -> int:
        return self.images[g]

    def __eq__(self, other):
        return isinstance(other, GroupAutomorphism) and self.images == other.images

    def __hash__(self):
        return hash(self.images)


def automorphisms(G: FiniteGroup, cap: int = DEFAULT_AUT_CAP) -> list[GroupAutomorphism]:
    if G.order > cap:
        raise SizeCapError(f"group order {G.order} exceeds automorphism cap {cap}")
    return [GroupAutomorphism(G, im) for im in sorted(_injective_homs(G, G))]


def inner_automorphism(G: FiniteGroup, g: int) -> GroupAutomorphism:
    t, inv = G.table, G.inverse
    return GroupAutomorphism(G, tuple(t[t[g][x]][inv[g]] for x in range(G.order)))


# -- products --------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class ProductGroupSpec:
    """G_1^{n_1} x ... x G_m^{n_m} with pairwise non-isomorphic G_i."""

    factors: tuple[tuple[FiniteGroup, int], ...]

    def __post_init__(self):
        if not self.factors:
            raise GroupError("product needs at least one factor")
        for G, n in self.factors:
            if n < 1:
                raise GroupError("multiplicities must be >= 1")
        for (G, _), (H, _) in itertools.combinations(self.factors, 2):
            if is_isomorphic(G, H):
                raise GroupError(f"factors {G.name} and {H.name} are isomorphic; merge them")

    @classmethod
    def of(cls, *factors) -> "ProductGroupSpec":
        return cls(tuple((G, int(n)) for G, n in factors))

    @classmethod
    def from_json(cls, obj: dict) -> "ProductGroupSpec":
        return cls(tuple((FiniteGroup.from_json(f["group"]), int(f.get("multiplicity", 1)))
                         for f in obj["factors"]))

    @property
    def coordinates(self) -> list[tuple[int, int]]:
        """(block, copy) per coordinate, in product order."""
        return [(i, j) for i, (_, n) in enumerate(self.factors) for j in range(n)]

    @property
    def coordinate_groups(self) -> list[FiniteGroup]:
        return [G for G, n in self.factors for _ in range(n)]

    @property
    def order(self) -> int:
        return math.prod(G.order ** n for G, n in self.factors)

    @cached_property
    def product(self) -> FiniteGroup:
        return direct_product(self.coordinate_groups)

    def group(self) -> FiniteGroup:
        return self.product

    def split(self, x: int) -> list[int]:
        out = []
        for G in reversed(self.coordinate_groups):
            x, r = divmod(x, G.order)
            out.append(r)
        return out[::-1]

    def join(self, coords: Sequence[int]) -> int:
        x = 0
        for G, c in zip(self.coordinate_groups, coords):
            x = x * G.order + c
        return x


@dataclass(frozen=True)
class ProductAutomorphism:
    """Per block i: sigma_i (copy j -> sigma_i[j]) and component automorphisms phi_{i,j}.

    Acts by putting phi_{i,j}(g_{i,j}) into copy sigma_i[j] of block i.
    """

    sigmas: tuple[tuple[int, ...], ...]
    components: tuple[tuple[GroupAutomorphism, ...], ...]

    def to_json(self) -> dict:
        return {"sigmas": [list(s) for s in self.sigmas],
                "components": [[list(c.images) for c in blk] for blk in self.components]}


def compose_product_automorphism(spec: ProductGroupSpec, pa: ProductAutomorphism) -> GroupAutomorphism:
    coords = spec.coordinates
    offsets = {}
    pos = 0
    for i, (_, n) in enumerate(spec.factors):
        offsets[i] = pos
        pos += n
    for i, (G, n) in enumerate(spec.factors):
        if sorted(pa.sigmas[i]) != list(range(n)) or len(pa.components[i]) != n:
            raise GroupError(f"block {i}: sigma must permute {n} copies")
        if any(c.group.order != G.order for c in pa.components[i]):
            raise GroupError(f"block {i}: component automorphism acts on the wrong group")
    P = spec.group()
    images = []
    for x in range(P.order):
        g = spec.split(x)
        out = [0] * len(coords)
        for c, (i, j) in enumerate(coords):
            out[offsets[i] + pa.sigmas[i][j]] = pa.components[i][j](g[c])
        images.append(spec.join(out))
    return GroupAutomorphism(P, tuple(images))


def decompose_product_automorphism(spec: ProductGroupSpec, phi) -> ProductAutomorphism:
    """Recover sigma_i and phi_{i,j} from an automorphism of the product.

    For each coordinate c, push its factor through phi and look at the
    projections onto every coordinate; exactly one projection is nontrivial
    when the factors are unfactorizable.
    """
    for G, _ in spec.factors:
        ok, _w = is_unfactorizable(G)
        if not ok:
            raise PreconditionError(f"factor {G.name or G.order} is not unfactorizable")
    P = spec.group()
    if not isinstance(phi, GroupAutomorphism):
        phi = GroupAutomorphism(P, tuple(phi))
    elif phi.group.order != P.order:
        raise GroupError("automorphism acts on a group of the wrong order")
    coords = spec.coordinates
    groups = spec.coordinate_groups
    k = len(coords)
    idents = [G.identity for G in groups]
    target = [None] * k
    comp_images: list[tuple[int, ...] | None] = [None] * k
    for c in range(k):
        projections = [set() for _ in range(k)]
        for g in range(groups[c].order):
            emb = idents[:]
            emb[c] = g
            im = spec.split(phi(spec.join(emb)))
            for d in range(k):
                projections[d].add(im[d])
        hit = [d for d in range(k) if projections[d] != {idents[d]}]
        if len(hit) != 1:
            raise DecompositionError(
                f"coordinate {c} maps nontrivially into coordinates {hit}; no decomposition exists")
        d = hit[0]
        if coords[d][0] != coords[c][0]:
            raise DecompositionError(
                f"coordinate {c} (block {coords[c][0]}) sent to block {coords[d][0]}")
        target[c] = d
        img = []
        for g in range(groups[c].order):
            emb = idents[:]
            emb[c] = g
            img.append(spec.split(phi(spec.join(emb)))[d])
        comp_images[c] = tuple(img)
    if sorted(target) != list(range(k)):
        raise DecompositionError("coordinate targets are not a permutation")
    sigmas, components = [], []
    pos = 0
    for i, (G, n) in enumerate(spec.factors):
        sigmas.append(tuple(target[pos + j] - pos for j in range(n)))
        components.append(tuple(GroupAutomorphism(G, comp_images[pos + j]) for j in range(n)))
        pos += n
    return ProductAutomorphism(tuple(sigmas), tuple(components))


def aut_order_formula(spec: ProductGroupSpec, cap: int = DEFAULT_PRODUCT_CAP) -> int:
    return math.prod(len(automorphisms(G, cap)) ** n * math.factorial(n) for G, n in spec.factors)


@dataclass(frozen=True)
class AutOrderReport:
    enumerated: int
    formula: int

    @property
    def equal(self) -> bool:
        return self.enumerated == self.formula

    def to_json(self) -> dict:
        return {"enumerated": self.enumerated, "formula": self.formula, "equal": self.equal}


def aut_order_check(spec: ProductGroupSpec, cap: int = DEFAULT_PRODUCT_CAP) -> AutOrderReport:
    if spec.order > cap:
        raise SizeCapError(f"product order {spec.order} exceeds cap {cap}")
    enumerated = sum(1 for _ in _injective_homs(spec.group(), spec.group()))
    return AutOrderReport(enumerated, aut_order_formula(spec, cap))
