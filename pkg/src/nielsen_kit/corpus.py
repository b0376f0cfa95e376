"""Bundled inputs for the verification suite: groups, smooth maps, multisets."""
from __future__ import annotations

from . import groups as G
from .bounds import IndexMultiset
from .smooth import CyclicSmoothMap, Mode, SmoothTorusMap


def group_corpus() -> list[G.FiniteGroup]:
    """Finite groups of order <= 60, mixing abelian, centerless and decomposable cases."""
    Z = G.cyclic_group
    prod = G.direct_product
    out = [G.FiniteGroup.from_table([[0]], 0, "trivial")]
    out += [Z(n) for n in (2, 3, 4, 5, 6, 7, 8, 9, 10, 12, 15, 30)]
    out += [
        prod([Z(2), Z(2)]), prod([Z(2), Z(2), Z(2)]), prod([Z(2), Z(4)]), prod([Z(3), Z(3)]),
        G.symmetric_group(3), G.dihedral_group(4), G.quaternion_group(), G.dihedral_group(5),
        G.dihedral_group(6), G.alternating_group(4), G.dicyclic_group(3), G.dihedral_group(7),
        G.dihedral_group(9), G.dicyclic_group(5), G.dihedral_group(10),
        G.symmetric_group(4), G.alternating_group(5),
        prod([G.symmetric_group(3), Z(2)]), prod([G.symmetric_group(3), Z(3)]),
        prod([G.quaternion_group(), Z(2)]), prod([G.alternating_group(4), Z(2)]),
        prod([G.symmetric_group(3), G.symmetric_group(3)]), prod([G.dihedral_group(5), Z(3)]),
    ]
    return out


def aut_corpus() -> list[G.ProductGroupSpec]:
    S3, D5, S4 = G.symmetric_group(3), G.dihedral_group(5), G.symmetric_group(4)
    return [G.ProductGroupSpec.of((S3, 2)), G.ProductGroupSpec.of((S3, 1), (D5, 1)),
            G.ProductGroupSpec.of((S3, 1), (S4, 1))]


# (linear part, mode shapes (coordinate, k, sin weight, cos weight)); the
# weights are rescaled so the Lipschitz bound sits at GUARD_USE of the limit.
GUARD_USE = 0.8

_SHAPES = [
    ([[2]], [(0, (1,), 1.0, 0.0)]),
    ([[3]], [(0, (1,), 0.5, 0.5)]),
    ([[-1]], [(0, (2,), 0.0, 1.0)]),
    ([[-2]], [(0, (1,), 1.0, 0.3), (0, (3,), 0.2, 0.0)]),
    ([[0]], [(0, (1,), 0.7, 0.7)]),
    ([[4]], [(0, (5,), 1.0, 0.0)]),
    ([[-3]], [(0, (2,), 0.4, -0.6)]),
    ([[2, 1], [1, 1]], [(0, (1, 0), 1.0, 0.0)]),
    ([[2, 1], [1, 0]], [(0, (1, 0), 1.0, 0.0), (1, (0, 1), 0.0, 1.0)]),
    ([[0, -1], [1, 0]], [(1, (1, 1), 0.5, 0.5)]),
    ([[3, 1], [1, 2]], [(0, (1, -1), 1.0, 0.0), (1, (2, 0), 0.3, 0.3)]),
    ([[-1, 0], [0, -1]], [(0, (0, 1), 1.0, 0.0)]),
    ([[2, 0], [0, 3]], [(0, (1, 1), 0.0, 1.0), (1, (1, 0), 1.0, 0.0)]),
    ([[1, 2], [3, 1]], [(1, (1, 2), 1.0, -1.0)]),
    ([[0, 1], [-1, -1]], [(0, (1, 0), 1.0, 0.0)]),
    ([[-2, 1], [1, -3]], [(0, (2, 1), 0.6, 0.2), (1, (0, 3), 0.1, 0.5)]),
    ([[2, -1], [1, 3]], [(1, (1, 0), 1.0, 0.0)]),
    ([[3, 2], [1, 3]], [(0, (1, 1), 0.5, 0.0), (1, (1, -1), 0.0, 0.5)]),
    ([[0, 2], [2, 0]], [(0, (0, 1), 1.0, 1.0)]),
    ([[1, 1], [1, -2]], [(1, (1, 0), 1.0, 0.0)]),
    ([[-1, 2], [-2, -1]], [(0, (1, 2), 0.2, 0.8)]),
    ([[3, -1], [-1, 2]], [(0, (5, 0), 1.0, 0.0)]),
]


def _scaled(A, shapes, use: float = GUARD_USE) -> SmoothTorusMap:
    raw = SmoothTorusMap.of(A, [Mode(c, k, s, co) for c, k, s, co in shapes])
    g = raw.guard()
    scale = use * g["limit"] / g["lipschitz"]
    modes = [Mode(c, k, round(s * scale, 12), round(co * scale, 12)) for c, k, s, co in shapes]
    return SmoothTorusMap.of(A, modes)


def smooth_corpus() -> list[SmoothTorusMap]:
    return [_scaled(A, shapes) for A, shapes in _SHAPES]


def cyclic_smooth_corpus() -> list[CyclicSmoothMap]:
    """Cyclic maps with small perturbations of unipotent and hyperbolic blocks."""
    eps = 1e-3
    pairs = [
        ([[[1, 1], [0, 1]], [[1, 0], [1, 1]]], [[], []]),
        ([[[1, 1], [0, 1]], [[1, 0], [1, 1]]], [[(0, (1, 0), eps, 0.0)], [(1, (0, 1), 0.0, eps)]]),
        ([[[2, 1], [1, 1]], [[0, -1], [1, 0]]], [[(0, (1, 0), eps, 0.0)], [(1, (1, 1), 0.0, eps / 2)]]),
        ([[[2]], [[3]], [[-1]]], [[(0, (1,), eps, 0.0)], [(0, (2,), 0.0, eps)], []]),
        ([[[2, 1], [1, 0]], [[1, 0], [0, 1]]], [[(1, (0, 1), eps, eps)], []]),
        ([[[0, 1], [1, 1]], [[2, 0], [0, 1]], [[1, 1], [1, 2]]],
         [[(0, (1, 0), eps, 0.0)], [], [(1, (1, 1), 0.0, eps)]]),
    ]
    out = []
    for mats, modes in pairs:
        comps = tuple(SmoothTorusMap.of(A, [Mode(c, k, s, co) for c, k, s, co in ms])
                      for A, ms in zip(mats, modes))
        out.append(CyclicSmoothMap(comps))
    return out


VALID_MULTISETS = [
    IndexMultiset.of([-3, -2, 1, 1], -2),
    IndexMultiset.of([], -1),
    IndexMultiset.of([-5, 1, 1, 1], -2),
    IndexMultiset.of([1, 1, 0, -1], -1),
    IndexMultiset.of([-3, -3, 1], -4),
]

# (multiset, clauses it must be rejected for)
VIOLATING_MULTISETS = [
    (IndexMultiset.of([-6], -2), ("aggregate", "interval", "lefschetz_nielsen")),
    (IndexMultiset.of([2, -1, -1, -1], -1), ("interval",)),
    (IndexMultiset.of([-5, -5] + [1] * 8, -2), ("aggregate",)),
    # the upper end of the interval plus the aggregate clause already force the
    # L/N inequality, so it can only fail alongside another clause
    (IndexMultiset.of([3], -1), ("interval", "lefschetz_nielsen")),
]
