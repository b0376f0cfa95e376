"""Index bounds for surface homeomorphisms and their products.

Everything is integer arithmetic. For a homeomorphism f of a closed surface
with chi < 0 every class index lies in [2chi - 1, 1], the indices below -1
satisfy sum(ind + 1) >= 2chi, and |L - chi| <= N - chi.
"""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Sequence


class DomainError(ValueError):
    pass


@dataclass(frozen=True)
class SurfaceSpec:
    chi: int
    multiplicity: int = 1
    genus: int | None = None

    def __post_init__(self):
        if self.chi >= 0:
            raise DomainError(f"need chi < 0 (hyperbolic surface), got {self.chi}")
        if self.multiplicity < 1:
            raise DomainError("multiplicity must be at least 1")
        if self.genus is not None and self.chi != 2 - 2 * self.genus:
            raise DomainError(f"genus {self.genus} has chi {2 - 2 * self.genus}, not {self.chi}")

    @classmethod
    def of_genus(cls, genus: int, multiplicity: int = 1) -> "SurfaceSpec":
        if genus < 2:
            raise DomainError(f"genus {genus} is not hyperbolic")
        return cls(2 - 2 * genus, multiplicity, genus)

    @classmethod
    def from_json(cls, obj: dict) -> "SurfaceSpec":
        mult = int(obj.get("multiplicity", 1))
        genus = obj.get("genus")
        if genus is not None:
            genus = int(genus)
            chi = int(obj.get("chi", 2 - 2 * genus))
            if genus < 2:
                raise DomainError(f"genus {genus} is not hyperbolic")
            return cls(chi, mult, genus)
        if "chi" not in obj:
            raise DomainError("surface needs genus or chi")
        return cls(int(obj["chi"]), mult)

    def to_json(self) -> dict:
        out = {"chi": self.chi, "multiplicity": self.multiplicity}
        if self.genus is not None:
            out["genus"] = self.genus
        return out


@dataclass(frozen=True)
class IndexMultiset:
    indices: tuple[int, ...]
    chi: int

    @classmethod
    def of(cls, indices: Iterable[int], chi: int) -> "IndexMultiset":
        return cls(tuple(sorted(int(i) for i in indices)), int(chi))

    @classmethod
    def from_json(cls, obj: dict) -> "IndexMultiset":
        return cls.of(obj["indices"], obj["chi"])

    def to_json(self) -> dict:
        return {"indices": list(self.indices), "chi": self.chi}

    @property
    def lefschetz(self) -> int:
        return sum(self.indices)

    @property
    def nielsen(self) -> int:
        return sum(1 for i in self.indices if i != 0)


@dataclass
class BoundReport:
    lower: int
    upper: int
    interval_ok: bool
    aggregate: int
    aggregate_ok: bool
    lefschetz: int
    nielsen: int
    ln_inequality_ok: bool
    violations: list[dict] = field(default_factory=list)

    @property
    def verdict(self) -> bool:
        return self.interval_ok and self.aggregate_ok and self.ln_inequality_ok

    @property
    def violated_clauses(self) -> list[str]:
        return sorted({v["clause"] for v in self.violations})

    def to_json(self) -> dict:
        return {"lower": self.lower, "upper": self.upper, "interval_ok": self.interval_ok,
                "aggregate": self.aggregate, "aggregate_ok": self.aggregate_ok,
                "lefschetz": self.lefschetz, "nielsen": self.nielsen,
                "ln_inequality_ok": self.ln_inequality_ok, "verdict": self.verdict,
                "violations": self.violations}


def surface_index_interval(chi: int) -> tuple[int, int]:
    if chi >= 0:
        raise DomainError(f"need chi < 0 (hyperbolic surface), got {chi}")
    return 2 * chi - 1, 1


def check_index_multiset(ms: IndexMultiset) -> BoundReport:
    lo, hi = surface_index_interval(ms.chi)
    violations = []
    for ind, count in sorted(Counter(ms.indices).items()):
        if not lo <= ind <= hi:
            violations.append({"clause": "interval", "index": ind, "count": count,
                               "detail": f"{ind} outside [{lo}, {hi}]"})
    agg = sum(i + 1 for i in ms.indices if i < -1)
    agg_ok = agg >= 2 * ms.chi
    if not agg_ok:
        violations.append({"clause": "aggregate", "value": agg, "bound": 2 * ms.chi,
                           "detail": f"sum of (ind + 1) over ind < -1 is {agg} < {2 * ms.chi}"})
    L, N = ms.lefschetz, ms.nielsen
    ln_ok = abs(L - ms.chi) <= N - ms.chi
    if not ln_ok:
        violations.append({"clause": "lefschetz_nielsen", "L": L, "N": N,
                           "detail": f"|L - chi| = {abs(L - ms.chi)} > N - chi = {N - ms.chi}"})
    return BoundReport(lo, hi, not any(v["clause"] == "interval" for v in violations),
                       agg, agg_ok, L, N, ln_ok, violations)


def product_bound(component_bounds: Sequence[int]) -> int:
    if not component_bounds:
        raise DomainError("need at least one component bound")
    if any(int(b) < 1 for b in component_bounds):
        raise DomainError("component bounds must be >= 1")
    return math.prod(int(b) for b in component_bounds)


def hyperbolic_product_bound(surfaces: Sequence[SurfaceSpec]) -> int:
    """prod |2 chi_i - 1| ** n_i over distinct surfaces with n_i copies each."""
    if not surfaces:
        raise DomainError("need at least one surface")
    out = 1
    for s in surfaces:
        if s.chi >= 0:
            raise DomainError(f"need chi < 0, got {s.chi}")
        out *= abs(2 * s.chi - 1) ** s.multiplicity
    return out


def cross_check_with_oracle(product_indices: Iterable[tuple[Sequence[int], int]],
                            multisets: Iterable[IndexMultiset] = ()) -> dict:
    """Observed product-class indices against the product of per-factor maxima.

    ``product_indices`` yields (factor index tuple, product class index). The
    multisets are only run through the surface checker when they carry chi < 0.
    """
    checked = exceeded = 0
    worst = 0
    for factor_inds, ind in product_indices:
        checked += 1
        bound = product_bound([max(1, abs(i)) for i in factor_inds]) if factor_inds else 1
        worst = max(worst, abs(ind))
        if abs(ind) > bound or ind != math.prod(factor_inds):
            exceeded += 1
    surface = []
    for ms in multisets:
        if ms.chi < 0:
            surface.append(check_index_multiset(ms).verdict)
    return {"product_classes": checked, "max_abs_index": worst, "exceeded": exceeded,
            "surface_multisets": len(surface), "surface_failures": surface.count(False),
            "pass": exceeded == 0 and surface.count(False) == 0}
