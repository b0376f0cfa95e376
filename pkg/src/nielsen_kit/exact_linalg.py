"""Exact integer linear algebra.

Everything here works on Python ints, so nothing overflows. The matrices
involved are desk-sized (tens of rows at most).
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np


class DimensionError(ValueError):
    pass


@dataclass(frozen=True)
class IntMatrix:
    """Immutable integer matrix stored as a tuple of row tuples."""

    rows: int
    cols: int
    entries: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if len(self.entries) != self.rows or any(len(r) != self.cols for r in self.entries):
            raise DimensionError(
                f"entries do not match declared shape {self.rows}x{self.cols}")

    @classmethod
    def from_rows(cls, rows: Iterable[Iterable[int]], cols: int | None = None) -> "IntMatrix":
        data = tuple(tuple(int(x) for x in r) for r in rows)
        if cols is None:
            cols = len(data[0]) if data else 0
        return cls(len(data), cols, data)

    @classmethod
    def identity(cls, n: int) -> "IntMatrix":
        return cls(n, n, tuple(tuple(int(i == j) for j in range(n)) for i in range(n)))

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "IntMatrix":
        return cls(rows, cols, tuple((0,) * cols for _ in range(rows)))

    @classmethod
    def from_json(cls, obj) -> "IntMatrix":
        """Accepts {"rows", "cols", "entries"} or a bare list of rows."""
        if isinstance(obj, list):
            return cls.from_rows(obj)
        entries = tuple(tuple(int(x) for x in r) for r in obj["entries"])
        rows = int(obj.get("rows", len(entries)))
        cols = int(obj.get("cols", len(entries[0]) if entries else 0))
        return cls(rows, cols, entries)

    def to_json(self) -> dict:
        # large values go out as strings so no JSON reader truncates them
        def enc(x: int):
            return x if abs(x) < 2**53 else str(x)
        return {"rows": self.rows, "cols": self.cols,
                "entries": [[enc(x) for x in r] for r in self.entries]}

    def to_lists(self) -> list[list[int]]:
        return [list(r) for r in self.entries]

    @property
    def is_square(self) -> bool:
        return self.rows == self.cols

    def __getitem__(self, ij: tuple[int, int]) -> int:
        i, j = ij
        return self.entries[i][j]

    def transpose(self) -> "IntMatrix":
        return IntMatrix(self.cols, self.rows, tuple(zip(*self.entries)) if self.rows else ())

    def __matmul__(self, other: "IntMatrix") -> "IntMatrix":
        if self.cols != other.rows:
            raise DimensionError(f"cannot multiply {self.rows}x{self.cols} by {other.rows}x{other.cols}")
        cols_b = list(zip(*other.entries)) if other.rows else [()] * other.cols
        return IntMatrix(self.rows, other.cols, tuple(
            tuple(sum(a * b for a, b in zip(r, c)) for c in cols_b) for r in self.entries))

    def __add__(self, other: "IntMatrix") -> "IntMatrix":
        self._same_shape(other)
        return IntMatrix(self.rows, self.cols, tuple(
            tuple(a + b for a, b in zip(r, s)) for r, s in zip(self.entries, other.entries)))

    def __sub__(self, other: "IntMatrix") -> "IntMatrix":
        self._same_shape(other)
        return IntMatrix(self.rows, self.cols, tuple(
            tuple(a - b for a, b in zip(r, s)) for r, s in zip(self.entries, other.entries)))

    def __neg__(self) -> "IntMatrix":
        return IntMatrix(self.rows, self.cols, tuple(tuple(-a for a in r) for r in self.entries))

    def apply(self, vec: Sequence[int]) -> tuple[int, ...]:
        if len(vec) != self.cols:
            raise DimensionError("vector length does not match matrix columns")
        return tuple(sum(a * b for a, b in zip(r, vec)) for r in self.entries)

    def _same_shape(self, other: "IntMatrix"):
        if (self.rows, self.cols) != (other.rows, other.cols):
            raise DimensionError("shape mismatch")

    def __repr__(self):
        return f"IntMatrix({self.to_lists()})"


def as_int_matrix(m) -> IntMatrix:
    if isinstance(m, IntMatrix):
        return m
    return IntMatrix.from_rows(np.asarray(m, dtype=object).tolist() if isinstance(m, np.ndarray) else m)


def block_diag(blocks: Sequence[IntMatrix]) -> IntMatrix:
    n = sum(b.rows for b in blocks)
    m = sum(b.cols for b in blocks)
    out = [[0] * m for _ in range(n)]
    r0 = c0 = 0
    for b in blocks:
        for i in range(b.rows):
            for j in range(b.cols):
                out[r0 + i][c0 + j] = b.entries[i][j]
        r0 += b.rows
        c0 += b.cols
    return IntMatrix.from_rows(out, m)


def product_chain(mats: Sequence[IntMatrix]) -> IntMatrix:
    """Return mats[-1] @ ... @ mats[0], i.e. apply mats[0] first."""
    out = IntMatrix.identity(mats[0].rows)
    for m in mats:
        out = m @ out
    return out


# -- determinants -----------------------------------------------------------

def det_exact(M: IntMatrix) -> int:
    """Determinant by fraction-free (Bareiss) elimination."""
    M = as_int_matrix(M)
    if not M.is_square:
        raise DimensionError(f"determinant of non-square {M.rows}x{M.cols} matrix")
    n = M.rows
    if n == 0:
        return 1
    a = M.to_lists()
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            for i in range(k + 1, n):
                if a[i][k] != 0:
                    a[k], a[i] = a[i], a[k]
                    sign = -sign
                    break
            else:
                return 0
        akk = a[k][k]
        rk = a[k]
        for i in range(k + 1, n):
            ri = a[i]
            aik = ri[k]
            for j in range(k + 1, n):
                # exact division is guaranteed by Sylvester's identity
                ri[j] = (ri[j] * akk - aik * rk[j]) // prev
        prev = akk
    return sign * a[n - 1][n - 1]


def det_cofactor(M: IntMatrix) -> int:
    """Laplace expansion along the first row. Exponential; for small test oracles."""
    M = as_int_matrix(M)
    if not M.is_square:
        raise DimensionError("non-square")
    a = M.entries

    def rec(rows: tuple[int, ...], cols: tuple[int, ...]) -> int:
        if not rows:
            return 1
        r = rows[0]
        total = 0
        for idx, c in enumerate(cols):
            if a[r][c]:
                total += (-1) ** idx * a[r][c] * rec(rows[1:], cols[:idx] + cols[idx + 1:])
        return total

    return rec(tuple(range(M.rows)), tuple(range(M.cols)))


# -- Smith normal form ------------------------------------------------------

@dataclass(frozen=True)
class SmithDecomposition:
    U: IntMatrix
    D: IntMatrix
    V: IntMatrix
    U_inv: IntMatrix

    @property
    def diagonal(self) -> tuple[int, ...]:
        return tuple(self.D.entries[i][i] for i in range(min(self.D.rows, self.D.cols)))

    @property
    def rank(self) -> int:
        return sum(1 for d in self.diagonal if d != 0)


def smith_normal_form(M: IntMatrix) -> SmithDecomposition:
    """Unimodular U, V with U @ M @ V = D diagonal, d_1 | d_2 | ..., d_i >= 0.

    Pivot: smallest nonzero |entry| in the active block, lowest row then
    lowest column on ties.
    """
    M = as_int_matrix(M)
    m, n = M.rows, M.cols
    A = M.to_lists()
    U = IntMatrix.identity(m).to_lists()
    Ui = IntMatrix.identity(m).to_lists()
    V = IntMatrix.identity(n).to_lists()

    def row_swap(i, j):
        A[i], A[j] = A[j], A[i]
        U[i], U[j] = U[j], U[i]
        for r in Ui:
            r[i], r[j] = r[j], r[i]

    def col_swap(i, j):
        for r in A:
            r[i], r[j] = r[j], r[i]
        for r in V:
            r[i], r[j] = r[j], r[i]

    def row_add(dst, src, c):
        # row_dst += c * row_src
        if c == 0:
            return
        ad, as_ = A[dst], A[src]
        for k in range(n):
            ad[k] += c * as_[k]
        ud, us = U[dst], U[src]
        for k in range(m):
            ud[k] += c * us[k]
        for r in Ui:
            r[src] -= c * r[dst]

    def col_add(dst, src, c):
        if c == 0:
            return
        for r in A:
            r[dst] += c * r[src]
        for r in V:
            r[dst] += c * r[src]

    t = 0
    while t < min(m, n):
        while True:
            best = None
            for i in range(t, m):
                for j in range(t, n):
                    v = A[i][j]
                    if v and (best is None or abs(v) < best[0]):
                        best = (abs(v), i, j)
            if best is None:
                break
            _, pi, pj = best
            if pi != t:
                row_swap(pi, t)
            if pj != t:
                col_swap(pj, t)
            p = A[t][t]
            dirty = False
            for i in range(t + 1, m):
                if A[i][t]:
                    row_add(i, t, -(A[i][t] // p))
                    dirty |= A[i][t] != 0
            for j in range(t + 1, n):
                if A[t][j]:
                    col_add(j, t, -(A[t][j] // p))
                    dirty |= A[t][j] != 0
            if dirty:
                continue
            bad = next((i for i in range(t + 1, m)
                        if any(A[i][j] % p for j in range(t + 1, n))), None)
            if bad is None:
                break
            row_add(t, bad, 1)
        if best is None:
            break
        if A[t][t] < 0:
            A[t] = [-x for x in A[t]]
            U[t] = [-x for x in U[t]]
            for r in Ui:
                r[t] = -r[t]
        t += 1

    return SmithDecomposition(IntMatrix.from_rows(U, m), IntMatrix.from_rows(A, n),
                              IntMatrix.from_rows(V, n), IntMatrix.from_rows(Ui, m))


def invariant_factors(M: IntMatrix) -> tuple[int, ...]:
    return smith_normal_form(M).diagonal


# -- cokernels --------------------------------------------------------------

@dataclass(frozen=True)
class CokernelStructure:
    """Z^n / M Z^n for a square integer matrix M."""

    invariant_factors: tuple[int, ...]
    snf: SmithDecomposition

    @property
    def finite(self) -> bool:
        return all(d > 0 for d in self.invariant_factors)

    @property
    def order(self) -> int | str:
        if not self.finite:
            return "infinite"
        out = 1
        for d in self.invariant_factors:
            out *= d
        return out

    def key(self, w: Sequence[int]) -> tuple[int, ...]:
        """Canonical SNF coordinates of the coset of w: entry i lies in [0, d_i)."""
        y = self.snf.U.apply(w)
        return tuple(v % d if d else v for v, d in zip(y, self.invariant_factors))

    def reduce(self, w: Sequence[int]) -> tuple[int, ...]:
        """Canonical representative of w + M Z^n, in the original coordinates."""
        return self.snf.U_inv.apply(self.key(w))

    def same_coset(self, a: Sequence[int], b: Sequence[int]) -> bool:
        return self.key(a) == self.key(b)

    @property
    def coset_representatives(self) -> list[tuple[int, ...]] | None:
        if not self.finite:
            return None
        boxes = [range(d) for d in self.invariant_factors]
        return [self.snf.U_inv.apply(y) for y in itertools.product(*boxes)]


def cokernel(M: IntMatrix, n: int | None = None) -> CokernelStructure:
    M = as_int_matrix(M)
    if n is None:
        n = M.rows
    if M.rows != n or M.cols != n:
        raise DimensionError(f"cokernel expects an {n}x{n} matrix, got {M.rows}x{M.cols}")
    snf = smith_normal_form(M)
    return CokernelStructure(snf.diagonal, snf)


# -- block-cyclic assembly --------------------------------------------------

def cyclic_layout(blocks: Sequence, zero) -> list[list]:
    """Nested-list layout shared by the exact and floating assemblies.

    Block m sits in the top-right corner, blocks 1..m-1 on the block
    subdiagonal, matching (a_1..a_m) -> (f_m(a_m), f_1(a_1), ..., f_{m-1}(a_{m-1})).
    """
    m = len(blocks)
    if m == 0:
        raise DimensionError("need at least one block")
    shapes = {(len(b), len(b[0]) if len(b) else 0) for b in blocks}
    if len(shapes) != 1:
        raise DimensionError(f"blocks have mismatched shapes {sorted(shapes)}")
    k, k2 = shapes.pop()
    if k != k2:
        raise DimensionError("blocks must be square")
    out = [[zero] * (k * m) for _ in range(k * m)]
    for idx, b in enumerate(blocks):
        bi = 0 if idx == m - 1 else idx + 1
        bj = idx
        for i in range(k):
            for j in range(k):
                out[bi * k + i][bj * k + j] = b[i][j]
    return out


def block_cyclic(blocks: Sequence):
    """Assemble the block-cyclic matrix; IntMatrix in, IntMatrix out, else float ndarray."""
    if all(isinstance(b, IntMatrix) for b in blocks):
        return IntMatrix.from_rows(cyclic_layout([b.entries for b in blocks], 0))
    arrs = [np.asarray(b, dtype=float) for b in blocks]
    if any(a.ndim != 2 for a in arrs):
        raise DimensionError("blocks must be 2-d")
    return np.array(cyclic_layout([a.tolist() for a in arrs], 0.0), dtype=float)


@dataclass(frozen=True)
class CyclicDetReport:
    lhs: int
    rhs: int

    @property
    def equal(self) -> bool:
        return self.lhs == self.rhs


def cyclic_det_identity_check(blocks: Sequence[IntMatrix]) -> CyclicDetReport:
    """Compare det(I - N) for the assembled N with det(I - N_m ... N_1)."""
    blocks = [as_int_matrix(b) for b in blocks]
    N = block_cyclic(blocks)
    lhs = det_exact(IntMatrix.identity(N.rows) - N)
    C = product_chain(blocks)
    rhs = det_exact(IntMatrix.identity(C.rows) - C)
    return CyclicDetReport(lhs, rhs)


def float_det(M) -> float:
    """Double-precision determinant (LAPACK LU with partial pivoting)."""
    return float(np.linalg.det(np.asarray(M, dtype=float)))
