"""Pure-Python implementations of the hot kernels.

Same signatures and return layout as the compiled ``_kernels`` module. Used
when the extension is not built, or when NIELSEN_KIT_PURE=1.

Sweep chunks return
``(checked, failures, degenerate, overflow, failure_ids, overflow_ids)``;
a tuple id is the mixed-radix index into the slot pools, last slot fastest.
"""
from __future__ import annotations

import math

import numpy as np

from .exact_linalg import (IntMatrix, block_cyclic, block_diag, cokernel, det_exact,
                           invariant_factors, product_chain)

MAX_RECORDED = 16
# past this many classes the label map is checked structurally, not by listing cosets
ENUMERATION_LIMIT = 1 << 14


def _decode(tid: int, sizes) -> list[int]:
    out = []
    for size in reversed(sizes):
        tid, r = divmod(tid, size)
        out.append(r)
    return out[::-1]


def _sign(x: int) -> int:
    return (x > 0) - (x < 0)


def _nonunit(factors) -> tuple[int, ...]:
    return tuple(d for d in factors if d != 1)


def product_chunk(pool_data, pool_offset, pool_size, dims, start: int, stop: int, step: int = 1):
    pool_data = np.asarray(pool_data)
    k = len(dims)
    sizes = [int(x) for x in pool_size]
    checked = failures = degenerate = 0
    failure_ids: list[int] = []
    for tid in range(start, stop, step):
        checked += 1
        idx = _decode(tid, sizes)
        Ms = []
        for s in range(k):
            d = int(dims[s])
            off = int(pool_offset[s]) + idx[s] * d * d
            A = IntMatrix.from_rows(pool_data[off:off + d * d].reshape(d, d).tolist())
            Ms.append(IntMatrix.identity(d) - A)
        dets = [det_exact(M) for M in Ms]
        if any(x == 0 for x in dets):
            degenerate += 1
            continue
        facs = [cokernel(M) for M in Ms]
        big = block_diag(Ms)
        det_big = det_exact(big)
        cok = cokernel(big)
        ok = det_big == math.prod(dets) and cok.order == math.prod(abs(x) for x in dets)
        factor_index = math.prod(_sign(x) for x in dets)
        ok = ok and _sign(det_big) == factor_index
        if cok.order <= ENUMERATION_LIMIT:
            seen = set()
            for rep in cok.coset_representatives:
                key, pos = [], 0
                for s in range(k):
                    d = int(dims[s])
                    key.append(facs[s].key(rep[pos:pos + d]))
                    pos += d
                seen.add(tuple(key))
            ok = ok and len(seen) == cok.order
        # larger: block structure already makes the label map a product of factor bijections
        if not ok:
            failures += 1
            if len(failure_ids) < MAX_RECORDED:
                failure_ids.append(tid)
    return checked, failures, degenerate, 0, failure_ids, []


def cyclic_chunk(pool_data, pool_size: int, d: int, m: int, start: int, stop: int, step: int = 1):
    pool = np.asarray(pool_data).reshape(int(pool_size), d, d)
    checked = failures = degenerate = 0
    failure_ids: list[int] = []
    for tid in range(start, stop, step):
        checked += 1
        idx = _decode(tid, [int(pool_size)] * m)
        As = [IntMatrix.from_rows(pool[i].tolist()) for i in idx]
        C = product_chain(As)
        M1 = IntMatrix.identity(d) - C
        N = block_cyclic(As)
        M2 = IntMatrix.identity(N.rows) - N
        det1, det2 = det_exact(M1), det_exact(M2)
        cok1, cok2 = cokernel(M1), cokernel(M2)
        ok = det1 == det2 and _nonunit(cok1.invariant_factors) == _nonunit(cok2.invariant_factors)
        if det1 == 0:
            degenerate += 1
        else:
            ok = ok and abs(det1) == cok2.order and _sign(det1) == _sign(det2)
            if abs(det1) <= ENUMERATION_LIMIT:
                pad = (0,) * (N.rows - d)
                keys = {cok2.key(tuple(w) + pad) for w in cok1.coset_representatives}
                ok = ok and len(keys) == abs(det1)
            else:
                # w -> (w, 0, ..., 0) is onto iff [incl | I - N] has unit invariant factors;
                # equal orders then make it a bijection
                incl = [[int(i == j) for j in range(d)] for i in range(N.rows)]
                wide = IntMatrix.from_rows([a + list(b) for a, b in zip(incl, M2.to_lists())])
                inv = invariant_factors(wide)
                ok = ok and len(inv) == N.rows and all(x == 1 for x in inv)
        if not ok:
            failures += 1
            if len(failure_ids) < MAX_RECORDED:
                failure_ids.append(tid)
    return checked, failures, degenerate, 0, failure_ids, []


# -- Newton on trigonometric torus maps ----------------------------------------------

def trig_eval(A, mcoord, mk, msin, mcos, X):
    """Lift F(X) = X A^T + p(X) and Jacobian DF for a batch X of shape (S, n)."""
    X = np.asarray(X, dtype=float)
    A = np.asarray(A, dtype=float)
    S, n = X.shape
    F = X @ A.T
    J = np.broadcast_to(A, (S, n, n)).copy()
    if len(msin):
        mk = np.asarray(mk, dtype=float)
        theta = 2.0 * np.pi * (X @ mk.T)  # (S, M)
        s, c = np.sin(theta), np.cos(theta)
        val = s * msin + c * mcos
        dval = 2.0 * np.pi * (c * msin - s * mcos)  # (S, M)
        for j in range(len(msin)):
            cj = int(mcoord[j])
            F[:, cj] += val[:, j]
            J[:, cj, :] += dval[:, j, None] * mk[j][None, :]
    return F, J


def newton_vectorized(evaluate, seeds, targets, tol: float, maxiter: int):
    """Batched Newton on R(x) = F(x) - x - target.

    ``evaluate(X)`` returns (F, DF). Returns (x, status, residual) with status
    1 = converged, 0 = not converged, 2 = singular Jacobian.
    """
    X = np.array(seeds, dtype=float, copy=True)
    T = np.asarray(targets, dtype=float)
    S, n = X.shape
    status = np.zeros(S, dtype=np.int8)
    resid = np.full(S, np.inf)
    active = np.arange(S)
    eye = np.eye(n)
    for _ in range(maxiter + 1):
        if active.size == 0:
            break
        F, J = evaluate(X[active])
        R = F - X[active] - T[active]
        r = np.max(np.abs(R), axis=1)
        resid[active] = r
        done = r <= tol
        status[active[done]] = 1
        keep = ~done & np.isfinite(r)
        active, R, J = active[keep], R[keep], J[keep]
        if active.size == 0:
            break
        Jm = J - eye
        dets = np.linalg.det(Jm)
        sing = np.abs(dets) < 1e-300
        status[active[sing]] = 2
        active, R, Jm = active[~sing], R[~sing], Jm[~sing]
        if active.size == 0:
            break
        X[active] -= np.linalg.solve(Jm, R[:, :, None])[:, :, 0]
    return X, status, resid


def newton_batch(A, mcoord, mk, msin, mcos, seeds, targets, tol: float, maxiter: int):
    A = np.asarray(A, dtype=float)
    msin = np.asarray(msin, dtype=float)
    mcos = np.asarray(mcos, dtype=float)
    return newton_vectorized(lambda X: trig_eval(A, mcoord, mk, msin, mcos, X),
                             seeds, targets, tol, maxiter)
