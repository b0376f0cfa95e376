# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels: small-integer Smith forms for the torus sweeps, and
scalar Newton iterations for trigonometric torus maps.

Mirrors ``_kernels_py``. Integer work is int64 with a magnitude guard; a
tuple that trips the guard is reported in ``overflow_ids`` so the caller can
redo it exactly.
"""
import numpy as np

from libc.stdlib cimport malloc, realloc, free
from libc.string cimport memset
from libc.math cimport sin, cos, fabs, isfinite

ctypedef long long i64

cdef enum:
    MAXN = 12
    MAXSLOTS = 8
    MAX_RECORDED = 16

cdef i64 LIMIT = (<i64>1) << 31
cdef double TWO_PI = 6.283185307179586


cdef struct SNF:
    int n
    int overflow
    int sgn
    i64 det
    i64 A[MAXN * MAXN]
    i64 U[MAXN * MAXN]
    i64 Ui[MAXN * MAXN]
    i64 diag[MAXN]


cdef inline i64 iabs(i64 x) nogil:
    return -x if x < 0 else x


cdef inline void guard(SNF* s, i64 x) nogil:
    if x >= LIMIT or x <= -LIMIT:
        s.overflow = 1


cdef void row_swap(SNF* s, int i, int j) nogil:
    cdef int n = s.n, k
    cdef i64 t
    for k in range(n):
        t = s.A[i * n + k]; s.A[i * n + k] = s.A[j * n + k]; s.A[j * n + k] = t
        t = s.U[i * n + k]; s.U[i * n + k] = s.U[j * n + k]; s.U[j * n + k] = t
        t = s.Ui[k * n + i]; s.Ui[k * n + i] = s.Ui[k * n + j]; s.Ui[k * n + j] = t
    s.sgn = -s.sgn


cdef void col_swap(SNF* s, int i, int j) nogil:
    cdef int n = s.n, k
    cdef i64 t
    for k in range(n):
        t = s.A[k * n + i]; s.A[k * n + i] = s.A[k * n + j]; s.A[k * n + j] = t
    s.sgn = -s.sgn


cdef void row_add(SNF* s, int dst, int src, i64 c) nogil:
    # row_dst += c * row_src, mirrored as col_src -= c * col_dst on U^-1
    cdef int n = s.n, k
    if c == 0:
        return
    guard(s, c)
    if s.overflow:
        return
    for k in range(n):
        s.A[dst * n + k] += c * s.A[src * n + k]
        guard(s, s.A[dst * n + k])
        s.U[dst * n + k] += c * s.U[src * n + k]
        guard(s, s.U[dst * n + k])
        s.Ui[k * n + src] -= c * s.Ui[k * n + dst]
        guard(s, s.Ui[k * n + src])


cdef void col_add(SNF* s, int dst, int src, i64 c) nogil:
    cdef int n = s.n, k
    if c == 0:
        return
    guard(s, c)
    if s.overflow:
        return
    for k in range(n):
        s.A[k * n + dst] += c * s.A[k * n + src]
        guard(s, s.A[k * n + dst])


cdef void snf_square(SNF* s, int n) nogil:
    """Diagonalise s.A (n x n) in place; same pivot rule as the exact version."""
    cdef int i, j, t, pi, pj, bad, dirty, found
    cdef i64 best, v, p
    s.n = n
    s.overflow = 0
    s.sgn = 1
    for i in range(n):
        for j in range(n):
            s.U[i * n + j] = 1 if i == j else 0
            s.Ui[i * n + j] = 1 if i == j else 0
    t = 0
    found = 1
    while t < n and found:
        while True:
            found = 0
            best = 0
            pi = pj = 0
            for i in range(t, n):
                for j in range(t, n):
                    v = iabs(s.A[i * n + j])
                    if v != 0 and (found == 0 or v < best):
                        best = v; pi = i; pj = j; found = 1
            if not found:
                break
            if pi != t:
                row_swap(s, pi, t)
            if pj != t:
                col_swap(s, pj, t)
            p = s.A[t * n + t]
            dirty = 0
            for i in range(t + 1, n):
                if s.A[i * n + t] != 0:
                    row_add(s, i, t, -(s.A[i * n + t] / p))
                    if s.A[i * n + t] != 0:
                        dirty = 1
            for j in range(t + 1, n):
                if s.A[t * n + j] != 0:
                    col_add(s, j, t, -(s.A[t * n + j] / p))
                    if s.A[t * n + j] != 0:
                        dirty = 1
            if s.overflow:
                return
            if dirty:
                continue
            bad = -1
            for i in range(t + 1, n):
                for j in range(t + 1, n):
                    if s.A[i * n + j] % p != 0:
                        bad = i
                        break
                if bad >= 0:
                    break
            if bad < 0:
                break
            row_add(s, t, bad, 1)
            if s.overflow:
                return
        if not found:
            break
        if s.A[t * n + t] < 0:
            for j in range(n):
                s.A[t * n + j] = -s.A[t * n + j]
                s.U[t * n + j] = -s.U[t * n + j]
                s.Ui[j * n + t] = -s.Ui[j * n + t]
            s.sgn = -s.sgn
        t += 1
    s.det = s.sgn
    for i in range(n):
        s.diag[i] = s.A[i * n + i]
        s.det *= s.diag[i]
        guard(s, s.det)


cdef i64 coset_code(SNF* s, i64* w) nogil:
    """Mixed-radix code of the coset of w in Z^n / M Z^n (M nonsingular)."""
    cdef int n = s.n, i, j
    cdef i64 y, d, code = 0
    for i in range(n):
        d = s.diag[i]
        if d == 1:
            continue
        y = 0
        for j in range(n):
            y += s.U[i * n + j] * w[j]
        y %= d
        if y < 0:
            y += d
        code = code * d + y
    return code


cdef inline int isign(i64 x) nogil:
    return (x > 0) - (x < 0)


cdef int ensure(unsigned char** buf, i64* cap, i64 need) nogil:
    cdef unsigned char* nb
    if need <= cap[0]:
        return 1
    nb = <unsigned char*> realloc(buf[0], need)
    if nb == NULL:
        return 0
    buf[0] = nb
    cap[0] = need
    return 1


cdef int enumerate_box(SNF* s, i64* y, int n) nogil:
    """Advance y through prod [0, d_i); returns 0 when wrapped around."""
    cdef int i = n - 1
    while i >= 0:
        y[i] += 1
        if y[i] < s.diag[i]:
            return 1
        y[i] = 0
        i -= 1
    return 0


cdef void apply_ui(SNF* s, i64* y, i64* w) nogil:
    cdef int n = s.n, i, j
    for i in range(n):
        w[i] = 0
        for j in range(n):
            w[i] += s.Ui[i * n + j] * y[j]


def product_chunk(const i64[::1] pool_data, const i64[::1] pool_offset, const i64[::1] pool_size,
                  const i64[::1] dims, i64 start, i64 stop, i64 step=1):
    cdef int k = dims.shape[0]
    if k > MAXSLOTS:
        raise ValueError("too many factors")
    cdef int s, i, j, d, D, pos, off, ok, fail_rec = 0, over_rec = 0, signprod, more
    cdef i64 tid, rem, detprod, absprod, order, code, a
    cdef i64 checked = 0, failures = 0, degenerate = 0, overflow = 0, cap = 0
    cdef i64 idx[MAXSLOTS]
    cdef i64 radix[MAXSLOTS]
    cdef i64 y[MAXN]
    cdef i64 w[MAXN]
    cdef i64 fail_ids[MAX_RECORDED]
    cdef i64 over_ids[MAX_RECORDED]
    cdef unsigned char* seen = NULL
    cdef SNF* fs
    cdef SNF* big
    D = 0
    for s in range(k):
        D += dims[s]
    if D > MAXN:
        raise ValueError("product dimension too large for the compiled kernel")
    fs = <SNF*> malloc(MAXSLOTS * sizeof(SNF))
    big = <SNF*> malloc(sizeof(SNF))
    if fs == NULL or big == NULL:
        free(fs); free(big)
        raise MemoryError()
    with nogil:
        tid = start
        while tid < stop:
            checked += 1
            rem = tid
            for s in range(k - 1, -1, -1):
                idx[s] = rem % pool_size[s]
                rem = rem / pool_size[s]
            for i in range(D * D):
                big.A[i] = 0
            pos = 0
            for s in range(k):
                d = dims[s]
                off = pool_offset[s] + idx[s] * d * d
                for i in range(d):
                    for j in range(d):
                        a = (1 if i == j else 0) - pool_data[off + i * d + j]
                        fs[s].A[i * d + j] = a
                        big.A[(pos + i) * D + pos + j] = a
                pos += d
            detprod = 1
            absprod = 1
            signprod = 1
            ok = 1
            for s in range(k):
                snf_square(&fs[s], dims[s])
                if fs[s].overflow:
                    ok = -1
                    break
                detprod *= fs[s].det
                absprod *= iabs(fs[s].det)
                signprod *= isign(fs[s].det)
                radix[s] = iabs(fs[s].det)
            if ok == 1 and detprod == 0:
                degenerate += 1
                tid += step
                continue
            if ok == 1:
                snf_square(big, D)
                if big.overflow:
                    ok = -1
            if ok == 1:
                order = 1
                for i in range(D):
                    order *= big.diag[i]
                if big.det != detprod or order != absprod:
                    ok = 0
                if ok == 1 and not ensure(&seen, &cap, order):
                    ok = -1
            if ok == 1:
                memset(seen, 0, order)
                for i in range(D):
                    y[i] = 0
                more = 1
                while more:
                    apply_ui(big, y, w)
                    code = 0
                    pos = 0
                    for s in range(k):
                        code = code * radix[s] + coset_code(&fs[s], &w[pos])
                        pos += dims[s]
                    if code < 0 or code >= order or seen[code]:
                        ok = 0
                    else:
                        seen[code] = 1
                    if isign(big.det) != signprod:
                        ok = 0
                    more = enumerate_box(big, y, D)
            if ok == -1:
                overflow += 1
                if over_rec < MAX_RECORDED:
                    over_ids[over_rec] = tid
                    over_rec += 1
            elif ok == 0:
                failures += 1
                if fail_rec < MAX_RECORDED:
                    fail_ids[fail_rec] = tid
                    fail_rec += 1
            tid += step
    free(fs)
    free(big)
    free(seen)
    return (checked, failures, degenerate, overflow,
            [fail_ids[i] for i in range(fail_rec)], [over_ids[i] for i in range(over_rec)])


cdef int nonunit_equal(SNF* a, SNF* b) nogil:
    cdef int i = 0, j = 0
    while True:
        while i < a.n and a.diag[i] == 1:
            i += 1
        while j < b.n and b.diag[j] == 1:
            j += 1
        if i == a.n or j == b.n:
            return i == a.n and j == b.n
        if a.diag[i] != b.diag[j]:
            return 0
        i += 1
        j += 1


def cyclic_chunk(const i64[::1] pool_data, i64 pool_size, int d, int m,
                 i64 start, i64 stop, i64 step=1):
    if m < 1 or m > MAXSLOTS or m * d > MAXN:
        raise ValueError("cycle too large for the compiled kernel")
    cdef int s, i, j, t, D = m * d, ok, fail_rec = 0, over_rec = 0, more, bi, bj
    cdef i64 tid, rem, order, code, acc
    cdef i64 checked = 0, failures = 0, degenerate = 0, overflow = 0, cap = 0
    cdef i64 idx[MAXSLOTS]
    cdef i64 C[MAXN * MAXN]
    cdef i64 T[MAXN * MAXN]
    cdef i64 y[MAXN]
    cdef i64 w[MAXN]
    cdef i64 z[MAXN]
    cdef i64 fail_ids[MAX_RECORDED]
    cdef i64 over_ids[MAX_RECORDED]
    cdef unsigned char* seen = NULL
    cdef SNF* s1 = <SNF*> malloc(sizeof(SNF))
    cdef SNF* s2 = <SNF*> malloc(sizeof(SNF))
    if s1 == NULL or s2 == NULL:
        free(s1); free(s2)
        raise MemoryError()
    with nogil:
        tid = start
        while tid < stop:
            checked += 1
            rem = tid
            for s in range(m - 1, -1, -1):
                idx[s] = rem % pool_size
                rem = rem / pool_size
            ok = 1
            # C = A_m ... A_1
            for i in range(d):
                for j in range(d):
                    C[i * d + j] = 1 if i == j else 0
            for s in range(m):
                for i in range(d):
                    for j in range(d):
                        acc = 0
                        for t in range(d):
                            acc += pool_data[idx[s] * d * d + i * d + t] * C[t * d + j]
                        T[i * d + j] = acc
                        if acc >= LIMIT or acc <= -LIMIT:
                            ok = -1
                for i in range(d * d):
                    C[i] = T[i]
            for i in range(d):
                for j in range(d):
                    s1.A[i * d + j] = (1 if i == j else 0) - C[i * d + j]
            for i in range(D * D):
                s2.A[i] = 0
            for i in range(D):
                s2.A[i * D + i] = 1
            for s in range(m):
                bi = 0 if s == m - 1 else s + 1
                for i in range(d):
                    for j in range(d):
                        s2.A[(bi * d + i) * D + s * d + j] -= pool_data[idx[s] * d * d + i * d + j]
            if ok == 1:
                snf_square(s1, d)
                snf_square(s2, D)
                if s1.overflow or s2.overflow:
                    ok = -1
            if ok == 1:
                if s1.det != s2.det or not nonunit_equal(s1, s2):
                    ok = 0
                if s1.det == 0:
                    degenerate += 1
                else:
                    order = iabs(s2.det)
                    if not ensure(&seen, &cap, order):
                        ok = -1
                    elif ok == 1:
                        memset(seen, 0, order)
                        for i in range(d):
                            y[i] = 0
                        for i in range(D):
                            z[i] = 0
                        more = 1
                        while more:
                            apply_ui(s1, y, w)
                            for i in range(d):
                                z[i] = w[i]
                            code = coset_code(s2, z)
                            if code < 0 or code >= order or seen[code]:
                                ok = 0
                            else:
                                seen[code] = 1
                            more = enumerate_box(s1, y, d)
                        if isign(s1.det) != isign(s2.det):
                            ok = 0
            if ok == -1:
                overflow += 1
                if over_rec < MAX_RECORDED:
                    over_ids[over_rec] = tid
                    over_rec += 1
            elif ok == 0:
                failures += 1
                if fail_rec < MAX_RECORDED:
                    fail_ids[fail_rec] = tid
                    fail_rec += 1
            tid += step
    free(s1)
    free(s2)
    free(seen)
    return (checked, failures, degenerate, overflow,
            [fail_ids[i] for i in range(fail_rec)], [over_ids[i] for i in range(over_rec)])


# -- Newton ------------------------------------------------------------------

cdef int solve_inplace(double* J, double* r, int n) nogil:
    """Solve J x = r by partial-pivot elimination; x overwrites r. 0 if singular."""
    cdef int i, j, k, p
    cdef double best, f, t
    for k in range(n):
        p = k
        best = fabs(J[k * n + k])
        for i in range(k + 1, n):
            if fabs(J[i * n + k]) > best:
                best = fabs(J[i * n + k]); p = i
        if best < 1e-300:
            return 0
        if p != k:
            for j in range(n):
                t = J[k * n + j]; J[k * n + j] = J[p * n + j]; J[p * n + j] = t
            t = r[k]; r[k] = r[p]; r[p] = t
        for i in range(k + 1, n):
            f = J[i * n + k] / J[k * n + k]
            if f != 0.0:
                for j in range(k, n):
                    J[i * n + j] -= f * J[k * n + j]
                r[i] -= f * r[k]
    for i in range(n - 1, -1, -1):
        t = r[i]
        for j in range(i + 1, n):
            t -= J[i * n + j] * r[j]
        r[i] = t / J[i * n + i]
    return 1


def newton_batch(A, mcoord, mk, msin, mcos, seeds, targets, double tol, int maxiter):
    cdef double[:, ::1] Av = np.ascontiguousarray(A, dtype=np.float64)
    cdef i64[::1] mc = np.ascontiguousarray(mcoord, dtype=np.int64)
    cdef double[:, ::1] mkv = np.ascontiguousarray(np.asarray(mk, dtype=np.float64).reshape(len(mc), Av.shape[0]))
    cdef double[::1] ms = np.ascontiguousarray(msin, dtype=np.float64)
    cdef double[::1] mco = np.ascontiguousarray(mcos, dtype=np.float64)
    cdef double[:, ::1] X = np.array(seeds, dtype=np.float64, order="C", copy=True)
    cdef double[:, ::1] Tg = np.ascontiguousarray(targets, dtype=np.float64)
    cdef int n = Av.shape[0], S = X.shape[0], M = mc.shape[0]
    if n > MAXN:
        raise ValueError("dimension too large for the compiled kernel")
    out_status = np.zeros(S, dtype=np.int8)
    out_resid = np.full(S, np.inf)
    cdef signed char[::1] status = out_status
    cdef double[::1] resid = out_resid
    cdef int si, it, i, j, q, c
    cdef double theta, sv, cv, val, dval, r, ri
    cdef double F[MAXN]
    cdef double J[MAXN * MAXN]
    with nogil:
        for si in range(S):
            for it in range(maxiter + 1):
                for i in range(n):
                    F[i] = 0.0
                    for j in range(n):
                        F[i] += Av[i, j] * X[si, j]
                        J[i * n + j] = Av[i, j] - (1.0 if i == j else 0.0)
                for q in range(M):
                    theta = 0.0
                    for j in range(n):
                        theta += mkv[q, j] * X[si, j]
                    theta *= TWO_PI
                    sv = sin(theta)
                    cv = cos(theta)
                    c = <int> mc[q]
                    F[c] += sv * ms[q] + cv * mco[q]
                    dval = TWO_PI * (cv * ms[q] - sv * mco[q])
                    for j in range(n):
                        J[c * n + j] += dval * mkv[q, j]
                r = 0.0
                for i in range(n):
                    F[i] = F[i] - X[si, i] - Tg[si, i]
                    ri = fabs(F[i])
                    if ri > r or not isfinite(ri):
                        r = ri
                resid[si] = r
                if r <= tol:
                    status[si] = 1
                    break
                if not isfinite(r):
                    break
                if not solve_inplace(J, F, n):
                    status[si] = 2
                    break
                for i in range(n):
                    X[si, i] -= F[i]
    return np.asarray(X), out_status, out_resid
