# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled orbit enumeration kernel.

Mirrors _kernel_py.run_census with the identical floating-point evaluation
order (same hi/lo double-double multiply, same displacement expressions,
same grid and tolerances, same heap tie-breaking), so both backends produce
bit-identical results.  Requires compilation with -ffp-contract=off so the
Dekker splits stay exact.  See _kernel_py for the algorithm description.
"""

from libc.math cimport fabs, floor, log, sqrt
from libc.stdlib cimport free, malloc, realloc
from libc.string cimport memcpy

import numpy as np

cdef double GRID_DELTA = 1e-5
cdef double MATCH_TOL = 1e-7
cdef double EDGE_FRAC = 2.0 * 1e-7 / 1e-5
cdef double SPLIT = 134217729.0  # Veltkamp splitter, 2**27 + 1


cdef inline double prod_err(double x, double y, double p):
    """Rounding error of the double product p = x * y (Dekker)."""
    cdef double t, xh, xl, yh, yl
    t = SPLIT * x
    xh = t - (t - x)
    xl = x - xh
    t = SPLIT * y
    yh = t - (t - y)
    yl = y - yh
    return ((xh * yh - p) + xh * yl + xl * yh) + xl * yl


cdef inline void dd_entry(double uh, double ul, double vh, double vl,
                          double p, double q, double *rh, double *rl):
    """(uh + ul) * p + (vh + vl) * q as a hi/lo pair."""
    cdef double p1, p2, e1, e2, s, t, e, hi
    p1 = uh * p
    e1 = prod_err(uh, p, p1)
    p2 = vh * q
    e2 = prod_err(vh, q, p2)
    s = p1 + p2
    t = s - p1
    e = (p1 - (s - t)) + (p2 - t)
    e = e + ((e1 + e2) + ul * p + vl * q)
    hi = s + e
    rh[0] = hi
    rl[0] = e - (hi - s)


cdef struct Kern:
    # elements
    Py_ssize_t n
    Py_ssize_t cap
    double *mats          # 8 per element: hi entries then lo, sign-canonical
    double *disp
    long long *enext      # dedup chain link
    long long *woff       # cap + 1 word offsets
    signed char *wbuf
    Py_ssize_t wlen
    Py_ssize_t wcap
    # distinct grid cells
    Py_ssize_t ncells
    Py_ssize_t ccap
    long long *ckey       # 4 per cell
    long long *chead      # first element in chain
    # open-addressing table over cells
    Py_ssize_t tsize      # power of two
    long long *tslot      # cell index or -1
    # binary heap of (disp, element index)
    Py_ssize_t hn
    double *hd
    long long *hi


cdef void kern_free(Kern *K):
    free(K.mats); free(K.disp); free(K.enext); free(K.woff); free(K.wbuf)
    free(K.ckey); free(K.chead); free(K.tslot); free(K.hd); free(K.hi)


cdef int kern_init(Kern *K) except -1:
    cdef Py_ssize_t i
    K.n = 0
    K.cap = 4096
    K.wlen = 0
    K.wcap = 1 << 16
    K.ncells = 0
    K.ccap = 4096
    K.tsize = 1 << 13
    K.hn = 0
    K.mats = <double *>malloc(8 * K.cap * sizeof(double))
    K.disp = <double *>malloc(K.cap * sizeof(double))
    K.enext = <long long *>malloc(K.cap * sizeof(long long))
    K.woff = <long long *>malloc((K.cap + 1) * sizeof(long long))
    K.wbuf = <signed char *>malloc(K.wcap)
    K.ckey = <long long *>malloc(4 * K.ccap * sizeof(long long))
    K.chead = <long long *>malloc(K.ccap * sizeof(long long))
    K.tslot = <long long *>malloc(K.tsize * sizeof(long long))
    K.hd = <double *>malloc(K.cap * sizeof(double))
    K.hi = <long long *>malloc(K.cap * sizeof(long long))
    if (K.mats == NULL or K.disp == NULL or K.enext == NULL or K.woff == NULL
            or K.wbuf == NULL or K.ckey == NULL or K.chead == NULL
            or K.tslot == NULL or K.hd == NULL or K.hi == NULL):
        kern_free(K)
        raise MemoryError()
    for i in range(K.tsize):
        K.tslot[i] = -1
    K.woff[0] = 0
    return 0


cdef int ensure_elems(Kern *K, Py_ssize_t need) except -1:
    if need <= K.cap:
        return 0
    cdef Py_ssize_t cap = K.cap
    while cap < need:
        cap *= 2
    K.mats = <double *>realloc(K.mats, 8 * cap * sizeof(double))
    K.disp = <double *>realloc(K.disp, cap * sizeof(double))
    K.enext = <long long *>realloc(K.enext, cap * sizeof(long long))
    K.woff = <long long *>realloc(K.woff, (cap + 1) * sizeof(long long))
    K.hd = <double *>realloc(K.hd, cap * sizeof(double))
    K.hi = <long long *>realloc(K.hi, cap * sizeof(long long))
    if (K.mats == NULL or K.disp == NULL or K.enext == NULL or K.woff == NULL
            or K.hd == NULL or K.hi == NULL):
        raise MemoryError()
    K.cap = cap
    return 0


cdef int ensure_words(Kern *K, Py_ssize_t need) except -1:
    if need <= K.wcap:
        return 0
    cdef Py_ssize_t cap = K.wcap
    while cap < need:
        cap *= 2
    K.wbuf = <signed char *>realloc(K.wbuf, cap)
    if K.wbuf == NULL:
        raise MemoryError()
    K.wcap = cap
    return 0


cdef inline unsigned long long _mix(unsigned long long x):
    x ^= x >> 33
    x *= 0xff51afd7ed558ccdULL
    x ^= x >> 33
    x *= 0xc4ceb9fe1a85ec53ULL
    x ^= x >> 33
    return x


cdef inline unsigned long long _hash4(long long q0, long long q1,
                                      long long q2, long long q3):
    cdef unsigned long long h = 0x9e3779b97f4a7c15ULL
    h = _mix(h ^ <unsigned long long>q0)
    h = _mix(h + <unsigned long long>q1)
    h = _mix(h ^ <unsigned long long>q2)
    h = _mix(h + <unsigned long long>q3)
    return h


cdef long long find_cell(Kern *K, long long q0, long long q1,
                         long long q2, long long q3):
    cdef unsigned long long mask = <unsigned long long>(K.tsize - 1)
    cdef unsigned long long pos = _hash4(q0, q1, q2, q3) & mask
    cdef long long cell
    while True:
        cell = K.tslot[pos]
        if cell < 0:
            return -1
        if (K.ckey[4 * cell] == q0 and K.ckey[4 * cell + 1] == q1
                and K.ckey[4 * cell + 2] == q2 and K.ckey[4 * cell + 3] == q3):
            return cell
        pos = (pos + 1) & mask


cdef int rehash(Kern *K) except -1:
    cdef Py_ssize_t newsize = K.tsize * 2
    cdef long long *slot = <long long *>malloc(newsize * sizeof(long long))
    cdef Py_ssize_t i
    cdef unsigned long long mask, pos
    if slot == NULL:
        raise MemoryError()
    for i in range(newsize):
        slot[i] = -1
    mask = <unsigned long long>(newsize - 1)
    for i in range(K.ncells):
        pos = _hash4(K.ckey[4 * i], K.ckey[4 * i + 1],
                     K.ckey[4 * i + 2], K.ckey[4 * i + 3]) & mask
        while slot[pos] >= 0:
            pos = (pos + 1) & mask
        slot[pos] = i
    free(K.tslot)
    K.tslot = slot
    K.tsize = newsize
    return 0


cdef long long get_or_make_cell(Kern *K, long long q0, long long q1,
                                long long q2, long long q3) except -2:
    cdef long long cell = find_cell(K, q0, q1, q2, q3)
    cdef unsigned long long mask, pos
    if cell >= 0:
        return cell
    if 5 * (K.ncells + 1) >= 3 * K.tsize:
        rehash(K)
    if K.ncells == K.ccap:
        K.ccap *= 2
        K.ckey = <long long *>realloc(K.ckey, 4 * K.ccap * sizeof(long long))
        K.chead = <long long *>realloc(K.chead, K.ccap * sizeof(long long))
        if K.ckey == NULL or K.chead == NULL:
            raise MemoryError()
    cell = K.ncells
    K.ncells += 1
    K.ckey[4 * cell] = q0
    K.ckey[4 * cell + 1] = q1
    K.ckey[4 * cell + 2] = q2
    K.ckey[4 * cell + 3] = q3
    K.chead[cell] = -1
    mask = <unsigned long long>(K.tsize - 1)
    pos = _hash4(q0, q1, q2, q3) & mask
    while K.tslot[pos] >= 0:
        pos = (pos + 1) & mask
    K.tslot[pos] = cell
    return cell


cdef inline int cell_opts(double x, long long *out):
    cdef double f = x / GRID_DELTA + 0.5
    cdef double c = floor(f)
    cdef double frac = f - c
    out[0] = <long long>c
    if frac < EDGE_FRAC:
        out[1] = <long long>c - 1
        return 2
    if frac > 1.0 - EDGE_FRAC:
        out[1] = <long long>c + 1
        return 2
    return 1


cdef inline double max4(double x0, double x1, double x2, double x3):
    cdef double m = x0
    if x1 > m:
        m = x1
    if x2 > m:
        m = x2
    if x3 > m:
        m = x3
    return m


cdef bint is_dup(Kern *K, double a, double b, double c, double d):
    """Whether a sign-canonical matrix is already stored (up to sign)."""
    cdef long long o0[2]
    cdef long long o1[2]
    cdef long long o2[2]
    cdef long long o3[2]
    cdef int n0, n1, n2, n3, i0, i1, i2, i3, sgn
    cdef double sa, sb, sc, sd, ma, mb, mc, md
    cdef long long cell, e
    for sgn in range(2):
        if sgn == 0:
            sa = a; sb = b; sc = c; sd = d
        else:
            sa = -a; sb = -b; sc = -c; sd = -d
        n0 = cell_opts(sa, o0)
        n1 = cell_opts(sb, o1)
        n2 = cell_opts(sc, o2)
        n3 = cell_opts(sd, o3)
        for i0 in range(n0):
            for i1 in range(n1):
                for i2 in range(n2):
                    for i3 in range(n3):
                        cell = find_cell(K, o0[i0], o1[i1], o2[i2], o3[i3])
                        if cell < 0:
                            continue
                        e = K.chead[cell]
                        while e >= 0:
                            ma = K.mats[8 * e]
                            mb = K.mats[8 * e + 1]
                            mc = K.mats[8 * e + 2]
                            md = K.mats[8 * e + 3]
                            if (max4(fabs(a - ma), fabs(b - mb), fabs(c - mc),
                                     fabs(d - md)) <= MATCH_TOL
                                    or max4(fabs(a + ma), fabs(b + mb),
                                            fabs(c + mc), fabs(d + md)) <= MATCH_TOL):
                                return 1
                            e = K.enext[e]
    return 0


cdef long long insert_elem(Kern *K, double *m8, double dval,
                           const signed char *word, Py_ssize_t wlen) except -1:
    cdef long long idx = K.n
    cdef long long cell
    ensure_elems(K, K.n + 1)
    ensure_words(K, K.wlen + wlen)
    memcpy(K.mats + 8 * idx, m8, 8 * sizeof(double))
    K.disp[idx] = dval
    if wlen > 0:
        memcpy(K.wbuf + K.wlen, word, wlen)
    K.wlen += wlen
    K.woff[idx + 1] = K.wlen
    cell = get_or_make_cell(
        K,
        <long long>floor(m8[0] / GRID_DELTA + 0.5),
        <long long>floor(m8[1] / GRID_DELTA + 0.5),
        <long long>floor(m8[2] / GRID_DELTA + 0.5),
        <long long>floor(m8[3] / GRID_DELTA + 0.5),
    )
    K.enext[idx] = K.chead[cell]
    K.chead[cell] = idx
    K.n += 1
    return idx


cdef inline bint heap_less(double d1, long long i1, double d2, long long i2):
    if d1 < d2:
        return 1
    if d1 == d2 and i1 < i2:
        return 1
    return 0


cdef void heap_push(Kern *K, double d, long long i):
    # capacity is grown alongside the element arrays
    cdef Py_ssize_t pos = K.hn
    cdef Py_ssize_t parent
    K.hn += 1
    while pos > 0:
        parent = (pos - 1) >> 1
        if heap_less(d, i, K.hd[parent], K.hi[parent]):
            K.hd[pos] = K.hd[parent]
            K.hi[pos] = K.hi[parent]
            pos = parent
        else:
            break
    K.hd[pos] = d
    K.hi[pos] = i


cdef void heap_pop(Kern *K, double *d, long long *i):
    d[0] = K.hd[0]
    i[0] = K.hi[0]
    K.hn -= 1
    cdef double dl = K.hd[K.hn]
    cdef long long il = K.hi[K.hn]
    cdef Py_ssize_t pos = 0
    cdef Py_ssize_t child
    while True:
        child = 2 * pos + 1
        if child >= K.hn:
            break
        if child + 1 < K.hn and heap_less(K.hd[child + 1], K.hi[child + 1],
                                          K.hd[child], K.hi[child]):
            child += 1
        if heap_less(K.hd[child], K.hi[child], dl, il):
            K.hd[pos] = K.hd[child]
            K.hi[pos] = K.hi[child]
            pos = child
        else:
            break
    K.hd[pos] = dl
    K.hi[pos] = il


def run_census(gen_entries, seed_words, double cutoff, long long budget):
    """Drop-in replacement for _kernel_py.run_census (same contract)."""
    gens_np = np.ascontiguousarray(np.asarray(gen_entries, dtype=np.float64))
    if gens_np.ndim != 2 or gens_np.shape[1] != 4:
        raise ValueError("generator entries must form an (n, 4) table")

    cdef double[:, ::1] G = gens_np
    cdef int nl = <int>gens_np.shape[0]
    cdef int half = nl // 2
    cdef Kern K
    cdef bint overflow = 0
    cdef long long n_children = 0
    cdef long long n_beyond = 0
    cdef long long n_dup = 0
    cdef double m8[8]
    cdef double c8[8]
    cdef double s, dval, d0, pivot, mag
    cdef long long idx, i, cell
    cdef Py_ssize_t wl, off, n, r
    cdef int j, k, skip, letter
    cdef const signed char *wp
    cdef double[:, ::1] mats_v
    cdef double[::1] disp_v
    cdef long long[::1] offs_v
    cdef signed char[::1] arena_v

    if nl != 2 * half or half == 0:
        raise ValueError("generator list must hold generators then inverses")
    seeds = [bytes(w) for w in seed_words]
    if not seeds or seeds[0] != b"":
        raise ValueError("first seed must be the empty (identity) word")

    kern_init(&K)
    try:
        # seed phase: evaluate each word left to right in hi/lo arithmetic
        for w in seeds:
            m8[0] = 1.0; m8[1] = 0.0; m8[2] = 0.0; m8[3] = 1.0
            m8[4] = 0.0; m8[5] = 0.0; m8[6] = 0.0; m8[7] = 0.0
            for letter_obj in w:
                letter = <int>letter_obj
                if letter < 0 or letter >= nl:
                    raise ValueError("seed letter out of range")
                dd_entry(m8[0], m8[4], m8[1], m8[5],
                         G[letter, 0], G[letter, 2], &c8[0], &c8[4])
                dd_entry(m8[0], m8[4], m8[1], m8[5],
                         G[letter, 1], G[letter, 3], &c8[1], &c8[5])
                dd_entry(m8[2], m8[6], m8[3], m8[7],
                         G[letter, 0], G[letter, 2], &c8[2], &c8[6])
                dd_entry(m8[2], m8[6], m8[3], m8[7],
                         G[letter, 1], G[letter, 3], &c8[3], &c8[7])
                memcpy(m8, c8, 8 * sizeof(double))
            # sign canonicalization: largest-magnitude entry (first on ties) >= 0
            pivot = m8[0]
            mag = fabs(m8[0])
            if fabs(m8[1]) > mag:
                pivot = m8[1]; mag = fabs(m8[1])
            if fabs(m8[2]) > mag:
                pivot = m8[2]; mag = fabs(m8[2])
            if fabs(m8[3]) > mag:
                pivot = m8[3]
            if pivot < 0.0:
                for k in range(8):
                    m8[k] = -m8[k]
            if is_dup(&K, m8[0], m8[1], m8[2], m8[3]):
                raise ValueError("seed words contain duplicate group elements")
            s = 0.5 * (m8[0] * m8[0] + m8[1] * m8[1] + m8[2] * m8[2] + m8[3] * m8[3])
            if s < 1.0:
                s = 1.0
            dval = log(s + sqrt(s * s - 1.0))
            if dval > cutoff:
                raise ValueError("seed word lies beyond the cutoff")
            if K.n >= budget:
                overflow = 1
                break
            if len(w) > 0:
                wp = <const signed char *><const char *>w
                idx = insert_elem(&K, m8, dval, wp, len(w))
            else:
                idx = insert_elem(&K, m8, dval, NULL, 0)
            heap_push(&K, dval, idx)

        # expansion phase
        while K.hn > 0 and not overflow:
            heap_pop(&K, &d0, &i)
            off = K.woff[i]
            wl = K.woff[i + 1] - off
            if wl > 0:
                skip = (K.wbuf[off + wl - 1] + half) % nl
            else:
                skip = -1
            memcpy(m8, K.mats + 8 * i, 8 * sizeof(double))
            for j in range(nl):
                if j == skip:
                    continue
                dd_entry(m8[0], m8[4], m8[1], m8[5],
                         G[j, 0], G[j, 2], &c8[0], &c8[4])
                dd_entry(m8[0], m8[4], m8[1], m8[5],
                         G[j, 1], G[j, 3], &c8[1], &c8[5])
                dd_entry(m8[2], m8[6], m8[3], m8[7],
                         G[j, 0], G[j, 2], &c8[2], &c8[6])
                dd_entry(m8[2], m8[6], m8[3], m8[7],
                         G[j, 1], G[j, 3], &c8[3], &c8[7])
                n_children += 1
                s = 0.5 * (c8[0] * c8[0] + c8[1] * c8[1] + c8[2] * c8[2] + c8[3] * c8[3])
                if s < 1.0:
                    s = 1.0
                dval = log(s + sqrt(s * s - 1.0))
                if dval > cutoff:
                    n_beyond += 1
                    continue
                pivot = c8[0]
                mag = fabs(c8[0])
                if fabs(c8[1]) > mag:
                    pivot = c8[1]; mag = fabs(c8[1])
                if fabs(c8[2]) > mag:
                    pivot = c8[2]; mag = fabs(c8[2])
                if fabs(c8[3]) > mag:
                    pivot = c8[3]
                if pivot < 0.0:
                    for k in range(8):
                        c8[k] = -c8[k]
                if is_dup(&K, c8[0], c8[1], c8[2], c8[3]):
                    n_dup += 1
                    continue
                if K.n >= budget:
                    overflow = 1
                    break
                # inline insert: the child word is parent word + letter j, and
                # both live in wbuf, so grow the buffer before taking offsets
                ensure_words(&K, K.wlen + wl + 1)
                ensure_elems(&K, K.n + 1)
                idx = K.n
                memcpy(K.mats + 8 * idx, c8, 8 * sizeof(double))
                K.disp[idx] = dval
                if wl > 0:
                    memcpy(K.wbuf + K.wlen, K.wbuf + off, wl)
                K.wbuf[K.wlen + wl] = <signed char>j
                K.wlen += wl + 1
                K.woff[idx + 1] = K.wlen
                cell = get_or_make_cell(
                    &K,
                    <long long>floor(c8[0] / GRID_DELTA + 0.5),
                    <long long>floor(c8[1] / GRID_DELTA + 0.5),
                    <long long>floor(c8[2] / GRID_DELTA + 0.5),
                    <long long>floor(c8[3] / GRID_DELTA + 0.5),
                )
                K.enext[idx] = K.chead[cell]
                K.chead[cell] = idx
                K.n += 1
                heap_push(&K, dval, idx)

        # package results; search-only structures go first to cut the peak
        free(K.enext); K.enext = NULL
        free(K.ckey); K.ckey = NULL
        free(K.chead); K.chead = NULL
        free(K.tslot); K.tslot = NULL
        free(K.hd); K.hd = NULL
        free(K.hi); K.hi = NULL
        n = K.n
        mats_np = np.empty((n, 4), dtype=np.float64)
        disp_np = np.empty(n, dtype=np.float64)
        offs_np = np.empty(n + 1, dtype=np.int64)
        arena_np = np.empty(K.wlen, dtype=np.int8)
        if n > 0:
            mats_v = mats_np
            disp_v = disp_np
            for r in range(n):
                mats_v[r, 0] = K.mats[8 * r]
                mats_v[r, 1] = K.mats[8 * r + 1]
                mats_v[r, 2] = K.mats[8 * r + 2]
                mats_v[r, 3] = K.mats[8 * r + 3]
            memcpy(&disp_v[0], K.disp, n * sizeof(double))
        free(K.mats); K.mats = NULL
        free(K.disp); K.disp = NULL
        offs_v = offs_np
        memcpy(&offs_v[0], K.woff, (n + 1) * sizeof(long long))
        free(K.woff); K.woff = NULL
        if K.wlen > 0:
            arena_v = arena_np
            memcpy(&arena_v[0], K.wbuf, K.wlen)
        free(K.wbuf); K.wbuf = NULL
        return {
            "mats": mats_np,
            "disp": disp_np,
            "word_arena": arena_np,
            "word_offsets": offs_np,
            "counters": {
                "stored": int(n),
                "children": int(n_children),
                "beyond_cutoff": int(n_beyond),
                "duplicates": int(n_dup),
            },
            "overflow": bool(overflow),
        }
    finally:
        kern_free(&K)
