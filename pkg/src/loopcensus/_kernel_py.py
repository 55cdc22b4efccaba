"""Pure-Python orbit enumeration kernel.

Fallback used when the compiled extension is unavailable.  Both kernels
implement the identical algorithm with the identical floating-point
evaluation order, so their outputs match bit for bit:

* best-first (uniform-cost) expansion by displacement, ties by insertion
  order; children built as parent_matrix @ generator,
* non-backtracking letter expansion (words stay freely reduced),
* duplicate detection on a quantized grid over sign-canonicalized entries,
  probing both signs and boundary-adjacent cells, resolved by a
  sign-folded max-norm comparison.

Matrices are carried as hi/lo double-double pairs.  Plain double products
pick up rounding noise that later letters amplify exponentially, and two
freely reduced words for the same element can then disagree by ~1e-6 once
displacements reach ~15, far beyond MATCH_TOL; the hi/lo carry keeps that
path noise near the 1e-10 floor set by the rounded generator entries, so
the grid tolerances below stay valid.  The carry also keeps determinants
within ~1e-15 of 1 over any enumerable word length, so no per-step
renormalization is applied.

Letters are indices 0..4g-1: generators first, then their inverses
(inverse of i is (i + 2g) mod 4g).  Words travel as bytes objects.
"""

import heapq
import math

import numpy as np

# side of the quantization grid cells
GRID_DELTA = 1e-5
# two matrices within this max-norm distance (up to sign) are one element
MATCH_TOL = 1e-7
# fraction of a cell near whose edge the neighboring cell is also probed
EDGE_FRAC = 2.0 * MATCH_TOL / GRID_DELTA

# Veltkamp splitter for error-free double products
_SPLIT = 134217729.0  # 2**27 + 1

_IDENTITY = (1.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0)


class BudgetExceeded(Exception):
    """Raised internally when the element budget is hit; carries nothing."""


def _prod_err(x, y, p):
    """Rounding error of the double product p = x * y (Dekker)."""
    t = _SPLIT * x
    xh = t - (t - x)
    xl = x - xh
    t = _SPLIT * y
    yh = t - (t - y)
    yl = y - yh
    return ((xh * yh - p) + xh * yl + xl * yh) + xl * yl


def _dd_entry(uh, ul, vh, vl, p, q):
    """(uh + ul) * p + (vh + vl) * q as a hi/lo pair."""
    p1 = uh * p
    e1 = _prod_err(uh, p, p1)
    p2 = vh * q
    e2 = _prod_err(vh, q, p2)
    s = p1 + p2
    t = s - p1
    e = (p1 - (s - t)) + (p2 - t)
    e = e + ((e1 + e2) + ul * p + vl * q)
    hi = s + e
    return hi, e - (hi - s)


def _mult(m, g):
    """Matrix product m @ g; m is a hi/lo 8-tuple, g a plain 4-tuple."""
    ra, rea = _dd_entry(m[0], m[4], m[1], m[5], g[0], g[2])
    rb, reb = _dd_entry(m[0], m[4], m[1], m[5], g[1], g[3])
    rc, rec = _dd_entry(m[2], m[6], m[3], m[7], g[0], g[2])
    rd, red = _dd_entry(m[2], m[6], m[3], m[7], g[1], g[3])
    return (ra, rb, rc, rd, rea, reb, rec, red)


def _canonical(m):
    """Flip the sign so the largest-magnitude hi entry (first on ties) is >= 0."""
    p = m[0]
    mag = abs(m[0])
    if abs(m[1]) > mag:
        p = m[1]
        mag = abs(m[1])
    if abs(m[2]) > mag:
        p = m[2]
        mag = abs(m[2])
    if abs(m[3]) > mag:
        p = m[3]
    if p < 0.0:
        return (-m[0], -m[1], -m[2], -m[3], -m[4], -m[5], -m[6], -m[7])
    return m


def _displacement(a, b, c, d):
    s = 0.5 * (a * a + b * b + c * c + d * d)
    if s < 1.0:
        s = 1.0
    return math.log(s + math.sqrt(s * s - 1.0))


def _cell_options(x):
    f = x / GRID_DELTA + 0.5
    c = math.floor(f)
    frac = f - c
    if frac < EDGE_FRAC:
        return (c, c - 1)
    if frac > 1.0 - EDGE_FRAC:
        return (c, c + 1)
    return (c,)


class _DedupTable:
    """Grid hash of sign-canonical matrices with near-match resolution."""

    def __init__(self):
        self._cells = {}
        self._mats = []

    def __len__(self):
        return len(self._mats)

    def matrix(self, idx):
        return self._mats[idx]

    def find(self, canon):
        """Index of a stored element equal to canon (up to sign), or -1."""
        a = canon[0]
        b = canon[1]
        c = canon[2]
        d = canon[3]
        mats = self._mats
        for sa, sb, sc, sd in ((a, b, c, d), (-a, -b, -c, -d)):
            for q0 in _cell_options(sa):
                for q1 in _cell_options(sb):
                    for q2 in _cell_options(sc):
                        for q3 in _cell_options(sd):
                            for i in self._cells.get((q0, q1, q2, q3), ()):
                                mm = mats[i]
                                if (
                                    max(abs(a - mm[0]), abs(b - mm[1]), abs(c - mm[2]), abs(d - mm[3])) <= MATCH_TOL
                                    or max(abs(a + mm[0]), abs(b + mm[1]), abs(c + mm[2]), abs(d + mm[3])) <= MATCH_TOL
                                ):
                                    return i
        return -1

    def insert(self, canon):
        """Store a new element (caller guarantees find() returned -1)."""
        idx = len(self._mats)
        self._mats.append(canon)
        key = (
            math.floor(canon[0] / GRID_DELTA + 0.5),
            math.floor(canon[1] / GRID_DELTA + 0.5),
            math.floor(canon[2] / GRID_DELTA + 0.5),
            math.floor(canon[3] / GRID_DELTA + 0.5),
        )
        self._cells.setdefault(key, []).append(idx)
        return idx


def run_census(gen_entries, seed_words, cutoff, budget):
    """Enumerate distinct orbit elements with displacement <= cutoff.

    Args:
        gen_entries: (4g, 4) matrix entries, generators then inverses.
        seed_words: iterable of letter-index tuples; must start with ().
        cutoff: displacement bound for keeping elements.
        budget: maximum number of stored elements before giving up.

    Returns a dict with mats (n, 4), disp (n,), word_arena (int8),
    word_offsets (int64, n+1), counters, and an overflow flag.  Element
    order is insertion order; the identity seed is element 0.
    """
    gens = [tuple(float(x) for x in row) for row in gen_entries]
    n_letters = len(gens)
    half = n_letters // 2
    if n_letters != 2 * half or half == 0:
        raise ValueError("generator list must hold generators then inverses")

    table = _DedupTable()
    disp = []
    words = []
    n_children = 0
    n_beyond_cutoff = 0
    n_duplicates = 0
    overflow = False

    seeds = [bytes(w) for w in seed_words]
    if not seeds or seeds[0] != b"":
        raise ValueError("first seed must be the empty (identity) word")

    heap = []
    try:
        for w in seeds:
            m = _IDENTITY
            for letter in w:
                m = _mult(m, gens[letter])
            canon = _canonical(m)
            if table.find(canon) >= 0:
                raise ValueError("seed words contain duplicate group elements")
            d = _displacement(canon[0], canon[1], canon[2], canon[3])
            if d > cutoff:
                raise ValueError("seed word lies beyond the cutoff")
            if len(table) >= budget:
                raise BudgetExceeded
            idx = table.insert(canon)
            disp.append(d)
            words.append(w)
            heap.append((d, idx))
        heapq.heapify(heap)

        while heap:
            _, i = heapq.heappop(heap)
            parent = table.matrix(i)
            w = words[i]
            skip = (w[-1] + half) % n_letters if w else -1
            for j in range(n_letters):
                if j == skip:
                    continue
                child = _mult(parent, gens[j])
                n_children += 1
                d = _displacement(child[0], child[1], child[2], child[3])
                if d > cutoff:
                    n_beyond_cutoff += 1
                    continue
                canon = _canonical(child)
                if table.find(canon) >= 0:
                    n_duplicates += 1
                    continue
                if len(table) >= budget:
                    raise BudgetExceeded
                idx = table.insert(canon)
                disp.append(d)
                words.append(w + bytes((j,)))
                heapq.heappush(heap, (d, idx))
    except BudgetExceeded:
        overflow = True

    n = len(table)
    mats = np.empty((n, 4), dtype=np.float64)
    for i in range(n):
        mats[i] = table.matrix(i)[:4]
    lengths = np.fromiter((len(w) for w in words), dtype=np.int64, count=n)
    offsets = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(lengths, out=offsets[1:])
    arena = np.frombuffer(b"".join(words), dtype=np.int8).copy()
    return {
        "mats": mats,
        "disp": np.asarray(disp, dtype=np.float64),
        "word_arena": arena,
        "word_offsets": offsets,
        "counters": {
            "stored": n,
            "children": n_children,
            "beyond_cutoff": n_beyond_cutoff,
            "duplicates": n_duplicates,
        },
        "overflow": overflow,
    }
