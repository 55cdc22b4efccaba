"""Orbit census: enumeration driver, snapshots, persistence, equivalence.

A census over a surface group records every group element whose orbit point
gamma(0) lies within hyperbolic distance t of the origin (the identity is
excluded), together with a frontier of elements in (t, t + slack] kept so a
census can later be extended to a larger radius without starting over.

Records are sorted by (displacement, word length, word letters), which makes
equal-parameter runs reproduce files byte for byte.  Extending and fresh
enumeration agree element by element, but may discover different word
representatives; use equivalent_census to compare.
"""

import json
import struct
import zlib
from dataclasses import dataclass, field

import numpy as np

from ._kernel_py import _DedupTable
from .geometry import MoebiusMap, angular_distance
from .groups import GroupPresentation, build_surface_group, word_to_string
from .kernels import get_kernel

DEFAULT_SLACK = 4.0
DEFAULT_BUDGET = 50_000_000

_MAGIC = b"LOOPCNSS"
_VERSION = 1
_HEADER = struct.Struct("<8sII32sddQQQIII")
_FLAG_COMPLETE = 1


class CensusBudgetError(Exception):
    """Enumeration hit the element budget.

    The partially built snapshot (flagged incomplete) is attached as
    .partial; its records are valid but possibly missing elements.
    """

    def __init__(self, partial):
        super().__init__(
            f"element budget exhausted at t={partial.t} (budget {partial.budget})"
        )
        self.partial = partial


@dataclass(frozen=True)
class OrbitRecord:
    """One census entry, unpacked into friendly types."""

    index: int
    word: tuple
    displacement: float
    outgoing: float
    incoming: float
    homology: tuple
    matrix: MoebiusMap

    @property
    def word_string(self):
        return word_to_string(self.word)

    @property
    def orbit_point(self):
        return self.matrix.apply(0j)


@dataclass
class CensusSnapshot:
    """All orbit elements with displacement in (0, t], plus the frontier."""

    presentation: GroupPresentation
    t: float
    slack: float
    budget: int
    complete: bool
    displacements: np.ndarray  # (n,) sorted ascending
    outgoing_angles: np.ndarray  # (n,)
    incoming_angles: np.ndarray  # (n,)
    matrices: np.ndarray  # (n, 4)
    homology: np.ndarray  # (n, 2g) int16
    word_lengths: np.ndarray  # (n,) uint16
    word_arena: np.ndarray  # (sum of lengths,) int8 letter indices
    word_offsets: np.ndarray  # (n+1,) int64
    frontier_displacements: np.ndarray  # (m,)
    frontier_arena: np.ndarray
    frontier_offsets: np.ndarray
    counters: dict = field(default_factory=dict)

    @property
    def n_records(self):
        return int(self.displacements.shape[0])

    @property
    def n_frontier(self):
        return int(self.frontier_displacements.shape[0])

    def letter_indices(self, i):
        """Raw letter-index word of record i (0..4g-1 coding)."""
        return self.word_arena[self.word_offsets[i] : self.word_offsets[i + 1]]

    def word(self, i):
        """Signed-letter word of record i."""
        rank = self.presentation.rank
        return tuple(
            int(idx) + 1 if idx < rank else -(int(idx) - rank + 1)
            for idx in self.letter_indices(i)
        )

    def record(self, i):
        a, b, c, d = self.matrices[i]
        return OrbitRecord(
            index=i,
            word=self.word(i),
            displacement=float(self.displacements[i]),
            outgoing=float(self.outgoing_angles[i]),
            incoming=float(self.incoming_angles[i]),
            homology=tuple(int(x) for x in self.homology[i]),
            matrix=MoebiusMap(a, b, c, d),
        )

    def count_within(self, t):
        """Number of records with displacement <= t (vectorized over arrays)."""
        return np.searchsorted(self.displacements, np.asarray(t), side="right")


def _disk_angles(mats):
    """(outgoing, incoming) angle arrays from matrix entry columns."""
    a, b, c, d = (mats[:, k] for k in range(4))
    alpha = 0.5 * ((a + d) + 1j * (b - c))
    beta = 0.5 * ((a - d) - 1j * (b + c))
    out = np.angle(beta * alpha)  # phase of beta / conj(alpha)
    inc = np.angle(beta * alpha.conjugate())  # phase of beta / alpha
    tau = 2.0 * np.pi
    return np.mod(out, tau), np.mod(inc, tau)


def _abelianize(arena, offsets, n, rank):
    """(n, 2g) exponent-sum table from packed letter-index words."""
    hom = np.zeros((n, rank), dtype=np.int32)
    if n and arena.size:
        lengths = np.diff(offsets).astype(np.int64)
        owners = np.repeat(np.arange(n, dtype=np.int64), lengths)
        letters = arena.astype(np.int64)
        slots = np.where(letters < rank, letters, letters - rank)
        signs = np.where(letters < rank, 1, -1).astype(np.int32)
        np.add.at(hom, (owners, slots), signs)
    return hom.astype(np.int16)


def _sort_order(disp, lengths, arena, offsets):
    """Canonical record order: displacement, then word length, then letters."""
    n = disp.shape[0]
    width = int(lengths.max()) if n else 1
    width = max(width, 1)
    padded = np.zeros((n, width), dtype=np.uint8)
    if arena.size:
        cols = np.arange(width, dtype=np.int64)
        valid = cols[None, :] < lengths[:, None]
        gather = offsets[:-1, None] + np.minimum(cols[None, :], np.maximum(lengths[:, None] - 1, 0))
        padded[valid] = arena.view(np.uint8)[gather[valid]]
    keys = np.empty(
        n, dtype=[("d", np.float64), ("l", np.uint16), ("w", f"S{width}")]
    )
    keys["d"] = disp
    keys["l"] = lengths.astype(np.uint16)
    keys["w"] = np.ascontiguousarray(padded).view(f"S{width}").ravel()
    return np.argsort(keys, order=("d", "l", "w"), kind="stable")


def _slice_words(arena, offsets, pick):
    """Repack a subset of words (given by index array) into a fresh arena."""
    lengths = np.diff(offsets)
    new_lengths = lengths[pick]
    new_offsets = np.zeros(pick.shape[0] + 1, dtype=np.int64)
    np.cumsum(new_lengths, out=new_offsets[1:])
    total = int(new_offsets[-1])
    if total == 0:
        return np.empty(0, dtype=np.int8), new_offsets
    # source index of every copied letter, built without a Python loop
    src = np.arange(total, dtype=np.int64)
    src += np.repeat(offsets[pick] - new_offsets[:-1], new_lengths)
    return arena[src], new_offsets


def _postprocess(presentation, raw, t, slack, budget, kernel_name):
    disp = raw["disp"]
    mats = raw["mats"]
    arena = raw["word_arena"]
    offsets = raw["word_offsets"]
    lengths = np.diff(offsets)

    rec_mask = (disp > 0.0) & (disp <= t)
    rec_idx = np.flatnonzero(rec_mask)
    fr_idx = np.flatnonzero(disp > t)

    rec_arena, rec_offsets = _slice_words(arena, offsets, rec_idx)
    order = _sort_order(disp[rec_idx], lengths[rec_idx], rec_arena, rec_offsets)
    rec_idx = rec_idx[order]
    rec_arena, rec_offsets = _slice_words(arena, offsets, rec_idx)

    out_angles, inc_angles = _disk_angles(mats[rec_idx])
    homology = _abelianize(rec_arena, rec_offsets, rec_idx.shape[0], presentation.rank)

    fr_arena, fr_offsets = _slice_words(arena, offsets, fr_idx)

    counters = dict(raw["counters"])
    counters["kernel"] = kernel_name
    return CensusSnapshot(
        presentation=presentation,
        t=float(t),
        slack=float(slack),
        budget=int(budget),
        complete=not raw["overflow"],
        displacements=np.ascontiguousarray(disp[rec_idx]),
        outgoing_angles=out_angles,
        incoming_angles=inc_angles,
        matrices=np.ascontiguousarray(mats[rec_idx]),
        homology=homology,
        word_lengths=lengths[rec_idx].astype(np.uint16),
        word_arena=rec_arena,
        word_offsets=rec_offsets,
        frontier_displacements=np.ascontiguousarray(disp[fr_idx]),
        frontier_arena=fr_arena,
        frontier_offsets=fr_offsets,
        counters=counters,
    )


def _gen_entries(presentation):
    return [m.entries() for m in presentation.letter_maps()]


def enumerate_orbit(presentation, t, slack=DEFAULT_SLACK, budget=DEFAULT_BUDGET, kernel=None):
    """Run a fresh census of orbit points within distance t of the origin.

    kernel selects the backend ("compiled", "python", or None for the best
    available).  Raises CensusBudgetError (carrying the partial snapshot) if
    more than `budget` elements would need to be stored.
    """
    if t < 0.0:
        raise ValueError("census radius t must be nonnegative")
    if slack < 0.0:
        raise ValueError("frontier slack must be nonnegative")
    kname, kfn = get_kernel(kernel)
    raw = kfn(_gen_entries(presentation), [()], t + slack, int(budget))
    snap = _postprocess(presentation, raw, t, slack, budget, kname)
    if raw["overflow"]:
        raise CensusBudgetError(snap)
    return snap


def extend_census(census, t, budget=None, kernel=None):
    """Extend an existing census to a larger radius, reusing its elements.

    The result is element-for-element identical to a fresh census at the new
    t with the same slack (word representatives may differ).
    """
    if t < census.t:
        raise ValueError(f"cannot shrink census from t={census.t} to t={t}")
    if budget is None:
        budget = census.budget
    seeds = [()]
    for arena, offsets in (
        (census.word_arena, census.word_offsets),
        (census.frontier_arena, census.frontier_offsets),
    ):
        blob = arena.tobytes()
        seeds.extend(
            blob[offsets[i] : offsets[i + 1]] for i in range(offsets.shape[0] - 1)
        )
    kname, kfn = get_kernel(kernel)
    raw = kfn(
        _gen_entries(census.presentation), seeds, t + census.slack, int(budget)
    )
    snap = _postprocess(census.presentation, raw, t, census.slack, budget, kname)
    if raw["overflow"]:
        raise CensusBudgetError(snap)
    return snap


# -- persistence -----------------------------------------------------------


def save_census(census, path):
    """Write a snapshot to a binary file (fixed little-endian layout)."""
    n = census.n_records
    m = census.n_frontier
    rank = census.presentation.rank
    max_len = int(census.word_lengths.max()) if n else 0

    letters = np.zeros((n, max_len), dtype=np.uint8)
    for i in range(n):
        w = census.letter_indices(i)
        letters[i, : w.shape[0]] = w.view(np.uint8)

    fr_lengths = np.diff(census.frontier_offsets).astype(np.uint16)

    payload = b"".join(
        [
            np.ascontiguousarray(census.displacements).tobytes(),
            np.ascontiguousarray(census.outgoing_angles).tobytes(),
            np.ascontiguousarray(census.incoming_angles).tobytes(),
            np.ascontiguousarray(census.matrices).tobytes(),
            np.ascontiguousarray(census.homology.astype("<i2")).tobytes(),
            np.ascontiguousarray(census.word_lengths.astype("<u2")).tobytes(),
            letters.tobytes(),
            np.ascontiguousarray(census.frontier_displacements).tobytes(),
            fr_lengths.astype("<u2").tobytes(),
            census.frontier_arena.view(np.uint8).tobytes(),
            json.dumps(census.counters, sort_keys=True).encode(),
        ]
    )
    flags = _FLAG_COMPLETE if census.complete else 0
    header = _HEADER.pack(
        _MAGIC,
        _VERSION,
        census.presentation.genus,
        bytes.fromhex(census.presentation.fingerprint()),
        census.t,
        census.slack,
        census.budget,
        n,
        m,
        max_len,
        flags,
        zlib.crc32(payload),
    )
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(payload)


def load_census(path, presentation=None):
    """Read a snapshot written by save_census, validating integrity."""
    with open(path, "rb") as fh:
        header = fh.read(_HEADER.size)
        if len(header) != _HEADER.size:
            raise ValueError("census file truncated in header")
        (
            magic,
            version,
            genus,
            fingerprint,
            t,
            slack,
            budget,
            n,
            m,
            max_len,
            flags,
            crc,
        ) = _HEADER.unpack(header)
        if magic != _MAGIC:
            raise ValueError("not a census file")
        if version != _VERSION:
            raise ValueError(f"unsupported census file version {version}")
        payload = fh.read()
    if zlib.crc32(payload) != crc:
        raise ValueError("census file corrupt (checksum mismatch)")

    if presentation is None:
        presentation = build_surface_group(genus)
    if bytes.fromhex(presentation.fingerprint()) != fingerprint:
        raise ValueError("census file was built from a different presentation")
    rank = presentation.rank

    def take(count, dtype):
        nonlocal pos
        arr = np.frombuffer(payload, dtype=dtype, count=count, offset=pos)
        pos += arr.nbytes
        return arr.copy()

    pos = 0
    disp = take(n, "<f8")
    out_angles = take(n, "<f8")
    inc_angles = take(n, "<f8")
    mats = take(4 * n, "<f8").reshape(n, 4)
    homology = take(rank * n, "<i2").reshape(n, rank)
    word_lengths = take(n, "<u2")
    letters = take(max_len * n, "u1").reshape(n, max_len)
    fr_disp = take(m, "<f8")
    fr_lengths = take(m, "<u2")
    fr_total = int(fr_lengths.astype(np.int64).sum())
    fr_arena = take(fr_total, "u1").view(np.int8)
    counters = json.loads(payload[pos:].decode()) if pos < len(payload) else {}

    offsets = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(word_lengths.astype(np.int64), out=offsets[1:])
    arena = np.empty(int(offsets[-1]), dtype=np.int8)
    for i in range(n):
        arena[offsets[i] : offsets[i + 1]] = letters[i, : word_lengths[i]].view(np.int8)

    fr_offsets = np.zeros(m + 1, dtype=np.int64)
    np.cumsum(fr_lengths.astype(np.int64), out=fr_offsets[1:])

    return CensusSnapshot(
        presentation=presentation,
        t=t,
        slack=slack,
        budget=budget,
        complete=bool(flags & _FLAG_COMPLETE),
        displacements=disp,
        outgoing_angles=out_angles,
        incoming_angles=inc_angles,
        matrices=mats,
        homology=homology,
        word_lengths=word_lengths,
        word_arena=arena,
        word_offsets=offsets,
        frontier_displacements=fr_disp,
        frontier_arena=fr_arena,
        frontier_offsets=fr_offsets,
        counters=counters,
    )


def export_csv(census, path, provenance=None):
    """Write records as CSV: word, displacement, angles, homology classes."""
    rank = census.presentation.rank
    hom_cols = ",".join(f"h{k+1}" for k in range(rank))
    with open(path, "w") as fh:
        if provenance:
            fh.write(f"# {provenance}\n")
        fh.write(f"word,displacement,outgoing_angle,incoming_angle,{hom_cols}\n")
        for i in range(census.n_records):
            hom = ",".join(str(int(x)) for x in census.homology[i])
            fh.write(
                f"{word_to_string(census.word(i))},{census.displacements[i]:.17g},"
                f"{census.outgoing_angles[i]:.17g},{census.incoming_angles[i]:.17g},{hom}\n"
            )


# -- equivalence -----------------------------------------------------------


def equivalent_census(c1, c2, tol=1e-9):
    """Whether two censuses describe the same element set.

    Records are matched through the deduplication grid (words are allowed to
    differ); displacements, angles, and homology must agree.  Frontiers are
    compared as displacement multisets only.
    """
    if c1.n_records != c2.n_records or c1.n_frontier != c2.n_frontier:
        return False
    table = _DedupTable()
    for i in range(c2.n_records):
        a, b, c, d = c2.matrices[i]
        table.insert((float(a), float(b), float(c), float(d)))
    seen = np.zeros(c2.n_records, dtype=bool)
    for i in range(c1.n_records):
        a, b, c, d = c1.matrices[i]
        j = table.find((float(a), float(b), float(c), float(d)))
        if j < 0 or seen[j]:
            return False
        seen[j] = True
        if abs(c1.displacements[i] - c2.displacements[j]) > tol:
            return False
        if angular_distance(c1.outgoing_angles[i], c2.outgoing_angles[j]) > tol:
            return False
        if angular_distance(c1.incoming_angles[i], c2.incoming_angles[j]) > tol:
            return False
        if not np.array_equal(c1.homology[i], c2.homology[j]):
            return False
    d1 = np.sort(c1.frontier_displacements)
    d2 = np.sort(c2.frontier_displacements)
    return bool(np.allclose(d1, d2, rtol=0.0, atol=tol))
