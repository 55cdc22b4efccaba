"""Orbit census: enumeration, persistence, kernels, and an independent oracle.

The oracle re-counts orbit elements by brute force over freely reduced
words, with its own deduplication, so agreement with the census is a real
cross-check rather than a replay of the same code path.
"""

import itertools

import numpy as np
import pytest

from loopcensus.census import (
    CensusBudgetError,
    enumerate_orbit,
    equivalent_census,
    export_csv,
    extend_census,
    load_census,
    save_census,
)
from loopcensus.geometry import direction_angles
from loopcensus.groups import build_surface_group
from loopcensus.kernels import compiled_available

IDENTITY_DISP = 1e-3  # length-8 relator words reduce to the identity
DEDUP_CELL = 1e-3
DEDUP_TOL = 1e-6

# frozen counts, first produced by the sweep below and never edited since
KNOWN_COUNTS = {4.0: 8, 6.0: 96, 8.0: 792, 10.0: 5432}


def reduced_word_sweep(group, t, levels):
    """Count orbit elements with displacement in (0, t] by brute force.

    Walks all freely reduced words up to the given length, deduplicates
    matrices through a neighbor-cell table (probing both signs), and
    returns the cumulative distinct count after each level.  Branches are
    pruned only when no continuation can re-enter the ball, which is sound
    because one letter moves the origin by at most `step`.
    """
    maps = group.letter_maps()
    n_let = len(maps)
    half = n_let // 2
    ents = np.array([m.entries() for m in maps], dtype=np.float64)
    step = max(g.origin_displacement() for g in group.generators)
    offsets = list(itertools.product((-1, 0, 1), repeat=4))
    store = {}
    total = 0
    counts = []

    def is_new(row):
        for signed in (row, -row):
            base = np.floor(signed / DEDUP_CELL).astype(np.int64)
            for off in offsets:
                key = (base[0] + off[0], base[1] + off[1],
                       base[2] + off[2], base[3] + off[3])
                for other in store.get(key, ()):
                    if np.max(np.abs(other - signed)) <= DEDUP_TOL:
                        return False
        key = tuple(np.floor(row / DEDUP_CELL).astype(np.int64))
        store.setdefault(key, []).append(row.copy())
        return True

    cur = ents.copy()
    last = np.arange(n_let)
    for level in range(1, levels + 1):
        s = 0.5 * np.sum(cur * cur, axis=1)
        disp = np.arccosh(np.maximum(s, 1.0))
        for row in cur[(disp > IDENTITY_DISP) & (disp <= t)]:
            if is_new(row):
                total += 1
        counts.append(total)
        if level == levels:
            break
        keep = disp <= t + (levels - level) * step
        cur, last = cur[keep], last[keep]
        blocks, labels = [], []
        for j in range(n_let):
            ok = last != (j + half) % n_let
            sub = cur[ok]
            a2, b2, c2, d2 = ents[j]
            blocks.append(np.stack([
                sub[:, 0] * a2 + sub[:, 1] * c2,
                sub[:, 0] * b2 + sub[:, 1] * d2,
                sub[:, 2] * a2 + sub[:, 3] * c2,
                sub[:, 2] * b2 + sub[:, 3] * d2,
            ], axis=1))
            labels.append(np.full(blocks[-1].shape[0], j))
        cur = np.concatenate(blocks)
        last = np.concatenate(labels)
        pick = np.argmax(np.abs(cur), axis=1)
        sgn = np.sign(cur[np.arange(cur.shape[0]), pick])
        cur = cur * sgn[:, None]
    return counts


@pytest.mark.parametrize("t,levels", [(4.0, 4), (6.0, 6), (8.0, 8)])
def test_census_matches_brute_force(group, t, levels):
    counts = reduced_word_sweep(group, t, levels)
    assert counts[-1] == counts[-2]  # one spare level: the count stabilized
    census = enumerate_orbit(group, t)
    assert census.n_records == counts[-1] == KNOWN_COUNTS[t]


def test_counts_monotone_in_t(group, census8):
    grid = np.arange(1.0, 8.5, 0.5)
    counts = census8.count_within(grid)
    assert np.all(np.diff(counts) >= 0)
    assert counts[-1] == census8.n_records


def test_count_within_matches_direct(census8):
    for t in (3.0, 5.5, 7.25, 8.0):
        assert census8.count_within(t) == int(np.sum(census8.displacements <= t))


def test_records_sorted_and_in_range(census8):
    assert np.all(np.diff(census8.displacements) >= 0)
    assert census8.displacements[0] > 0.0
    assert census8.displacements[-1] <= 8.0
    assert np.all(census8.frontier_displacements > 8.0)


def test_record_accessors_consistent(census8):
    for i in (0, 5, census8.n_records - 1):
        rec = census8.record(i)
        assert rec.displacement == census8.displacements[i]
        assert rec.word == census8.word(i)
        assert np.isclose(rec.matrix.origin_displacement(), rec.displacement,
                          atol=1e-9)
        out, inc = direction_angles(rec.matrix)
        assert np.isclose(out, rec.outgoing, atol=1e-9)
        assert np.isclose(inc, rec.incoming, atol=1e-9)
        assert census8.presentation.abelianized(rec.word) == rec.homology


def test_word_representatives_evaluate_back(group, census8):
    for i in range(0, census8.n_records, 97):
        m = group.evaluate(census8.word(i))
        assert np.max(np.abs(np.asarray(m.entries())
                             - census8.matrices[i])) < 1e-9


def test_slack_does_not_change_results(group):
    c4 = enumerate_orbit(group, 10.0, slack=4.0)
    c6 = enumerate_orbit(group, 10.0, slack=6.0)
    grid = np.arange(0.5, 10.01, 0.25)
    assert np.array_equal(c4.count_within(grid), c6.count_within(grid))
    assert np.array_equal(c4.matrices, c6.matrices)
    assert np.array_equal(c4.homology, c6.homology)


def test_extend_equivalent_to_fresh(group, census8):
    extended = extend_census(census8, 10.0)
    fresh = enumerate_orbit(group, 10.0)
    assert extended.t == 10.0
    assert equivalent_census(extended, fresh)


def test_extend_cannot_shrink(census8):
    with pytest.raises(ValueError):
        extend_census(census8, 6.0)


def test_save_load_round_trip(census8, tmp_path):
    path = tmp_path / "c8.bin"
    save_census(census8, str(path))
    loaded = load_census(str(path))
    assert loaded.t == census8.t and loaded.complete == census8.complete
    assert np.array_equal(loaded.displacements, census8.displacements)
    assert np.array_equal(loaded.matrices, census8.matrices)
    assert np.array_equal(loaded.homology, census8.homology)
    assert np.array_equal(loaded.word_arena, census8.word_arena)
    assert np.array_equal(loaded.frontier_displacements,
                          census8.frontier_displacements)
    assert loaded.counters == census8.counters
    # saving the loaded copy reproduces the file byte for byte
    path2 = tmp_path / "c8_again.bin"
    save_census(loaded, str(path2))
    assert path.read_bytes() == path2.read_bytes()


def test_load_rejects_corruption(census8, tmp_path):
    path = tmp_path / "c8.bin"
    save_census(census8, str(path))
    blob = bytearray(path.read_bytes())
    blob[len(blob) // 2] ^= 0xFF
    bad = tmp_path / "bad.bin"
    bad.write_bytes(bytes(blob))
    with pytest.raises(ValueError, match="corrupt|census"):
        load_census(str(bad))
    short = tmp_path / "short.bin"
    short.write_bytes(bytes(blob[:10]))
    with pytest.raises(ValueError):
        load_census(str(short))
    notmine = tmp_path / "notmine.bin"
    notmine.write_bytes(b"definitely not a census file " * 20)
    with pytest.raises(ValueError, match="not a census file"):
        load_census(str(notmine))


def test_load_rejects_wrong_presentation(census8, tmp_path):
    path = tmp_path / "c8.bin"
    save_census(census8, str(path))
    with pytest.raises(ValueError, match="different presentation"):
        load_census(str(path), presentation=build_surface_group(3))


def test_empty_census(group, tmp_path):
    c = enumerate_orbit(group, 2.0)  # below the shortest translation length
    assert c.n_records == 0
    assert c.complete
    path = tmp_path / "empty.bin"
    save_census(c, str(path))
    loaded = load_census(str(path))
    assert loaded.n_records == 0
    assert equivalent_census(c, loaded)


def test_budget_error_carries_partial(group):
    with pytest.raises(CensusBudgetError) as info:
        enumerate_orbit(group, 10.0, budget=200)
    partial = info.value.partial
    assert not partial.complete
    assert 0 < partial.n_records <= 200


def test_invalid_arguments(group):
    with pytest.raises(ValueError):
        enumerate_orbit(group, -1.0)
    with pytest.raises(ValueError):
        enumerate_orbit(group, 4.0, slack=-1.0)
    with pytest.raises(ValueError):
        enumerate_orbit(group, 4.0, kernel="fortran")


@pytest.mark.skipif(not compiled_available(), reason="compiled kernel not built")
def test_kernel_parity(group):
    for t in (6.0, 8.0):
        fast = enumerate_orbit(group, t, kernel="compiled")
        slow = enumerate_orbit(group, t, kernel="python")
        assert np.array_equal(fast.displacements, slow.displacements)
        assert np.array_equal(fast.matrices, slow.matrices)
        assert np.array_equal(fast.outgoing_angles, slow.outgoing_angles)
        assert np.array_equal(fast.incoming_angles, slow.incoming_angles)
        assert np.array_equal(fast.homology, slow.homology)
        assert np.array_equal(fast.word_arena, slow.word_arena)
        assert np.array_equal(fast.frontier_displacements,
                              slow.frontier_displacements)


def test_counters_present(census8):
    for key in ("stored", "children", "beyond_cutoff", "duplicates", "kernel"):
        assert key in census8.counters
    assert census8.counters["stored"] >= census8.n_records


def test_export_csv_format(census8, tmp_path):
    path = tmp_path / "c8.csv"
    export_csv(census8, str(path), provenance="fingerprint=test version=0")
    lines = path.read_text().splitlines()
    assert lines[0] == "# fingerprint=test version=0"
    assert lines[1] == "word,displacement,outgoing_angle,incoming_angle,h1,h2,h3,h4"
    assert len(lines) == 2 + census8.n_records
    first = lines[2].split(",")
    assert first[0] == census8.record(0).word_string
    assert np.isclose(float(first[1]), census8.displacements[0], atol=0.0)
