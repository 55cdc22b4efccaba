"""Surface group construction, word evaluation, coset schemes."""

import math

import numpy as np
import pytest

from loopcensus.geometry import MoebiusMap
from loopcensus.groups import (
    CosetScheme,
    build_surface_group,
    isometry_taking,
    regular_polygon_circumradius,
    word_from_string,
    word_to_string,
)

RELATOR_TOL = 1e-9

# every genus-2 generator translates by 2 arccosh(1 + sqrt 2)
GENUS2_STEP = 2.0 * math.acosh(1.0 + math.sqrt(2.0))


def relator(genus):
    word = []
    for m in range(genus):
        a, b = 2 * m + 1, 2 * m + 2
        word += [a, b, -a, -b]
    return tuple(word)


def test_circumradius_closed_form():
    # interior angles of the regular 8-gon sum to 2 pi: cosh R = cot^2(pi/8)
    r = regular_polygon_circumradius(8)
    assert np.isclose(math.cosh(r), 1.0 / math.tan(math.pi / 8) ** 2, atol=1e-10)


def test_genus2_presentation_shape():
    grp = build_surface_group(2)
    assert grp.genus == 2 and grp.rank == 4
    assert len(grp.generators) == 4
    assert len(grp.letter_maps()) == 8
    assert len(grp.vertices) == 8


def test_relator_is_identity():
    for genus in (2, 3):
        grp = build_surface_group(genus)
        assert grp.evaluate(relator(genus)).is_identity(tol=RELATOR_TOL)


def test_generators_are_hyperbolic_with_equal_step():
    grp = build_surface_group(2)
    for g in grp.generators:
        assert np.isclose(g.origin_displacement(), GENUS2_STEP, atol=1e-12)
        assert g.translation_length() > 0.0
    assert np.isclose(grp.min_translation_length(),
                      min(g.translation_length() for g in grp.generators),
                      atol=1e-15)


def test_generator_letters_and_inverses():
    grp = build_surface_group(2)
    for k in range(1, 5):
        assert (grp.generator(k) @ grp.generator(-k)).is_identity(tol=1e-12)
    with pytest.raises(ValueError):
        grp.generator(0)
    with pytest.raises(ValueError):
        grp.generator(5)


def test_evaluate_matches_manual_product():
    grp = build_surface_group(2)
    word = (1, -3, 2, 2, -1)
    manual = MoebiusMap.identity()
    for letter in word:
        manual = manual @ grp.generator(letter)
    assert grp.evaluate(word).close_to(manual, tol=1e-12)


def test_abelianized_exponent_sums():
    grp = build_surface_group(2)
    assert grp.abelianized((1, 2, -1, -2)) == (0, 0, 0, 0)
    assert grp.abelianized((1, 1, -3, 4, 4, 4)) == (2, 0, -1, 3)


def test_word_string_round_trip():
    word = (1, -2, 4, -4, 3)
    assert word_from_string(word_to_string(word)) == word
    assert word_from_string("") == ()


def test_fingerprint_stable_and_genus_sensitive():
    assert build_surface_group(2).fingerprint() == build_surface_group(2).fingerprint()
    assert build_surface_group(2).fingerprint() != build_surface_group(3).fingerprint()


def test_isometry_taking_segments():
    p1, q1 = 0.1 + 0.2j, -0.3 + 0.1j
    m = MoebiusMap.translation(0.8, 1.1) @ MoebiusMap.rotation(0.4)
    iso = isometry_taking(p1, q1, m(p1), m(q1))
    assert abs(iso(p1) - m(p1)) < 1e-10
    assert abs(iso(q1) - m(q1)) < 1e-10
    with pytest.raises(ValueError):
        isometry_taking(0j, 0.5 + 0j, 0j, 0.9 + 0j)


# -- coset schemes -----------------------------------------------------------


def test_homology_mod_scheme_basics():
    scheme = CosetScheme.homology_mod(2, genus=2)
    assert scheme.index == 16
    labels = scheme.labels()
    assert len(labels) == 16
    assert labels[0] == scheme.identity_coset() == (0, 0, 0, 0)
    assert scheme.coset_of_word((1, 2, -1, -2)) == (0, 0, 0, 0)
    assert scheme.coset_of_word((1, 1, 3)) == (0, 0, 1, 0)


def test_from_rows_index_two():
    scheme = CosetScheme.from_rows([(1, 0, 0, 0)], [2], genus=2)
    assert scheme.index == 2
    assert scheme.coset_of_word((1,)) == (1,)
    assert scheme.coset_of_word((1, 1)) == (0,)
    assert scheme.coset_of_word((2, 3, -4)) == (0,)


def test_trivial_scheme():
    scheme = CosetScheme.trivial(genus=2)
    assert scheme.index == 1
    assert scheme.labels() == [()]
    assert scheme.coset_of_word((1, -2, 3)) == ()


def test_scheme_validation():
    with pytest.raises(ValueError):
        CosetScheme(0, (), ())
    with pytest.raises(ValueError):
        CosetScheme(2, ((1, 0),), (2,))  # row length must be 2*genus
    with pytest.raises(ValueError):
        CosetScheme(2, ((1, 0, 0, 0),), (0,))  # modulus must be positive
    with pytest.raises(ValueError):
        CosetScheme.homology_mod(2).coset_of((1, 0))


def test_indices_match_per_word_cosets(census8):
    scheme = CosetScheme.homology_mod(2, genus=2)
    flat = scheme.indices(census8.homology)
    labels = scheme.labels()
    for i in range(0, census8.n_records, 37):
        assert labels[flat[i]] == scheme.coset_of_word(census8.word(i))
