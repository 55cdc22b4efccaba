"""Cocompact surface groups from regular fundamental polygons.

For genus g >= 2 the group is generated by the side pairings of a regular
4g-gon centered at the origin whose interior angles sum to 2*pi, so the
quotient is a closed surface of area 4*pi*(g-1).  Generators come in handle
pairs (a_m, b_m); the product of commutators over all handles is the
identity.

Words are tuples of nonzero signed letters: letter k in 1..2g is the k-th
generator, -k its inverse.  Letter 2m+1 is a_m, letter 2m+2 is b_m.
"""

import hashlib
import itertools
import json
import math
from dataclasses import dataclass

import numpy as np

from .geometry import MoebiusMap, hyperbolic_distance

# tolerance for the polygon angle condition solved by bisection
ANGLE_TOL = 1e-12
# the defining relator must evaluate to the identity this precisely
RELATOR_TOL = 1e-9


def _interior_angle(circumradius, n):
    """Interior angle of the regular hyperbolic n-gon with given circumradius."""
    # split the polygon into 2n right triangles at the center; the polygon
    # half-angle alpha at a vertex satisfies cot(alpha) = cosh(R) tan(pi/n)
    return 2.0 * math.atan(1.0 / (math.cosh(circumradius) * math.tan(math.pi / n)))


def regular_polygon_circumradius(n, total_angle=2.0 * math.pi, tol=ANGLE_TOL):
    """Circumradius at which the regular n-gon has vertex angles summing as asked.

    Solved by bisection; for total angle 2*pi the closed form is
    cosh(R) = cot(pi/n)^2 / ...  (kept numeric so other targets work too).
    """
    target = total_angle / n
    if not 0.0 < target < math.pi * (n - 2) / n:
        raise ValueError("angle target not achievable by a hyperbolic polygon")
    lo, hi = 1e-9, 50.0
    if _interior_angle(lo, n) < target:
        raise ValueError("angle target too large even for a tiny polygon")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if _interior_angle(mid, n) > target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _segment_to_standard(p, q):
    """Isometry sending p to 0 and q onto the positive real axis."""
    move = MoebiusMap.taking_origin_to(p).inverse()
    q0 = move.apply(q)
    rot = MoebiusMap.rotation(-math.atan2(q0.imag, q0.real))
    return rot.compose(move)


def isometry_taking(p1, q1, p2, q2):
    """The isometry with p1 -> p2 and q1 -> q2 (segment lengths must match)."""
    d1 = hyperbolic_distance(p1, q1)
    d2 = hyperbolic_distance(p2, q2)
    if abs(d1 - d2) > 1e-9:
        raise ValueError("segments have different lengths")
    return _segment_to_standard(p2, q2).inverse().compose(_segment_to_standard(p1, q1))


@dataclass(frozen=True)
class GroupPresentation:
    """A surface group: generators, their inverses, and bookkeeping."""

    genus: int
    circumradius: float
    vertices: tuple
    generators: tuple  # 2g MoebiusMaps, (a_0, b_0, a_1, b_1, ...)

    @property
    def rank(self):
        return 2 * self.genus

    def generator(self, letter):
        """The map for a signed letter (negative letters give inverses)."""
        if letter == 0 or abs(letter) > self.rank:
            raise ValueError(f"letter {letter} out of range for rank {self.rank}")
        g = self.generators[abs(letter) - 1]
        return g.inverse() if letter < 0 else g

    def letter_maps(self):
        """Maps indexed 0..4g-1: generators first, then their inverses."""
        gens = list(self.generators)
        return gens + [g.inverse() for g in gens]

    def evaluate(self, word):
        """Multiply out a word, left letters applied last."""
        m = MoebiusMap.identity()
        for letter in word:
            m = m.compose(self.generator(letter))
        return m

    def abelianized(self, word):
        """Image of a word in H_1 = Z^{2g}, as a tuple of exponent sums."""
        image = [0] * self.rank
        for letter in word:
            image[abs(letter) - 1] += 1 if letter > 0 else -1
        return tuple(image)

    def min_translation_length(self):
        """Smallest generator translation length (a lower bound per letter)."""
        return min(g.translation_length() for g in self.generators)

    def fingerprint(self):
        """Stable hash of the presentation for file headers."""
        payload = {
            "genus": self.genus,
            "circumradius": round(self.circumradius, 12),
            "entries": [[round(e, 12) for e in g.entries()] for g in self.generators],
        }
        blob = json.dumps(payload, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()


@dataclass(frozen=True)
class CosetScheme:
    """Finite-index reduction of first homology.

    A homomorphism Z^{2g} -> prod_i Z/moduli[i] given by integer rows;
    loops land in the coset of their abelianization.  Covers both scheme
    kinds in use: reduction of every coordinate mod m (homology_mod) and
    explicit homomorphisms to finite abelian groups (from_rows).  A lift of
    a loop to the cover attached to the kernel closes up exactly when the
    loop maps to the identity coset.
    """

    genus: int
    rows: tuple  # one integer tuple of length 2*genus per codomain coordinate
    moduli: tuple

    def __post_init__(self):
        if self.genus < 1:
            raise ValueError("genus must be positive")
        if len(self.rows) != len(self.moduli):
            raise ValueError("need one modulus per codomain coordinate")
        for row in self.rows:
            if len(row) != 2 * self.genus:
                raise ValueError("row length must equal 2*genus")
        for m in self.moduli:
            if m < 1:
                raise ValueError("moduli must be positive")

    @classmethod
    def homology_mod(cls, modulus, genus=2):
        """Reduce every homology coordinate mod `modulus` (index modulus^{2g})."""
        n = 2 * genus
        rows = tuple(tuple(1 if j == i else 0 for j in range(n)) for i in range(n))
        return cls(genus, rows, (modulus,) * n)

    @classmethod
    def from_rows(cls, rows, moduli, genus=2):
        return cls(genus, tuple(tuple(int(x) for x in r) for r in rows),
                   tuple(int(m) for m in moduli))

    @classmethod
    def trivial(cls, genus=2):
        """The index-1 scheme: everything lands in the identity coset."""
        return cls(genus, (), ())

    @property
    def index(self):
        return math.prod(self.moduli)

    def identity_coset(self):
        return (0,) * len(self.moduli)

    def labels(self):
        """All cosets in a fixed order, the identity coset first."""
        return list(itertools.product(*(range(m) for m in self.moduli)))

    def coset_of(self, homology_vector):
        """Coset of a homology vector (exponent-sum tuple)."""
        if len(homology_vector) != 2 * self.genus:
            raise ValueError("homology vector length must equal 2*genus")
        return tuple(
            sum(r * v for r, v in zip(row, homology_vector)) % m
            for row, m in zip(self.rows, self.moduli)
        )

    def coset_of_word(self, word):
        """Coset of a signed-letter word via its exponent sums."""
        image = [0] * (2 * self.genus)
        for letter in word:
            if letter == 0 or abs(letter) > 2 * self.genus:
                raise ValueError(f"letter {letter} out of range")
            image[abs(letter) - 1] += 1 if letter > 0 else -1
        return self.coset_of(tuple(image))

    def indices(self, homology_matrix):
        """Flat coset index (position in labels()) for each matrix row."""
        h = np.asarray(homology_matrix, dtype=np.int64)
        if h.ndim != 2 or h.shape[1] != 2 * self.genus:
            raise ValueError("homology matrix must be (n, 2*genus)")
        flat = np.zeros(h.shape[0], dtype=np.int64)
        for row, m in zip(self.rows, self.moduli):
            coord = (h @ np.asarray(row, dtype=np.int64)) % m
            flat = flat * m + coord
        return flat


def word_to_string(word):
    """Compact display form: letters a, b, c, ... with uppercase inverses."""
    if not word:
        return "e"
    out = []
    for letter in word:
        ch = chr(ord("a") + abs(letter) - 1)
        out.append(ch.upper() if letter < 0 else ch)
    return "".join(out)


def word_from_string(text):
    """Inverse of word_to_string."""
    if text in ("", "e"):
        return ()
    word = []
    for ch in text:
        if "a" <= ch <= "z":
            word.append(ord(ch) - ord("a") + 1)
        elif "A" <= ch <= "Z":
            word.append(-(ord(ch) - ord("A") + 1))
        else:
            raise ValueError(f"bad word character {ch!r}")
    return tuple(word)


def build_surface_group(genus):
    """Construct the standard genus-g surface group (g >= 2).

    Side pairing: with vertices v_0..v_{4g-1} counterclockwise and side i
    running from v_i to v_{i+1}, handle m (side block s = 4m) uses

        a_m : side s+2 reversed onto side s
        b_m : side s+1 reversed onto side s+3

    where "reversed" carries (v_{i+1}, v_i) to (v_j, v_{j+1}).  With this
    convention every generator is hyperbolic with the same translation
    length and the product of commutators [a_0,b_0][a_1,b_1]... is +I.
    """
    if genus < 2:
        raise ValueError("hyperbolic surface groups need genus >= 2")
    n = 4 * genus
    radius = regular_polygon_circumradius(n)
    r = math.tanh(0.5 * radius)
    vertices = tuple(complex(r * math.cos(2 * math.pi * k / n), r * math.sin(2 * math.pi * k / n)) for k in range(n))

    def pair_reversed(i_src, i_dst):
        return isometry_taking(
            vertices[(i_src + 1) % n],
            vertices[i_src % n],
            vertices[i_dst % n],
            vertices[(i_dst + 1) % n],
        )

    generators = []
    for m in range(genus):
        s = 4 * m
        generators.append(pair_reversed(s + 2, s))
        generators.append(pair_reversed(s + 1, s + 3))

    pres = GroupPresentation(
        genus=genus,
        circumradius=radius,
        vertices=vertices,
        generators=tuple(generators),
    )

    relator = MoebiusMap.identity()
    for m in range(genus):
        a = generators[2 * m]
        b = generators[2 * m + 1]
        relator = relator.compose(a).compose(b).compose(a.inverse()).compose(b.inverse())
    if not relator.is_identity(RELATOR_TOL):
        raise AssertionError("side pairings do not satisfy the surface relator")
    return pres
