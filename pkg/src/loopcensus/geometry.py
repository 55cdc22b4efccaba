"""Hyperbolic plane primitives in the Poincare disk model.

Conventions used throughout the package:

* The plane is the open unit disk with curvature -1; the basepoint is the
  origin.  Boundary points are angles in [0, 2*pi).
* Orientation-preserving isometries are stored as real 2x2 matrices
  (a, b, c, d) with unit determinant, identified up to overall sign.  The
  matrix acts on the disk through its SU(1,1) conjugate

      alpha = ((a + d) + i(b - c)) / 2,   beta = ((a - d) - i(b + c)) / 2,

  as w -> (alpha*w + beta) / (conj(beta)*w + conj(alpha)).  Unit determinant
  is |alpha|^2 - |beta|^2 = 1.
* The Busemann cocycle is normalized at the origin: busemann(q, xi) is the
  signed horocyclic distance of q past the horocycle through 0 based at xi,
  negative when q lies on the xi side.  A point at hyperbolic distance s from
  0 straight toward xi has value -s.
* Unit tangent vectors are (basepoint, direction angle) pairs; geodesic
  endpoints are returned as (past, future).
"""

import cmath
import math
from dataclasses import dataclass

TAU = 2.0 * math.pi

# determinant drift allowed before construction fails
DET_TOL = 1e-9
# |z| >= 1 - BOUNDARY_MARGIN is rejected for disk-interior operations
BOUNDARY_MARGIN = 1e-14
# two boundary angles closer than this cannot span a geodesic
ENDPOINT_SEP_TOL = 1e-12


def normalize_angle(theta):
    """Reduce an angle to [0, 2*pi)."""
    theta = math.fmod(theta, TAU)
    if theta < 0.0:
        theta += TAU
    if theta >= TAU:  # fmod can round up to TAU for tiny negatives
        theta -= TAU
    return theta


def angular_distance(theta, phi):
    """Minimal distance between two angles on the circle, in [0, pi]."""
    d = math.fmod(abs(theta - phi), TAU)
    return min(d, TAU - d)


def signed_angle_gap(start, end):
    """Signed counterclockwise gap from start to end, in (-pi, pi]."""
    return math.remainder(end - start, TAU)


def require_interior(z):
    """Validate that z lies strictly inside the unit disk."""
    z = complex(z)
    if not (abs(z) < 1.0 - BOUNDARY_MARGIN):
        raise ValueError(f"point {z!r} is not in the open unit disk")
    return z


def hyperbolic_distance(z, w):
    """Distance between two points of the disk."""
    z = require_interior(z)
    w = require_interior(w)
    num = abs(z - w)
    den = abs(1.0 - z.conjugate() * w)
    return 2.0 * math.atanh(num / den)


# Veltkamp splitter for error-free double products
_SPLIT = 134217729.0  # 2**27 + 1


def _unit_det(a, b, c, d):
    """a*d - b*c with the product rounding compensated (Dekker).

    Both products are of order e^{displacement} while the result is near 1,
    so the naive expression would drift past DET_TOL and reject genuine
    group matrices once displacements pass ~16.
    """
    p1 = a * d
    t = _SPLIT * a
    ah = t - (t - a)
    al = a - ah
    t = _SPLIT * d
    dh = t - (t - d)
    dl = d - dh
    e1 = ((ah * dh - p1) + ah * dl + al * dh) + al * dl
    p2 = b * c
    t = _SPLIT * b
    bh = t - (t - b)
    bl = b - bh
    t = _SPLIT * c
    ch = t - (t - c)
    cl = c - ch
    e2 = ((bh * ch - p2) + bh * cl + bl * ch) + bl * cl
    return (p1 - p2) + (e1 - e2)


class MoebiusMap:
    """An orientation-preserving isometry of the disk.

    Stored as a real unit-determinant 2x2 matrix (a, b, c, d), canonical up
    to sign: the entry of largest magnitude (first in (a, b, c, d) order on
    ties) is nonnegative.
    """

    __slots__ = ("a", "b", "c", "d")

    def __init__(self, a, b, c, d):
        a, b, c, d = float(a), float(b), float(c), float(d)
        if not all(map(math.isfinite, (a, b, c, d))):
            raise ValueError("matrix entries must be finite")
        det = _unit_det(a, b, c, d)
        if det <= 0.0:
            raise ValueError(f"matrix must have positive determinant, got {det}")
        if abs(det - 1.0) > DET_TOL:
            raise ValueError(f"matrix must have unit determinant, got {det}")
        # renormalize float drift so long products stay on the group
        s = 1.0 / math.sqrt(det)
        a, b, c, d = a * s, b * s, c * s, d * s
        pivot = max((a, b, c, d), key=abs)
        if pivot < 0.0:
            a, b, c, d = -a, -b, -c, -d
        self.a, self.b, self.c, self.d = a, b, c, d

    # -- constructors ------------------------------------------------------

    @classmethod
    def identity(cls):
        return cls(1.0, 0.0, 0.0, 1.0)

    @classmethod
    def rotation(cls, phi):
        """Rotation of the disk about the origin by angle phi."""
        h = 0.5 * phi
        return cls(math.cos(h), math.sin(h), -math.sin(h), math.cos(h))

    @classmethod
    def translation(cls, length, direction=0.0):
        """Hyperbolic translation moving 0 distance `length` toward `direction`."""
        alpha = complex(math.cosh(0.5 * length), 0.0)
        beta = cmath.rect(math.sinh(0.5 * length), direction)
        return cls.from_disk_coefficients(alpha, beta)

    @classmethod
    def from_disk_coefficients(cls, alpha, beta):
        """Build from the SU(1,1) pair (alpha, beta) with |alpha|^2-|beta|^2=1."""
        a = alpha.real + beta.real
        b = alpha.imag - beta.imag
        c = -alpha.imag - beta.imag
        d = alpha.real - beta.real
        return cls(a, b, c, d)

    @classmethod
    def taking_origin_to(cls, z):
        """The translation along a radius carrying 0 to z."""
        z = require_interior(z)
        r = abs(z)
        if r == 0.0:
            return cls.identity()
        return cls.translation(2.0 * math.atanh(r), cmath.phase(z))

    # -- structure ---------------------------------------------------------

    def disk_coefficients(self):
        """The SU(1,1) pair (alpha, beta) of this map."""
        alpha = complex(0.5 * (self.a + self.d), 0.5 * (self.b - self.c))
        beta = complex(0.5 * (self.a - self.d), -0.5 * (self.b + self.c))
        return alpha, beta

    def entries(self):
        return (self.a, self.b, self.c, self.d)

    def compose(self, other):
        """self after other (matrix product self @ other)."""
        return MoebiusMap(
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d,
        )

    def __matmul__(self, other):
        return self.compose(other)

    def inverse(self):
        return MoebiusMap(self.d, -self.b, -self.c, self.a)

    # -- action ------------------------------------------------------------

    def apply(self, z):
        """Image of an interior point."""
        z = require_interior(z)
        alpha, beta = self.disk_coefficients()
        return (alpha * z + beta) / (beta.conjugate() * z + alpha.conjugate())

    def __call__(self, z):
        return self.apply(z)

    def boundary_angle(self, theta):
        """Image of the boundary point at angle theta."""
        alpha, beta = self.disk_coefficients()
        w = cmath.rect(1.0, theta)
        num = alpha * w + beta
        den = beta.conjugate() * w + alpha.conjugate()
        return normalize_angle(cmath.phase(num * den.conjugate()))

    def derivative(self, z):
        """Complex derivative of the disk action at an interior point."""
        z = require_interior(z)
        alpha, beta = self.disk_coefficients()
        den = beta.conjugate() * z + alpha.conjugate()
        return 1.0 / (den * den)

    def boundary_stretch(self, theta):
        """|d(gamma xi)/d xi| at the boundary point xi = theta.

        Equals exp(-busemann(inverse image of 0, theta)).
        """
        alpha, beta = self.disk_coefficients()
        w = cmath.rect(1.0, theta)
        den = beta.conjugate() * w + alpha.conjugate()
        return 1.0 / (den.real * den.real + den.imag * den.imag)

    # -- invariants --------------------------------------------------------

    def origin_displacement(self):
        """Distance d(0, m(0)), from the trace of m^T m."""
        s = 0.5 * (self.a * self.a + self.b * self.b + self.c * self.c + self.d * self.d)
        if s < 1.0:
            s = 1.0
        return math.log(s + math.sqrt(s * s - 1.0))

    def trace(self):
        return self.a + self.d

    def translation_length(self):
        """Length of the closed geodesic of a hyperbolic element (0 otherwise)."""
        t = 0.5 * abs(self.trace())
        if t <= 1.0:
            return 0.0
        return 2.0 * math.acosh(t)

    def is_identity(self, tol=1e-9):
        return (
            abs(self.a - 1.0) <= tol
            and abs(self.b) <= tol
            and abs(self.c) <= tol
            and abs(self.d - 1.0) <= tol
        )

    def close_to(self, other, tol=1e-9):
        """Equality as isometries (sign-insensitive matrix comparison)."""
        direct = max(
            abs(self.a - other.a),
            abs(self.b - other.b),
            abs(self.c - other.c),
            abs(self.d - other.d),
        )
        flipped = max(
            abs(self.a + other.a),
            abs(self.b + other.b),
            abs(self.c + other.c),
            abs(self.d + other.d),
        )
        return min(direct, flipped) <= tol

    def __repr__(self):
        return f"MoebiusMap({self.a:.12g}, {self.b:.12g}, {self.c:.12g}, {self.d:.12g})"


def direction_angles(m):
    """(outgoing, incoming) boundary directions of the axis through the orbit.

    Outgoing is the direction of m(0) seen from 0; incoming is the direction
    from which the orbit point arrives, i.e. opposite the direction of
    m^{-1}(0).  Undefined (raises) when m fixes the origin.
    """
    alpha, beta = m.disk_coefficients()
    if abs(beta) == 0.0:
        raise ValueError("map fixes the origin; directions are undefined")
    out = cmath.phase(beta / alpha.conjugate())
    # -beta/alpha rotated by pi is beta/alpha
    inc = cmath.phase(beta / alpha)
    return normalize_angle(out), normalize_angle(inc)


def busemann(q, xi):
    """Busemann cocycle b_0(q, xi) based at the origin.

    log(|xihat - q|^2 / (1 - |q|^2)) for xihat the boundary point at angle
    xi.  Zero at q = 0, tends to -infinity as q -> xihat.
    """
    q = require_interior(q)
    xihat = cmath.rect(1.0, xi)
    diff = xihat - q
    num = diff.real * diff.real + diff.imag * diff.imag
    den = 1.0 - (q.real * q.real + q.imag * q.imag)
    return math.log(num / den)


def busemann_rel(q, p, xi):
    """Relative cocycle b_p(q, xi) = b_0(q, xi) - b_0(p, xi)."""
    return busemann(q, xi) - busemann(p, xi)


def horocycle_gap(xi, eta):
    """Gap cocycle beta_0(xi, eta) = -2 log sin(angdist(xi, eta)/2).

    Equals |b_xi(q, 0) + b_eta(q, 0)| for any q on the geodesic (xi, eta);
    zero iff the endpoints are antipodal, +infinity at coincident endpoints.
    """
    d = angular_distance(xi, eta)
    if d < ENDPOINT_SEP_TOL:
        raise ValueError("gap cocycle diverges at coincident boundary points")
    return -2.0 * math.log(math.sin(0.5 * d))


@dataclass(frozen=True)
class UnitTangent:
    """A unit tangent vector: interior basepoint and direction angle."""

    base: complex
    angle: float

    def __post_init__(self):
        require_interior(self.base)
        object.__setattr__(self, "base", complex(self.base))
        object.__setattr__(self, "angle", normalize_angle(self.angle))

    def reversed(self):
        return UnitTangent(self.base, self.angle + math.pi)


def geodesic_flow(v, t):
    """Flow a unit tangent vector time t along its geodesic."""
    z = v.base
    # the map w -> (w - z)/(1 - conj(z) w) has real positive derivative at z,
    # so it carries v to the tangent (0, v.angle); flow there, map back
    p = cmath.rect(math.tanh(0.5 * t), v.angle)
    den = 1.0 + z.conjugate() * p
    base = (p + z) / den
    angle = v.angle - 2.0 * cmath.phase(den)
    return UnitTangent(base, angle)


def geodesic_endpoints(v):
    """Boundary endpoints (past, future) of the geodesic through v."""
    z = v.base
    r2 = z.real * z.real + z.imag * z.imag
    s = math.sqrt(1.0 - r2)
    alpha = complex(1.0 / s, 0.0)
    beta = z / s
    # forward endpoint: image of e^{i angle} under w -> (alpha w + beta)/(conj...)
    fw = cmath.rect(1.0, v.angle)
    num = alpha * fw + beta
    den = beta.conjugate() * fw + alpha.conjugate()
    future = normalize_angle(cmath.phase(num * den.conjugate()))
    bw = -fw
    num = alpha * bw + beta
    den = beta.conjugate() * bw + alpha.conjugate()
    past = normalize_angle(cmath.phase(num * den.conjugate()))
    return past, future


def tangent_pushforward(m, v):
    """Image of a unit tangent vector under an isometry."""
    base = m.apply(v.base)
    angle = v.angle + cmath.phase(m.derivative(v.base))
    return UnitTangent(base, angle)


def geodesic_between(xi, eta):
    """Unit tangent at the point of the geodesic (xi, eta) closest to 0.

    The vector points from xi toward eta.  Raises for (near-)coincident
    endpoints; antipodal endpoints give a diameter through the origin.
    """
    gap = signed_angle_gap(xi, eta)
    if abs(gap) < ENDPOINT_SEP_TOL:
        raise ValueError("geodesic endpoints must be distinct")
    psi = 0.5 * abs(gap)  # half the arc between the endpoints, in (0, pi/2]
    mid = xi + 0.5 * gap
    r = math.tan(0.25 * math.pi - 0.5 * psi)
    base = cmath.rect(r, mid) if r > 0.0 else complex(0.0)
    angle = mid + math.copysign(0.5 * math.pi, gap)
    return UnitTangent(base, angle)


def hopf_coordinates(v):
    """Hopf parametrization (past, future, s) of a unit tangent vector.

    s is the Busemann value busemann(base, past); flowing time t adds t to s.
    """
    past, future = geodesic_endpoints(v)
    return past, future, busemann(v.base, past)


def tangent_from_hopf(past, future, s):
    """Inverse of hopf_coordinates."""
    v0 = geodesic_between(past, future)
    s0 = busemann(v0.base, past)
    return geodesic_flow(v0, s - s0)
