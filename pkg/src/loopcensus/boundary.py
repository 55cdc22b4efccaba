"""Boundary-circle machinery: arcs, measures, flow boxes, and lemma verifiers.

Arcs on the unit circle carry the angular (Patterson-Sullivan) measure at
basepoint 0.  Flow boxes are Hopf-coordinate rectangles (past arc) x
(future arc) x [0, s-height].  The verifiers decide membership in the
orbit subsets

    Gamma(t)      : primed box meets the time-(-t) translate of the box,
    Gamma*        : gamma F inside F' and gamma^{-1} P inside P',
    Gamma*(t, a)  : Gamma* and the short box S meets the translate,

through an exact interval criterion: a tangent in both boxes exists iff
some xi in (past target) \cap gamma(P) has b_gamma(xi) in
[t - alpha, t + eps^2] and (future target) \cap gamma(F) is nonempty.
The s-coordinate is free once the endpoints are fixed, because
s(gamma^{-1} phi^t w) = s(w) + t - b_gamma(w^-).
"""

import cmath
import dataclasses
import functools
import math

import numpy as np

from .geometry import (
    TAU,
    MoebiusMap,
    angular_distance,
    busemann,
    geodesic_flow,
    horocycle_gap,
    hopf_coordinates,
    normalize_angle,
    tangent_from_hopf,
    tangent_pushforward,
)
from .statistics import SectorSpec

# slop for closed arc-membership and interval tests
ARC_TOL = 1e-12
# absolute tolerance for adaptive quadrature
QUAD_TOL = 1e-9
# tolerance on the s-coordinate when testing sampled tangents against a box
S_MEMBERSHIP_TOL = 1e-9

DEFAULT_EPSILON = 0.1
# theta and theta' default to this fraction of the diameter threshold theta_1
DEFAULT_THETA_FRACTION = 0.8

_THETA_ONE_CAP = 1.35  # stay clear of pi/2 where P and F touch


@dataclasses.dataclass(frozen=True)
class Arc:
    """Closed circular arc: angles within half_width of center."""

    center: float
    half_width: float

    def __post_init__(self):
        if not (0.0 < self.half_width <= math.pi + ARC_TOL):
            raise ValueError(f"arc half-width must be in (0, pi], got {self.half_width}")
        object.__setattr__(self, "center", normalize_angle(self.center))
        object.__setattr__(self, "half_width", min(self.half_width, math.pi))

    @property
    def width(self):
        return 2.0 * self.half_width

    @property
    def start(self):
        return normalize_angle(self.center - self.half_width)

    @property
    def end(self):
        return normalize_angle(self.center + self.half_width)

    def is_full(self):
        return self.half_width >= math.pi - ARC_TOL

    def contains(self, angle):
        return angular_distance(angle, self.center) <= self.half_width + ARC_TOL

    def contains_arc(self, other):
        if self.is_full():
            return True
        gap = angular_distance(self.center, other.center)
        return gap + other.half_width <= self.half_width + ARC_TOL

    def intersect(self, other):
        """Intersection as a tuple of arcs (empty, one, or two pieces).

        Pieces narrower than the arc tolerance are dropped.  When the
        combined widths exceed the full circle the two pieces may overlap;
        their union is still the exact intersection.
        """
        if self.is_full():
            return (other,)
        if other.is_full():
            return (self,)
        rel = (other.start - self.start) % TAU
        pieces = []
        for shift in (rel, rel - TAU):
            lo = max(0.0, shift)
            hi = min(self.width, shift + other.width)
            if hi - lo > ARC_TOL:
                mid = self.start + 0.5 * (lo + hi)
                pieces.append(Arc(mid, 0.5 * (hi - lo)))
        return tuple(pieces)

    def sample(self, n):
        """n angles spanning the arc, endpoints included."""
        return self.center + np.linspace(-self.half_width, self.half_width, n)


def arc_separation(first, second):
    """Angular gap between two arcs, zero when they overlap or touch."""
    if first.is_full() or second.is_full():
        return 0.0
    gap = angular_distance(first.center, second.center)
    return max(0.0, gap - first.half_width - second.half_width)


def mobius_image_arc(m, arc):
    """Image of an arc under an isometry; endpoints map to endpoints."""
    if arc.is_full():
        return Arc(m.boundary_angle(arc.center), math.pi)
    start = m.boundary_angle(arc.start)
    end = m.boundary_angle(arc.end)
    width = (end - start) % TAU
    return Arc(start + 0.5 * width, 0.5 * width)


def future_past_arcs(spec):
    """(F, P) boundary arcs of the radial sector at the disk center.

    Radial geodesics from 0 hit the boundary at their own direction, so F
    is the sector arc itself and P its antipode.
    """
    future = Arc(spec.base_angle, spec.half_angle)
    past = Arc(spec.base_angle + math.pi, spec.half_angle)
    return future, past


# -- measures ---------------------------------------------------------------


def ps_mass(arc):
    """Angular-measure mass of an arc, total mass 1."""
    return arc.half_width / math.pi


def _adaptive_simpson(f, a, b, tol, depth=24):
    fa, fm, fb = f(a), f(0.5 * (a + b)), f(b)
    whole = (b - a) * (fa + 4.0 * fm + fb) / 6.0
    return _simpson_step(f, a, b, fa, fm, fb, whole, tol, depth)


def _simpson_step(f, a, b, fa, fm, fb, whole, tol, depth):
    m = 0.5 * (a + b)
    flm = f(0.5 * (a + m))
    frm = f(0.5 * (m + b))
    left = (m - a) * (fa + 4.0 * flm + fm) / 6.0
    right = (b - m) * (fm + 4.0 * frm + fb) / 6.0
    err = left + right - whole
    if depth <= 0 or abs(err) <= 15.0 * tol:
        return left + right + err / 15.0
    return _simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) + _simpson_step(
        f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1
    )


def _composite_simpson(f, a, b, panels):
    xs = np.linspace(a, b, 2 * panels + 1)
    ys = np.array([f(x) for x in xs])
    step = (b - a) / (2 * panels)
    return step / 3.0 * (ys[0] + ys[-1] + 4.0 * ys[1::2].sum() + 2.0 * ys[2:-1:2].sum())


def transformed_arc_mass(m, arc):
    """Mass of the image arc m(arc); closed form via endpoint images."""
    return ps_mass(mobius_image_arc(m, arc))


def ps_rule_quadrature(m, arc, h=1.0, rel_tol=1e-9, panels=32):
    """Mass of m(arc) by change of variables on the source arc.

    |m'(xi)| = exp(-h b(m^{-1} 0, xi)) on the boundary, so the image mass
    is the integral of that density over the arc.  The density spikes in a
    window of width e^{-displacement} around the direction of m^{-1} 0, so
    the arc is pre-split (with a split point pinned at that direction)
    before adaptive refinement; the tolerance is relative to a coarse pass.
    """
    q = m.inverse().apply(0j)

    def density(xi):
        return math.exp(-h * busemann(q, xi))

    a = arc.center - arc.half_width
    b = arc.center + arc.half_width
    cuts = [a, b]
    spike = cmath.phase(q)
    for offset in (-TAU, 0.0, TAU):
        if a < spike + offset < b:
            cuts.append(spike + offset)
    cuts.sort()
    total = 0.0
    for left, right in zip(cuts[:-1], cuts[1:]):
        total += _composite_simpson(density, left, right, panels)
    tol = max(1e-15, rel_tol * abs(total))
    refined = 0.0
    for left, right in zip(cuts[:-1], cuts[1:]):
        edges = np.linspace(left, right, panels + 1)
        for lo, hi in zip(edges[:-1], edges[1:]):
            refined += _adaptive_simpson(density, lo, hi, tol / (panels * (len(cuts) - 1)))
    return refined / TAU


def mu_bar(past_arc, future_arc, h=1.0, tol=QUAD_TOL, panels=None):
    """Double integral of e^{h * gap} over the two arcs, masses normalized.

    This is the endpoint-pair measure of (past arc) x (future arc); it is
    symmetric in its arguments.  The arcs must be separated, since the
    integrand diverges at coincident endpoints.
    """
    if arc_separation(past_arc, future_arc) <= 0.0:
        raise ValueError("arcs overlap; the gap integrand diverges")
    a0 = past_arc.center - past_arc.half_width
    a1 = past_arc.center + past_arc.half_width
    b0 = future_arc.center - future_arc.half_width
    b1 = future_arc.center + future_arc.half_width

    def inner(xi):
        def g(eta):
            return math.exp(h * horocycle_gap(xi, eta))

        if panels is not None:
            return _composite_simpson(g, b0, b1, panels)
        return _adaptive_simpson(g, b0, b1, tol / max(a1 - a0, 1.0))

    if panels is not None:
        outer = _composite_simpson(inner, a0, a1, panels)
    else:
        outer = _adaptive_simpson(inner, a0, a1, tol)
    return outer / (TAU * TAU)


def box_mass(box, h=1.0):
    """Product-measure mass of a flow box: arc-pair mass times s-height."""
    return mu_bar(box.past_arc, box.future_arc, h) * box.s_length


# -- flow boxes -------------------------------------------------------------


@dataclasses.dataclass(frozen=True)
class FlowBox:
    """Hopf rectangle (past arc) x (future arc) x [0, s_length]."""

    past_arc: Arc
    future_arc: Arc
    s_length: float

    def __post_init__(self):
        if self.s_length <= 0.0:
            raise ValueError("flow box needs positive s-height")
        if arc_separation(self.past_arc, self.future_arc) <= 0.0:
            raise ValueError("flow box arcs must be disjoint")


def tangent_in_box(v, box, s_tol=S_MEMBERSHIP_TOL):
    past, future, s = hopf_coordinates(v)
    return (
        box.past_arc.contains(past)
        and box.future_arc.contains(future)
        and -s_tol <= s <= box.s_length + s_tol
    )


@dataclasses.dataclass(frozen=True)
class BoxParameters:
    """Scales and arc widths for the pair of flow boxes.

    The unprimed box has arcs of half-width theta about base_angle (+ pi
    for the past arc) and s-height alpha; the primed box has half-width
    theta_prime about base_angle_prime and s-height epsilon^2.
    """

    epsilon: float
    alpha: float
    theta: float
    theta_prime: float
    base_angle: float = 0.0
    base_angle_prime: float = 0.0

    def __post_init__(self):
        if self.epsilon <= 0.0:
            raise ValueError("epsilon must be positive")
        if not (0.0 < self.alpha <= 1.5 * self.epsilon + ARC_TOL):
            raise ValueError("alpha must lie in (0, 3 epsilon / 2]")
        for name in ("theta", "theta_prime"):
            val = getattr(self, name)
            if not (0.0 < val < 0.5 * math.pi):
                raise ValueError(f"{name} must lie in (0, pi/2), got {val}")

    @property
    def future_arc(self):
        return Arc(self.base_angle, self.theta)

    @property
    def past_arc(self):
        return Arc(self.base_angle + math.pi, self.theta)

    @property
    def future_arc_prime(self):
        return Arc(self.base_angle_prime, self.theta_prime)

    @property
    def past_arc_prime(self):
        return Arc(self.base_angle_prime + math.pi, self.theta_prime)

    def box(self):
        return FlowBox(self.past_arc, self.future_arc, self.alpha)

    def primed_box(self):
        return FlowBox(self.past_arc_prime, self.future_arc_prime, self.epsilon**2)

    def short_box(self):
        # same arcs as the main box, s-height epsilon^2
        return FlowBox(self.past_arc, self.future_arc, self.epsilon**2)

    def as_dict(self):
        return {
            "epsilon": self.epsilon,
            "alpha": self.alpha,
            "theta": self.theta,
            "theta_prime": self.theta_prime,
            "base_angle": self.base_angle,
            "base_angle_prime": self.base_angle_prime,
        }


def _section_diameter(theta, n=12):
    """Hyperbolic diameter of the s = 0 section of the width-theta box."""
    future = Arc(0.0, theta)
    past = Arc(math.pi, theta)
    pts = np.empty(n * n, dtype=complex)
    k = 0
    for xi in past.sample(n):
        for eta in future.sample(n):
            pts[k] = tangent_from_hopf(xi, eta, 0.0).base
            k += 1
    z = pts.reshape(-1, 1)
    w = pts.reshape(1, -1)
    q = np.abs(z - w) / np.abs(1.0 - np.conj(z) * w)
    return float(2.0 * np.arctanh(q.max()))


@functools.lru_cache(maxsize=32)
def theta_one(epsilon, tol=1e-6):
    """Largest arc half-width whose s = 0 box section has diameter < eps/2.

    Monotone bisection on the sampled diameter; capped away from pi/2
    where the two arcs would touch.
    """
    if epsilon <= 0.0:
        raise ValueError("epsilon must be positive")
    target = 0.5 * epsilon
    lo = 1e-6
    hi = _THETA_ONE_CAP
    if _section_diameter(lo) >= target:
        raise ValueError(f"epsilon = {epsilon} too small for the diameter condition")
    if _section_diameter(hi) < target:
        return hi
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if _section_diameter(mid) < target:
            lo = mid
        else:
            hi = mid
    return lo


def standard_parameters(
    epsilon=DEFAULT_EPSILON,
    alpha=None,
    theta=None,
    theta_prime=None,
    base_angle=0.0,
    base_angle_prime=0.0,
    theta_fraction=DEFAULT_THETA_FRACTION,
):
    """Box parameters with defaults tied to the diameter threshold."""
    cap = theta_one(epsilon)
    if theta is None:
        theta = theta_fraction * cap
    if theta_prime is None:
        theta_prime = theta_fraction * cap
    if alpha is None:
        alpha = 1.5 * epsilon
    if theta >= cap or theta_prime >= cap:
        raise ValueError(f"theta and theta_prime must stay below theta_one = {cap}")
    return BoxParameters(
        epsilon=epsilon,
        alpha=alpha,
        theta=theta,
        theta_prime=theta_prime,
        base_angle=base_angle,
        base_angle_prime=base_angle_prime,
    )


# -- group elements against boxes ------------------------------------------


def b_gamma(xi, m):
    """Busemann cocycle of the orbit point: b_xi(m 0, 0)."""
    return busemann(m.apply(0j), xi)


def b_gamma_range(m, arc):
    """(min, max) of b_gamma over an arc, by the closed-form extrema.

    b depends on xi only through the distance to the orbit-point direction
    and is increasing in it, so the extrema sit at the clamped distance
    bounds.
    """
    z = m.apply(0j)
    r = abs(z)
    if r == 0.0:
        return 0.0, 0.0
    u = angular_distance(cmath.phase(z), arc.center)
    dmin = max(0.0, u - arc.half_width)
    dmax = min(math.pi, u + arc.half_width)
    one_minus = 1.0 - r
    den = one_minus * (1.0 + r)

    def value(d):
        s = math.sin(0.5 * d)
        return math.log((one_minus * one_minus + 4.0 * r * s * s) / den)

    return value(dmin), value(dmax)


def _interval_criterion(m, t, params, past_target, future_target):
    """Exact emptiness test for (target box) meeting phi^{-t} gamma_* (box)."""
    image_future = mobius_image_arc(m, params.future_arc)
    if not future_target.intersect(image_future):
        return False
    image_past = mobius_image_arc(m, params.past_arc)
    lo = t - params.alpha
    hi = t + params.epsilon**2
    for piece in past_target.intersect(image_past):
        bmin, bmax = b_gamma_range(m, piece)
        if bmin <= hi + ARC_TOL and bmax >= lo - ARC_TOL:
            return True
    return False


def gamma_t_membership(m, t, params):
    """Does the primed box meet phi^{-t} gamma_* (unprimed box)?"""
    return _interval_criterion(m, t, params, params.past_arc_prime, params.future_arc_prime)


def gamma_star_membership(m, params):
    """Arc inclusions gamma F inside F' and gamma^{-1} P inside P'."""
    image_future = mobius_image_arc(m, params.future_arc)
    if not params.future_arc_prime.contains_arc(image_future):
        return False
    image_past = mobius_image_arc(m.inverse(), params.past_arc)
    return params.past_arc_prime.contains_arc(image_past)


def gamma_star_box_membership(m, t, params):
    """Arc inclusions plus the short box meeting gamma_* phi^{-t} (box)."""
    return gamma_star_membership(m, params) and _interval_criterion(
        m, t, params, params.past_arc, params.future_arc
    )


def gamma_star_t_membership(m, t, params):
    """Arc inclusions intersected with plain Gamma(t) membership.

    Alternative definition of the starred time-t set; agrees with
    gamma_star_box_membership whenever the primed and unprimed arcs
    coincide (the symmetric default).
    """
    return gamma_star_membership(m, params) and gamma_t_membership(m, t, params)


def gamma_t_witness(m, t, params, scan=129, iters=80):
    """A tangent realizing Gamma(t) membership, or None.

    Picks xi in P' \cap gamma(P) with b_gamma(xi) inside the admissible
    interval (scanning then bisecting the continuous b along the piece),
    eta in F' \cap gamma(F), and the midpoint of the allowed s-window.
    """
    z = m.apply(0j)
    lo = t - params.alpha
    hi = t + params.epsilon**2
    future_pieces = params.future_arc_prime.intersect(mobius_image_arc(m, params.future_arc))
    if not future_pieces:
        return None
    eta = max(future_pieces, key=lambda a: a.half_width).center

    def b_of(xi):
        return busemann(z, xi)

    for piece in params.past_arc_prime.intersect(mobius_image_arc(m, params.past_arc)):
        bmin, bmax = b_gamma_range(m, piece)
        if bmin > hi or bmax < lo:
            continue
        target = 0.5 * (max(lo, bmin) + min(hi, bmax))
        xs = piece.sample(scan)
        bs = np.array([b_of(x) for x in xs])
        inside = np.nonzero((bs >= lo) & (bs <= hi))[0]
        if inside.size:
            xi = float(xs[inside[inside.size // 2]])
            bval = float(bs[inside[inside.size // 2]])
        else:
            # bracket the target between adjacent scan points, then bisect
            kk = np.nonzero((bs[:-1] - target) * (bs[1:] - target) <= 0.0)[0]
            if not kk.size:
                continue
            a, b = float(xs[kk[0]]), float(xs[kk[0] + 1])
            fa = b_of(a) - target
            for _ in range(iters):
                mid = 0.5 * (a + b)
                fm = b_of(mid) - target
                if fa * fm <= 0.0:
                    b = mid
                else:
                    a, fa = mid, fm
            xi = 0.5 * (a + b)
            bval = b_of(xi)
            if not (lo - ARC_TOL <= bval <= hi + ARC_TOL):
                continue
        s_lo = max(0.0, bval - t)
        s_hi = min(params.epsilon**2, bval - t + params.alpha)
        return tangent_from_hopf(xi, eta, 0.5 * (s_lo + s_hi))
    return None


def direct_membership_sample(m, t, params, samples, rng):
    """Monte-Carlo probe of the box intersection behind Gamma(t).

    Draws tangents from the primed box and tests whether the pullback of
    the time-t flow lands in the unprimed box.  Misses thin intersections,
    so a False only means the probe found nothing.
    """
    box = params.box()
    primed = params.primed_box()
    eps2 = params.epsilon**2
    inv = m.inverse()
    for _ in range(samples):
        xi = params.past_arc_prime.center + params.theta_prime * (2.0 * rng.random() - 1.0)
        eta = params.future_arc_prime.center + params.theta_prime * (2.0 * rng.random() - 1.0)
        s = eps2 * rng.random()
        w = tangent_from_hopf(xi, eta, s)
        if not tangent_in_box(w, primed):
            continue
        if tangent_in_box(tangent_pushforward(inv, geodesic_flow(w, t)), box):
            return True
    return False


# -- census sweeps ----------------------------------------------------------


def _disk_coefficient_arrays(matrices):
    a = matrices[:, 0]
    b = matrices[:, 1]
    c = matrices[:, 2]
    d = matrices[:, 3]
    alpha = 0.5 * ((a + d) + 1j * (b - c))
    beta = 0.5 * ((a - d) - 1j * (b + c))
    return alpha, beta


def _image_arc_arrays(alpha, beta, arc):
    """Center and half-width arrays of gamma(arc) across census elements."""

    def angle_of(w):
        num = alpha * w + beta
        den = np.conj(beta) * w + np.conj(alpha)
        return np.angle(num * np.conj(den))

    start = angle_of(cmath.rect(1.0, arc.start))
    end = angle_of(cmath.rect(1.0, arc.end))
    width = np.mod(end - start, TAU)
    return start + 0.5 * width, 0.5 * width


def _arcs_overlap_arrays(centers, half_widths, arc):
    gap = np.abs(np.mod(centers - arc.center + math.pi, TAU) - math.pi)
    return gap <= half_widths + arc.half_width + ARC_TOL


def _candidate_indices(census, t, params, past_target, future_target):
    """Indices that can possibly satisfy the interval criterion at time t.

    |b_gamma| <= displacement forces displacement >= t - alpha; the arc
    overlaps are necessary conditions of the criterion, evaluated in bulk.
    """
    start = int(np.searchsorted(census.displacements, t - params.alpha - 1e-9, side="left"))
    if start >= census.n_records:
        return np.empty(0, dtype=np.int64)
    mats = census.matrices[start:]
    alpha, beta = _disk_coefficient_arrays(mats)
    centers, widths = _image_arc_arrays(alpha, beta, params.future_arc)
    keep = _arcs_overlap_arrays(centers, widths, future_target)
    centers, widths = _image_arc_arrays(alpha, beta, params.past_arc)
    keep &= _arcs_overlap_arrays(centers, widths, past_target)
    return start + np.nonzero(keep)[0]


def gamma_t_members(census, t, params):
    """Census indices of Gamma(t) members, ascending."""
    idx = _candidate_indices(census, t, params, params.past_arc_prime, params.future_arc_prime)
    out = []
    for i in idx:
        m = MoebiusMap(*census.matrices[i])
        if gamma_t_membership(m, t, params):
            out.append(int(i))
    return out

def gamma_star_box_members(census, t, params):
    """Census indices in Gamma* with the short box meeting the translate."""
    idx = _candidate_indices(census, t, params, params.past_arc, params.future_arc)
    out = []
    for i in idx:
        m = MoebiusMap(*census.matrices[i])
        if gamma_star_box_membership(m, t, params):
            out.append(int(i))
    return out


def _require_radius(census, needed, what):
    if needed > census.t + 1e-9:
        raise ValueError(
            f"{what} needs elements out to displacement {needed:.6g} "
            f"but the census stops at {census.t:.6g}"
        )


def verify_inclusion_lemmas(census, params, rho, rho_prime, t_list):
    """Check the three inclusion lemmas over a census; report violations.

    vis1: the (rho, rho') membership set is inside the starred (theta,
    theta') set.  vis2: every loop in the sector window (outgoing within
    theta' of the primed base, incoming within theta of the base, length
    in (t - alpha, t]) is a Gamma(t) member.  vis3: every Gamma_{theta,
    rho'}(t) member gives a loop with length within 2 epsilon of t and
    angles in the enlarged sector window; lengths must also stay below
    t + 4 epsilon.
    """
    if not (0.0 < rho < params.theta and 0.0 < rho_prime < params.theta_prime):
        raise ValueError("need 0 < rho < theta and 0 < rho_prime < theta_prime")
    t_list = sorted(float(t) for t in t_list)
    _require_radius(census, t_list[-1] + 2.0 * params.epsilon, "inclusion check")
    params_rho = dataclasses.replace(params, theta=rho, theta_prime=rho_prime)
    params_vis3 = dataclasses.replace(params, theta_prime=rho_prime)

    out_angles = census.outgoing_angles
    inc_angles = census.incoming_angles
    disp = census.displacements
    out_gap = np.abs(np.mod(out_angles - params.base_angle_prime + math.pi, TAU) - math.pi)
    inc_gap = np.abs(np.mod(inc_angles - params.base_angle + math.pi, TAU) - math.pi)

    rows = []
    per_lemma = {"vis1": [], "vis2": [], "vis3": []}
    for t in t_list:
        members_rho = gamma_t_members(census, t, params_rho)
        vis1 = 0
        for i in members_rho:
            m = MoebiusMap(*census.matrices[i])
            if not (gamma_t_membership(m, t, params) and gamma_star_membership(m, params)):
                vis1 += 1

        in_shell = (disp > t - params.alpha + ARC_TOL) & (disp <= t + ARC_TOL)
        loop_idx = np.nonzero(
            in_shell & (out_gap <= params.theta_prime) & (inc_gap <= params.theta)
        )[0]
        vis2 = 0
        for i in loop_idx:
            m = MoebiusMap(*census.matrices[i])
            if not gamma_t_membership(m, t, params):
                vis2 += 1

        members_v3 = gamma_t_members(census, t, params_vis3)
        vis3 = 0
        vis3_disp = 0
        for i in members_v3:
            tau = float(disp[i])
            sector_ok = (
                out_gap[i] <= params.theta_prime + ARC_TOL
                and inc_gap[i] <= params.theta + ARC_TOL
            )
            if not (abs(tau - t) <= 2.0 * params.epsilon and sector_ok):
                vis3 += 1
            if tau > t + 4.0 * params.epsilon:
                vis3_disp += 1

        rows.append(
            {
                "t": t,
                "gamma_rho_count": len(members_rho),
                "vis1_violations": vis1,
                "loop_count": int(loop_idx.size),
                "vis2_violations": vis2,
                "gamma_theta_rho_prime_count": len(members_v3),
                "vis3_violations": vis3,
                "vis3_displacement_violations": vis3_disp,
                "empty": len(members_rho) == 0 and loop_idx.size == 0 and len(members_v3) == 0,
            }
        )
        per_lemma["vis1"].append(vis1)
        per_lemma["vis2"].append(vis2)
        per_lemma["vis3"].append(vis3 + vis3_disp)

    t0 = {}
    for name, counts in per_lemma.items():
        value = None
        for k in range(len(t_list) - 1, -1, -1):
            if counts[k]:
                break
            value = t_list[k]
        t0[name] = value
    total = sum(sum(v) for v in per_lemma.values())
    return {
        "parameters": {**params.as_dict(), "rho": rho, "rho_prime": rho_prime},
        "census_radius": census.t,
        "rows": rows,
        "empirical_t0": t0,
        "total_violations": int(total),
        "all_empty": all(row["empty"] for row in rows),
    }


def verify_scaling_lemma(census, params, t_list, h=1.0):
    """Check the box-mass scaling e^{-ht} prediction on Gamma* elements.

    For each member the rectangle P' x gamma F x [0, eps^2] must have mass
    within e^{+-5 h epsilon} of eps^2 e^{-ht} mass(P') mass(F), and the
    image-arc mass within e^{+-5 epsilon} of e^{-h displacement} mass(F).
    Empty member sets make the check inconclusive rather than failed.
    """
    t_list = sorted(float(t) for t in t_list)
    _require_radius(census, t_list[-1], "scaling check")
    mass_f = ps_mass(params.future_arc)
    mass_p_prime = ps_mass(params.past_arc_prime)
    box_bound = 5.0 * h * params.epsilon
    arc_bound = 5.0 * params.epsilon

    rows = []
    violations = 0
    for t in t_list:
        members = gamma_star_box_members(census, t, params)
        gamma_count = len(gamma_t_members(census, t, params))
        worst_box = 0.0
        worst_arc = 0.0
        bad_box = 0
        bad_arc = 0
        for i in members:
            m = MoebiusMap(*census.matrices[i])
            tau = float(census.displacements[i])
            image_future = mobius_image_arc(m, params.future_arc)
            pair_mass = mu_bar(params.past_arc_prime, image_future, h=h)
            log_box = math.log(pair_mass / (math.exp(-h * t) * mass_p_prime * mass_f))
            log_arc = math.log(ps_mass(image_future) / (math.exp(-h * tau) * mass_f))
            worst_box = max(worst_box, abs(log_box))
            worst_arc = max(worst_arc, abs(log_arc))
            bad_box += abs(log_box) > box_bound
            bad_arc += abs(log_arc) > arc_bound
        violations += bad_box + bad_arc
        rows.append(
            {
                "t": t,
                "gamma_count": gamma_count,
                "star_count": len(members),
                "star_ratio": (len(members) / gamma_count) if gamma_count else None,
                "worst_log_ratio_box": worst_box if members else None,
                "worst_log_ratio_arc": worst_arc if members else None,
                "box_violations": bad_box,
                "arc_violations": bad_arc,
                "inconclusive": not members,
            }
        )
    return {
        "parameters": {**params.as_dict(), "h": h},
        "census_radius": census.t,
        "log_ratio_bound_box": box_bound,
        "log_ratio_bound_arc": arc_bound,
        "rows": rows,
        "total_violations": int(violations),
        "inconclusive": all(row["inconclusive"] for row in rows),
    }


def verify_full_branch(census, params, t_list, samples=1000, seed=0):
    """Sample-check the full-branch identity on Gamma*(t, alpha) members.

    The claim: the primed box meets phi^{-(t + 2 eps^{3/2})} gamma_* of
    the alpha + 4 eps^{3/2} box exactly in the rectangle P' x gamma F x
    [0, eps^2].  Tangents drawn from the rectangle must pass the direct
    two-box test, and tangents drawn from the primed box must pass it
    exactly when their future endpoint lies in gamma F.
    """
    t_list = sorted(float(t) for t in t_list)
    _require_radius(census, t_list[-1], "full-branch check")
    rng = np.random.default_rng(seed)
    eps = params.epsilon
    eps2 = eps * eps
    slack = 2.0 * eps**1.5
    big_box = FlowBox(params.past_arc, params.future_arc, params.alpha + 2.0 * slack)
    primed = params.primed_box()

    rows = []
    total = 0
    for t in t_list:
        members = gamma_star_box_members(census, t, params)
        drawn = 0
        disagreements = 0
        if members:
            per_member = max(1, samples // (2 * len(members)))
            for i in members:
                m = MoebiusMap(*census.matrices[i])
                inv = m.inverse()
                image_future = mobius_image_arc(m, params.future_arc)

                def in_lhs(w):
                    if not tangent_in_box(w, primed):
                        return False
                    u = tangent_pushforward(inv, geodesic_flow(w, t + slack))
                    return tangent_in_box(u, big_box)

                for _ in range(per_member):
                    # rectangle side: P' x gamma F x [0, eps^2]
                    xi = params.past_arc_prime.center + params.theta_prime * (
                        2.0 * rng.random() - 1.0
                    )
                    eta = image_future.center + image_future.half_width * (
                        2.0 * rng.random() - 1.0
                    )
                    w = tangent_from_hopf(xi, eta, eps2 * rng.random())
                    drawn += 1
                    disagreements += not in_lhs(w)

                    # primed-box side: membership must match eta in gamma F
                    xi = params.past_arc_prime.center + params.theta_prime * (
                        2.0 * rng.random() - 1.0
                    )
                    eta = params.future_arc_prime.center + params.theta_prime * (
                        2.0 * rng.random() - 1.0
                    )
                    w = tangent_from_hopf(xi, eta, eps2 * rng.random())
                    drawn += 1
                    disagreements += in_lhs(w) != image_future.contains(
                        hopf_coordinates(w)[1]
                    )
        total += disagreements
        rows.append(
            {
                "t": t,
                "star_count": len(members),
                "samples": drawn,
                "disagreements": disagreements,
                "inconclusive": not members,
            }
        )
    return {
        "parameters": params.as_dict(),
        "census_radius": census.t,
        "seed": seed,
        "rows": rows,
        "total_disagreements": int(total),
        "inconclusive": all(row["inconclusive"] for row in rows),
    }
