"""Counting statistics over an orbit census.

Turns a census into staircase counting functions: all loops N(t), loops
leaving and arriving inside angular sectors, per-homology-coset counts,
cover-lift proportions, and exponential fits count ~ a * e^{h t}.

Counts are over nontrivial records (the identity is not a geodesic loop).
Sector membership uses the closed inequality on the minimal circle
distance, so half-angle pi means no constraint.
"""

import csv
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .geometry import TAU

# bootstrap resamples behind the a-estimate confidence band
DEFAULT_BOOTSTRAP = 200
# least-squares fits need this many grid points to mean anything
MIN_FIT_POINTS = 5
# default fit window reaches this far back from the top of the grid
DEFAULT_WINDOW_SPAN = 4.0
# grid comparisons forgive this much float noise
GRID_EPS = 1e-9


@dataclass(frozen=True)
class SectorSpec:
    """An angular sector of directions at the basepoint.

    base_angle is the central direction, half_angle the angular radius;
    half_angle = pi covers every direction.
    """

    base_angle: float
    half_angle: float

    def __post_init__(self):
        if not (math.isfinite(self.base_angle) and math.isfinite(self.half_angle)):
            raise ValueError("sector angles must be finite")
        if not 0.0 < self.half_angle <= math.pi:
            raise ValueError("half angle must lie in (0, pi]")

    def describe(self):
        return f"sector(base={self.base_angle:.6g}, half={self.half_angle:.6g})"

    def contains(self, angles):
        """Boolean mask of angles within half_angle of the base angle."""
        d = np.mod(np.abs(np.asarray(angles, dtype=np.float64) - self.base_angle), TAU)
        return np.minimum(d, TAU - d) <= self.half_angle


FULL_SECTOR = SectorSpec(0.0, math.pi)


@dataclass(frozen=True)
class CountSeries:
    """Counts of qualifying loops at each grid radius (a staircase in t)."""

    grid: np.ndarray
    counts: np.ndarray
    label: str = "arcs"

    def __post_init__(self):
        grid = np.asarray(self.grid, dtype=np.float64)
        counts = np.asarray(self.counts, dtype=np.int64)
        if grid.shape != counts.shape or grid.ndim != 1:
            raise ValueError("grid and counts must be matching 1-d arrays")
        if np.any(np.diff(counts) < 0):
            raise ValueError("counts must be nondecreasing in t")
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "counts", counts)

    def __len__(self):
        return self.grid.size


@dataclass(frozen=True)
class ProportionSeries:
    """Share of qualifying loops at each grid radius (nan where none exist)."""

    grid: np.ndarray
    proportions: np.ndarray
    label: str = "proportion"


@dataclass(frozen=True)
class AsymptoticFit:
    """Least-squares fit of log counts ~ log a + h * t over a window."""

    h_estimate: float
    a_estimate: float
    window: tuple
    residual: float
    a_band: tuple
    bootstrap: int

    def as_dict(self):
        return {
            "h_estimate": self.h_estimate,
            "a_estimate": self.a_estimate,
            "window": list(self.window),
            "residual": self.residual,
            "a_band": list(self.a_band),
            "bootstrap": self.bootstrap,
        }


def _checked_grid(census, t_grid):
    grid = np.asarray(t_grid, dtype=np.float64)
    if grid.ndim != 1 or grid.size == 0:
        raise ValueError("t grid must be a nonempty 1-d array")
    if not np.all(np.isfinite(grid)):
        raise ValueError("t grid must be finite")
    if np.any(np.diff(grid) <= 0.0):
        raise ValueError("t grid must be strictly increasing")
    if grid[-1] > census.t + GRID_EPS:
        raise ValueError(
            f"grid reaches {grid[-1]:g} beyond the census radius {census.t:g}"
        )
    return grid


def _staircase(displacements, grid):
    return np.searchsorted(displacements, grid, side="right").astype(np.int64)


def count_arcs(census, t_grid):
    """N(t) on the grid: loops with displacement <= t."""
    grid = _checked_grid(census, t_grid)
    return CountSeries(grid, _staircase(census.displacements, grid))


def count_sector(census, start, end, t_grid):
    """Loops leaving in the start sector and arriving in the end sector."""
    grid = _checked_grid(census, t_grid)
    mask = start.contains(census.outgoing_angles) & end.contains(census.incoming_angles)
    label = f"{start.describe()} -> {end.describe()}"
    return CountSeries(grid, _staircase(census.displacements[mask], grid), label)


def count_by_coset(census, scheme, t_grid):
    """Map from each coset of the scheme to its CountSeries."""
    grid = _checked_grid(census, t_grid)
    flat = scheme.indices(census.homology)
    out = {}
    for pos, label in enumerate(scheme.labels()):
        d = census.displacements[flat == pos]
        out[label] = CountSeries(grid, _staircase(d, grid), f"coset{label}")
    return out


def coset_shares(census, scheme, t):
    """Share of N(t) landing in each coset, in labels() order; sums to 1."""
    series = count_by_coset(census, scheme, [t])
    counts = np.array([series[label].counts[0] for label in scheme.labels()],
                      dtype=np.int64)
    total = counts.sum()
    if total == 0:
        raise ValueError(f"no loops within t={t:g}")
    return [Fraction(int(c), int(total)) for c in counts]


def cover_lift_proportion(census, scheme, t_grid, coset=None):
    """Proportion of loops whose lift to the scheme's cover closes up.

    A lift closes exactly when the loop lies in the identity coset; pass a
    different coset to get that coset's share instead.
    """
    grid = _checked_grid(census, t_grid)
    if coset is None:
        coset = scheme.identity_coset()
    per = count_by_coset(census, scheme, grid)
    if coset not in per:
        raise ValueError(f"coset {coset} not in scheme")
    total = count_arcs(census, grid).counts
    hits = per[coset].counts.astype(np.float64)
    props = np.divide(hits, total, out=np.full(grid.shape, math.nan), where=total > 0)
    return ProportionSeries(grid, props, f"coset{coset} share")


def fit_asymptotics(series, window=None, bootstrap=DEFAULT_BOOTSTRAP, seed=0):
    """Fit counts ~ a * e^{h t} over a window of the series.

    h is the least-squares slope of log counts against t; a is the
    geometric mean of counts * e^{-h t} over the window; the residual is
    the RMS of the log-scale fit.  The a-band is a 95% percentile interval
    from resampling the fit residuals `bootstrap` times.
    """
    grid = np.asarray(series.grid, dtype=np.float64)
    counts = np.asarray(series.counts)
    if window is None:
        window = (grid[-1] - DEFAULT_WINDOW_SPAN, grid[-1])
    lo, hi = float(window[0]), float(window[1])
    if not lo < hi:
        raise ValueError("fit window must have positive length")
    pick = (grid >= lo - GRID_EPS) & (grid <= hi + GRID_EPS)
    if int(pick.sum()) < MIN_FIT_POINTS:
        raise ValueError(f"fit window must contain at least {MIN_FIT_POINTS} grid points")
    if np.any(counts[pick] <= 0):
        raise ValueError("fit window contains zero counts")
    t = grid[pick]
    y = np.log(counts[pick].astype(np.float64))

    def slope_and_level(yvals):
        tc = t - t.mean()
        h = float(np.dot(tc, yvals - yvals.mean()) / np.dot(tc, tc))
        a = float(np.exp(np.mean(yvals - h * t)))
        return h, a

    h_est, a_est = slope_and_level(y)
    resid = y - (math.log(a_est) + h_est * t)
    residual = float(np.sqrt(np.mean(resid * resid)))

    rng = np.random.default_rng(seed)
    a_samples = np.empty(bootstrap, dtype=np.float64)
    fitted = math.log(a_est) + h_est * t
    for k in range(bootstrap):
        y_star = fitted + rng.choice(resid, size=resid.size, replace=True)
        _, a_samples[k] = slope_and_level(y_star)
    band = (float(np.percentile(a_samples, 2.5)), float(np.percentile(a_samples, 97.5)))
    return AsymptoticFit(h_est, a_est, (lo, hi), residual, band, bootstrap)


def sector_constant_profile(census, t, thetas, theta_primes, base_angles, h=1.0):
    """Normalized sector constants across sector shapes and base rotations.

    For each (theta, theta_prime, base) the start sector is (base, theta)
    and the end sector (base, theta_prime); the normalized constant is
    count(t) / (e^{h t} * theta * theta_prime / pi^2), which in this model
    should not depend on the row.  Returns a list of row dicts.
    """
    rows = []
    for theta in thetas:
        for theta_prime in theta_primes:
            for base in base_angles:
                series = count_sector(
                    census,
                    SectorSpec(base, theta),
                    SectorSpec(base, theta_prime),
                    [t],
                )
                count = int(series.counts[0])
                norm = theta * theta_prime / math.pi**2
                rows.append(
                    {
                        "theta": theta,
                        "theta_prime": theta_prime,
                        "base_angle": base,
                        "t": t,
                        "count": count,
                        "normalized_constant": count / (math.exp(h * t) * norm),
                    }
                )
    return rows


def write_series_csv(path, series_list, provenance=None):
    """Emit (t, count, filter) rows for one or more count series.

    provenance, when given, becomes a leading '#' comment line.
    """
    with open(path, "w", newline="") as fh:
        if provenance:
            fh.write(f"# {provenance}\n")
        writer = csv.writer(fh)
        writer.writerow(["t", "count", "filter"])
        for series in series_list:
            for t, c in zip(series.grid, series.counts):
                writer.writerow([f"{t:.17g}", int(c), series.label])


def write_columns(path, columns, header=None, provenance=None):
    """Plot-ready whitespace-separated columns, one line per grid point."""
    arrays = [np.asarray(col, dtype=np.float64) for col in columns]
    with open(path, "w") as fh:
        if provenance:
            fh.write(f"# {provenance}\n")
        if header:
            fh.write("# " + " ".join(header) + "\n")
        for values in zip(*arrays):
            fh.write(" ".join(f"{v:.17g}" for v in values) + "\n")
