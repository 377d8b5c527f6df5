"""Directional regularity estimation from wave-packet decay.

A direction is regular for u at a point when the transform magnitudes
decay like exp(-omega(gamma |xi|)) for some gamma > 0, where omega is
the growth transform of the weight table.  The estimator measures
magnitudes along a geometric frequency ray, fits the largest gamma
whose implied constant stays near the observed near-field level, and
converts the fitted reach into a verdict.

Coverage is the fraction of the required decay actually achieved at the
top of the ray: omega(gamma_hat * lambda_max) / omega(lambda_max).  A
point mass achieves none of it, an entire bump all of it.
"""

import dataclasses
import json
import math
from dataclasses import dataclass

import numpy as np

from .distributions import Combination, Delta, Sampled, combine
from .errors import TruncationExhausted, UnderResolvedGrid
from .fbi import PlateauWindow, fbi_transform

REGULAR = "REGULAR"
SINGULAR = "SINGULAR"
INCONCLUSIVE = "INCONCLUSIVE"

_STENCIL_RADIUS = 0.125
_STENCIL_COUNT = 5
_GAMMA_GRID = np.geomspace(2.0 ** -10, 2.0 ** 4, 57)
_LOGC_SLACK = 2.0
_ZERO_LEVEL = 1e-250
_LOG_FLOOR = 1e-300


def magnitude_grid(lo=4.0, hi=512.0, count=12):
    """Geometric frequency-magnitude ray used by the estimator."""
    if not 0 < lo < hi or count < 2:
        raise ValueError("need 0 < lo < hi and at least two points")
    return np.geomspace(lo, hi, count)


@dataclass(frozen=True)
class RayProfile:
    """Measured transform magnitudes along one frequency ray.

    mags[j] is the maximum of |F(t, lambdas[j] * direction)| over a
    small t-stencil around x0, with the window identically one there.
    """

    x0: float
    direction: float
    lambdas: np.ndarray
    mags: np.ndarray
    window: PlateauWindow
    stencil: np.ndarray

    def __post_init__(self):
        lam = np.asarray(self.lambdas, dtype=float)
        mag = np.asarray(self.mags, dtype=float)
        if lam.ndim != 1 or np.any(np.diff(lam) <= 0):
            raise ValueError("lambdas must be strictly increasing")
        if mag.shape != lam.shape or np.any(~np.isfinite(mag)) or np.any(mag < 0):
            raise ValueError("mags must be nonnegative, finite, same length")
        object.__setattr__(self, "lambdas", lam)
        object.__setattr__(self, "mags", mag)


@dataclass(frozen=True)
class DecayFit:
    """Fitted decay rate and its verdict.

    gamma_hat is None when no candidate rate is admissible; coverage is
    then zero and the verdict SINGULAR.
    """

    gamma_hat: float | None
    logC_hat: float | None
    coverage: float
    verdict: str


def directional_profile(u, x0, direction, lambdas, window, p):
    """Measure |F(psi u)| on a t-stencil for each ray magnitude."""
    d = float(np.sign(direction))
    if d == 0.0:
        raise ValueError("direction must be a nonzero scalar")
    lam = np.asarray(lambdas, dtype=float)
    stencil = x0 + np.linspace(-_STENCIL_RADIUS, _STENCIL_RADIUS,
                               _STENCIL_COUNT)
    inner = window(stencil)
    if not np.all(inner == 1.0):
        raise ValueError(
            "window must be identically one on the stencil around x0")
    grid = fbi_transform(u, window, p, stencil, lam)
    di = 0 if d < 0 else 1
    mags = np.max(np.abs(grid.values[:, di, :]), axis=0)
    return RayProfile(float(x0), d, lam, mags, window, stencil)


def fit_omega_decay(profile, M, tau_reg=0.5, tau_sing=0.1, gammas=None):
    """Fit the largest admissible decay rate against the weight table.

    For each candidate gamma the implied constant is
    logC(gamma) = max_j [omega(gamma lambda_j) + log mags_j]; gamma is
    admissible while logC stays within a fixed slack of the observed
    near-field level log mags_0.  The largest admissible gamma wins and
    its reach omega(gamma lambda_max) / omega(lambda_max) is the
    coverage that the verdict thresholds cut.
    """
    if profile.lambdas.size < 8:
        raise ValueError("need at least 8 ray magnitudes to fit decay")
    if not 0 <= tau_sing < tau_reg:
        raise ValueError("need 0 <= tau_sing < tau_reg")
    cand = _GAMMA_GRID if gammas is None else np.asarray(gammas, dtype=float)
    lam = profile.lambdas
    table = M.extended_to_cover(cand[-1] * lam[-1])
    denom = float(table.omega(lam[-1]))
    if denom <= 0.0:
        raise ValueError("ray too short: omega vanishes at lambda_max")
    if np.max(profile.mags) < _ZERO_LEVEL:
        # numerically zero input: nothing to resolve at any rate
        return DecayFit(float(cand[-1]), None, 1.0, REGULAR)
    logm = np.log(np.maximum(profile.mags, _LOG_FLOOR))
    omega = table.omega(cand[:, None] * lam[None, :])
    logC = np.max(omega + logm[None, :], axis=1)
    admissible = logC <= logm[0] + _LOGC_SLACK
    if not np.any(admissible):
        return DecayFit(None, None, 0.0, SINGULAR)
    i = int(np.max(np.nonzero(admissible)[0]))
    gamma_hat = float(cand[i])
    coverage = float(table.omega(gamma_hat * lam[-1])) / denom
    if coverage >= tau_reg:
        verdict = REGULAR
    elif coverage <= tau_sing:
        verdict = SINGULAR
    else:
        verdict = INCONCLUSIVE
    return DecayFit(gamma_hat, float(logC[i]), coverage, verdict)


# ---------------------------------------------------------------------------
# full estimates
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class WavefrontEntry:
    x: float
    direction: float
    fit: DecayFit | None
    error: str | None = None

    @property
    def verdict(self):
        return self.fit.verdict if self.fit is not None else "ERROR"


@dataclass(frozen=True)
class WavefrontEstimate:
    entries: tuple
    weight_name: str
    points: tuple
    directions: tuple
    flags: tuple = ()

    def verdict_at(self, x, direction):
        for e in self.entries:
            if e.x == x and e.direction == direction:
                return e.verdict
        raise KeyError((x, direction))

    def singular_entries(self):
        return tuple(e for e in self.entries if e.verdict == SINGULAR)


def _isolated_flips(entries, directions):
    # with a dense direction fan, one singular ray surrounded by regular
    # neighbours is suspicious; with only the two line directions there
    # is no adjacency to appeal to
    if len(directions) < 3:
        return ()
    flagged = []
    by_x = {}
    for e in entries:
        by_x.setdefault(e.x, {})[e.direction] = e.verdict
    order = list(directions)
    for x, fiber in by_x.items():
        n = len(order)
        for i, d in enumerate(order):
            here = fiber.get(d)
            left = fiber.get(order[(i - 1) % n])
            right = fiber.get(order[(i + 1) % n])
            if here == SINGULAR and left == REGULAR and right == REGULAR:
                flagged.append((x, d))
    return tuple(flagged)


def estimate_wavefront(u, points, directions, M, window, p, lambdas=None,
                       tau_reg=0.5, tau_sing=0.1):
    """Fit every (point, direction) pair; failures stay per-entry."""
    lam = magnitude_grid() if lambdas is None else np.asarray(lambdas, float)
    entries = []
    for x0 in points:
        w = dataclasses.replace(window, center=float(x0))
        for d in directions:
            try:
                prof = directional_profile(u, x0, d, lam, w, p)
                fit = fit_omega_decay(prof, M, tau_reg=tau_reg,
                                      tau_sing=tau_sing)
                entries.append(WavefrontEntry(float(x0), float(d), fit))
            except (ValueError, TruncationExhausted, UnderResolvedGrid) as e:
                entries.append(
                    WavefrontEntry(float(x0), float(d), None, str(e)))
    entries = tuple(entries)
    return WavefrontEstimate(entries, M.name, tuple(float(x) for x in points),
                             tuple(float(d) for d in directions),
                             _isolated_flips(entries, tuple(directions)))


@dataclass(frozen=True)
class ReflectionReport:
    symmetric: bool
    mismatches: tuple


def check_reflection(estimate, conjugate_estimate):
    """Verdicts of u at (x, xi) must match conj(u) at (x, -xi)."""
    a, b = estimate, conjugate_estimate
    if a.points != b.points or a.directions != b.directions:
        raise ValueError("estimates use different grids")
    mismatches = []
    for e in a.entries:
        other = b.verdict_at(e.x, -e.direction)
        if e.verdict != other:
            mismatches.append((e.x, e.direction, e.verdict, other))
    return ReflectionReport(not mismatches, tuple(mismatches))


# ---------------------------------------------------------------------------
# coordinate changes
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Diffeomorphism:
    """Invertible coordinate change with an explicit Jacobian oracle."""

    forward: callable
    inverse: callable
    jacobian: callable
    name: str = "map"


def pullback_wavefront(F, estimate):
    """Transport an estimate through y = F(x).

    An entry at (y, eta) moves to x = F^-1(y) with covector direction
    DF(x)^T eta, normalized; verdicts ride along unchanged.
    """
    entries = []
    points = []
    for e in estimate.entries:
        x = float(F.inverse(e.x))
        J = float(F.jacobian(x))
        if abs(J) < 1e-300:
            raise ValueError(f"jacobian vanishes at x = {x:g}")
        eta = math.copysign(1.0, J * e.direction)
        entries.append(dataclasses.replace(e, x=x, direction=eta))
        if x not in points:
            points.append(x)
    dirs = estimate.directions
    if float(F.jacobian(float(F.inverse(estimate.points[0])))) < 0:
        dirs = tuple(-d for d in reversed(dirs))
    return WavefrontEstimate(tuple(entries), estimate.weight_name,
                             tuple(points), dirs, estimate.flags)


def pullback_distribution(F, u):
    """u(F(x)) for affine F and point masses: delta moves and rescales."""
    x0, x1 = 0.0, 1.0
    J0, J1 = float(F.jacobian(x0)), float(F.jacobian(x1))
    if abs(J0 - J1) > 1e-12 * max(abs(J0), 1.0):
        raise ValueError("only affine maps transform atoms exactly")
    if abs(J0) < 1e-300:
        raise ValueError("jacobian vanishes: not a diffeomorphism")
    if isinstance(u, Combination):
        return combine(*((c, pullback_distribution(F, a))
                         for c, a in u.terms))
    if isinstance(u, Delta):
        if u.order != 0:
            raise TypeError("only order-zero point masses transform here")
        return combine((1.0 / abs(J0), Delta(float(F.inverse(u.location)))))
    raise TypeError(f"no exact pullback rule for {type(u).__name__}")


# ---------------------------------------------------------------------------
# reporting
# ---------------------------------------------------------------------------

def to_records(estimate):
    """Plain-dict rows, stable order, ready for JSON."""
    rows = []
    for e in sorted(estimate.entries, key=lambda e: (e.x, e.direction)):
        f = e.fit
        rows.append({
            "x": e.x,
            "direction": e.direction,
            "gamma": None if f is None else f.gamma_hat,
            "logC": None if f is None else f.logC_hat,
            "coverage": None if f is None else f.coverage,
            "verdict": e.verdict,
            "error": e.error,
        })
    return rows


def save_estimate(estimate, path):
    payload = {
        "weight": estimate.weight_name,
        "points": list(estimate.points),
        "directions": list(estimate.directions),
        "flagged": [list(f) for f in estimate.flags],
        "entries": to_records(estimate),
    }
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=1, sort_keys=True)
        fh.write("\n")


_SVG_COLORS = {REGULAR: "#2a9d3c", SINGULAR: "#d03030",
               INCONCLUSIVE: "#e0a020", "ERROR": "#808080"}


def render_svg(estimate, path, width=640, height=240):
    """Verdict map: x along the horizontal, ray direction stacked."""
    xs = sorted(estimate.points)
    ds = sorted(estimate.directions)
    lo, hi = (xs[0], xs[-1]) if len(xs) > 1 else (xs[0] - 1, xs[0] + 1)
    span = hi - lo or 1.0
    pad = 40
    rows = [f'<svg xmlns="http://www.w3.org/2000/svg" '
            f'width="{width}" height="{height}">',
            f'<rect width="{width}" height="{height}" fill="white"/>']
    for j, d in enumerate(ds):
        cy = height - pad - j * (height - 2 * pad) / max(len(ds) - 1, 1)
        rows.append(f'<text x="4" y="{cy:.1f}" font-size="12">'
                    f'dir {d:+g}</text>')
        for e in sorted(estimate.entries, key=lambda e: (e.x, e.direction)):
            if e.direction != d:
                continue
            cx = pad + (e.x - lo) / span * (width - 2 * pad)
            color = _SVG_COLORS.get(e.verdict, "#808080")
            rows.append(f'<circle cx="{cx:.1f}" cy="{cy:.1f}" r="6" '
                        f'fill="{color}"/>')
    rows.append(f'<text x="{pad}" y="{height - 8}" font-size="12">'
                f'x in [{lo:g}, {hi:g}], weight {estimate.weight_name}'
                f'</text>')
    rows.append("</svg>")
    with open(path, "w") as fh:
        fh.write("\n".join(rows) + "\n")
