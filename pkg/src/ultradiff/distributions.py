"""Catalog of ground-truth distributions with exact pairing rules.

The atoms here (point masses, principal values, jumps, flat functions,
sampled data) serve as known inputs for the transform and wavefront
estimators.  Pairings against test functions are exact where a closed
form exists and adaptive quadrature otherwise.  Each atom carries its
known singular support as metadata; estimation code never reads it —
it exists so test harnesses can score estimator output.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import polynomial as npoly
from scipy.integrate import quad


# ---------------------------------------------------------------------------
# test functions
# ---------------------------------------------------------------------------

# cache of the numerator polynomials R_j in
#   g^(j)(u) = R_j(u) / (1 - u^2)^(2j) * g(u),   g(u) = exp(-1/(1-u^2))
# R_1 = -2u and R_(j+1) = R_j'(1-u^2)^2 + 4j u (1-u^2) R_j - 2u R_j.
_BUMP_NUMERATORS = [np.array([1.0]), np.array([0.0, -2.0])]


def _bump_numerator(j):
    s = np.array([1.0, 0.0, -1.0])          # 1 - u^2
    u = np.array([0.0, 1.0])
    while len(_BUMP_NUMERATORS) <= j:
        k = len(_BUMP_NUMERATORS) - 1
        R = _BUMP_NUMERATORS[-1]
        nxt = npoly.polyadd(
            npoly.polymul(npoly.polyder(R), npoly.polymul(s, s)),
            npoly.polymul(npoly.polysub(4.0 * k * npoly.polymul(u, s), 2.0 * u), R))
        _BUMP_NUMERATORS.append(nxt)
    return _BUMP_NUMERATORS[j]


@dataclass(frozen=True)
class TestFunction:
    """Smooth compactly supported bump with exact derivative evaluation.

    The profile is the classical bump exp(-1/(1-u^2)) rescaled so the
    peak value equals `height`, supported on
    [center - radius, center + radius].  Derivatives of any order are
    available through a polynomial recurrence; `max_order` bounds what
    callers may request so an insufficient oracle fails loudly instead
    of silently returning garbage.
    """

    center: float = 0.0
    radius: float = 1.0
    height: float = 1.0
    max_order: int = 12

    def __post_init__(self):
        if self.radius <= 0:
            raise ValueError("radius must be positive")
        if self.max_order < 0:
            raise ValueError("max_order must be nonnegative")

    @property
    def support(self):
        return (self.center - self.radius, self.center + self.radius)

    @property
    def sup_norm(self):
        return abs(self.height)

    def __call__(self, x):
        return self.derivative(x, 0)

    def derivative(self, x, order):
        if order > self.max_order:
            raise ValueError(
                f"derivative oracle covers orders <= {self.max_order}, "
                f"got {order}")
        x = np.asarray(x, dtype=float)
        u = (x - self.center) / self.radius
        inside = np.abs(u) < 1.0
        us = np.where(inside, u, 0.0)
        core = 1.0 - us * us
        with np.errstate(divide="ignore", over="ignore"):
            g = np.exp(1.0 - 1.0 / core)       # peak-normalized bump
            val = (npoly.polyval(us, _bump_numerator(order))
                   / core ** (2 * order) * g)
        out = np.where(inside, val, 0.0) * (self.height / self.radius ** order)
        return out if out.ndim else float(out)


# ---------------------------------------------------------------------------
# atoms
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Delta:
    """Point mass at `location`, differentiated `order` times."""

    location: float = 0.0
    order: int = 0

    def __post_init__(self):
        if self.order < 0:
            raise ValueError("order must be nonnegative")

    @property
    def known_singular_support(self):
        return (self.location,)


@dataclass(frozen=True)
class PrincipalValue:
    """The principal value of 1/x."""

    @property
    def known_singular_support(self):
        return (0.0,)


@dataclass(frozen=True)
class Heaviside:
    """Unit step: 0 below `jump`, 1 above."""

    jump: float = 0.0

    @property
    def known_singular_support(self):
        return (self.jump,)


@dataclass(frozen=True)
class Sign:
    """sign(x): -1 below zero, +1 above."""

    @property
    def known_singular_support(self):
        return (0.0,)


@dataclass(frozen=True)
class AbsValue:
    """|x|; continuous but with a corner at the origin."""

    @property
    def known_singular_support(self):
        return (0.0,)


@dataclass(frozen=True)
class One:
    """The constant function 1."""

    @property
    def known_singular_support(self):
        return ()


@dataclass(frozen=True)
class Gaussian:
    """exp(-((x - center)/width)^2), entire and rapidly decaying."""

    center: float = 0.0
    width: float = 1.0

    def __post_init__(self):
        if self.width <= 0:
            raise ValueError("width must be positive")

    @property
    def known_singular_support(self):
        return ()

    def profile(self, x):
        z = (np.asarray(x, dtype=float) - self.center) / self.width
        return np.exp(-z * z)


@dataclass(frozen=True)
class GevreyFlat:
    """exp(-x^(-1/s)) for x > 0, identically 0 for x <= 0.

    Smooth everywhere, flat to infinite order at the origin; the decay
    parameter s controls which derivative-growth classes contain it.
    """

    s: float = 1.0

    def __post_init__(self):
        if self.s <= 0:
            raise ValueError("s must be positive")

    @property
    def known_singular_support(self):
        return (0.0,)

    def profile(self, x):
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
            out = np.where(x > 0.0,
                           np.exp(-np.maximum(x, 1e-300) ** (-1.0 / self.s)),
                           0.0)
        return out if out.ndim else float(out)

    def derivatives(self, x, order):
        return gevrey_flat_derivatives(self.s, x, order)


@dataclass(eq=False)
class Sampled:
    """Tabulated values on a strictly increasing grid.

    `window_radius` records the half-width of the region the samples are
    trusted to represent; downstream quadratures use it to decide
    whether the grid can resolve a requested frequency.
    """

    grid: np.ndarray
    values: np.ndarray
    window_radius: float = 0.0

    def __post_init__(self):
        self.grid = np.asarray(self.grid, dtype=float)
        self.values = np.asarray(self.values, dtype=complex)
        if self.grid.ndim != 1 or self.grid.size < 2:
            raise ValueError("grid must hold at least two points")
        if self.values.shape != self.grid.shape:
            raise ValueError("grid and values must have matching shapes")
        if not np.all(np.diff(self.grid) > 0):
            raise ValueError("grid must be strictly increasing")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("sampled values must be finite")
        if self.window_radius == 0.0:
            self.window_radius = float(self.grid[-1] - self.grid[0]) / 2.0
        if self.window_radius <= 0:
            raise ValueError("window radius must be positive")

    @property
    def known_singular_support(self):
        return None                      # unknown for raw data


@dataclass(frozen=True)
class Combination:
    """Flat linear combination of atoms: sum of coeff * atom."""

    terms: tuple

    def __post_init__(self):
        for item in self.terms:
            if not (isinstance(item, tuple) and len(item) == 2):
                raise ValueError("terms must be (coefficient, atom) pairs")
            if isinstance(item[1], Combination):
                raise ValueError("combinations must stay flat; use combine()")

    @property
    def known_singular_support(self):
        pts = []
        for _, atom in self.terms:
            ss = atom.known_singular_support
            if ss is None:
                return None
            pts.extend(ss)
        return tuple(sorted(set(pts)))


def combine(*terms):
    """Build a flat Combination, dissolving any nested ones."""
    flat = []
    for coeff, atom in terms:
        coeff = complex(coeff)
        if isinstance(atom, Combination):
            flat.extend((coeff * c, a) for c, a in atom.terms)
        else:
            flat.append((coeff, atom))
    return Combination(tuple(flat))


def boundary_value_atom(side):
    """The distribution 1/(x + i*side*0) as its atomic decomposition.

    side=+1 gives 1/(x+i0) = p.v.(1/x) - i*pi*delta, side=-1 its
    conjugate with +i*pi*delta.
    """
    if side not in (+1, -1):
        raise ValueError("side must be +1 or -1")
    return combine((1.0, PrincipalValue()), (-side * 1j * math.pi, Delta()))


# ---------------------------------------------------------------------------
# pairing
# ---------------------------------------------------------------------------

_QUAD_OPTS = dict(epsabs=1e-13, epsrel=1e-12, limit=200)


def _quad_profile(f, phi, lo, hi, splits=()):
    lo = max(lo, phi.support[0])
    hi = min(hi, phi.support[1])
    if lo >= hi:
        return 0.0
    pts = [p for p in splits if lo < p < hi] or None
    val, _ = quad(lambda x: f(x) * phi.derivative(x, 0), lo, hi,
                  points=pts, **_QUAD_OPTS)
    return val


def pair(u, phi):
    """Distributional pairing <u, phi> against a TestFunction.

    Point atoms evaluate exactly; function-like atoms integrate by
    adaptive quadrature split at their kinks; sampled data pairs by the
    trapezoid rule on its own grid.
    """
    if isinstance(u, Combination):
        return sum(c * pair(a, phi) for c, a in u.terms) + 0j
    if isinstance(u, Delta):
        sgn = -1.0 if u.order % 2 else 1.0
        return complex(sgn * phi.derivative(u.location, u.order))
    if isinstance(u, PrincipalValue):
        R = max(abs(phi.support[0]), abs(phi.support[1]))
        if R == 0.0:
            return 0j
        val, _ = quad(
            lambda x: (phi.derivative(x, 0) - phi.derivative(-x, 0)) / x,
            0.0, R, **_QUAD_OPTS)
        return complex(val)
    if isinstance(u, Heaviside):
        return complex(_quad_profile(lambda x: 1.0, phi, u.jump, np.inf))
    if isinstance(u, Sign):
        return complex(_quad_profile(np.sign, phi, -np.inf, np.inf, (0.0,)))
    if isinstance(u, AbsValue):
        return complex(_quad_profile(np.abs, phi, -np.inf, np.inf, (0.0,)))
    if isinstance(u, One):
        return complex(_quad_profile(lambda x: 1.0, phi, -np.inf, np.inf))
    if isinstance(u, Gaussian):
        return complex(_quad_profile(u.profile, phi, -np.inf, np.inf))
    if isinstance(u, GevreyFlat):
        return complex(_quad_profile(
            lambda x: float(u.profile(np.array([x]))[0]),
            phi, 0.0, np.inf))
    if isinstance(u, Sampled):
        integrand = u.values * phi.derivative(u.grid, 0)
        return complex(np.trapezoid(integrand, u.grid))
    raise TypeError(f"cannot pair object of type {type(u).__name__}")


# ---------------------------------------------------------------------------
# calculus on atoms
# ---------------------------------------------------------------------------

def differentiate(u):
    """Distributional d/dx where the result is again atomic."""
    if isinstance(u, Delta):
        return Delta(u.location, u.order + 1)
    if isinstance(u, Heaviside):
        return Delta(u.jump)
    if isinstance(u, Sign):
        return combine((2.0, Delta()))
    if isinstance(u, AbsValue):
        return Sign()
    if isinstance(u, One):
        return combine()
    if isinstance(u, Combination):
        return combine(*((c, differentiate(a)) for c, a in u.terms))
    raise TypeError(
        f"no closed-form derivative for {type(u).__name__}; "
        "differentiation is supported for point, step, and corner atoms")


def apply_operator(coefficients, u):
    """Apply the constant-coefficient operator sum_j c_j D^j, D = -i d/dx.

    Returns a flat Combination.  With this convention 1 - d^2/dx^2 is
    the coefficient list [1, 0, 1].
    """
    terms = []
    current = u
    for j, c in enumerate(coefficients):
        if j > 0:
            current = differentiate(current)
        if c == 0:
            continue
        terms.append((complex(c) * (-1j) ** j, current))
    return combine(*terms)


# ---------------------------------------------------------------------------
# flat-function derivatives
# ---------------------------------------------------------------------------

def gevrey_flat_derivatives(s, x, order):
    """Derivatives f^(j)(x), j = 0..order, of f(x) = exp(-x^(-1/s)).

    Writes f^(j) = A_j(x) f with A_j a combination of powers
    x^-(a + b/s); the recurrence A_(j+1) = A_j' + A_j * (1/s) x^(-1/s-1)
    stays exact in that lattice.  For x <= 0 the flat side gives zeros.
    """
    if s <= 0:
        raise ValueError("s must be positive")
    if order < 0 or order > 40:
        raise ValueError("order must lie in [0, 40]")
    x = float(x)
    if x <= 0.0:
        return np.zeros(order + 1)
    r = 1.0 / s
    out = np.empty(order + 1)
    log_f = -x ** (-r)
    log_x = math.log(x)
    out[0] = math.exp(log_f)
    terms = {(0, 0): 1.0}               # (a, b) -> coeff of x^-(a + b r)
    for j in range(1, order + 1):
        nxt = {}
        for (a, b), c in terms.items():
            e = a + b * r
            if e != 0.0:
                key = (a + 1, b)
                nxt[key] = nxt.get(key, 0.0) - e * c
            key = (a + 1, b + 1)
            nxt[key] = nxt.get(key, 0.0) + r * c
        terms = nxt
        # accumulate per-term in the log domain: near 0 the powers
        # x^-(a+br) overflow on their own even though the product with
        # f underflows to an honest 0
        acc = 0.0
        for (a, b), c in terms.items():
            if c == 0.0:
                continue
            w = log_f - (a + b * r) * log_x + math.log(abs(c))
            if w > -745.0:
                acc += math.copysign(math.exp(w), c)
        out[j] = acc
    return out


# ---------------------------------------------------------------------------
# catalog
# ---------------------------------------------------------------------------

def load_sampled(path):
    """Read a Sampled atom from CSV rows `x,value`."""
    data = np.loadtxt(path, delimiter=",", ndmin=2)
    if data.shape[1] != 2:
        raise ValueError(f"{path}: expected two columns x,value")
    return Sampled(data[:, 0], data[:, 1])


def from_name(name):
    """Resolve a catalog name to a distribution.

    Recognized: delta[:location], pv, heaviside[:jump], sign, abs, one,
    gaussian[:width], gevrey_flat:s, bv+, bv-, sampled:<csv path>.
    """
    if name == "bv+":
        return boundary_value_atom(+1)
    if name == "bv-":
        return boundary_value_atom(-1)
    base, _, arg = name.partition(":")
    try:
        if base == "delta":
            return Delta(float(arg)) if arg else Delta()
        if base == "pv" and not arg:
            return PrincipalValue()
        if base == "heaviside":
            return Heaviside(float(arg)) if arg else Heaviside()
        if base == "sign" and not arg:
            return Sign()
        if base == "abs" and not arg:
            return AbsValue()
        if base == "one" and not arg:
            return One()
        if base == "gaussian":
            return Gaussian(width=float(arg)) if arg else Gaussian()
        if base == "gevrey_flat" and arg:
            return GevreyFlat(float(arg))
        if base == "sampled" and arg:
            return load_sampled(arg)
    except OSError:
        raise
    except ValueError as exc:
        raise ValueError(f"bad distribution name {name!r}: {exc}") from exc
    raise ValueError(
        f"unknown distribution {name!r}; catalog: delta, pv, heaviside, "
        "sign, abs, one, gaussian, gevrey_flat:s, bv+, bv-, sampled:<file>")
