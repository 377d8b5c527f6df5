"""Log-convex weight sequences and their growth/decay transforms.

A weight sequence is a finite table M_0, ..., M_K with M_0 = 1 whose
logarithms are convex in the index.  Storage is entirely in the log
domain (M_k overflows double precision near k = 170 already for the
factorial table), and the derived objects

    mu_k  = M_{k+1} / M_k          (quotients, nondecreasing)
    m_k   = M_k / k!               (factorial-scaled table)
    omega(t) = sup_j log(t^j / M_j)
    h(t)     = inf_k t^k m_k

are all computed by locating the optimizer through the quotient
sequences.  Truncation is a first-class concern: whenever an optimizer
lands past the end of the table the value cannot be certified, and
``TruncationExhausted`` is raised instead of silently clamping.
"""

from __future__ import annotations

import dataclasses
import math
from functools import cached_property
from pathlib import Path

import numpy as np
from scipy.special import gammaln

from .errors import TruncationExhausted

__all__ = [
    "WeightSequence",
    "gevrey",
    "log_bracket",
    "superquadratic",
    "from_name",
    "save_weight",
    "load_weight",
    "duality_check",
    "DualityReport",
    "recover_M",
    "quasianalytic",
    "QuasianalyticityVerdict",
    "check_regular",
    "RegularityReport",
    "check_moderate_growth",
    "ModerateGrowthReport",
    "precedes",
    "PrecedenceReport",
    "equivalent",
]

DEFAULT_K = 64
CONVEXITY_TOL = 1e-12

_TRUNCATION_CAVEAT = (
    "asymptotic condition tested on a finite table of length K only; "
    "the verdict cannot distinguish slow divergence beyond the truncation"
)


class WeightSequence:
    """Immutable log-domain weight table with derived quotients.

    Parameters
    ----------
    name : str
        Identifier, e.g. ``"gevrey:1"``.  Names produced by the shipped
        constructors can be parsed back by :func:`from_name`.
    log_M : array_like
        ``log M_k`` for ``k = 0..K``.  Must have ``log_M[0] == 0`` and be
        convex in ``k`` within ``CONVEXITY_TOL``.
    factory : callable, optional
        ``factory(K)`` rebuilds the same family at another truncation;
        enables :meth:`resized` and :meth:`extended_to_cover`.
    """

    def __init__(self, name, log_M, factory=None):
        log_M = np.array(log_M, dtype=float)
        if log_M.ndim != 1 or log_M.size < 9:
            raise ValueError("log_M must be one-dimensional with K >= 8")
        if not np.all(np.isfinite(log_M)):
            raise ValueError("log_M contains non-finite entries")
        if log_M[0] != 0.0:
            raise ValueError("normalization requires M_0 = 1, i.e. log_M[0] = 0")
        dmu = np.diff(log_M)
        second = np.diff(dmu)
        bad = np.nonzero(second < -CONVEXITY_TOL)[0]
        if bad.size:
            j = int(bad[0]) + 1
            raise ValueError(
                f"log-convexity fails at index {j}: "
                f"mu_{j} < mu_{j - 1} by {-second[bad[0]]:.3e} in the log domain"
            )
        self.name = str(name)
        self.log_M = log_M
        self.log_M.setflags(write=False)
        self._factory = factory

    # ------------------------------------------------------------------
    # derived tables
    # ------------------------------------------------------------------

    @property
    def K(self):
        """Truncation order: the largest stored index."""
        return self.log_M.size - 1

    @cached_property
    def log_mu(self):
        """log(M_{k+1}/M_k) for k = 0..K-1; nondecreasing."""
        return np.diff(self.log_M)

    @cached_property
    def log_m(self):
        """log(M_k / k!) for k = 0..K."""
        k = np.arange(self.log_M.size, dtype=float)
        return self.log_M - gammaln(k + 1.0)

    @cached_property
    def log_q(self):
        """log(m_{k+1}/m_k) for k = 0..K-1 (not always monotone)."""
        return np.diff(self.log_m)

    @cached_property
    def _q_monotone(self):
        return bool(np.all(np.diff(self.log_q) >= -CONVEXITY_TOL))

    def mu(self):
        """Quotients M_{k+1}/M_k in linear scale (may overflow for huge K)."""
        return np.exp(self.log_mu)

    def root_scale(self):
        """M_k^{1/k} for k = 1..K, a growth diagnostic."""
        k = np.arange(1, self.log_M.size, dtype=float)
        return np.exp(self.log_M[1:] / k)

    # ------------------------------------------------------------------
    # transforms
    # ------------------------------------------------------------------

    @staticmethod
    def _log_arg(t):
        t = np.asarray(t, dtype=float)
        if np.any(t <= 0.0):
            raise ValueError("t must be positive")
        return np.log(t)

    def _sup_transform(self, log_t, table, quot, monotone, label):
        """max_j (j*log_t - table[j]) over j = 0..K, with truncation guard."""
        lt = np.asarray(log_t, dtype=float)
        if np.any(lt > quot[-1]):
            raise TruncationExhausted(
                f"{label}({self.name}): log t = {float(np.max(lt)):.6g} exceeds "
                f"the last stored quotient {quot[-1]:.6g}; rebuild with larger K"
            )
        if monotone:
            j = np.searchsorted(quot, lt, side="left")
        else:
            ks = np.arange(table.size, dtype=float)
            j = np.argmax(np.multiply.outer(lt, ks) - table, axis=-1)
        return j * lt - table[j]

    def _inf_transform(self, log_t, table, quot, monotone, label):
        """min_k (k*log_t + table[k]) over k = 0..K, with truncation guard."""
        lt = np.asarray(log_t, dtype=float)
        K = table.size - 1
        if monotone:
            k = np.searchsorted(quot, -lt, side="left")
        else:
            ks = np.arange(table.size, dtype=float)
            k = np.argmin(np.multiply.outer(lt, ks) + table, axis=-1)
        if np.any(k == K):
            raise TruncationExhausted(
                f"{label}({self.name}): infimum sits at the last index K={K} "
                f"for t as small as {float(np.exp(np.min(lt))):.6g}; "
                "rebuild with larger K"
            )
        return k * lt + table[k]

    @staticmethod
    def _as_result(value):
        value = np.asarray(value)
        return float(value) if value.ndim == 0 else value

    def omega(self, t):
        """log sup_j t^j/M_j, the growth transform of the table.

        Vanishes on (0, 1] whenever the table is nondecreasing; valid for
        t up to the last quotient mu_{K-1}, beyond which
        TruncationExhausted is raised.
        """
        return self._as_result(
            self._sup_transform(self._log_arg(t), self.log_M, self.log_mu,
                                True, "omega"))

    def omega_tilde(self, t):
        """log sup_j t^j/m_j, the growth transform of the scaled table."""
        return self._as_result(
            self._sup_transform(self._log_arg(t), self.log_m, self.log_q,
                                self._q_monotone, "omega_tilde"))

    def log_small_h(self, t):
        """log inf_k t^k m_k, the decay transform of the scaled table."""
        return self._as_result(
            self._inf_transform(self._log_arg(t), self.log_m, self.log_q,
                                self._q_monotone, "small_h"))

    def small_h(self, t):
        """inf_k t^k m_k; equals 1 on [1, inf) for nondecreasing m."""
        return self._as_result(np.exp(self.log_small_h(t)))

    def log_h_tilde(self, t):
        """log inf_k t^k M_k."""
        return self._as_result(
            self._inf_transform(self._log_arg(t), self.log_M, self.log_mu,
                                True, "h_tilde"))

    def h_tilde(self, t):
        """inf_k t^k M_k."""
        return self._as_result(np.exp(self.log_h_tilde(t)))

    # ------------------------------------------------------------------
    # valid-range helpers
    # ------------------------------------------------------------------

    def omega_max_t(self):
        """Largest t for which omega is certified by the table."""
        return float(np.exp(self.log_mu[-1]))

    def omega_tilde_max_t(self):
        return float(np.exp(self.log_q[-1]))

    def small_h_min_t(self):
        """Smallest t for which the h-infimum stays interior to the table."""
        return float(np.exp(-self.log_q[-1]))

    def h_tilde_min_t(self):
        return float(np.exp(-self.log_mu[-1]))

    def duality_min_t(self):
        """Smallest t at which both dual identities can be checked."""
        return max(self.small_h_min_t(), self.h_tilde_min_t())

    # ------------------------------------------------------------------
    # resizing
    # ------------------------------------------------------------------

    def resized(self, K):
        """Rebuild the same family with truncation K (needs a factory)."""
        if self._factory is None:
            raise TruncationExhausted(
                f"{self.name}: fixed table of length {self.K}, no rebuild rule"
            )
        return self._factory(int(K))

    def extended_to_cover(self, t, cap=1 << 17):
        """Return a table whose omega-range reaches at least t.

        Doubles K until mu_{K-1} >= t, capped at ``cap`` to bound memory.
        """
        M = self
        lt = math.log(float(t))
        while M.log_mu[-1] < lt:
            if M._factory is None:
                raise TruncationExhausted(
                    f"{M.name}: omega range ends at {M.omega_max_t():.6g} < {t:.6g} "
                    "and the table is fixed"
                )
            nK = 2 * M.K
            if nK > cap:
                raise TruncationExhausted(
                    f"{M.name}: cannot cover t = {t:.6g} within the K cap {cap}"
                )
            M = M.resized(nK)
        return M

    def __repr__(self):
        return f"WeightSequence({self.name!r}, K={self.K})"

    def __eq__(self, other):
        if not isinstance(other, WeightSequence):
            return NotImplemented
        return self.name == other.name and np.array_equal(self.log_M, other.log_M)

    __hash__ = None


# ----------------------------------------------------------------------
# shipped families
# ----------------------------------------------------------------------

def _fmt_param(x):
    return f"{float(x):g}"


def gevrey(s, K=DEFAULT_K):
    """Factorial-power table M_k = (k!)^(s+1).

    s = 0 is the real-analytic table, s = 1 the classical first Gevrey
    step.  Quotients are mu_k = (k+1)^(s+1).
    """
    s = float(s)
    if s < 0:
        raise ValueError("gevrey parameter must be nonnegative")
    k = np.arange(int(K) + 1, dtype=float)
    log_M = (s + 1.0) * gammaln(k + 1.0)
    return WeightSequence(f"gevrey:{_fmt_param(s)}", log_M,
                          factory=lambda n: gevrey(s, n))


def log_bracket(sigma, K=DEFAULT_K):
    """Table M_0 = M_1 = 1, M_k = k! * (log(k+e))^(sigma*k) for k >= 2.

    The family crosses the quasianalytic border at sigma = 1.  Large
    sigma (> ~4.59) breaks log-convexity at the k = 2 junction and is
    rejected by the constructor.
    """
    sigma = float(sigma)
    if sigma <= 0:
        raise ValueError("log_bracket parameter must be positive")
    k = np.arange(int(K) + 1, dtype=float)
    log_M = gammaln(k + 1.0) + sigma * k * np.log(np.log(k + np.e))
    log_M[0] = 0.0
    log_M[1] = 0.0
    return WeightSequence(f"log_bracket:{_fmt_param(sigma)}", log_M,
                          factory=lambda n: log_bracket(sigma, n))


def superquadratic(K=32):
    """Table M_0 = M_1 = 1, M_k = k! * 2^(k^2) for k >= 2.

    Grows too fast for the splitting bound M_{j+k} <= C rho^{j+k} M_j M_k:
    the j = k split alone forces 2^{2k^2} <= (C rho^{2k}) 2^{2k^2 - 2k^2}...
    i.e. an exponent quadratic in k on the left against linear on the
    right, so check_moderate_growth reports failure on any sizeable table.
    """
    k = np.arange(int(K) + 1, dtype=float)
    log_M = gammaln(k + 1.0) + math.log(2.0) * k * k
    log_M[0] = 0.0
    log_M[1] = 0.0
    return WeightSequence("superquadratic", log_M,
                          factory=lambda n: superquadratic(n))


_DEFAULT_LENGTHS = {"gevrey": DEFAULT_K, "log_bracket": DEFAULT_K,
                    "superquadratic": 32}


def from_name(spec, K=None):
    """Parse a family spec like ``"gevrey:1"`` or ``"log_bracket:0.5@256"``.

    The optional ``@<K>`` suffix (or the K argument) sets the truncation.
    """
    spec = str(spec).strip()
    base, _, suffix = spec.partition("@")
    if suffix:
        K = int(suffix)
    family, _, arg = base.partition(":")
    family = family.strip()
    if family not in _DEFAULT_LENGTHS:
        raise ValueError(f"unknown weight family {family!r}")
    if K is None:
        K = _DEFAULT_LENGTHS[family]
    if family == "superquadratic":
        if arg:
            raise ValueError("superquadratic takes no parameter")
        return superquadratic(K)
    if not arg:
        raise ValueError(f"{family} needs a parameter, e.g. '{family}:1'")
    value = float(arg)
    return gevrey(value, K) if family == "gevrey" else log_bracket(value, K)


# ----------------------------------------------------------------------
# serialization
# ----------------------------------------------------------------------

def save_weight(M, path):
    """Write the plain-text table: header ``name K``, then ``k logM_k`` lines."""
    lines = [f"{M.name} {M.K}"]
    lines.extend(f"{k} {float(v)!r}" for k, v in enumerate(M.log_M))
    Path(path).write_text("\n".join(lines) + "\n")


def load_weight(path):
    """Read a table written by :func:`save_weight`.

    If the header name parses as a shipped family and the stored values
    match it bit-for-bit, the family factory is reattached so the loaded
    sequence can still be resized.
    """
    lines = Path(path).read_text().strip().splitlines()
    if not lines:
        raise ValueError(f"{path}: empty weight file")
    name, _, k_str = lines[0].rpartition(" ")
    try:
        K = int(k_str)
    except ValueError as exc:
        raise ValueError(f"{path}: malformed header {lines[0]!r}") from exc
    if len(lines) != K + 2:
        raise ValueError(f"{path}: expected {K + 2} lines, found {len(lines)}")
    log_M = np.empty(K + 1)
    for i, line in enumerate(lines[1:]):
        idx_str, _, val_str = line.partition(" ")
        if int(idx_str) != i:
            raise ValueError(f"{path}: line {i + 2} carries index {idx_str}, expected {i}")
        log_M[i] = float(val_str)
    try:
        candidate = from_name(name, K=K)
        if np.array_equal(candidate.log_M, log_M):
            return candidate
    except ValueError:
        pass
    return WeightSequence(name, log_M)


# ----------------------------------------------------------------------
# duality
# ----------------------------------------------------------------------

@dataclasses.dataclass(frozen=True)
class DualityReport:
    """Deviations of the two reciprocal identities on a t grid."""
    t: np.ndarray
    dev_h: np.ndarray        # | log h(t) + omega_tilde(1/t) |
    dev_h_tilde: np.ndarray  # | log h~(t) + omega(1/t) |
    max_dev_h: float
    max_dev_h_tilde: float

    @property
    def max_abs_deviation(self):
        return max(self.max_dev_h, self.max_dev_h_tilde)


def duality_check(M, ts):
    """Verify log h(t) = -omega_tilde(1/t) and log h~(t) = -omega(1/t).

    The reciprocal is taken in the log domain (log(1/t) := -log t), so
    both sides of each identity scan exactly mirrored float values and
    the deviations are zero whenever the optimizers are consistent.
    Raises ValueError for t <= 0 and TruncationExhausted outside the
    table's certified range (see :meth:`WeightSequence.duality_min_t`).
    """
    lt = WeightSequence._log_arg(ts)
    lh = M._inf_transform(lt, M.log_m, M.log_q, M._q_monotone, "small_h")
    ot = M._sup_transform(-lt, M.log_m, M.log_q, M._q_monotone, "omega_tilde")
    lht = M._inf_transform(lt, M.log_M, M.log_mu, True, "h_tilde")
    om = M._sup_transform(-lt, M.log_M, M.log_mu, True, "omega")
    dev_h = np.abs(np.atleast_1d(lh + ot))
    dev_ht = np.abs(np.atleast_1d(lht + om))
    return DualityReport(np.atleast_1d(np.asarray(ts, dtype=float)),
                         dev_h, dev_ht,
                         float(dev_h.max()), float(dev_ht.max()))


# ----------------------------------------------------------------------
# table recovery from omega
# ----------------------------------------------------------------------

def recover_M(omega, k, t_range=None, tol=1e-10, max_iter=400):
    """Reconstruct M_k = sup_t t^k / e^{omega(t)} from an omega evaluator.

    The objective k*log t - omega(t) is concave and piecewise linear in
    log t with a flat top exactly at height log M_k, so a golden-section
    search converges to the table value once the bracket meets the flat
    top; ties shrink the bracket leftward.  If the maximum is pinned to a
    bracket end with the objective still strictly increasing outward, the
    supremum is not certified and TruncationExhausted is raised.

    ``t_range`` defaults to the evaluator's own certified range when
    ``omega`` is a bound WeightSequence method, else to (1e-6, 1e6).
    """
    if t_range is None:
        owner = getattr(omega, "__self__", None)
        if isinstance(owner, WeightSequence):
            lo = float(min(owner.log_mu[0], 0.0) - 14.0)
            hi = float(owner.log_mu[-1] - 1e-9)
        else:
            lo, hi = math.log(1e-6), math.log(1e6)
    else:
        lo, hi = math.log(float(t_range[0])), math.log(float(t_range[1]))
    if not lo < hi:
        raise ValueError("t_range must satisfy 0 < t_lo < t_hi")

    def g(x):
        return k * x - float(omega(math.exp(x)))

    inv = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c, d = b - inv * (b - a), a + inv * (b - a)
    gc, gd = g(c), g(d)
    iterations = 0
    while b - a > tol and iterations < max_iter:
        if gc >= gd:
            b, d, gd = d, c, gc
            c = b - inv * (b - a)
            gc = g(c)
        else:
            a, c, gc = c, d, gd
            d = a + inv * (b - a)
            gd = g(d)
        iterations += 1
    g_best = max(gc, gd)
    g_lo, g_hi = g(lo), g(hi)
    step = 1e-6 * (hi - lo)
    slack = 1e-10 * max(1.0, abs(g_best))
    if g_hi >= g_best - slack and g(hi - step) < g_hi - slack:
        raise TruncationExhausted(
            "recover_M: objective still increasing at the upper end of t_range"
        )
    if g_lo >= g_best - slack and g(lo + step) < g_lo - slack:
        raise TruncationExhausted(
            "recover_M: objective still increasing at the lower end of t_range"
        )
    return math.exp(max(g_best, g_lo, g_hi))


# ----------------------------------------------------------------------
# classification reports
# ----------------------------------------------------------------------

DIVERGENT = "DIVERGENT"
CONVERGENT = "CONVERGENT"
INCONCLUSIVE = "INCONCLUSIVE"

_ALPHA_BAND = 0.05
_BETA_SPLIT = 1.05
_RESIDUAL_CAP = 0.05


@dataclasses.dataclass(frozen=True)
class QuasianalyticityVerdict:
    """Convergence classification of sum_k M_{k-1}/M_k."""
    classification: str
    fit: tuple              # (alpha, beta) in a_k ~ c * k^-alpha * (log k)^-beta
    fit_residual: float
    partial_sums: np.ndarray
    caveat: str = _TRUNCATION_CAVEAT


def quasianalytic(M, fit_start=None):
    """Classify sum_k M_{k-1}/M_k as divergent (quasianalytic) or not.

    Terms a_k = 1/mu_{k-1} are fitted on the tail of the table with the
    model log a_k ~ c0 - alpha log k - beta log log k, plus 1/log k and
    1/(k log k) nuisance terms that absorb the two leading finite-k
    corrections of log-power families (without them the collinearity of
    log k and log log k on a short table leaks beta into alpha).
    Classical series tests then decide: alpha < 1 diverges, alpha > 1
    converges, and on the alpha = 1 boundary beta decides with split at
    1.  A poor fit returns INCONCLUSIVE rather than a guess; raw partial
    sums are always reported.
    """
    K = M.K
    k = np.arange(1, K + 1, dtype=float)
    log_a = -M.log_mu
    partial = np.cumsum(np.exp(log_a))
    lo = int(fit_start) if fit_start is not None else max(4, K // 4)
    sel = k >= lo
    x = k[sel]
    lg = np.log(x + np.e)
    design = np.column_stack([np.ones_like(x), np.log(x), np.log(lg),
                              1.0 / lg, 1.0 / ((x + np.e) * lg)])
    coef, *_ = np.linalg.lstsq(design, log_a[sel], rcond=None)
    resid = design @ coef - log_a[sel]
    rms = float(np.sqrt(np.mean(resid ** 2)))
    alpha = float(-coef[1])
    beta = float(-coef[2])
    if rms > _RESIDUAL_CAP:
        verdict = INCONCLUSIVE
    elif alpha > 1.0 + _ALPHA_BAND:
        verdict = CONVERGENT
    elif alpha < 1.0 - _ALPHA_BAND:
        verdict = DIVERGENT
    else:
        verdict = CONVERGENT if beta > _BETA_SPLIT else DIVERGENT
    return QuasianalyticityVerdict(verdict, (alpha, beta), rms, partial)


@dataclasses.dataclass(frozen=True)
class RegularityReport:
    """Truncated tests of the four standard weight-sequence conditions."""
    m1_ok: bool               # m_0 = m_1 = 1
    m2_ok: bool               # (m_{k+1}/m_k)^{1/k} bounded on the table
    m3_ok: bool               # m_k^2 <= m_{k-1} m_{k+1} pointwise
    m4_ok: bool               # m_k^{1/k} increasing beyond 1 on the tail
    m2_witness: float
    m3_violations: tuple
    m4_trend: np.ndarray      # m_k^{1/k}, k = 1..K-1
    root_scale: np.ndarray    # M_k^{1/k}, k = 1..K (diagnostic)
    caveat: str = _TRUNCATION_CAVEAT

    @property
    def ok(self):
        return self.m1_ok and self.m2_ok and self.m3_ok and self.m4_ok


def check_regular(M, tol=1e-9):
    """Report the four regularity conditions on the truncated table.

    Never raises: each flag reflects the table as given, and the caveat
    records that the unbounded-index conditions are only sampled.
    """
    log_m = M.log_m
    K = M.K
    m1 = bool(abs(log_m[0]) <= tol and abs(log_m[1]) <= tol)

    k = np.arange(1, K, dtype=float)
    w = M.log_q[1:] / k                       # log (m_{k+1}/m_k)^{1/k}
    half = max(1, (K - 1) // 2)
    m2 = bool(np.max(w[half:]) <= max(np.max(w[:half]), 0.0) + tol)
    m2_witness = float(np.exp(np.max(w)))

    second = log_m[:-2] + log_m[2:] - 2.0 * log_m[1:-1]
    viol = tuple(int(i) + 1 for i in np.nonzero(second < -CONVEXITY_TOL)[0])
    m3 = not viol

    r = log_m[1:] / np.arange(1, K + 1, dtype=float)
    tail = r[K // 2:]
    m4 = bool(np.all(np.diff(tail) >= -CONVEXITY_TOL) and tail[-1] > tol)
    m4_trend = np.exp(r[:-1])

    return RegularityReport(m1, m2, m3, m4, m2_witness, viol, m4_trend,
                            M.root_scale())


@dataclasses.dataclass(frozen=True)
class ModerateGrowthReport:
    """Splitting bound M_{j+k} <= C rho^{j+k} M_j M_k on the table."""
    ok: bool
    C: float
    rho: float
    head_rate: float          # max of D_n/n over n <= K/2
    tail_rate: float          # max of D_n/n over n > K/2
    caveat: str = _TRUNCATION_CAVEAT


def check_moderate_growth(M, tail_factor=1.25):
    """Certify the splitting bound and detect accelerating growth.

    D_n = max over splits j+k=n of log(M_n/(M_j M_k)) yields the minimal
    rho = exp(max_n D_n/n) with C = 1 valid on the whole table.  The ok
    flag additionally requires the per-index rate D_n/n not to drift
    upward in the second half (within ``tail_factor``), separating a
    genuinely linear exponent from an accelerating one.
    """
    log_M = M.log_M
    K = M.K
    D = np.empty(K + 1)
    D[0] = 0.0
    for n in range(1, K + 1):
        j = np.arange(n + 1)
        D[n] = np.max(log_M[n] - log_M[j] - log_M[n - j])
    rate = D[1:] / np.arange(1, K + 1, dtype=float)
    head = float(np.max(rate[: K // 2]))
    tail = float(np.max(rate[K // 2:]))
    rho = float(np.exp(np.max(rate)))
    ok = bool(tail <= tail_factor * max(head, 0.0))
    return ModerateGrowthReport(ok, 1.0, rho, head, tail)


@dataclasses.dataclass(frozen=True)
class PrecedenceReport:
    """Whether M's class embeds in N's: sup (M_k/N_k)^{1/k} bounded."""
    ok: bool
    witness: float            # observed sup of (M_k/N_k)^{1/k}
    head: float               # max log root-ratio, second quarter of the table
    tail: float               # max log root-ratio, last quarter
    caveat: str = _TRUNCATION_CAVEAT


_PRECEDES_DRIFT_TOL = 0.1


def precedes(M, N):
    """Test M <= N in the weight order via the root-ratio trend.

    The log root-ratios w_k = log(M_k/N_k)/k absorb any constant factor
    C as C^{1/k}, so the first quarter of the table is ignored and the
    verdict compares the last quarter's maximum against the second
    quarter's: a drift above ``_PRECEDES_DRIFT_TOL`` (0.1 in log scale)
    means the ratio keeps growing.  Sub-logarithmic divergence slower
    than that is not detectable at this truncation (see caveat).
    """
    if M.K != N.K:
        raise ValueError(f"truncation mismatch: {M.K} vs {N.K}")
    K = M.K
    k = np.arange(1, K + 1, dtype=float)
    w = (M.log_M[1:] - N.log_M[1:]) / k
    q2 = float(np.max(w[K // 4: K // 2]))
    q4 = float(np.max(w[(3 * K) // 4:]))
    ok = bool(q4 <= q2 + _PRECEDES_DRIFT_TOL)
    return PrecedenceReport(ok, float(np.exp(np.max(w))), q2, q4)


def equivalent(M, N):
    """Mutual precedence: the two tables generate the same class."""
    return precedes(M, N).ok and precedes(N, M).ok
