"""Moduli of continuity and the tail-integral dichotomy.

A modulus of continuity is a continuous, concave, increasing function mu on
[0, c] with mu(0) = 0 (c a small positive constant).  The built-in families,
ordered from most to least regular, are::

    lipschitz          mu(s) = s
    log-lip            mu(s) = s * (log(1/s) + 1)
    log-log-lip:m      mu(s) = s * (log(1/s) + 1) * logm(1/s, m),  m >= 1
    hoelder:a          mu(s) = s**a,                               a in (0, 1)
    log-power:a        mu(s) = (log(1/s) + 1)**(-a),               a > 0

where logm(x, 1) = log(x) + 1 and logm(x, m) = log(logm(x, m-1)) + 1.
A sixth family, ``tabulated``, interpolates user-supplied sample points.

The axioms only constrain behaviour near 0; log-based families lose
monotonicity or concavity when pushed close to s = 1, which is expected and
reported honestly by :func:`check_modulus_axioms`.

What separates bounded ("tame") moduli from the rest is the tail integral

    integral_{C0}^{inf}  mu(1/s) / s  ds,

which either converges or diverges; :func:`classify_integral_criterion`
decides which, analytically for the named families and numerically by
doubling partial integrals in t = log(s).
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.integrate import quad

from .errors import DomainError, ParameterError

FAMILIES = ("lipschitz", "log-lip", "log-log-lip", "hoelder", "log-power", "tabulated")

# Log-based closed forms are only meaningful up to s = 1 (log(1/s) >= 0);
# beyond that the evaluation clamps at the s = 1 value.
_LOG_FAMILIES = ("log-lip", "log-log-lip", "log-power")

_INF = float("inf")


def _logm(x, order: int):
    """Iterated log(x)+1, valid for x >= 1."""
    v = np.log(x) + 1.0
    for _ in range(order - 1):
        v = np.log(v) + 1.0
    return v


def _logm_prefix_product(x, order: int):
    """Product of logm(x, j) for j = 1 .. order-1 (empty product = 1)."""
    prod = np.ones_like(np.asarray(x, dtype=float))
    v = None
    for j in range(1, order):
        v = np.log(x) + 1.0 if v is None else np.log(v) + 1.0
        prod = prod * v
    return prod


@dataclass(frozen=True)
class ModulusSpec:
    """One modulus of continuity: family tag, parameters, evaluation domain.

    ``domain_cap`` is the right end of the interval on which the modulus
    axioms are asserted.  ``extension_rule`` controls evaluation beyond it:
    ``"formula"`` keeps using the closed form (clamping once the form itself
    stops being valid, at s = 1 for log-based families), ``"clamp"`` freezes
    the value at mu(domain_cap).
    """

    family: str
    alpha: Optional[float] = None
    order: Optional[int] = None
    table: Optional[tuple] = None
    domain_cap: float = 1.0
    extension_rule: str = "formula"

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ParameterError(f"unknown modulus family {self.family!r}")
        if self.family == "hoelder":
            if self.alpha is None or not 0.0 < self.alpha < 1.0:
                raise ParameterError("hoelder requires alpha in (0, 1)")
        if self.family == "log-power":
            if self.alpha is None or self.alpha <= 0.0:
                raise ParameterError("log-power requires alpha > 0")
        if self.family == "log-log-lip":
            if self.order is None or self.order < 1:
                raise ParameterError("log-log-lip requires integer order >= 1")
        if self.family == "tabulated":
            if not self.table or len(self.table) < 2:
                raise ParameterError("tabulated requires at least two sample points")
            xs = [p[0] for p in self.table]
            if xs != sorted(xs) or xs[0] != 0.0:
                raise ParameterError("tabulated sample points must start at 0 and be sorted")
            if abs(self.table[0][1]) > 0.0:
                raise ParameterError("tabulated modulus must have mu(0) = 0")
        if self.domain_cap <= 0.0:
            raise ParameterError("domain_cap must be positive")
        if self.extension_rule not in ("formula", "clamp"):
            raise ParameterError("extension_rule must be 'formula' or 'clamp'")

    # -- constructors -----------------------------------------------------

    @classmethod
    def lipschitz(cls, **kw) -> "ModulusSpec":
        return cls("lipschitz", **kw)

    @classmethod
    def log_lip(cls, **kw) -> "ModulusSpec":
        return cls("log-lip", **kw)

    @classmethod
    def log_log_lip(cls, order: int = 1, **kw) -> "ModulusSpec":
        return cls("log-log-lip", order=order, **kw)

    @classmethod
    def hoelder(cls, alpha: float, **kw) -> "ModulusSpec":
        return cls("hoelder", alpha=alpha, **kw)

    @classmethod
    def log_power(cls, alpha: float, **kw) -> "ModulusSpec":
        return cls("log-power", alpha=alpha, **kw)

    @classmethod
    def tabulated(cls, points, **kw) -> "ModulusSpec":
        return cls("tabulated", table=tuple(tuple(p) for p in points), **kw)

    @classmethod
    def from_key(cls, key: str, **kw) -> "ModulusSpec":
        """Build from a config-file string key.

        Accepted: ``lipschitz``, ``log-lip``, ``log-log-lip:m``,
        ``hoelder:alpha``, ``log-power:alpha``, ``tabulated:<csv path>``.
        """
        name, _, arg = key.partition(":")
        name = name.strip().lower()
        if name == "lipschitz":
            return cls.lipschitz(**kw)
        if name == "log-lip":
            return cls.log_lip(**kw)
        if name == "log-log-lip":
            return cls.log_log_lip(order=int(arg) if arg else 1, **kw)
        if name == "hoelder":
            if not arg:
                raise ParameterError("hoelder key needs an exponent, e.g. 'hoelder:0.5'")
            return cls.hoelder(float(arg), **kw)
        if name == "log-power":
            if not arg:
                raise ParameterError("log-power key needs an exponent, e.g. 'log-power:1'")
            return cls.log_power(float(arg), **kw)
        if name == "tabulated":
            pts = np.loadtxt(arg, delimiter=",", ndmin=2)
            return cls.tabulated([(float(a), float(b)) for a, b in pts], **kw)
        raise ParameterError(f"unknown modulus key {key!r}")

    def key(self) -> str:
        if self.family == "hoelder":
            return f"hoelder:{self.alpha}"
        if self.family == "log-power":
            return f"log-power:{self.alpha}"
        if self.family == "log-log-lip":
            return f"log-log-lip:{self.order}"
        return self.family

    # -- evaluation --------------------------------------------------------

    @property
    def _formula_limit(self) -> float:
        if self.family in _LOG_FAMILIES:
            return 1.0
        if self.family == "tabulated":
            return float(self.table[-1][0])
        return _INF

    def _core(self, s: np.ndarray) -> np.ndarray:
        """Closed form on the formula's own validity range (s in [0, limit])."""
        if self.family == "lipschitz":
            return s.copy()
        if self.family == "hoelder":
            return s ** self.alpha
        if self.family == "tabulated":
            xs = np.array([p[0] for p in self.table])
            ys = np.array([p[1] for p in self.table])
            return np.interp(s, xs, ys)
        with np.errstate(divide="ignore", invalid="ignore"):
            inv = np.where(s > 0.0, 1.0 / np.where(s > 0.0, s, 1.0), _INF)
            if self.family == "log-lip":
                out = s * (np.log(inv) + 1.0)
            elif self.family == "log-log-lip":
                out = s * (np.log(inv) + 1.0) * _logm(np.where(s > 0.0, inv, math.e), self.order)
            else:  # log-power
                out = (np.log(inv) + 1.0) ** (-self.alpha)
        return np.where(s > 0.0, out, 0.0)

    def evaluate(self, s):
        """mu(s) for scalar or array s >= 0."""
        arr = np.asarray(s, dtype=float)
        if np.any(arr < 0.0):
            raise DomainError("modulus argument must be nonnegative")
        cap = self.domain_cap if self.extension_rule == "clamp" else self._formula_limit
        clipped = np.minimum(arr, cap)
        out = self._core(clipped)
        if np.isscalar(s) or arr.ndim == 0:
            return float(out)
        return out

    def derivative(self, s):
        """mu'(s) for s > 0; returns inf where the derivative is unbounded.

        At s = 0 families with a finite one-sided derivative (lipschitz,
        log-lip's limit is +inf, hoelder's is +inf, ...) report that limit;
        an unbounded slope comes back as the float('inf') sentinel rather
        than raising.
        """
        arr = np.asarray(s, dtype=float)
        if np.any(arr < 0.0):
            raise DomainError("modulus argument must be nonnegative")
        cap = self.domain_cap if self.extension_rule == "clamp" else self._formula_limit
        out = np.empty_like(arr)
        beyond = arr > cap
        inner = ~beyond
        x = np.where(inner, np.maximum(arr, 1e-300), 1.0)
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            if self.family == "lipschitz":
                d = np.ones_like(x)
            elif self.family == "hoelder":
                d = self.alpha * x ** (self.alpha - 1.0)
            elif self.family == "log-lip":
                d = np.log(1.0 / x)
            elif self.family == "log-log-lip":
                inv = 1.0 / x
                a = np.log(inv) + 1.0
                b = _logm(inv, self.order)
                prod = _logm_prefix_product(inv, self.order)
                d = b * (a - 1.0) - a / prod
            elif self.family == "log-power":
                ell = np.log(1.0 / x) + 1.0
                d = self.alpha * ell ** (-self.alpha - 1.0) / x
            else:  # tabulated: central difference of the interpolant
                span = self.table[-1][0]
                h = 1e-6 * span
                lo = np.maximum(x - h, 0.0)
                hi = np.minimum(x + h, span)
                d = (self._core(hi) - self._core(lo)) / np.maximum(hi - lo, 1e-300)
        zero = inner & (arr == 0.0)
        if self.family == "lipschitz":
            d = np.where(zero, 1.0, d)
        elif self.family == "tabulated":
            pass
        else:
            d = np.where(zero, _INF, d)
        out[inner] = d[inner]
        out[beyond] = 0.0
        if np.isscalar(s) or arr.ndim == 0:
            return float(out)
        return out

    def evaluate_neglog(self, t):
        """mu(exp(-t)) for t >= 0, evaluated without underflow in s.

        This is the integrand kernel of the tail criterion after the
        substitution t = log(s); for t beyond ~700 the direct path through
        exp(-t) would flush to zero and lose log-power tails entirely.
        """
        tt = np.asarray(t, dtype=float)
        if np.any(tt < 0.0):
            raise DomainError("evaluate_neglog requires t >= 0")
        with np.errstate(over="ignore", under="ignore"):
            if self.family == "lipschitz":
                out = np.exp(-tt)
            elif self.family == "hoelder":
                out = np.exp(-self.alpha * tt)
            elif self.family == "log-lip":
                out = np.exp(-tt) * (tt + 1.0)
            elif self.family == "log-log-lip":
                v = tt + 1.0
                for _ in range(self.order - 1):
                    v = np.log(v) + 1.0
                out = np.exp(-tt) * (tt + 1.0) * v
            elif self.family == "log-power":
                out = (tt + 1.0) ** (-self.alpha)
            else:
                out = self._core(np.exp(-tt))
        if np.isscalar(t) or tt.ndim == 0:
            return float(out)
        return out


def evaluate(mu: ModulusSpec, s):
    """Functional form of :meth:`ModulusSpec.evaluate`."""
    return mu.evaluate(s)


def derivative(mu: ModulusSpec, s):
    """Functional form of :meth:`ModulusSpec.derivative`."""
    return mu.derivative(s)


# -- axiom checking -------------------------------------------------------

@dataclass(frozen=True)
class AxiomReport:
    zero_at_zero: bool
    nondecreasing: bool
    midpoint_concave: bool
    finite_nonnegative: bool
    worst_monotone_pair: Optional[tuple] = None
    worst_concavity_pair: Optional[tuple] = None

    @property
    def all_pass(self) -> bool:
        return (self.zero_at_zero and self.nondecreasing
                and self.midpoint_concave and self.finite_nonnegative)


def check_modulus_axioms(mu: ModulusSpec, sample_count: int = 200,
                         concavity_tol: float = 1e-10) -> AxiomReport:
    """Sampled check of mu(0)=0, monotonicity and midpoint concavity.

    Evaluates on a log-spaced grid in (0, domain_cap].  Midpoint concavity
    uses mu((a+b)/2) >= (mu(a)+mu(b))/2 - tol on all sampled pairs, which
    also works for tabulated data where no second derivative exists.
    """
    if sample_count < 3:
        raise ParameterError("sample_count must be at least 3")
    cap = mu.domain_cap
    grid = np.concatenate([[0.0], np.logspace(np.log10(cap) - 8, np.log10(cap), sample_count)])
    vals = mu.evaluate(grid)

    zero_ok = vals[0] == 0.0
    finite_ok = bool(np.all(np.isfinite(vals)) and np.all(vals >= 0.0))

    diffs = np.diff(vals)
    mono_ok = bool(np.all(diffs >= -1e-14))
    worst_mono = None
    if not mono_ok:
        i = int(np.argmin(diffs))
        worst_mono = (float(grid[i]), float(grid[i + 1]))

    # all pairs (i < j): compare mu at the exact midpoint
    a = grid[:, None]
    b = grid[None, :]
    mid_vals = mu.evaluate((a + b) / 2.0)
    gap = mid_vals - (vals[:, None] + vals[None, :]) / 2.0
    iu = np.triu_indices(len(grid), k=1)
    gaps = gap[iu]
    conc_ok = bool(np.all(gaps >= -concavity_tol))
    worst_conc = None
    if not conc_ok:
        k = int(np.argmin(gaps))
        worst_conc = (float(a[iu[0][k], 0]), float(b[0, iu[1][k]]))

    return AxiomReport(zero_ok, mono_ok, conc_ok, finite_ok, worst_mono, worst_conc)


def check_derivative_bound(mu: ModulusSpec, sample_count: int = 200) -> float:
    """Supremum of s*mu'(s)/mu(s) over a log-spaced sample of (0, domain_cap].

    The slope condition asks for this ratio to stay bounded; no universal
    threshold exists, so the supremum is returned for the caller to judge.
    Sample points where mu(s) = 0 with s > 0 are excluded (with a warning).
    """
    if sample_count < 3:
        raise ParameterError("sample_count must be at least 3")
    cap = mu.domain_cap
    grid = np.logspace(np.log10(cap) - 8, np.log10(cap), sample_count)
    vals = np.asarray(mu.evaluate(grid))
    dvals = np.asarray(mu.derivative(grid))
    ok = vals > 0.0
    if not np.all(ok):
        warnings.warn(f"{int(np.sum(~ok))} sample points with mu(s)=0 excluded "
                      "from the derivative-bound supremum")
    ratio = grid[ok] * dvals[ok] / vals[ok]
    return float(np.max(ratio))


# -- integral criterion ----------------------------------------------------

@dataclass(frozen=True)
class CriterionVerdict:
    verdict: str                      # "convergent" | "divergent" | "inconclusive"
    method: str                       # "analytic" | "numeric"
    evidence: dict = field(default_factory=dict)


_CONVERGENT = "convergent"
_DIVERGENT = "divergent"
_INCONCLUSIVE = "inconclusive"


def _classify_analytic(mu: ModulusSpec) -> str:
    if mu.family in ("lipschitz", "log-lip", "log-log-lip", "hoelder"):
        return _CONVERGENT
    if mu.family == "log-power":
        return _CONVERGENT if mu.alpha > 1.0 else _DIVERGENT
    return _INCONCLUSIVE  # tabulated: no closed form to match


def _classify_numeric(mu: ModulusSpec, c0: float, doublings: int) -> CriterionVerdict:
    """Doubling test on partial integrals of mu(1/s)/s.

    In t = log(s) the tail integral is integral of mu(exp(-t)) dt.  Partial
    integrals run to t = 2**k * log(c0): under this doubling a logarithmically
    divergent tail (log-power alpha=1) yields constant increments, faster
    divergence yields growing ones, and any convergent tail yields increments
    collapsing at a geometric-or-better rate.
    """
    t0 = math.log(c0)
    edges = [t0 * 2.0 ** k for k in range(doublings + 1)]
    increments = []
    for a, b in zip(edges[:-1], edges[1:]):
        val, _ = quad(mu.evaluate_neglog, a, b, limit=200, epsabs=1e-14, epsrel=1e-10)
        increments.append(max(val, 0.0))
    inc = np.array(increments)
    total = float(np.sum(inc))
    evidence = {"c0": c0, "doublings": doublings,
                "increments": inc.tolist(), "total": total}

    floor = max(1e-14 * max(total, 1.0), 1e-290)
    live = inc > floor
    if not np.any(live[-3:]):
        # tail increments have vanished: the integral is exhausted
        evidence["fitted_rho"] = 0.0
        return CriterionVerdict(_CONVERGENT, "numeric", evidence)

    tail = inc[-5:]
    if np.all(np.diff(tail) >= -1e-9 * tail[:-1]) and tail[-1] > floor:
        evidence["tail"] = tail.tolist()
        return CriterionVerdict(_DIVERGENT, "numeric", evidence)

    # geometric fit d_k ~ rho**k over the live tail
    ks = np.nonzero(live)[0]
    ks = ks[-10:] if len(ks) > 10 else ks
    if len(ks) >= 3:
        slope = np.polyfit(ks, np.log(inc[ks]), 1)[0]
        rho = float(np.exp(slope))
        evidence["fitted_rho"] = rho
        if rho < 0.95:
            return CriterionVerdict(_CONVERGENT, "numeric", evidence)
    return CriterionVerdict(_INCONCLUSIVE, "numeric", evidence)


def classify_integral_criterion(mu: ModulusSpec, c0: float = math.e,
                                mode: str = "both", doublings: int = 20) -> CriterionVerdict:
    """Decide whether the tail integral of mu(1/s)/s converges.

    ``mode`` is "analytic" (pattern-match the named family), "numeric"
    (doubling partial integrals), or "both" (cross-check; disagreement of two
    definite verdicts downgrades to inconclusive).  Requires c0 >= e so that
    1/s stays within every family's core domain.
    """
    if c0 < math.e:
        raise ParameterError("c0 must be at least e")
    if mode not in ("analytic", "numeric", "both"):
        raise ParameterError("mode must be 'analytic', 'numeric' or 'both'")

    if mode == "analytic":
        return CriterionVerdict(_classify_analytic(mu), "analytic", {"c0": c0})
    if mode == "numeric":
        return _classify_numeric(mu, c0, doublings)

    analytic = _classify_analytic(mu)
    numeric = _classify_numeric(mu, c0, doublings)
    evidence = dict(numeric.evidence)
    evidence["analytic"] = analytic
    if analytic == _INCONCLUSIVE:
        return CriterionVerdict(numeric.verdict, "numeric", evidence)
    if numeric.verdict == _INCONCLUSIVE or numeric.verdict == analytic:
        return CriterionVerdict(analytic, "analytic", evidence)
    evidence["conflict"] = (analytic, numeric.verdict)
    return CriterionVerdict(_INCONCLUSIVE, "numeric", evidence)
