"""Fourier-side machinery on a periodic torus.

The linear flow

    u_tt + (-Lap)^sigma u + (-Lap)^delta u_t = 0

diagonalizes over the torus [-L, L)^n: each mode xi obeys the scalar ODE
v'' + |xi|^(2*delta) v' + |xi|^(2*sigma) v = 0 with characteristic roots

    lam_pm = ( -|xi|^(2*delta) +- sqrt(|xi|^(4*delta) - 4 |xi|^(2*sigma)) ) / 2.

The propagator multipliers K0 (for the displacement datum) and K1 (for the
velocity datum) are assembled from the roots in a cancellation-safe way: the
difference quotient (exp(lam_p t) - exp(lam_m t)) / (lam_p - lam_m) switches
to a series in x = (lam_p - lam_m) t near root coalescence, which also yields
the exact double-root limits (1 - lam t) exp(lam t) and t exp(lam t).

Conventions: N points per axis on [-L, L), frequencies xi_k = (pi / L) k for
k in {-N/2, ..., N/2 - 1} stored in FFT layout, |xi| the Euclidean magnitude.
The fractional symbol |xi|^p is exp(p/2 * log(|xi|^2)) with |xi| = 0 mapped
to 0 for p > 0 and to 1 for p = 0 (the identity operator).
"""
from __future__ import annotations

import functools
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import GridMismatchError, ParameterError

_DEGENERATE_TOL = 1e-8
_SERIES_CUT = 1e-4


@dataclass(frozen=True)
class GridSpec:
    """Periodic grid: n dimensions, N points per axis, half-length L."""

    n: int
    N: int
    L: float

    def __post_init__(self):
        if self.n not in (1, 2, 3):
            raise ParameterError("grid dimension must be 1, 2 or 3")
        if self.N < 4 or (self.N & (self.N - 1)) != 0:
            raise ParameterError("N must be a power of two, at least 4")
        if self.L <= 0:
            raise ParameterError("L must be positive")

    @property
    def shape(self) -> tuple:
        return (self.N,) * self.n

    @property
    def dx(self) -> float:
        return 2.0 * self.L / self.N

    @property
    def cell_volume(self) -> float:
        return self.dx ** self.n

    def axis(self) -> np.ndarray:
        """Physical coordinates along one axis: -L + i * dx."""
        return -self.L + self.dx * np.arange(self.N)

    def coords(self) -> tuple:
        """Meshgrid coordinate arrays (ij indexing)."""
        ax = self.axis()
        return np.meshgrid(*([ax] * self.n), indexing="ij")

    def radius(self) -> np.ndarray:
        """Euclidean |x| on the grid."""
        return np.sqrt(sum(c * c for c in self.coords()))

    def wavenumber_axis(self) -> np.ndarray:
        """xi along one axis in FFT layout."""
        return 2.0 * np.pi * np.fft.fftfreq(self.N, d=self.dx)

    def xi_squared(self) -> np.ndarray:
        return _xi_squared_cached(self.n, self.N, self.L)

    def fft(self, u: np.ndarray) -> np.ndarray:
        self.check_field(u)
        return np.fft.fftn(u)

    def ifft(self, uh: np.ndarray) -> np.ndarray:
        return np.fft.ifftn(uh).real

    def check_field(self, u: np.ndarray):
        if np.shape(u) != self.shape:
            raise GridMismatchError(f"field shape {np.shape(u)} does not match grid {self.shape}")

    def dealias_mask(self, fraction: float = 2.0 / 3.0) -> np.ndarray:
        """Boolean keep-mask for modes with |k| <= fraction * N/2 per axis."""
        if not 0.0 < fraction <= 1.0:
            raise ParameterError("dealias fraction must lie in (0, 1]")
        return _dealias_mask_cached(self.n, self.N, round(fraction * 1e9))


@functools.lru_cache(maxsize=32)
def _xi_squared_cached(n: int, N: int, L: float) -> np.ndarray:
    xi = 2.0 * np.pi * np.fft.fftfreq(N, d=2.0 * L / N)
    mats = np.meshgrid(*([xi] * n), indexing="ij")
    out = sum(m * m for m in mats)
    out.setflags(write=False)
    return out

@functools.lru_cache(maxsize=32)
def _dealias_mask_cached(n: int, N: int, frac_key: int) -> np.ndarray:
    fraction = frac_key / 1e9
    k = np.abs(np.fft.fftfreq(N) * N)
    keep1d = k <= fraction * (N // 2) + 1e-9
    mats = np.meshgrid(*([keep1d] * n), indexing="ij")
    out = np.logical_and.reduce(mats)
    out.setflags(write=False)
    return out


@dataclass
class FieldState:
    """The pair (u, u_t) sampled on a grid at one time."""

    u: np.ndarray
    ut: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        if np.shape(self.u) != np.shape(self.ut):
            raise GridMismatchError("u and u_t must share a shape")
        if self.time < 0:
            raise ParameterError("time must be nonnegative")


def fractional_symbol(xi_squared: np.ndarray, power: float) -> np.ndarray:
    """|xi|^power from |xi|^2, with the zero mode handled exactly.

    power = 0 is the identity symbol (all ones, including the zero mode,
    so that delta = 0 damping acts as plain u_t everywhere).
    """
    if power == 0:
        return np.ones_like(np.asarray(xi_squared, dtype=float))
    xisq = np.asarray(xi_squared, dtype=float)
    with np.errstate(divide="ignore"):
        out = np.where(xisq > 0.0, np.exp(0.5 * power * np.log(np.where(xisq > 0.0, xisq, 1.0))), 0.0)
    return out


def characteristic_roots(xi_mag, sigma: float, delta: float):
    """Roots of lam^2 + |xi|^(2 delta) lam + |xi|^(2 sigma) = 0.

    Returns (lam_plus, lam_minus) ordered by real part (ties by imaginary
    part).  lam_plus is computed from lam_minus via the product of roots in
    the real-root regime to avoid subtractive cancellation.
    """
    xisq = np.asarray(xi_mag, dtype=float) ** 2
    b = fractional_symbol(xisq, 2.0 * delta)
    c = fractional_symbol(xisq, 2.0 * sigma)
    disc = b * b - 4.0 * c
    lam_p = np.empty(np.shape(disc), dtype=complex)
    lam_m = np.empty(np.shape(disc), dtype=complex)

    real = disc >= 0.0
    if np.any(real):
        sq = np.sqrt(np.where(real, disc, 0.0))
        lm = -0.5 * (b + sq)
        with np.errstate(divide="ignore", invalid="ignore"):
            lp = np.where(lm != 0.0, c / np.where(lm != 0.0, lm, 1.0), 0.0)
        lam_m[real] = lm[real]
        lam_p[real] = lp[real]
    osc = ~real
    if np.any(osc):
        sq = np.sqrt(np.where(osc, -disc, 0.0))
        lam_p[osc] = (-b[osc] + 1j * sq[osc]) / 2.0
        lam_m[osc] = (-b[osc] - 1j * sq[osc]) / 2.0

    if np.isscalar(xi_mag) or np.ndim(xi_mag) == 0:
        return complex(lam_p), complex(lam_m)
    return lam_p, lam_m


@dataclass(frozen=True)
class MultiplierCache:
    """Per-mode roots and symbols for one (grid, sigma, delta)."""

    grid: GridSpec
    sigma: float
    delta: float
    b: np.ndarray            # |xi|^(2 delta)
    c: np.ndarray            # |xi|^(2 sigma)
    lam_plus: np.ndarray
    lam_minus: np.ndarray
    degenerate_mask: np.ndarray

    @classmethod
    def build(cls, grid: GridSpec, sigma: float, delta: float) -> "MultiplierCache":
        xisq = grid.xi_squared()
        b = fractional_symbol(xisq, 2.0 * delta)
        c = fractional_symbol(xisq, 2.0 * sigma)
        lam_p, lam_m = characteristic_roots(np.sqrt(xisq), sigma, delta)
        degen = np.abs(lam_p - lam_m) < _DEGENERATE_TOL * np.maximum(1.0, np.abs(lam_p))
        return cls(grid, sigma, delta, b, c, lam_p, lam_m, degen)


def _k0k1(t: float, lam_p, lam_m):
    """Propagator multipliers from the roots, cancellation-safe.

    K1 = t * exp(lam_m t) * E(x) and K0 = exp(lam_m t) * (1 - lam_m t E(x))
    with E(x) = (exp(x) - 1)/x and x = (lam_p - lam_m) t; E is evaluated by
    series for small |x| (covering coalescing and exactly-double roots) and
    through separate exponentials otherwise (no overflow: Re lam_pm <= 0).
    """
    lam_p = np.asarray(lam_p, dtype=complex)
    lam_m = np.asarray(lam_m, dtype=complex)
    x = (lam_p - lam_m) * t
    small = np.abs(x) < _SERIES_CUT

    K0 = np.empty(lam_p.shape, dtype=complex)
    K1 = np.empty(lam_p.shape, dtype=complex)
    if np.any(small):
        xs = x[small]
        E = 1.0 + xs / 2.0 + xs * xs / 6.0 + xs * xs * xs / 24.0
        eLm = np.exp(lam_m[small] * t)
        K1[small] = t * eLm * E
        K0[small] = eLm * (1.0 - lam_m[small] * t * E)
    big = ~small
    if np.any(big):
        ep = np.exp(lam_p[big] * t)
        em = np.exp(lam_m[big] * t)
        dl = lam_p[big] - lam_m[big]
        K1[big] = (ep - em) / dl
        K0[big] = (lam_p[big] * em - lam_m[big] * ep) / dl
    return K0, K1


def propagator_multipliers(t: float, xi_mag, sigma: float, delta: float):
    """K0_hat(t, xi), K1_hat(t, xi) for scalar or array |xi|.

    K0_hat(0, xi) = 1 and K1_hat(0, xi) = 0 exactly; both solve the per-mode
    ODE v'' + |xi|^(2 delta) v' + |xi|^(2 sigma) v = 0.
    """
    if t < 0:
        raise ParameterError("t must be nonnegative")
    lam_p, lam_m = characteristic_roots(xi_mag, sigma, delta)
    K0, K1 = _k0k1(t, lam_p, lam_m)
    if np.isscalar(xi_mag) or np.ndim(xi_mag) == 0:
        return complex(K0), complex(K1)
    return K0, K1


@dataclass(frozen=True)
class Propagator:
    """Multipliers of the linear flow at a fixed time increment.

    K0, K1 advance u_hat; D0 = dK0/dt = -c K1 and D1 = dK1/dt = K0 - b K1
    advance ut_hat (closed forms, no extra exponentials).
    """

    t: float
    K0: np.ndarray
    K1: np.ndarray
    D0: np.ndarray
    D1: np.ndarray

    @classmethod
    def build(cls, cache: MultiplierCache, t: float) -> "Propagator":
        K0, K1 = _k0k1(t, cache.lam_plus, cache.lam_minus)
        D0 = -cache.c * K1
        D1 = K0 - cache.b * K1
        return cls(t, K0, K1, D0, D1)

    def apply(self, uh: np.ndarray, uth: np.ndarray):
        return self.K0 * uh + self.K1 * uth, self.D0 * uh + self.D1 * uth


def linear_evolve(u0: np.ndarray, u1: np.ndarray, t: float, params, grid: GridSpec) -> FieldState:
    """Exact linear solution at time t from data (u0, u1)."""
    grid.check_field(u0)
    grid.check_field(u1)
    if t < 0:
        raise ParameterError("t must be nonnegative")
    cache = MultiplierCache.build(grid, params.sigma, params.delta)
    prop = Propagator.build(cache, t)
    uh, uth = prop.apply(grid.fft(u0), grid.fft(u1))
    return FieldState(grid.ifft(uh), grid.ifft(uth), time=t)


def fractional_derivative(u: np.ndarray, s: float, grid: GridSpec) -> np.ndarray:
    """|D|^s u by spectral multiplier; s = 0 is the identity."""
    if s < 0:
        raise ParameterError("s must be nonnegative")
    if s == 0:
        grid.check_field(u)
        return np.array(u, dtype=float, copy=True)
    sym = fractional_symbol(grid.xi_squared(), s)
    return grid.ifft(sym * grid.fft(u))


# -- norm helpers on the spectral side ---------------------------------------

def spectral_l2(uh: np.ndarray, grid: GridSpec, weight_power: float = 0.0) -> float:
    """|| |D|^weight_power u ||_L2 computed from the spectrum uh of u.

    weight_power = 0 is Plancherel; negative powers use the homogeneous
    convention (zero mode dropped).
    """
    if weight_power == 0.0:
        w = 1.0
    else:
        xisq = grid.xi_squared()
        with np.errstate(divide="ignore"):
            w = np.where(xisq > 0.0,
                         np.exp(weight_power * np.log(np.where(xisq > 0.0, xisq, 1.0))), 0.0)
    total = np.sum(w * np.abs(uh) ** 2)
    return float(np.sqrt(total * grid.cell_volume / grid.N ** grid.n))


def energy(uh: np.ndarray, uth: np.ndarray, grid: GridSpec, sigma: float) -> float:
    """E = ||u_t||_L2^2 + || |D|^sigma u ||_L2^2 from spectral data."""
    return spectral_l2(uth, grid) ** 2 + spectral_l2(uh, grid, sigma) ** 2


# -- band-limited random fields (verification inputs) -------------------------

def mode_coefficients(kmax: int, n: int, rng: np.random.Generator,
                      mean_zero: bool = True) -> np.ndarray:
    """Random complex coefficients for integer modes in [-kmax, kmax]^n.

    The array is indexed so entry [i1, ..., in] is mode (i1 - kmax, ...).
    Hermitian symmetry is enforced so synthesis gives a real field; the same
    coefficients reproduce the same continuum field on any fine enough grid.
    """
    size = 2 * kmax + 1
    c = rng.standard_normal((size,) * n) + 1j * rng.standard_normal((size,) * n)
    herm = np.conj(c[(slice(None, None, -1),) * n])
    c = (c + herm) / 2.0
    if mean_zero:
        c[(kmax,) * n] = 0.0
    else:
        c[(kmax,) * n] = c[(kmax,) * n].real
    return c


def synthesize(coeffs: np.ndarray, grid: GridSpec) -> np.ndarray:
    """Evaluate the band-limited field with the given mode coefficients."""
    kmax = (coeffs.shape[0] - 1) // 2
    if 2 * kmax >= grid.N:
        raise ParameterError("grid too coarse for the requested band")
    spec = np.zeros(grid.shape, dtype=complex)
    idx = np.arange(-kmax, kmax + 1)
    grid_idx = np.ix_(*([idx % grid.N] * grid.n))
    spec[grid_idx] = coeffs
    return grid.ifft(spec * grid.N ** grid.n)


# -- torus wrap-time heuristic -------------------------------------------------

def wrap_time(grid: GridSpec, sigma: float, delta: float,
              data_spectrum: Optional[np.ndarray] = None,
              support_radius: float = 0.0, tol: float = 1e-4) -> float:
    """Estimated time before periodic images contaminate a centred solution.

    A mode contaminates once its oscillatory group velocity carries it to the
    boundary while its damped amplitude still exceeds ``tol`` relative to the
    data spectrum's peak (wraps fainter than that cannot move a rate fit).
    Overdamped modes do not propagate and are ignored.  Returns inf when no
    resolved mode can contaminate.  Heuristic: group velocities are sampled
    by finite differences, which smooths the integrable singularity at the
    underdamped edge.
    """
    ximax = float(np.sqrt(np.max(grid.xi_squared())))
    xi = np.linspace(0.0, ximax, 2049)[1:]
    lam_p, _ = characteristic_roots(xi, sigma, delta)
    omega = np.abs(np.imag(lam_p))
    decay = -np.real(lam_p)
    vg = np.gradient(omega, xi)

    if data_spectrum is not None:
        mags = np.sqrt(grid.xi_squared()).ravel()
        amps = np.abs(np.asarray(data_spectrum)).ravel()
        peak = float(np.max(amps)) or 1.0
        idx = np.clip(np.searchsorted(xi, mags), 0, len(xi) - 1)
        profile = np.zeros(len(xi))
        np.maximum.at(profile, idx, amps / peak)
    else:
        profile = np.ones(len(xi))

    distance = max(grid.L - support_radius, 1e-12)
    with np.errstate(divide="ignore", invalid="ignore"):
        t_reach = np.where(vg > 1e-12, distance / np.maximum(vg, 1e-12), np.inf)
    surviving = profile * np.exp(-decay * np.minimum(t_reach, 1e18))
    contaminating = (omega > 0.0) & (surviving > tol) & np.isfinite(t_reach)
    if not np.any(contaminating):
        return float("inf")
    return float(np.min(t_reach[contaminating]))


# -- flat binary field format ---------------------------------------------------

_MAGIC = "sigmaevo-field-v1"


def write_field(path, u: np.ndarray, grid: GridSpec, time: float = 0.0):
    """Little-endian float64 dump with a one-line plain-text header."""
    grid.check_field(u)
    header = f"{_MAGIC} n={grid.n} N={grid.N} L={grid.L!r} time={time!r}\n"
    with open(path, "wb") as fh:
        fh.write(header.encode("ascii"))
        fh.write(np.ascontiguousarray(u, dtype="<f8").tobytes())


def read_field(path):
    """Inverse of :func:`write_field`: returns (array, grid, time)."""
    with open(path, "rb") as fh:
        header = fh.readline().decode("ascii").strip()
        raw = fh.read()
    parts = header.split()
    if not parts or parts[0] != _MAGIC:
        raise ParameterError(f"{path}: not a sigmaevo field file")
    kv = dict(p.split("=", 1) for p in parts[1:])
    grid = GridSpec(n=int(kv["n"]), N=int(kv["N"]), L=float(kv["L"]))
    u = np.frombuffer(raw, dtype="<f8").reshape(grid.shape).copy()
    return u, grid, float(kv["time"])


def write_state_csv(path, state: FieldState, grid: GridSpec):
    """x, u, u_t columns; only meaningful for one-dimensional grids."""
    if grid.n != 1:
        raise ParameterError("CSV export supports n = 1 only")
    x = grid.axis()
    with open(path, "w") as fh:
        fh.write("x,u,ut\n")
        for xi, ui, vi in zip(x, state.u, state.ut):
            fh.write(f"{xi!r},{ui!r},{vi!r}\n")
