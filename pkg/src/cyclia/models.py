"""Closed-form evaluation of singular inner functions and friends on the disc.

Two evaluation paths, cross-checked in the tests:

* scalar points: the Herglotz integral of an atoms-plus-pieces measure has
  an exact antiderivative per arc; the logarithm's branch is kept honest by
  bisecting any arc whose endpoint ratio leaves the right half plane.
* full rings: H(z) = mu(T) + 2 sum_{n>=1} hat mu(n) z^n, evaluated on M
  equispaced points of a radius-r circle by folding the truncated
  coefficient tail modulo M and one inverse FFT.  Measures whose pieces are
  the uniform dyadic leaves get their coefficients from a single FFT.

Function models are immutable evaluation trees (inner powers, logs, outer
functions, polynomials, dilations, products, quotients), each exposing
value and derivative at interior points and on rings.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .measures import CircleMeasure

__all__ = [
    "herglotz", "herglotz_derivative", "poisson", "herglotz_ring",
    "FunctionModel", "SingularInnerPower", "LogOfSingularInner", "Outer",
    "Polynomial", "Dilate", "Product", "Quotient",
    "CoefficientVector", "maclaurin", "log_coefficients",
    "EvaluationError", "AliasBoundError",
]

_TWO_PI_I = 2j * np.pi


class EvaluationError(ValueError):
    """Evaluation hit a singular point (quotient denominator zero)."""


class AliasBoundError(ValueError):
    """Requested coefficients are not resolvable at the given (r, M)."""

    def __init__(self, bound, tolerance):
        super().__init__(f"alias bound {bound:.3e} exceeds tolerance {tolerance:.3e}")
        self.bound = bound
        self.tolerance = tolerance


# -- scalar Herglotz integrals --------------------------------------------


def _require_interior(z):
    if np.any(np.abs(z) >= 1.0):
        raise ValueError("evaluation point must satisfy |z| < 1")


def _arc_log_sum(a, b, dens, z):
    """sum_j dens_j * Log((w(b_j) - z)/(w(a_j) - z)) with branch tracking.

    Arcs are first cut to at most a quarter turn, for which the continuous
    argument change at any interior z lies in (-5 pi/4, 5 pi/4); the
    principal branch is then provably correct whenever the ratio lands in
    the right half plane, and arcs are bisected until it does.
    """
    total = 0.0 + 0.0j
    a = np.asarray(a, float)
    b = np.asarray(b, float)
    dens = np.asarray(dens, float)
    parts = np.maximum(np.ceil((b - a) / 0.25).astype(int), 1)
    if (parts > 1).any():
        aa, bb, dd = [], [], []
        for lo, hi, d, k in zip(a, b, dens, parts):
            edges = np.linspace(lo, hi, k + 1)
            aa.append(edges[:-1])
            bb.append(edges[1:])
            dd.append(np.full(k, d))
        a, b, dens = np.concatenate(aa), np.concatenate(bb), np.concatenate(dd)
    stack = [(a, b, dens)]
    depth = 0
    while stack:
        a, b, d = stack.pop()
        wa = np.exp(_TWO_PI_I * a)
        wb = np.exp(_TWO_PI_I * b)
        ratio = (wb - z) / (wa - z)
        ok = (ratio.real > 0) | (b - a < 1e-15)
        total += np.sum(d[ok] * np.log(ratio[ok]))
        if not ok.all():
            depth += 1
            if depth > 200:
                raise EvaluationError("arc bisection failed to converge")
            a, b, d = a[~ok], b[~ok], d[~ok]
            mid = 0.5 * (a + b)
            stack.append((a, mid, d))
            stack.append((mid, b, d))
    return total


def herglotz(mu: CircleMeasure, z: complex) -> complex:
    """H(z) = int (w + z)/(w - z) dmu, w = e^{2 pi i x}, |z| < 1.

    Atoms contribute mass (w+z)/(w-z); each constant-density arc has the
    exact antiderivative dens * [Log(w-z)/(pi i) - length] per sub-arc.
    """
    z = complex(z)
    _require_interior(z)
    out = 0.0 + 0.0j
    if mu.atom_x.size:
        w = np.exp(_TWO_PI_I * mu.atom_x)
        out += np.sum(mu.atom_m * (w + z) / (w - z))
    if mu.piece_a.size:
        out += _arc_log_sum(mu.piece_a, mu.piece_b, mu.piece_d, z) / (1j * np.pi)
        out -= np.sum(mu.piece_d * (mu.piece_b - mu.piece_a))
    return complex(out)


def herglotz_derivative(mu: CircleMeasure, z: complex) -> complex:
    """H'(z) = int 2w/(w - z)^2 dmu, exact per atom and per arc."""
    z = complex(z)
    _require_interior(z)
    out = 0.0 + 0.0j
    if mu.atom_x.size:
        w = np.exp(_TWO_PI_I * mu.atom_x)
        out += np.sum(mu.atom_m * 2.0 * w / (w - z) ** 2)
    if mu.piece_a.size:
        wa = np.exp(_TWO_PI_I * mu.piece_a)
        wb = np.exp(_TWO_PI_I * mu.piece_b)
        out += np.sum(mu.piece_d * (1.0 / (wa - z) - 1.0 / (wb - z))) / (1j * np.pi)
    return complex(out)


def poisson(mu: CircleMeasure, z: complex) -> float:
    """Poisson integral P_mu(z) = Re H(z); P_mu(0) = mu(T)."""
    return herglotz(mu, z).real


# -- spectral ring evaluation ---------------------------------------------


class _SpectralCache:
    """Growing cache of 2 hat mu(n), n >= 1, attached to a measure."""

    def __init__(self, mu: CircleMeasure):
        self.mu = mu
        self._coeffs = np.zeros(0, dtype=complex)
        self._dyadic_n = mu.dyadic_resolution()
        self._dyadic_dft = None

    def coeffs(self, count: int) -> np.ndarray:
        if count <= self._coeffs.size:
            return self._coeffs[:count]
        ns = np.arange(self._coeffs.size + 1, count + 1)
        if self._dyadic_n is not None:
            new = self._dyadic_coeffs(ns)
            if self.mu.atom_x.size:
                new = new + np.exp(
                    -_TWO_PI_I * np.outer(ns, self.mu.atom_x)) @ self.mu.atom_m
        else:
            new = self.mu.fourier_many(ns)
        self._coeffs = np.concatenate([self._coeffs, new])
        return self._coeffs[:count]

    def _dyadic_coeffs(self, ns) -> np.ndarray:
        p = 1 << self._dyadic_n
        if self._dyadic_dft is None:
            self._dyadic_dft = np.fft.fft(self.mu.piece_d)
        phase = np.exp(-_TWO_PI_I * ns / p)
        return self._dyadic_dft[ns % p] * (1.0 - phase) / (_TWO_PI_I * ns)


def _spectral(mu: CircleMeasure) -> _SpectralCache:
    cache = getattr(mu, "_spectral_cache", None)
    if cache is None:
        cache = _SpectralCache(mu)
        mu._spectral_cache = cache
    return cache


def _truncation_order(r: float, mass: float, tol: float = 1e-14) -> int:
    """Smallest N with 2 mass (N + 1/(1-r)) r^N / (1-r) below tol."""
    if r <= 0.0:
        return 1
    scale = max(2.0 * abs(mass), 1.0)
    log_r = math.log(r)
    n = max(8, int(-36.0 / log_r))
    while scale * math.exp(n * log_r) * (n + 1.0 / (1 - r)) / (1 - r) > tol:
        n = int(n * 1.3) + 8
    return n


def herglotz_ring(mu: CircleMeasure, r: float, m: int, offset: float = 0.0,
                  deriv: bool = False) -> np.ndarray:
    """H (or H') at the M points r e^{2 pi i (k + offset)/M}, k = 0..M-1.

    Truncates the Taylor tail of H below 1e-14, folds the coefficients
    modulo M and applies one inverse FFT.
    """
    if not 0.0 <= r < 1.0:
        raise ValueError("ring radius must be in [0, 1)")
    if r == 0.0:
        v = herglotz_derivative(mu, 0.0) if deriv else herglotz(mu, 0.0)
        return np.full(m, v, dtype=complex)
    cache = _spectral(mu)
    n_max = _truncation_order(r, mu.total_mass)
    ns = np.arange(1, n_max + 1)
    c = 2.0 * cache.coeffs(n_max)
    if deriv:
        c = c * ns
    c = c * np.exp(ns * math.log(r) + _TWO_PI_I * ns * offset / m)
    folded = np.zeros(m, dtype=complex)
    np.add.at(folded, ns % m, c)
    vals = m * np.fft.ifft(folded)
    if deriv:
        zs = r * np.exp(_TWO_PI_I * (np.arange(m) + offset) / m)
        return vals / zs
    return vals + mu.total_mass


def poisson_ring(mu: CircleMeasure, r: float, m: int, offset: float = 0.0) -> np.ndarray:
    return herglotz_ring(mu, r, m, offset).real


# -- function models -------------------------------------------------------


def _ring_points(r, m, offset):
    return r * np.exp(_TWO_PI_I * (np.arange(m) + offset) / m)


class FunctionModel:
    """Evaluatable analytic function on the disc: value and derivative at
    interior points, plus fast evaluation on full equispaced rings."""

    def val(self, z):
        raise NotImplementedError

    def dval(self, z):
        raise NotImplementedError

    def ring(self, r: float, m: int, offset: float = 0.0) -> np.ndarray:
        return np.asarray(self.val(_ring_points(r, m, offset)), dtype=complex)

    def dring(self, r: float, m: int, offset: float = 0.0) -> np.ndarray:
        return np.asarray(self.dval(_ring_points(r, m, offset)), dtype=complex)


@dataclass(frozen=True)
class SingularInnerPower(FunctionModel):
    """exp(-alpha H_mu(z)): the alpha-th power of the inner function of mu.

    Non-integer powers are single valued because the exponent itself, not a
    root, is scaled.  |value| <= 1 holds for positive mu and alpha > 0.
    """

    mu: CircleMeasure
    alpha: float = 1.0

    def __post_init__(self):
        if self.alpha <= 0:
            raise ValueError("power must be positive")

    def log_val(self, z):
        z = np.asarray(z, dtype=complex)
        if z.shape == ():
            return -self.alpha * herglotz(self.mu, complex(z))
        return np.array([-self.alpha * herglotz(self.mu, zz) for zz in z.ravel()]
                        ).reshape(z.shape)

    def val(self, z):
        return np.exp(self.log_val(z))

    def dval(self, z):
        z = np.asarray(z, dtype=complex)
        if z.shape == ():
            return -self.alpha * herglotz_derivative(self.mu, complex(z)) \
                * np.exp(self.log_val(z))
        return np.array([complex(self.dval(zz)) for zz in z.ravel()]).reshape(z.shape)

    def log_ring(self, r, m, offset=0.0):
        return -self.alpha * herglotz_ring(self.mu, r, m, offset)

    def ring(self, r, m, offset=0.0):
        return np.exp(self.log_ring(r, m, offset))

    def dring(self, r, m, offset=0.0):
        h1 = herglotz_ring(self.mu, r, m, offset, deriv=True)
        return -self.alpha * h1 * self.ring(r, m, offset)

    def log_abs_dring(self, r, m, offset=0.0):
        """log |f'| on a ring without underflow in the inner factor."""
        h1 = herglotz_ring(self.mu, r, m, offset, deriv=True)
        h = herglotz_ring(self.mu, r, m, offset)
        with np.errstate(divide="ignore"):
            return math.log(self.alpha) + np.log(np.abs(h1)) - self.alpha * h.real


@dataclass(frozen=True)
class LogOfSingularInner(FunctionModel):
    """-H_mu(z), the logarithm of the singular inner function of mu."""

    mu: CircleMeasure

    def val(self, z):
        z = np.asarray(z, dtype=complex)
        if z.shape == ():
            return -herglotz(self.mu, complex(z))
        return np.array([-herglotz(self.mu, zz) for zz in z.ravel()]).reshape(z.shape)

    def dval(self, z):
        z = np.asarray(z, dtype=complex)
        if z.shape == ():
            return -herglotz_derivative(self.mu, complex(z))
        return np.array([-herglotz_derivative(self.mu, zz) for zz in z.ravel()]
                        ).reshape(z.shape)

    def ring(self, r, m, offset=0.0):
        return -herglotz_ring(self.mu, r, m, offset)

    def dring(self, r, m, offset=0.0):
        return -herglotz_ring(self.mu, r, m, offset, deriv=True)


@dataclass(frozen=True)
class Outer(FunctionModel):
    """exp(H_m(z)) for a signed log-modulus boundary measure m.

    The boundary data is the measure whose density carries log |f*| against
    normalized length, so the value at 0 is the exponentiated mean.
    """

    log_modulus: CircleMeasure

    def val(self, z):
        z = np.asarray(z, dtype=complex)
        if z.shape == ():
            return np.exp(herglotz(self.log_modulus, complex(z)))
        return np.array([complex(self.val(zz)) for zz in z.ravel()]).reshape(z.shape)

    def dval(self, z):
        z = np.asarray(z, dtype=complex)
        if z.shape == ():
            return herglotz_derivative(self.log_modulus, complex(z)) \
                * np.exp(herglotz(self.log_modulus, complex(z)))
        return np.array([complex(self.dval(zz)) for zz in z.ravel()]).reshape(z.shape)

    def ring(self, r, m, offset=0.0):
        return np.exp(herglotz_ring(self.log_modulus, r, m, offset))

    def dring(self, r, m, offset=0.0):
        return herglotz_ring(self.log_modulus, r, m, offset, deriv=True) \
            * self.ring(r, m, offset)


class Polynomial(FunctionModel):
    """Finite Maclaurin polynomial sum c_k z^k."""

    def __init__(self, coeffs):
        self.coeffs = np.asarray(coeffs, dtype=complex)

    def val(self, z):
        z = np.asarray(z, dtype=complex)
        return np.polynomial.polynomial.polyval(z, self.coeffs)

    def dval(self, z):
        z = np.asarray(z, dtype=complex)
        dc = self.coeffs[1:] * np.arange(1, self.coeffs.size)
        if dc.size == 0:
            return np.zeros_like(z)
        return np.polynomial.polynomial.polyval(z, dc)


@dataclass(frozen=True)
class Dilate(FunctionModel):
    """f_t(z) = f(t z), 0 < t < 1; analytic across the closed disc."""

    inner: FunctionModel
    t: float

    def __post_init__(self):
        if not 0.0 < self.t < 1.0:
            raise ValueError("dilation parameter must be in (0, 1)")

    def val(self, z):
        return self.inner.val(self.t * np.asarray(z, dtype=complex))

    def dval(self, z):
        return self.t * self.inner.dval(self.t * np.asarray(z, dtype=complex))

    def ring(self, r, m, offset=0.0):
        return self.inner.ring(self.t * r, m, offset)

    def dring(self, r, m, offset=0.0):
        return self.t * self.inner.dring(self.t * r, m, offset)


@dataclass(frozen=True)
class Product(FunctionModel):
    factors: tuple

    def __init__(self, factors):
        object.__setattr__(self, "factors", tuple(factors))

    def val(self, z):
        out = None
        for f in self.factors:
            v = f.val(z)
            out = v if out is None else out * v
        return out

    def dval(self, z):
        vals = [f.val(z) for f in self.factors]
        dvals = [f.dval(z) for f in self.factors]
        out = 0.0
        for i in range(len(self.factors)):
            term = dvals[i]
            for k, v in enumerate(vals):
                if k != i:
                    term = term * v
            out = out + term
        return out

    def ring(self, r, m, offset=0.0):
        out = None
        for f in self.factors:
            v = f.ring(r, m, offset)
            out = v if out is None else out * v
        return out

    def dring(self, r, m, offset=0.0):
        vals = [f.ring(r, m, offset) for f in self.factors]
        dvals = [f.dring(r, m, offset) for f in self.factors]
        out = np.zeros(m, dtype=complex)
        for i in range(len(self.factors)):
            term = dvals[i]
            for k, v in enumerate(vals):
                if k != i:
                    term = term * v
            out = out + term
        return out


@dataclass(frozen=True)
class Quotient(FunctionModel):
    """num/den; raises EvaluationError when the denominator vanishes."""

    num: FunctionModel
    den: FunctionModel

    @staticmethod
    def _check(d):
        if np.any(d == 0):
            raise EvaluationError("quotient denominator vanished at an "
                                  "evaluation point")

    def val(self, z):
        d = self.den.val(z)
        self._check(d)
        return self.num.val(z) / d

    def dval(self, z):
        d = self.den.val(z)
        self._check(d)
        return (self.num.dval(z) * d - self.num.val(z) * self.den.dval(z)) / d**2

    def ring(self, r, m, offset=0.0):
        d = self.den.ring(r, m, offset)
        self._check(d)
        return self.num.ring(r, m, offset) / d

    def dring(self, r, m, offset=0.0):
        d = self.den.ring(r, m, offset)
        self._check(d)
        return (self.num.dring(r, m, offset) * d
                - self.num.ring(r, m, offset) * self.den.dring(r, m, offset)) / d**2


# -- Maclaurin coefficients ------------------------------------------------


@dataclass
class CoefficientVector:
    """Maclaurin coefficients hat f(0..K) with extraction metadata."""

    coeffs: np.ndarray
    radius: float
    samples: int
    alias_bounds: np.ndarray

    def __len__(self):
        return len(self.coeffs)

    def __getitem__(self, k):
        return self.coeffs[k]


def _next_pow2(n: int) -> int:
    return 1 << max(n - 1, 1).bit_length()


def maclaurin(f: FunctionModel, k_max: int, r: float | None = None,
              m: int | None = None, tolerance: float | None = None) -> CoefficientVector:
    """hat f(0..k_max) by the Cauchy integral on a radius-r circle with M
    equispaced samples (one FFT).

    Defaults: M = 4 * next power of two above k_max, and r chosen so the
    alias factor r^(M - k_max) is 1e-14.  The recorded per-coefficient
    alias bound is sup|f| r^(M-k) / (1 - r^M) with sup|f| estimated from
    the samples; if a tolerance is given and the worst bound exceeds it,
    AliasBoundError is raised.
    """
    if m is None:
        m = 4 * _next_pow2(k_max + 1)
    if k_max >= m:
        raise ValueError("need k_max < M")
    if m & (m - 1):
        raise ValueError("M must be a power of two")
    if r is None:
        r = math.exp(math.log(1e-14) / (m - k_max))
    if not 0.0 < r < 1.0:
        raise ValueError("radius must be in (0, 1)")
    samples = f.ring(r, m)
    fft = np.fft.fft(samples)
    ks = np.arange(k_max + 1)
    coeffs = fft[: k_max + 1] * np.exp(-ks * math.log(r)) / m
    sup = float(np.abs(samples).max())
    alias = sup * np.exp((m - ks) * math.log(r)) / (1.0 - r**m)
    if tolerance is not None and alias.max() > tolerance:
        raise AliasBoundError(float(alias.max()), tolerance)
    return CoefficientVector(coeffs, r, m, alias)


def log_coefficients(mu: CircleMeasure, k_max: int) -> CoefficientVector:
    """Maclaurin coefficients of log S_mu = -H_mu from closed-form Fourier
    coefficients: (-mu(T), -2 hat mu(1), ..., -2 hat mu(k_max))."""
    coeffs = np.empty(k_max + 1, dtype=complex)
    coeffs[0] = -mu.total_mass
    if k_max >= 1:
        coeffs[1:] = -2.0 * mu.fourier_many(np.arange(1, k_max + 1))
    return CoefficientVector(coeffs, 0.0, 0, np.zeros(k_max + 1))
