"""Steen function V(z | a_1..a_n): closed forms and Mellin-Barnes quadrature.

V(z | a) = (1/2 pi i) int_(c) prod_j Gamma(s + a_j) z^-s ds.

For one parameter this is z^a e^-z, for two it is a Bessel K function, and
for three or more we integrate numerically along Re s = c.  The line sits
at c = 1 unless |z| is large, in which case it is moved right to the real
saddle point of the integrand; without that shift the integral of an O(1)
integrand has to cancel down to V ~ e^(-d z^(1/d)) and loses every digit.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.special import digamma, kv

from .report import CheckReport, SeriesValue
from .zetalab import EULER_GAMMA, _loggamma_right

K0_SERIES_MAX = 2.0
K0_ASYMPTOTIC_MIN = 50.0
K0_MIN, K0_MAX = 1e-6, 700.0


class SteenDomainError(ValueError):
    """Argument outside the region where the quadrature is trusted."""


# ---------------------------------------------------------------------------
# K_0
# ---------------------------------------------------------------------------


def _k0_series(z: np.ndarray) -> np.ndarray:
    q = z * z / 4
    term = np.ones_like(z)
    i0 = term.copy()
    acc = np.zeros_like(z)
    harmonic = 0.0
    for k in range(1, 40):
        term = term * q / (k * k)
        harmonic += 1.0 / k
        i0 = i0 + term
        acc = acc + term * harmonic
    return -(np.log(z / 2) + EULER_GAMMA) * i0 + acc


def _k0_quadrature(z: np.ndarray) -> np.ndarray:
    # K0(z) = e^-z int_0^inf exp(-2 z sinh^2(t/2)) dt, trapezoid on a step
    # scaled to the decay rate so that arguments near the imaginary axis work
    out = np.empty_like(z)
    for idx, zz in enumerate(z):
        th = abs(math.atan2(zz.imag, zz.real))
        margin = math.pi / 2 - th
        h = min(0.5, 2 * math.pi * margin / 40) / max(1.0, abs(zz)) ** 0.25
        tmax = 2 * math.asinh(math.sqrt(40 / (2 * abs(zz) * math.cos(th)))) + 1
        t = np.arange(0.0, tmax, h)
        f = np.exp(-2 * zz * np.sinh(t / 2) ** 2)
        out[idx] = np.exp(-zz) * h * (f.sum() - 0.5 * f[0])
    return out


def _k0_asymptotic(z: np.ndarray) -> np.ndarray:
    acc = np.ones_like(z)
    term = np.ones_like(z)
    for k in range(1, 40):
        term = term * (-((2 * k - 1) ** 2)) / (k * 8 * z)
        acc = acc + term
    return np.exp(-z) * np.sqrt(np.pi / (2 * z)) * acc


def k0_vec(z: np.ndarray) -> np.ndarray:
    """K0 on an array with Re z > 0, no range checks."""
    z = np.asarray(z, dtype=complex)
    out = np.empty_like(z)
    mag = np.abs(z)
    small = mag <= K0_SERIES_MAX
    big = mag > K0_ASYMPTOTIC_MIN
    mid = ~(small | big)
    if np.any(small):
        out[small] = _k0_series(z[small])
    if np.any(mid):
        out[mid] = _k0_quadrature(z[mid])
    if np.any(big):
        out[big] = _k0_asymptotic(z[big])
    return out


def bessel_k0(z):
    """Modified Bessel K0 for Re z > 0 and 1e-6 <= |z| <= 700."""
    arr = np.atleast_1d(np.asarray(z, dtype=complex))
    if np.any(arr.real <= 0):
        raise SteenDomainError("bessel_k0 needs Re z > 0")
    mag = np.abs(arr)
    if np.any((mag < K0_MIN) | (mag > K0_MAX)):
        raise SteenDomainError(f"|z| must lie in [{K0_MIN:g}, {K0_MAX:g}]")
    out = k0_vec(arr)
    return out if np.ndim(z) else complex(out[0])


# ---------------------------------------------------------------------------
# Mellin-Barnes quadrature
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SteenParams:
    params: tuple

    def __post_init__(self):
        object.__setattr__(self, "params", tuple(float(a) for a in self.params))
        if not self.params:
            raise ValueError("SteenParams needs at least one parameter")

    @classmethod
    def zeros(cls, d: int) -> "SteenParams":
        return cls((0.0,) * d)

    @property
    def n(self) -> int:
        return len(self.params)

    @property
    def is_zero(self) -> bool:
        return all(a == 0 for a in self.params)


_GL_X, _GL_W = np.polynomial.legendre.leggauss(15)
_grid_cache: dict = {}
_grid_lock = threading.Lock()


def _log_gamma_sum(params: tuple, s: np.ndarray) -> np.ndarray:
    # every argument has Re >= c > 0.5 so the right-half-plane routine applies
    if all(a == params[0] for a in params):
        return len(params) * _loggamma_right(s + params[0])
    return sum(_loggamma_right(s + a) for a in params)


def _grid(params: tuple, c: float, half_width: int):
    """Gauss-Legendre nodes on unit panels covering |t| <= half_width, with log Gamma sums."""
    key = (params, c)
    cached = _grid_cache.get(key)
    if cached is not None and cached[0] >= half_width:
        return cached[1:]
    width = max(half_width, 64)
    if cached is not None:
        width = max(width, 2 * cached[0])
    left = np.arange(-width, width, dtype=float)
    t = (left[:, None] + 0.5 + 0.5 * _GL_X[None, :]).ravel()
    w = np.tile(0.5 * _GL_W, len(left))
    S = _log_gamma_sum(params, c + 1j * t)
    with _grid_lock:
        _grid_cache[key] = (width, t, w, S)
    return t, w, S


def _abscissa(params: tuple, logabs: float) -> float:
    """max(1, real saddle), the saddle solving sum_j psi(c + a_j) = log|z|, rounded up to 1/4."""
    f = lambda c: float(sum(digamma(c + a) for a in params)) - logabs
    if f(1.0) >= 0:
        return 1.0
    lo, hi = 1.0, 2.0
    while f(hi) < 0:
        lo, hi = hi, 2 * hi
    for _ in range(50):
        mid = 0.5 * (lo + hi)
        if f(mid) < 0:
            lo = mid
        else:
            hi = mid
    return math.ceil(4 * hi) / 4


def _truncation_height(params: tuple, c: float, logabs: float, theta: float, cut: float) -> int:
    """Smallest T with the Stirling magnitude bound below exp(cut) times its value at t = 0."""
    n = len(params)
    decay = n * math.pi / 2 - abs(theta)
    ref = float(_log_gamma_sum(params, np.array([c + 0j])).real[0])
    T = 2.0
    while True:
        v = float(_log_gamma_sum(params, np.array([c + 1j * T])).real[0]) + T * abs(theta)
        if v - ref < cut and T > 4:
            return int(math.ceil(T)) + 1
        T = T * 1.25 + 1.0 / max(decay, 1e-3)
        if T > 1e5:
            raise SteenDomainError("Mellin-Barnes truncation height exceeds cap")


def mellin_barnes(z: complex, params: Sequence[float], tol: float = 1e-14) -> SeriesValue:
    """V(z | params) by quadrature on a vertical line."""
    params = tuple(float(a) for a in params)
    n = len(params)
    z = complex(z)
    if z == 0:
        raise SteenDomainError("z must be nonzero")
    if min(params) < 0:
        raise SteenDomainError("quadrature path supports nonnegative shifts only")
    lz = complex(np.log(z))
    theta = lz.imag
    if abs(theta) >= n * math.pi / 2 - 0.1 + 1e-12:
        raise SteenDomainError(f"|arg z| must be below {n}*pi/2 - 0.1")
    c = _abscissa(params, lz.real)
    cut = math.log(0.01 * tol)
    T = _truncation_height(params, c, lz.real, theta, cut)
    t, w, S = _grid(params, c, T)
    logmag = S.real - c * lz.real + t * theta
    keep = np.abs(t) <= T
    t, w, S, logmag = t[keep], w[keep], S[keep], logmag[keep]
    peak = logmag.max()
    phase = S.imag - c * theta - t * lz.real
    vals = np.exp(logmag - peak + 1j * phase)
    total = np.dot(w, vals) / (2 * math.pi)
    scale = math.exp(peak)
    absint = float(np.dot(w, np.abs(vals))) / (2 * math.pi)
    edge = math.exp(max(logmag[0], logmag[-1]) - peak)
    err = scale * (absint * 1e-15 * math.sqrt(len(t)) + edge * 10)
    return SeriesValue(complex(total * scale), err, len(t))


# ---------------------------------------------------------------------------
# public evaluators
# ---------------------------------------------------------------------------


def steen_v(z: complex, p: SteenParams, tol: float = 1e-14) -> SeriesValue:
    """V(z | p) by closed form (n <= 2) or Mellin-Barnes quadrature (n >= 3)."""
    z = complex(z)
    n = p.n
    theta = math.atan2(z.imag, z.real)
    if abs(theta) >= n * math.pi / 2 - 0.1 + 1e-12:
        raise SteenDomainError(f"|arg z| must be below {n}*pi/2 - 0.1")
    if n == 1:
        a = p.params[0]
        val = np.exp(-z) if a == 0 else z**a * np.exp(-z)
        return SeriesValue(complex(val), 1e-16 * abs(val), 1)
    if n == 2:
        a, b = p.params
        u = 2 * np.sqrt(z)
        if a == b:
            k = complex(k0_vec(np.array([u]))[0])
        else:
            k = complex(kv(a - b, u))
        val = 2 * z ** ((a + b) / 2) * k
        return SeriesValue(complex(val), 1e-15 * abs(val), 1)
    return mellin_barnes(z, p.params, tol)


def steen_zero_vec(z: np.ndarray, d: int, tol: float = 1e-14) -> tuple:
    """V(z | 0,...,0) on an array; returns (values, error estimates)."""
    z = np.asarray(z, dtype=complex)
    if d == 1:
        v = np.exp(-z)
        return v, 1e-16 * np.abs(v)
    if d == 2:
        v = 2 * k0_vec(2 * np.sqrt(z))
        return v, 1e-15 * np.abs(v)
    vals = np.empty_like(z)
    errs = np.empty(z.shape)
    params = (0.0,) * d
    for i, zz in enumerate(z):
        sv = mellin_barnes(zz, params, tol)
        vals[i], errs[i] = sv.value, sv.err_estimate
    return vals, errs


def steen_v_closed_vs_quadrature(z: complex, d: int, tol: float = 1e-8) -> CheckReport:
    """Compare the closed form of V(z | 0_d) with the generic quadrature, d in {1, 2}."""
    if d not in (1, 2):
        raise ValueError("closed forms exist for d = 1 and d = 2 only")
    z = complex(z)
    closed = steen_v(z, SteenParams.zeros(d)).value
    quad = mellin_barnes(z, (0.0,) * d).value
    return CheckReport(
        id=f"steen_closed:d={d},z={z}",
        lhs=closed,
        rhs=quad,
        tol=tol,
        params={"d": d, "z": [z.real, z.imag]},
        notes="closed form vs Mellin-Barnes",
    )
