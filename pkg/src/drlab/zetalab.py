"""Analytic engine: Gamma, Hurwitz/Riemann zeta, Dirichlet L, Dedekind zeta.

Everything below is vectorised over arrays of ``s`` because the contour
quadratures evaluate the same function at dozens of nodes at once.  The
public scalar wrappers accept a single complex number and return one.

Continuation strategy:

* ``Re s >= -1/2``: direct sum plus an Euler-Maclaurin tail.
* ``Re s < -1/2``: Hurwitz's reflection formula, which expresses the value
  through Hurwitz zeta values at ``1 - s`` where the Euler-Maclaurin sum is
  well conditioned.  Euler-Maclaurin alone loses most of its digits to
  cancellation once ``Re s`` drops below about -3.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import numpy as np

from .fieldarith import CharacterTable, Field, bernoulli
from .report import CheckReport, SeriesValue

EULER_GAMMA = 0.577215664901532860606512090082
LOG_2PI = math.log(2 * math.pi)
REFLECT_BELOW = -0.5


class ZetaDomainError(ValueError):
    """Evaluation requested at a pole or outside the supported region."""


@dataclass(frozen=True)
class EvalOptions:
    em_terms: Optional[int] = None
    em_corrections: int = 12
    circle_radius: float = 0.5
    circle_nodes: int = 64
    target_tol: float = 1e-12

    def __post_init__(self):
        if self.em_terms is not None and self.em_terms < 1:
            raise ValueError("em_terms must be positive")
        if self.em_corrections < 1 or self.circle_nodes < 4:
            raise ValueError("em_corrections and circle_nodes must be positive")
        if not 0 < self.circle_radius <= 0.5:
            raise ValueError("circle_radius must lie in (0, 0.5]")


DEFAULT_OPTS = EvalOptions()

# ---------------------------------------------------------------------------
# Gamma
# ---------------------------------------------------------------------------

_STIRLING = [float(bernoulli(2 * k)) / (2 * k * (2 * k - 1)) for k in range(1, 12)]
_GAMMA_SHIFT = 15.0


def _loggamma_right(s: np.ndarray) -> np.ndarray:
    # shift to Re >= 15, then Stirling; valid for Re s >= 0.5
    m = np.maximum(0, np.ceil(_GAMMA_SHIFT - s.real)).astype(int)
    prod = np.ones_like(s)
    log_prod = np.zeros_like(s)
    for k in range(int(m.max()) if m.size else 0):
        prod = np.where(k < m, prod * (s + k), prod)
        if k % 8 == 7:
            log_prod += np.log(prod)
            prod = np.ones_like(s)
    log_prod += np.log(prod)
    w = s + m
    inv = 1.0 / w
    inv2 = inv * inv
    corr = np.zeros_like(s)
    p = inv
    for c in _STIRLING:
        corr += c * p
        p = p * inv2
    return (w - 0.5) * np.log(w) - w + 0.5 * LOG_2PI + corr - log_prod


def _as_array(s) -> np.ndarray:
    return np.atleast_1d(np.asarray(s, dtype=complex))


def _check_gamma_poles(s: np.ndarray) -> None:
    bad = (s.imag == 0) & (s.real <= 0) & (s.real == np.round(s.real))
    if np.any(bad):
        raise ZetaDomainError(f"Gamma has a pole at s={s[bad][0].real:g}")


def loggamma(s):
    """A logarithm of Gamma(s) (not necessarily the principal branch left of 1/2)."""
    arr = _as_array(s)
    _check_gamma_poles(arr)
    out = np.empty_like(arr)
    right = arr.real >= 0.5
    out[right] = _loggamma_right(arr[right])
    left = arr[~right]
    out[~right] = math.log(math.pi) - np.log(np.sin(np.pi * left)) - _loggamma_right(1 - left)
    return out if np.ndim(s) else complex(out[0])


def gamma_vec(s: np.ndarray) -> np.ndarray:
    _check_gamma_poles(s)
    out = np.empty_like(s)
    right = s.real >= 0.5
    out[right] = np.exp(_loggamma_right(s[right]))
    left = s[~right]
    out[~right] = np.pi / (np.sin(np.pi * left) * np.exp(_loggamma_right(1 - left)))
    return out


def gamma_fn(s):
    """Gamma(s) by shifted Stirling series and the reflection formula."""
    out = gamma_vec(_as_array(s))
    return out if np.ndim(s) else complex(out[0])


# ---------------------------------------------------------------------------
# Euler-Maclaurin machinery
# ---------------------------------------------------------------------------

_EM_COEF = [float(bernoulli(2 * j) / math.factorial(2 * j)) for j in range(1, 40)]


def _em_count(s: np.ndarray, opts: EvalOptions) -> int:
    if opts.em_terms is not None:
        return opts.em_terms
    return 20 + int(math.ceil(1.3 * float(np.max(np.abs(s.imag), initial=0.0))))


def _em_tail(s: np.ndarray, x: float, M: int, pole: bool = True):
    """Euler-Maclaurin expansion of sum_{m>=0} (x+m)^-s; returns (value, last correction)."""
    lx = math.log(x)
    t = 0.5 * np.exp(-s * lx)
    if pole:
        t = t + np.exp((1 - s) * lx) / (s - 1)
    poch = s.copy()
    xp = np.exp(-(s + 1) * lx)
    last = np.zeros(s.shape)
    for j in range(M):
        term = _EM_COEF[j] * poch * xp
        t = t + term
        last = np.abs(term)
        poch = poch * (s + 2 * j + 1) * (s + 2 * j + 2)
        xp = xp / (x * x)
    return t, last


def _phi(w: np.ndarray) -> np.ndarray:
    """(e^w - 1)/w without cancellation near w = 0."""
    out = np.empty_like(w)
    small = np.abs(w) < 0.5
    ws = w[small]
    acc = np.zeros_like(ws)
    term = np.ones_like(ws)
    for k in range(1, 25):
        acc += term
        term = term * ws / (k + 1)
    out[small] = acc
    wl = w[~small]
    out[~small] = np.expm1(wl) / wl
    return out


def _hurwitz_em(s: np.ndarray, a: float, opts: EvalOptions):
    N = _em_count(s, opts)
    n = np.arange(N) + a
    head = np.exp(-np.outer(s, np.log(n))).sum(axis=1)
    tail, err = _em_tail(s, N + a, opts.em_corrections)
    return head + tail, err + 1e-16 * np.abs(head)


def _rational(a: float) -> Fraction:
    fr = Fraction(a).limit_denominator(10**4)
    if abs(float(fr) - a) > 1e-15:
        raise ZetaDomainError(f"reflection needs a rational shift, got a={a!r}")
    return fr


def _hurwitz_reflect(w: np.ndarray, a: float, opts: EvalOptions):
    """zeta(w, h/k) for Re w < -1/2 from Hurwitz's formula at s = 1 - w."""
    fr = _rational(a)
    h, k = fr.numerator, fr.denominator
    s = 1 - w
    acc = np.zeros_like(s)
    err = np.zeros(s.shape)
    for r in range(1, k + 1):
        z, e = _hurwitz_em(s, r / k, opts)
        c = np.cos(np.pi * s / 2 - 2 * np.pi * r * h / k)
        acc += c * z
        err += np.abs(c) * e
    pref = 2 * gamma_vec(s) * np.exp(-s * math.log(2 * np.pi * k))
    return pref * acc, np.abs(pref) * err


def hurwitz_vec(s: np.ndarray, a: float, opts: EvalOptions = DEFAULT_OPTS):
    if not 0 < a <= 1:
        raise ZetaDomainError("Hurwitz shift must lie in (0, 1]")
    if np.any(s == 1):
        raise ZetaDomainError("Hurwitz zeta has a pole at s=1")
    val = np.empty_like(s)
    err = np.empty(s.shape)
    right = s.real >= REFLECT_BELOW
    if np.any(right):
        val[right], err[right] = _hurwitz_em(s[right], a, opts)
    if np.any(~right):
        val[~right], err[~right] = _hurwitz_reflect(s[~right], a, opts)
    return val, err


def hurwitz_zeta(s: complex, a: float, opts: EvalOptions = DEFAULT_OPTS) -> complex:
    """zeta(s, a) for 0 < a <= 1, s != 1."""
    return complex(hurwitz_vec(_as_array(s), float(a), opts)[0][0])


def riemann_vec(s: np.ndarray, opts: EvalOptions = DEFAULT_OPTS):
    return hurwitz_vec(s, 1.0, opts)


def riemann_zeta(s: complex, opts: EvalOptions = DEFAULT_OPTS) -> complex:
    return complex(riemann_vec(_as_array(s), opts)[0][0])


def _l_em(chi: CharacterTable, s: np.ndarray, opts: EvalOptions):
    q = chi.modulus
    N = _em_count(s, opts)
    n = np.arange(1, N * q + 1)
    c = chi.values[n % q]
    nz = c != 0
    head = (np.exp(-np.outer(s, np.log(n[nz]))) * c[nz]).sum(axis=1)
    tail = np.zeros_like(s)
    err = 1e-16 * np.abs(head)
    for a in range(1, q + 1):
        ca = chi.values[a % q]
        if ca == 0:
            continue
        x = N + a / q
        t, e = _em_tail(s, x, opts.em_corrections, pole=False)
        scale = np.exp(-s * math.log(q))
        tail += ca * scale * t
        err += np.abs(scale) * e
        # the x^(1-s)/(s-1) pieces cancel in total because sum chi(a) = 0;
        # keep only (X^(1-s) - 1)/(q(s-1)) with X = Nq + a
        lX = math.log(N * q + a)
        tail += ca * (-lX) * _phi((1 - s) * lX) / q
    return head + tail, err


def _l_reflect(chi: CharacterTable, w: np.ndarray, opts: EvalOptions):
    q = chi.modulus
    s = 1 - w
    a = np.arange(q)
    acc = np.zeros_like(s)
    err = np.zeros(s.shape)
    cos_s, sin_s = np.cos(np.pi * s / 2), np.sin(np.pi * s / 2)
    for j in range(1, q + 1):
        C = complex(np.sum(chi.values * np.cos(2 * np.pi * j * a / q)))
        S = complex(np.sum(chi.values * np.sin(2 * np.pi * j * a / q)))
        if abs(C) < 1e-13 and abs(S) < 1e-13:
            continue
        z, e = _hurwitz_em(s, j / q, opts)
        cj = cos_s * C + sin_s * S
        acc += cj * z
        err += np.abs(cj) * e
    pref = 2 * gamma_vec(s) * np.exp((s - 1) * math.log(q) - s * math.log(2 * np.pi * q))
    return pref * acc, np.abs(pref) * err


def dirichlet_vec(chi: CharacterTable, s: np.ndarray, opts: EvalOptions = DEFAULT_OPTS):
    if chi.is_principal:
        # L(s, chi_0) = zeta(s) prod_{p | q} (1 - p^-s)
        val, err = riemann_vec(s, opts)
        q = chi.modulus
        p = 2
        while q > 1:
            if q % p == 0:
                f = 1 - np.exp(-s * math.log(p))
                val, err = val * f, err * np.abs(f)
                while q % p == 0:
                    q //= p
            p += 1
        return val, err
    val = np.empty_like(s)
    err = np.empty(s.shape)
    right = s.real >= REFLECT_BELOW
    if np.any(right):
        val[right], err[right] = _l_em(chi, s[right], opts)
    if np.any(~right):
        val[~right], err[~right] = _l_reflect(chi, s[~right], opts)
    return val, err


def dirichlet_l(chi: CharacterTable, s: complex, opts: EvalOptions = DEFAULT_OPTS) -> complex:
    return complex(dirichlet_vec(chi, _as_array(s), opts)[0][0])


# ---------------------------------------------------------------------------
# Dedekind zeta
# ---------------------------------------------------------------------------


def dedekind_vec(field: Field, s: np.ndarray, opts: EvalOptions = DEFAULT_OPTS):
    val, err = riemann_vec(s, opts)
    rel = err / np.maximum(np.abs(val), 1e-300)
    for chi in field.factors:
        v, e = dirichlet_vec(chi, s, opts)
        val = val * v
        rel = rel + e / np.maximum(np.abs(v), 1e-300)
    return val, rel * np.abs(val)


def dedekind_zeta_value(field: Field, s: complex, opts: EvalOptions = DEFAULT_OPTS) -> SeriesValue:
    arr = _as_array(s)
    if arr[0] == 1:
        raise ZetaDomainError("Dedekind zeta has a pole at s=1")
    val, err = dedekind_vec(field, arr, opts)
    return SeriesValue(complex(val[0]), float(err[0]), _em_count(arr, opts))


def dedekind_zeta(field: Field, s: complex, opts: EvalOptions = DEFAULT_OPTS) -> complex:
    """zeta_F(s) = zeta(s) prod_i L(s, chi_i)."""
    return dedekind_zeta_value(field, s, opts).value


def circle_derivative(f, s0: complex, order: int, radius: float, nodes: int) -> complex:
    """f^(order)(s0) by the trapezoid rule on |s - s0| = radius; ``f`` takes an array."""
    theta = 2 * np.pi * np.arange(nodes) / nodes
    e = np.exp(1j * theta)
    vals = f(s0 + radius * e)
    coef = np.mean(vals * e ** (-order))
    return complex(coef * math.factorial(order) / radius**order)


def dedekind_zeta_deriv(
    field: Field, s0: complex, order: int, opts: EvalOptions = DEFAULT_OPTS
) -> complex:
    """order-th derivative of zeta_F at s0 by circle quadrature."""
    if order < 0:
        raise ValueError("order must be nonnegative")
    s0 = complex(s0)
    r = opts.circle_radius
    if abs(s0 - 1) <= r * 1.02:
        raise ZetaDomainError("derivative circle touches the pole at s=1")
    if order == 0:
        return dedekind_zeta(field, s0, opts)
    return circle_derivative(
        lambda s: dedekind_vec(field, s, opts)[0], s0, order, r, opts.circle_nodes
    )


@dataclass(frozen=True)
class ZetaConstants:
    H_F: float
    gamma_F: float
    C_F: float
    a1: float
    A: float


def zeta_constants(field: Field, opts: EvalOptions = DEFAULT_OPTS) -> ZetaConstants:
    """Residue and Laurent constants of zeta_F at s = 1 and s = 0 (cached per field)."""
    key = ("zeta_constants", opts)
    cached = field._cache.get(key)
    if cached is not None:
        return cached
    H = 1.0 + 0j
    for chi in field.factors:
        H *= dirichlet_l(chi, 1.0, opts)

    def regular(s):
        return (s - 1) * dedekind_vec(field, s, opts)[0]

    gamma_F = circle_derivative(regular, 1.0, 1, opts.circle_radius, opts.circle_nodes)
    r = field.r
    zf = lambda s: dedekind_vec(field, s, opts)[0]
    if r == 0:
        C = dedekind_zeta(field, 0.0, opts)
    else:
        C = circle_derivative(zf, 0.0, r, opts.circle_radius, opts.circle_nodes) / math.factorial(r)
    a1 = circle_derivative(zf, 0.0, r + 1, opts.circle_radius, opts.circle_nodes) / math.factorial(r + 1)
    A = math.sqrt(field.D) / (2**field.r1 * (2 * math.pi) ** field.r2)
    out = ZetaConstants(H.real, gamma_F.real, C.real, a1.real, A)
    field._cache[key] = out
    return out


# ---------------------------------------------------------------------------
# completed functions
# ---------------------------------------------------------------------------


def lambda_vec(field: Field, k: int, s: np.ndarray, opts: EvalOptions = DEFAULT_OPTS) -> np.ndarray:
    d = field.d
    g = gamma_vec(s) ** d
    z1 = dedekind_vec(field, s, opts)[0]
    z2 = dedekind_vec(field, s + 2 * k + 1, opts)[0]
    scale = np.exp(-s * (d * LOG_2PI - math.log(field.D)))
    return g * z1 * z2 * scale


def lambda_completed(field: Field, k: int, s: complex, opts: EvalOptions = DEFAULT_OPTS) -> complex:
    """Gamma(s)^d zeta_F(s) zeta_F(s+2k+1) ((2 pi)^d / D)^-s."""
    if k == 0:
        raise ValueError("k must be nonzero")
    s = complex(s)
    if s == 1 or s + 2 * k + 1 == 1:
        raise ZetaDomainError("Dedekind zeta pole hit")
    return complex(lambda_vec(field, k, _as_array(s), opts)[0])


def omega_completed(field: Field, s: np.ndarray, opts: EvalOptions = DEFAULT_OPTS) -> np.ndarray:
    d, r1, r2 = field.d, field.r1, field.r2
    base = math.log(field.D / (math.pi**d * 4**r2))
    out = np.exp(s / 2 * base) * dedekind_vec(field, s, opts)[0]
    if r1:
        out = out * gamma_vec(s / 2) ** r1
    if r2:
        out = out * gamma_vec(s) ** r2
    return out


def check_functional_equation(
    field: Field, s: complex, tol: float = 1e-9, opts: EvalOptions = DEFAULT_OPTS
) -> CheckReport:
    """Compare the completed zeta function at s and 1 - s."""
    s = complex(s)
    lhs = complex(omega_completed(field, _as_array(s), opts)[0])
    rhs = complex(omega_completed(field, _as_array(1 - s), opts)[0])
    rep = CheckReport(
        id=f"functional_equation:field={field.name},s={s}",
        lhs=lhs,
        rhs=rhs,
        tol=tol,
        params={"field": field.name, "s": [s.real, s.imag]},
    )
    # the reported error is scaled by max(|lhs|, 1)
    rep.rel_err = rep.abs_err / max(abs(lhs), 1.0)
    rep.passed = rep.rel_err <= tol
    return rep
