"""Series and residue objects: the Steen series, Lambert series and contour residues."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .fieldarith import Field, FieldSpec, make_field, sigma_array
from .report import SeriesValue
from .steen import k0_vec, steen_zero_vec
from .zetalab import (
    DEFAULT_OPTS,
    EvalOptions,
    ZetaDomainError,
    dedekind_zeta,
    dedekind_zeta_deriv,
    lambda_vec,
    zeta_constants,
)

IM_Z_FLOOR = 0.05
TERM_CAP = 10**6
RESIDUE_RADIUS = 0.25
RESIDUE_NODES = 128


class SeriesCapError(RuntimeError):
    """Truncation cap reached before the series converged."""


def _check_upper(z: complex) -> complex:
    z = complex(z)
    if z.imag < IM_Z_FLOOR:
        raise ZetaDomainError(f"need Im z >= {IM_Z_FLOOR}, got {z}")
    return z


# ---------------------------------------------------------------------------
# series
# ---------------------------------------------------------------------------


def _sum_blocks(term_block, growth: float, tol: float, start: int = 64) -> SeriesValue:
    """Sum terms delivered in blocks until 5 consecutive bounds fall below tol*|sum|.

    ``term_block(lo, hi)`` returns (terms, bounds, roundoff) for n in [lo, hi).
    """
    total = 0j
    abs_total = 0.0
    err_total = 0.0
    lo, hi = 1, start + 1
    last_bounds = []
    while True:
        if lo > TERM_CAP:
            raise SeriesCapError(f"series did not converge within {TERM_CAP} terms")
        hi = min(hi, TERM_CAP + 1)
        terms, bounds, err = term_block(lo, hi)
        for i, (t, b) in enumerate(zip(terms, bounds)):
            n = lo + i
            total += t
            abs_total += abs(t)
            err_total += err[i]
            last_bounds.append(b)
            if n >= 10 and len(last_bounds) >= 5:
                recent = last_bounds[-5:]
                if max(recent) < tol * max(abs(total), 1e-300):
                    ratio = min(0.99, recent[-1] / max(recent[-2], 1e-300))
                    tail = recent[-1] * ratio / (1 - ratio)
                    est = tail + 1e-16 * abs_total + err_total
                    return SeriesValue(complex(total), float(est), n)
        lo, hi = hi, hi + int((hi - lo) * growth)


def f_series(field: Field, k: int, z: complex, opts: EvalOptions = DEFAULT_OPTS) -> SeriesValue:
    """sum_n sigma_{F,-k}(n) V(-(2 pi)^d n i z / D | 0_d)."""
    z = _check_upper(z)
    d = field.d
    if d > 4:
        raise ZetaDomainError("Steen series supported for degree <= 4")
    x = -((2 * math.pi) ** d) * 1j * z / field.D
    ell = -k
    growth_exp = max(0.0, float(ell))
    tol = opts.target_tol

    def block(lo, hi):
        sig = sigma_array(field, ell, hi - 1)[lo:hi]
        n = np.arange(lo, hi, dtype=float)
        v, verr = steen_zero_vec(n * x, d)
        terms = sig * v
        # divisor-sum envelope so that vanishing coefficients do not stop the sum early
        env = np.maximum(np.abs(sig), n**growth_exp)
        return terms, env * np.abs(v), np.abs(sig) * verr

    start = 64 if d <= 2 else 256
    return _sum_blocks(block, 1.0, tol, start)


def lambert_f(k: int, z: complex, tol: float = 1e-15) -> SeriesValue:
    """F_k(z) = sum sigma_{-k}(n) e^{2 pi i n z}, summed as sum_d d^-k q^d / (1 - q^d)."""
    z = complex(z)
    if z.imag <= 0:
        raise ZetaDomainError("lambert_f needs Im z > 0")
    q = np.exp(2j * np.pi * z)

    def block(lo, hi):
        n = np.arange(lo, hi, dtype=float)
        qn = np.exp(2j * np.pi * z * n)
        terms = n ** (-float(k)) * qn / (1 - qn)
        return terms, np.abs(terms) * (1 + n ** max(0.0, float(-k))), 1e-16 * np.abs(terms)

    return _sum_blocks(block, 1.0, tol, 32)


def k0_kernel_series(field: Field, ell: int, z: complex, tol: float = 1e-12) -> SeriesValue:
    """sum sigma_{F,ell}(n) K0(2 pi sqrt(n z / m) e^{-i pi/4}) for a quadratic field, m = D/4.

    This is the Bessel form of the degree-two Steen series, evaluated directly
    from the kernel rather than through the Steen-function layer.
    """
    if not field.is_quadratic:
        raise ZetaDomainError("K0 kernel series needs a quadratic field")
    z = _check_upper(z)
    m_eff = field.D / 4
    root = np.sqrt(z) * np.exp(-0.25j * np.pi)

    def block(lo, hi):
        sig = sigma_array(field, ell, hi - 1)[lo:hi]
        n = np.arange(lo, hi, dtype=float)
        kv = k0_vec(2 * np.pi * np.sqrt(n / m_eff) * root)
        env = np.maximum(np.abs(sig), n ** max(0.0, float(ell)))
        return sig * kv, env * np.abs(kv), 1e-15 * np.abs(sig * kv)

    return _sum_blocks(block, 1.0, tol, 64)


# ---------------------------------------------------------------------------
# residues
# ---------------------------------------------------------------------------


def pole_plan(field: Field, k: int) -> list:
    """(location, order) pairs for the poles of Lambda_{F,k}(s) y^-s."""
    r1, r2 = field.r1, field.r2
    if k == 0:
        return [(1, 1), (0, r2 + 2), (-1, 1)]
    if k < 0:
        return [(1, 1), (0, 1), (-2 * k, 1)]
    plan = [(1, 1), (0, r2 + 1)]
    for j in range(1, k + 1):
        plan.append((-(2 * j - 1), r1 + r2))
        if j < k and r2 > 0:
            plan.append((-2 * j, r2))
    plan += [(-2 * k, r2 + 1), (-2 * k - 1, 1)]
    return sorted(set(plan), key=lambda p: -p[0])


@dataclass(frozen=True)
class ResidueTerm:
    pole: int
    value: complex
    order_used: int
    err_estimate: float = 0.0


def residue_term(
    field: Field,
    k: int,
    pole: int,
    z: complex,
    opts: EvalOptions = DEFAULT_OPTS,
    nodes: int = RESIDUE_NODES,
    radius: float = RESIDUE_RADIUS,
) -> ResidueTerm:
    """(1/2 pi i) contour integral of Lambda_{F,k}(s) (-iz)^-s around ``pole``.

    The integrand is sampled at 2*nodes points; the even-indexed subset gives
    the ``nodes``-point rule, and the difference serves as the error estimate.
    """
    plan = dict(pole_plan(field, k))
    if pole not in plan:
        raise ZetaDomainError(f"s={pole} is not a pole of Lambda for k={k}")
    z = complex(z)
    log_y = np.log(-1j * z)
    if abs(log_y.imag) >= math.pi / 2:
        raise ZetaDomainError("need -iz in the open right half-plane")
    M = 2 * nodes
    theta = 2 * np.pi * np.arange(M) / M
    e = np.exp(1j * theta)
    s = pole + radius * e
    f = lambda_vec(field, k, s, opts) * np.exp(-s * log_y) * e * radius
    fine = complex(f.mean())
    coarse = complex(f[::2].mean())
    return ResidueTerm(pole, fine, plan[pole], abs(fine - coarse))


# ---------------------------------------------------------------------------
# composite objects
# ---------------------------------------------------------------------------


def r1_closed(field: Field, k: int, z: complex, opts: EvalOptions = DEFAULT_OPTS) -> complex:
    """Residue at s = 1: H_F zeta_F(2k+2) i D / ((2 pi)^d z)."""
    c = zeta_constants(field, opts)
    zeta_val = dedekind_zeta(field, 2 * k + 2, opts)
    return c.H_F * zeta_val * 1j * field.D / ((2 * math.pi) ** field.d * complex(z))


def c_term(field: Field, k: int, opts: EvalOptions = DEFAULT_OPTS) -> complex:
    """C_F zeta_F^{(r2)}(2k+1) / r2!, the constant subtracted in the k < 0 branch."""
    c = zeta_constants(field, opts)
    r2 = field.r2
    der = dedekind_zeta_deriv(field, 2 * k + 1, r2, opts)
    return c.C_F * der / math.factorial(r2)


def s_function(field: Field, k: int, z: complex, opts: EvalOptions = DEFAULT_OPTS) -> SeriesValue:
    """F_{F,2k+1}(z) - R_0(z) - R_1(z) for k > 0."""
    if k <= 0:
        raise ValueError("s_function needs k > 0")
    series = f_series(field, 2 * k + 1, z, opts)
    r0 = residue_term(field, k, 0, z, opts)
    val = series.value - r0.value - r1_closed(field, k, z, opts)
    return SeriesValue(val, series.err_estimate + r0.err_estimate, series.terms_used)


def u_function(field: Field, k: int, z: complex, opts: EvalOptions = DEFAULT_OPTS) -> SeriesValue:
    """F_{F,2k+1}(z) - C_F zeta_F^{(r2)}(2k+1)/r2! for k < 0."""
    if k >= 0:
        raise ValueError("u_function needs k < 0")
    series = f_series(field, 2 * k + 1, z, opts)
    return SeriesValue(series.value - c_term(field, k, opts), series.err_estimate, series.terms_used)


def t_function(field: Field, z: complex, opts: EvalOptions = DEFAULT_OPTS) -> SeriesValue:
    """F_{F,1}(z) - H_F zeta_F(2) i D / ((2 pi)^d z)."""
    series = f_series(field, 1, z, opts)
    return SeriesValue(series.value - r1_closed(field, 0, z, opts), series.err_estimate, series.terms_used)


def g_eisenstein_quad(m: int, k: int, z: complex, opts: EvalOptions = DEFAULT_OPTS) -> complex:
    """1 - 2/(zeta_F'(0) zeta_F(1-2k)) sum sigma_{F,2k-1}(n) K0(...), F = Q(sqrt m), m > 0."""
    if m <= 1 or k < 1:
        raise ValueError("need squarefree m > 1 and k >= 1")
    field = make_field(FieldSpec.quadratic(m))
    c = zeta_constants(field, opts)
    zeta_neg = dedekind_zeta(field, 1 - 2 * k, opts)
    series = k0_kernel_series(field, 2 * k - 1, z, opts.target_tol)
    return 1 - 2 * series.value / (c.C_F * zeta_neg)
