import cmath
import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, strategies as st

import oracles
from drlab.steen import (
    K0_ASYMPTOTIC_MIN,
    K0_SERIES_MAX,
    SteenDomainError,
    SteenParams,
    _k0_asymptotic,
    _k0_quadrature,
    _k0_series,
    bessel_k0,
    mellin_barnes,
    steen_v,
    steen_v_closed_vs_quadrature,
    steen_zero_vec,
)

Z_GRID = [1, 0.3, 2 + 1j, 0.5 - 0.5j, 4, 0.2 + 1j, 1.2 - 1.5j, 3 - 2j, 7.5 + 0.1j, 0.05 + 0.2j]


def _rel(a, b):
    return abs(a - b) / max(abs(b), 1e-300)


# ---------------------------------------------------------------------------
# K0
# ---------------------------------------------------------------------------


@pytest.mark.parametrize(
    "z,val",
    [
        (1, 0.42102443824070833),
        (2 + 3j, -0.082968526567625515 + 0.027949603635183424j),
        (30 - 10j, -1.5415895991408644e-14 - 1.3932120176297873e-14j),
    ],
)
def test_k0_frozen(z, val):
    assert _rel(bessel_k0(z), val) < 1e-13


@given(st.floats(0.01, 200), st.floats(-1.45, 1.45))
def test_k0_vs_mpmath(r, theta):
    z = cmath.rect(r, theta)
    ref = oracles.bessel_k0(z)
    assert _rel(bessel_k0(z), ref) < 1e-12


@pytest.mark.parametrize("z", [0, -1, 1j * 3, 1e-7, 800])
def test_k0_domain(z):
    with pytest.raises(SteenDomainError):
        bessel_k0(z)


@pytest.mark.parametrize("theta", [-1.2, -0.4, 0.0, 0.7, 1.3])
def test_k0_branches_agree_near_crossovers(theta):
    for r in (K0_SERIES_MAX * 0.9, K0_SERIES_MAX * 1.1):
        z = np.array([cmath.rect(r, theta)])
        a, b = _k0_series(z)[0], _k0_quadrature(z)[0]
        assert _rel(a, b) < 1e-12
    for r in (K0_ASYMPTOTIC_MIN * 0.9, K0_ASYMPTOTIC_MIN * 1.1):
        z = np.array([cmath.rect(r, theta)])
        a, b = _k0_quadrature(z)[0], _k0_asymptotic(z)[0]
        assert _rel(a, b) < 1e-12


@given(st.floats(0.05, 100), st.floats(0.0, 1.5))
def test_k0_conjugate_symmetry(r, theta):
    z = cmath.rect(r, theta)
    assert abs(bessel_k0(z.conjugate()) - bessel_k0(z).conjugate()) <= 1e-14 * abs(bessel_k0(z))


def test_k0_decay_and_vector():
    xs = np.array([1.0, 5.0, 20.0, 100.0, 500.0])
    v = bessel_k0(xs).real
    assert np.all(np.diff(v) < 0)
    bound = np.sqrt(np.pi / (2 * xs)) * np.exp(-xs)
    assert np.all(v <= bound)


def test_k0_mellin_moment():
    # int_0^inf x^{s-1} K0(x) dx = 2^{s-2} Gamma(s/2)^2, here s = 2 gives 1
    x = np.linspace(1e-6, 40, 40001)
    f = x * bessel_k0(x).real
    val = np.trapezoid(f, x) if hasattr(np, "trapezoid") else np.trapz(f, x)
    assert abs(val - 1.0) < 1e-5


# ---------------------------------------------------------------------------
# Steen function
# ---------------------------------------------------------------------------


@pytest.mark.parametrize("z", Z_GRID)
def test_closed_forms(z):
    assert _rel(steen_v(z, SteenParams.zeros(1)).value, cmath.exp(-z)) < 1e-15
    assert _rel(steen_v(z, SteenParams.zeros(2)).value, 2 * oracles.bessel_k0(2 * cmath.sqrt(z))) < 1e-12


def test_closed_form_shifts():
    z = 1.5 + 0.5j
    assert _rel(steen_v(z, SteenParams((1.5,))).value, z**1.5 * cmath.exp(-z)) < 1e-14
    a, b = 1.0, 0.25
    ref = complex(2 * mp.power(z, (a + b) / 2) * mp.besselk(a - b, 2 * mp.sqrt(z)))
    assert _rel(steen_v(z, SteenParams((a, b))).value, ref) < 1e-12


@pytest.mark.parametrize("z", Z_GRID)
@pytest.mark.parametrize("d", [1, 2])
def test_closed_vs_mellin_barnes(z, d):
    rep = steen_v_closed_vs_quadrature(z, d)
    assert rep.rel_err <= 1e-8, rep.summary_line()


def test_mellin_barnes_near_sector_edge():
    z = cmath.rect(1.5, 0.9 * math.pi)
    rep = steen_v_closed_vs_quadrature(z, 2)
    assert rep.rel_err <= 1e-8


@pytest.mark.parametrize("z", [1, 2 + 1j])
def test_d3_vs_iterated_integral(z):
    ref = oracles.steen3_iterated(z)
    assert _rel(steen_v(z, SteenParams.zeros(3)).value, ref) <= 1e-6


@pytest.mark.parametrize(
    "z,val",
    [(1, 0.16404160674837607), (2 + 1j, 0.039103997347484383 - 0.036277732152855354j), (50, 1.5166695998541808e-5)],
)
def test_d3_frozen(z, val):
    assert _rel(steen_v(z, SteenParams.zeros(3)).value, val) < 1e-11


@given(st.floats(0.1, 300), st.floats(-2.0, 2.0))
def test_d3_vs_meijer(r, theta):
    z = cmath.rect(r, theta)
    ref = oracles.steen3_meijer(z)
    assert _rel(mellin_barnes(z, (0.0, 0.0, 0.0)).value, ref) < 1e-10


def test_d4_vs_meijer():
    for z in (0.7, 3 + 2j, 40j):
        ref = complex(mp.meijerg([[], []], [[0, 0, 0, 0], []], z))
        assert _rel(mellin_barnes(z, (0.0,) * 4).value, ref) < 1e-10


def test_shifted_params_vs_meijer():
    z = 2.5 - 1j
    ref = complex(mp.meijerg([[], []], [[0.5, 1, 0], []], z))
    assert _rel(steen_v(z, SteenParams((0.5, 1, 0))).value, ref) < 1e-10


def test_steen_zero_vec_matches_scalar():
    zs = np.array([1.0, 2 + 1j, 50.0])
    vals, errs = steen_zero_vec(zs, 3)
    for z, v, e in zip(zs, vals, errs):
        assert v == steen_v(z, SteenParams.zeros(3)).value
        assert e >= 0


def test_steen_domain():
    with pytest.raises(SteenDomainError):
        steen_v(-1 + 0.01j, SteenParams.zeros(1))
    with pytest.raises(SteenDomainError):
        mellin_barnes(0, (0.0, 0.0, 0.0))
    with pytest.raises(SteenDomainError):
        mellin_barnes(1, (-0.5, 0.0, 0.0))
    with pytest.raises(ValueError):
        SteenParams(())
    with pytest.raises(ValueError):
        steen_v_closed_vs_quadrature(1, 3)


@pytest.mark.parametrize("d", [1, 2, 3])
def test_mellin_consistency(d):
    # int_0^inf V(x | 0_d) x dx = Gamma(2)^d = 1
    from scipy import integrate

    f = lambda x: x * steen_v(x, SteenParams.zeros(d)).value.real
    val = integrate.quad(f, 0, 1, limit=200)[0] + integrate.quad(f, 1, np.inf, limit=200)[0]
    assert abs(val - 1.0) < 1e-5


@pytest.mark.parametrize("d", [1, 2, 3])
def test_decay_on_log_grid(d):
    xs = np.logspace(-2, 2, 25)
    v = [steen_v(x, SteenParams.zeros(d)).value.real for x in xs]
    assert np.all(np.diff(v) < 0)


@given(st.floats(0.05, 50), st.floats(0.0, 2.0))
def test_d3_conjugate_symmetry(r, theta):
    z = cmath.rect(r, theta)
    a = steen_v(z, SteenParams.zeros(3)).value
    b = steen_v(z.conjugate(), SteenParams.zeros(3)).value
    assert abs(a.conjugate() - b) <= 1e-12 * abs(a)
