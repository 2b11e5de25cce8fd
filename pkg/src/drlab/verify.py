"""Identity registry: each transformation formula or exact evaluation becomes a CheckReport.

Identities are addressed by strings of the form ``name:key=value,...``, for
example ``main:field=quad:5,k=1,z=0.4+1.3i``.  Every row knows its parameter
types, validation rules, default tolerance and default parameter grid.
"""

from __future__ import annotations

import fnmatch
import math
import re
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from functools import lru_cache
from importlib import resources
from typing import Callable, Iterable, Optional

import numpy as np

from .fieldarith import (
    Field,
    FieldError,
    _dirichlet_convolve,
    bernoulli,
    field_from_text,
    ideal_counts,
    parse_field_spec,
    ramanujan_poly,
    sigma_array,
)
from .report import CheckReport
from .serieskit import (
    c_term,
    f_series,
    k0_kernel_series,
    lambert_f,
    r1_closed,
    residue_term,
)
from .zetalab import (
    DEFAULT_OPTS,
    EULER_GAMMA,
    EvalOptions,
    ZetaDomainError,
    dedekind_zeta,
    dedekind_zeta_deriv,
    lambda_vec,
    riemann_zeta,
    zeta_constants,
)

DEFAULT_TOL = 1e-8
CLOSED_FORM_TOL = 1e-10
GRID_FIELDS = ("Q", "quad:5", "quad:2", "quad:-1", "quad:-3")
GRID_K = (-3, -2, -1, 1, 2, 3)
GRID_Z = (1j, 0.3 + 1.2j, -0.7 + 0.9j)
LAMBDA_SAMPLES = 10


class IdentityError(ValueError):
    """Malformed identity string or parameters rejected by a registry row."""


# ---------------------------------------------------------------------------
# literals
# ---------------------------------------------------------------------------

_UNIT_I = re.compile(r"(^|[+-])i$")


def parse_complex(text: str) -> complex:
    """Parse ``a+bi``, ``bi``, ``a`` or ``i``; spaces are ignored and ``j`` is accepted for ``i``."""
    t = str(text).replace(" ", "").replace("j", "i")
    if not t:
        raise IdentityError("empty complex literal")
    t = _UNIT_I.sub(lambda m: m.group(1) + "1i", t)
    try:
        return complex(t.replace("i", "j"))
    except ValueError:
        raise IdentityError(f"bad complex literal {text!r}") from None


def format_complex(z: complex) -> str:
    z = complex(z)
    return f"{z.real:.12g}{z.imag:+.12g}i"


def _fmt_real(x: float) -> str:
    return f"{x:.12g}"


def _parse_int(text: str) -> int:
    try:
        return int(text)
    except ValueError:
        raise IdentityError(f"expected an integer, got {text!r}") from None


def _parse_real(text: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise IdentityError(f"expected a real number, got {text!r}") from None


def _parse_field(text: str) -> str:
    try:
        return str(parse_field_spec(text))
    except FieldError as exc:
        raise IdentityError(str(exc)) from None


_KINDS = {
    "field": (_parse_field, str),
    "int": (_parse_int, str),
    "real": (_parse_real, _fmt_real),
    "complex": (parse_complex, format_complex),
}


@lru_cache(maxsize=None)
def _field(text: str) -> Field:
    return field_from_text(text)


def packaged_cubic() -> str:
    """Field string for the bundled cyclic cubic field of conductor 9."""
    return "file:" + str(resources.files("drlab") / "data" / "cubic9.json")


# ---------------------------------------------------------------------------
# registry
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Row:
    name: str
    params: tuple  # ((key, kind), ...)
    source: str
    evaluate: Callable
    validate: Callable
    grid: Callable
    tol: float = DEFAULT_TOL
    diagnostic: bool = False


REGISTRY: dict = {}


def _row(name, params, source, tol=DEFAULT_TOL, diagnostic=False, validate=None, grid=None):
    def wrap(fn):
        REGISTRY[name] = Row(
            name,
            tuple(params),
            source,
            fn,
            validate or (lambda p: None),
            grid or (lambda: []),
            tol,
            diagnostic,
        )
        return fn

    return wrap


@dataclass(frozen=True)
class IdentityId:
    name: str
    params: tuple  # ((key, value), ...) in registry order

    @property
    def row(self) -> Row:
        return REGISTRY[self.name]

    def as_dict(self) -> dict:
        return dict(self.params)

    def __str__(self) -> str:
        kinds = dict(self.row.params)
        parts = [f"{k}={_KINDS[kinds[k]][1](v)}" for k, v in self.params]
        return f"{self.name}:{','.join(parts)}" if parts else self.name

    def json_params(self) -> dict:
        out = {}
        for k, v in self.params:
            out[k] = [v.real, v.imag] if isinstance(v, complex) else v
        return out


def make_identity(name: str, **values) -> IdentityId:
    """Build and validate an IdentityId from already-typed values (strings are parsed)."""
    if name not in REGISTRY:
        raise IdentityError(f"unknown identity {name!r}; known: {', '.join(sorted(REGISTRY))}")
    row = REGISTRY[name]
    kinds = dict(row.params)
    extra = set(values) - set(kinds)
    if extra:
        raise IdentityError(f"{name} takes no parameter(s) {sorted(extra)}")
    missing = [k for k in kinds if k not in values]
    if missing:
        raise IdentityError(f"{name} is missing parameter(s) {missing}")
    typed = []
    for key, kind in row.params:
        v = values[key]
        parse = _KINDS[kind][0]
        if isinstance(v, str):
            v = parse(v)
        elif kind == "complex":
            v = complex(v)
        elif kind == "real":
            v = float(v)
        elif kind == "int":
            if isinstance(v, float) and not v.is_integer():
                raise IdentityError(f"{key} must be an integer")
            v = int(v)
        elif kind == "field":
            v = _parse_field(str(v))
        typed.append((key, v))
    ident = IdentityId(name, tuple(typed))
    row.validate(ident.as_dict())
    return ident


def parse_identity(text: str) -> IdentityId:
    """Parse ``name:key=value,...``.  Values may contain ':' (e.g. ``field=quad:5``)."""
    name, _, rest = text.strip().partition(":")
    values = {}
    if rest:
        for item in rest.split(","):
            key, eq, val = item.partition("=")
            if not eq or not key.strip():
                raise IdentityError(f"bad parameter {item!r} in {text!r}")
            values[key.strip()] = val.strip()
    return make_identity(name.strip(), **values)


# ---------------------------------------------------------------------------
# helpers shared by the rows
# ---------------------------------------------------------------------------


def _need(cond: bool, msg: str) -> None:
    if not cond:
        raise IdentityError(msg)


def _need_upper(z: complex) -> None:
    _need(complex(z).imag >= 0.05, "z must satisfy Im z >= 0.05")


def _sign(field: Field, k: int) -> int:
    return (-1) ** ((k * (field.r1 + 1) + field.r2) % 2)


def _quad_from_m(m: int) -> str:
    return f"quad:{m}"


def _res(field, k, pole, z, opts):
    return residue_term(field, k, pole, z, opts).value


def _s_value(field: Field, k: int, z: complex, opts) -> complex:
    """F_{2k+1}(z) - R_0(z) - R_1(z), residue at 0 by contour."""
    series = f_series(field, 2 * k + 1, z, opts).value
    return series - _res(field, k, 0, z, opts) - r1_closed(field, k, z, opts)


def _negative_residues(field: Field, k: int, z: complex, opts) -> complex:
    total = 0j
    for j in range(1, k + 1):
        total += _res(field, k, -(2 * j - 1), z, opts)
    if field.r2 > 0:
        for j in range(1, k):
            total += _res(field, k, -2 * j, z, opts)
    return total


def _main_pos(field: Field, k: int, z: complex, opts):
    w = -1 / z
    lhs = _s_value(field, k, z, opts)
    rhs = _sign(field, k) * z ** (2 * k) * _s_value(field, k, w, opts) + _negative_residues(field, k, z, opts)
    return lhs, rhs


def _extra_residue_neg(field: Field, k: int, z: complex, opts) -> complex:
    sig = (k, field.r1, field.r2)
    if sig == (-1, 1, 0):
        return -1j / (4 * math.pi * z)
    if sig == (-1, 0, 1):
        c = zeta_constants(field, opts)
        return c.H_F * dedekind_zeta(field, 0.0, opts) * field.D * 1j / ((2 * math.pi) ** 2 * z)
    return 0j


def _main_neg(field: Field, k: int, z: complex, opts):
    c = c_term(field, k, opts)
    u = f_series(field, 2 * k + 1, z, opts).value - c
    u_w = f_series(field, 2 * k + 1, -1 / z, opts).value - c
    return u, _sign(field, k) * z ** (2 * k) * u_w + _extra_residue_neg(field, k, z, opts)


def _grid_fkz(fields, ks, zs=GRID_Z):
    return [dict(field=f, k=k, z=z) for f in fields for k in ks for z in zs]


def _grid_mkz(ms, ks, zs=GRID_Z):
    return [dict(m=m, k=k, z=z) for m in ms for k in ks for z in zs]


def _validate_field(p, pred=None, msg=""):
    try:
        f = _field(p["field"])
    except FieldError as exc:
        raise IdentityError(str(exc)) from None
    if pred is not None:
        _need(pred(f), msg)
    return f


def _validate_m(p, sign):
    m = p["m"]
    _need(m >= (2 if sign > 0 else 1), "m must be a positive squarefree integer" + (" > 1" if sign > 0 else ""))
    try:
        _field(_quad_from_m(m * sign))
    except FieldError as exc:
        raise IdentityError(str(exc)) from None


# ---------------------------------------------------------------------------
# rows: the rational field
# ---------------------------------------------------------------------------


def _v_ramanujan(p):
    _need(p["k"] >= 1, "ramanujan needs k >= 1")
    _need(p["alpha"] > 0, "alpha must be positive")


@_row(
    "ramanujan",
    [("k", "int"), ("alpha", "real")],
    "Ramanujan's formula for zeta(2k+1) with alpha*beta = pi^2",
    tol=CLOSED_FORM_TOL,
    validate=_v_ramanujan,
    grid=lambda: [dict(k=k, alpha=a) for k in (1, 2, 3) for a in (0.5, 1.0, 2.5)],
)
def _ramanujan(p, opts):
    k, alpha = p["k"], p["alpha"]
    beta = math.pi**2 / alpha
    zeta_odd = riemann_zeta(2 * k + 1, opts).real

    def H(x):
        tail = lambert_f(2 * k + 1, 1j * x / math.pi).value.real
        return (4 * x) ** (-k) * (0.5 * zeta_odd + tail)

    lhs = H(alpha) + (-1) ** (k + 1) * H(beta)
    rhs = 0.0
    for j in range(k + 2):
        c = bernoulli(2 * j) / math.factorial(2 * j) * bernoulli(2 * k + 2 - 2 * j) / math.factorial(2 * k + 2 - 2 * j)
        rhs += (-1) ** (j - 1) * float(c) * alpha ** (k + 1 - j) * beta**j
    return lhs, rhs, f"beta={beta:.15g}"


def _grosswald_sides(k: int, z: complex, opts):
    lhs = lambert_f(2 * k + 1, z).value - z ** (2 * k) * lambert_f(2 * k + 1, -1 / z).value
    rhs = 0.5 * riemann_zeta(2 * k + 1, opts) * (z ** (2 * k) - 1)
    if k >= 1:
        rhs += (2j * math.pi) ** (2 * k + 1) / (2 * z) * ramanujan_poly(k, z)
    elif k == -1:
        rhs += 1 / (2j * math.pi * 2 * z)
    return lhs, rhs


@_row(
    "grosswald",
    [("k", "int"), ("z", "complex")],
    "Grosswald's form of Ramanujan's formula with the Ramanujan polynomial",
    tol=CLOSED_FORM_TOL,
    validate=lambda p: (_need(p["k"] >= 1, "grosswald needs k >= 1"), _need_upper(p["z"])),
    grid=lambda: [dict(k=k, z=z) for k in (1, 2, 3, 5) for z in GRID_Z],
)
def _grosswald(p, opts):
    lhs, rhs = _grosswald_sides(p["k"], p["z"], opts)
    return lhs, rhs, ""


@_row(
    "grosswald_neg",
    [("k", "int"), ("z", "complex")],
    "Grosswald's identity for k < -1, the weight 2|k| Eisenstein transformation",
    tol=CLOSED_FORM_TOL,
    validate=lambda p: (_need(p["k"] < -1, "grosswald_neg needs k < -1"), _need_upper(p["z"])),
    grid=lambda: [dict(k=k, z=z) for k in (-2, -3) for z in GRID_Z],
)
def _grosswald_neg(p, opts):
    lhs, rhs = _grosswald_sides(p["k"], p["z"], opts)
    return lhs, rhs, ""


@_row(
    "reduction_Q",
    [("k", "int"), ("z", "complex")],
    "the number-field transformation over Q reduces to Grosswald's identity",
    tol=CLOSED_FORM_TOL,
    validate=lambda p: (_need(p["k"] != 0, "k must be nonzero"), _need_upper(p["z"])),
    grid=lambda: [dict(k=k, z=z) for k in GRID_K for z in GRID_Z],
)
def _reduction_q(p, opts):
    # the residue side of the general theorem on Q, assembled by contour
    # integration, against the closed-form right side of Grosswald's identity
    k, z = p["k"], p["z"]
    F = _field("Q")
    w = -1 / z
    if k > 0:
        r = lambda x: _res(F, k, 0, x, opts) + r1_closed(F, k, x, opts)
        lhs = r(z) - z ** (2 * k) * r(w) + _negative_residues(F, k, z, opts)
    else:
        c = c_term(F, k, opts)
        lhs = c * (1 - z ** (2 * k)) + _extra_residue_neg(F, k, z, opts)
    _, rhs = _grosswald_sides(k, z, opts)
    return lhs, rhs, "residue side only"


@_row(
    "glaisher",
    [("k", "int")],
    "Glaisher's evaluation sum sigma_{2k-1}(n) e^{-2 pi n} = B_{2k}/(4k)",
    tol=CLOSED_FORM_TOL,
    validate=lambda p: _need(p["k"] >= 3 and p["k"] % 2 == 1, "glaisher needs odd k >= 3"),
    grid=lambda: [dict(k=3)],
)
def _glaisher(p, opts):
    k = p["k"]
    lhs = lambert_f(1 - 2 * k, 1j).value
    rhs = bernoulli(2 * k) / (4 * k)
    return lhs, float(rhs), f"exact={rhs}"


@_row(
    "eta",
    [("z", "complex")],
    "logarithm of the Dedekind eta transformation",
    tol=CLOSED_FORM_TOL,
    validate=lambda p: _need_upper(p["z"]),
    grid=lambda: [dict(z=z) for z in (0.25 + 1.5j, 1j, 2j)],
)
def _eta(p, opts):
    z = p["z"]
    lhs = lambert_f(1, z).value - lambert_f(1, -1 / z).value
    rhs = 1j * math.pi * (z * z + 1) / (12 * z) + 0.5 * np.log(-1j * z)
    return lhs, rhs, ""


@_row(
    "e2",
    [("z", "complex")],
    "weight 2 Eisenstein transformation E2(-1/z) = z^2 (E2(z) + 6/(pi i z))",
    validate=lambda p: _need_upper(p["z"]),
    grid=lambda: [dict(z=z) for z in GRID_Z],
)
def _e2(p, opts):
    z = p["z"]
    F = _field("Q")
    e2 = lambda x: 1 - 24 * f_series(F, -1, x, opts).value
    return e2(-1 / z), z * z * (e2(z) + 6 / (math.pi * 1j * z)), "series over Q via the Steen kernel"


# ---------------------------------------------------------------------------
# rows: general fields
# ---------------------------------------------------------------------------


@_row(
    "main",
    [("field", "field"), ("k", "int"), ("z", "complex")],
    "number-field analogue of the Ramanujan-Grosswald formula, both signs of k",
    validate=lambda p: (_validate_field(p), _need(p["k"] != 0, "main is not valid for k = 0"), _need_upper(p["z"])),
    grid=lambda: _grid_fkz(GRID_FIELDS, GRID_K),
)
def _main(p, opts):
    F, k, z = _field(p["field"]), p["k"], p["z"]
    lhs, rhs = (_main_pos if k > 0 else _main_neg)(F, k, z, opts)
    return lhs, rhs, "k>0 branch" if k > 0 else "k<0 branch"


def _tr(f):
    return f.totally_real


@_row(
    "totally_real_pos",
    [("field", "field"), ("k", "int"), ("z", "complex")],
    "transformation for totally real fields, k > 0",
    validate=lambda p: (
        _validate_field(p, _tr, "field must be totally real"),
        _need(p["k"] >= 1, "k must be positive"),
        _need_upper(p["z"]),
    ),
    grid=lambda: _grid_fkz(("Q", "quad:5", "quad:2"), (1, 2, 3)),
)
def _totally_real_pos(p, opts):
    F, k, z = _field(p["field"]), p["k"], p["z"]
    c = zeta_constants(F, opts)
    zeta_odd = dedekind_zeta(F, 2 * k + 1, opts)

    def S(x):
        return f_series(F, 2 * k + 1, x, opts).value - c.C_F * zeta_odd - r1_closed(F, k, x, opts)

    rhs = (-1) ** ((k * (F.r1 + 1)) % 2) * z ** (2 * k) * S(-1 / z)
    rhs += sum(_res(F, k, -(2 * j - 1), z, opts) for j in range(1, k + 1))
    return S(z), rhs, "residue at 0 in closed form"


@_row(
    "quad_real_pos",
    [("m", "int"), ("k", "int"), ("z", "complex")],
    "real quadratic case with the K0 kernel",
    validate=lambda p: (_validate_m(p, 1), _need(p["k"] >= 1, "k must be positive"), _need_upper(p["z"])),
    grid=lambda: _grid_mkz((5, 2), (1, 2, 3)),
)
def _quad_real_pos(p, opts):
    m, k, z = p["m"], p["k"], p["z"]
    F = _field(_quad_from_m(m))
    M = F.D / 4
    c = zeta_constants(F, opts)
    dz0 = dedekind_zeta_deriv(F, 0.0, 1, opts)
    zeta_odd = dedekind_zeta(F, 2 * k + 1, opts)
    zeta_even = dedekind_zeta(F, 2 * k + 2, opts)

    def S(x):
        series = 2 * k0_kernel_series(F, -2 * k - 1, x, opts.target_tol).value
        return series - dz0 * zeta_odd - c.H_F * zeta_even * 1j * M / (math.pi**2 * x)

    rhs = (-1) ** k * z ** (2 * k) * S(-1 / z)
    rhs += sum(_res(F, k, -(2 * j - 1), z, opts) for j in range(1, k + 1))
    return S(z), rhs, f"M=D/4={M:g}"


def _tr_neg_sides(F: Field, k: int, z: complex, opts):
    const = zeta_constants(F, opts).C_F * dedekind_zeta(F, 1 - 2 * k, opts)
    g = lambda x: f_series(F, 1 - 2 * k, x, opts).value - const
    lhs = z ** (2 * k) * g(z)
    rhs = (-1) ** ((k * (F.r1 + 1)) % 2) * g(-1 / z)
    if (k, F.r1, F.r2) == (1, 1, 0):
        rhs += z ** (2 * k) / (4 * math.pi * z * 1j)
    return lhs, rhs


@_row(
    "totally_real_neg",
    [("field", "field"), ("k", "int"), ("z", "complex")],
    "transformation for totally real fields at negative odd integers",
    validate=lambda p: (
        _validate_field(p, _tr, "field must be totally real"),
        _need(p["k"] >= 1, "k must be positive"),
        _need_upper(p["z"]),
    ),
    grid=lambda: _grid_fkz(("Q", "quad:5", "quad:2"), (1, 2, 3)),
)
def _totally_real_neg(p, opts):
    lhs, rhs = _tr_neg_sides(_field(p["field"]), p["k"], p["z"], opts)
    return lhs, rhs, ""


def _v_exact_real(p):
    _validate_field(p, lambda f: f.totally_real and f.r1 % 2 == 1, "field must be totally real of odd degree")
    _need(p["k"] >= 3 and p["k"] % 2 == 1, "k must be odd and >= 3")


@_row(
    "exact_real_at_i",
    [("field", "field"), ("k", "int")],
    "exact evaluation at z = i for totally real fields of odd degree (class number identity)",
    validate=_v_exact_real,
    grid=lambda: [dict(field="Q", k=3), dict(field="Q", k=5), dict(field=packaged_cubic(), k=3)],
)
def _exact_real_at_i(p, opts):
    F, k = _field(p["field"]), p["k"]
    lhs = f_series(F, 1 - 2 * k, 1j, opts)
    rhs = zeta_constants(F, opts).C_F * dedekind_zeta(F, 1 - 2 * k, opts)
    return lhs.value, rhs, f"terms={lhs.terms_used}"


@_row(
    "quad_real_eisenstein",
    [("m", "int"), ("k", "int"), ("z", "complex")],
    "Eisenstein-type modular relation for real quadratic fields",
    validate=lambda p: (_validate_m(p, 1), _need(p["k"] >= 1, "k must be positive"), _need_upper(p["z"])),
    grid=lambda: _grid_mkz((5, 2), (1, 2, 3), (1 + 1j, 0.5 + 2j, 0.3 + 1.2j)),
)
def _quad_real_eisenstein(p, opts):
    m, k, z = p["m"], p["k"], p["z"]
    F = _field(_quad_from_m(m))
    denom = dedekind_zeta_deriv(F, 0.0, 1, opts) * dedekind_zeta(F, 1 - 2 * k, opts)
    G = lambda x: 1 - 2 * k0_kernel_series(F, 2 * k - 1, x, opts.target_tol).value / denom
    return (1j * z) ** (2 * k) * G(z), G(-1 / z), ""


def _imag(f):
    return f.purely_imaginary


@_row(
    "imaginary_pos",
    [("field", "field"), ("k", "int"), ("z", "complex")],
    "transformation for purely imaginary fields, k > 0",
    validate=lambda p: (
        _validate_field(p, _imag, "field must be purely imaginary"),
        _need(p["k"] >= 1, "k must be positive"),
        _need_upper(p["z"]),
    ),
    grid=lambda: _grid_fkz(("quad:-1", "quad:-3"), (1, 2, 3)),
)
def _imaginary_pos(p, opts):
    lhs, rhs = _main_pos(_field(p["field"]), p["k"], p["z"], opts)
    return lhs, rhs, ""


@_row(
    "imaginary_neg",
    [("field", "field"), ("k", "int"), ("z", "complex")],
    "transformation for purely imaginary fields, k < 0",
    validate=lambda p: (
        _validate_field(p, _imag, "field must be purely imaginary"),
        _need(p["k"] <= -1, "k must be negative"),
        _need_upper(p["z"]),
    ),
    grid=lambda: _grid_fkz(("quad:-1", "quad:-3"), (-1, -2, -3)),
)
def _imaginary_neg(p, opts):
    lhs, rhs = _main_neg(_field(p["field"]), p["k"], p["z"], opts)
    return lhs, rhs, ""


@_row(
    "quad_imag_pos",
    [("m", "int"), ("k", "int"), ("z", "complex")],
    "imaginary quadratic case with explicit residues at negative integers",
    validate=lambda p: (_validate_m(p, -1), _need(p["k"] >= 1, "k must be positive"), _need_upper(p["z"])),
    grid=lambda: _grid_mkz((1, 3), (1, 2, 3)),
)
def _quad_imag_pos(p, opts):
    m, k, z = p["m"], p["k"], p["z"]
    F = _field(_quad_from_m(-m))
    M = F.D / 4
    c = zeta_constants(F, opts)
    zeta_even = dedekind_zeta(F, 2 * k + 2, opts)

    def S(x):
        series = 2 * k0_kernel_series(F, -2 * k - 1, x, opts.target_tol).value
        return series - _res(F, k, 0, x, opts) - c.H_F * zeta_even * 1j * M / (math.pi**2 * x)

    u = math.pi**2 * 1j * z / M
    tail = 0j
    for j in range(1, k + 1):
        tail -= (
            dedekind_zeta_deriv(F, 1 - 2 * j, 1, opts)
            * dedekind_zeta(F, 2 * k - 2 * j + 2, opts)
            * u ** (2 * j - 1)
            / math.factorial(2 * j - 1) ** 2
        )
    for j in range(1, k):
        tail += (
            dedekind_zeta_deriv(F, -2 * j, 1, opts)
            * dedekind_zeta(F, 2 * k - 2 * j + 1, opts)
            * u ** (2 * j)
            / math.factorial(2 * j) ** 2
        )
    rhs = (-1) ** (k + 1) * z ** (2 * k) * S(-1 / z) + tail
    return S(z), rhs, f"M=D/4={M:g}; negative-integer residues in closed form"


@_row(
    "quad_imag_kminus1",
    [("m", "int"), ("z", "complex")],
    "imaginary quadratic modular relation at k = -1",
    validate=lambda p: (_validate_m(p, -1), _need_upper(p["z"])),
    grid=lambda: [dict(m=m, z=z) for m in (1, 3) for z in GRID_Z],
)
def _quad_imag_kminus1(p, opts):
    m, z = p["m"], p["z"]
    F = _field(_quad_from_m(-m))
    M = F.D / 4
    H = zeta_constants(F, opts).H_F
    z0 = dedekind_zeta(F, 0.0, opts)
    const = z0 * dedekind_zeta_deriv(F, -1.0, 1, opts)
    U = lambda x: 2 * k0_kernel_series(F, 1, x, opts.target_tol).value - const
    return z * z * U(z), U(-1 / z) + H * z0 * 1j * z * M / math.pi**2, f"M=D/4={M:g}"


@_row(
    "quad_imag_exact_i",
    [("m", "int"), ("k", "int")],
    "exact K0 evaluations at z = i for imaginary quadratic fields (k = 1 or k >= 3)",
    validate=lambda p: (_validate_m(p, -1), _need(p["k"] == 1 or p["k"] >= 3, "k must be 1 or >= 3")),
    grid=lambda: [dict(m=m, k=k) for m in (1, 3) for k in (1, 3)],
)
def _quad_imag_exact_i(p, opts):
    m, k = p["m"], p["k"]
    F = _field(_quad_from_m(-m))
    M = F.D / 4
    z0 = dedekind_zeta(F, 0.0, opts)
    lhs = k0_kernel_series(F, 2 * k - 1, 1j, opts.target_tol).value
    rhs = 0.5 * z0 * dedekind_zeta_deriv(F, 1.0 - 2 * k, 1, opts)
    if k == 1:
        rhs += zeta_constants(F, opts).H_F * z0 * M / (4 * math.pi**2)
    return lhs, rhs, f"M=D/4={M:g}"


def _v_imag_neg(p):
    _validate_field(p, _imag, "field must be purely imaginary")
    f = _field(p["field"])
    _need(p["k"] >= 1, "k must be positive")
    _need((p["k"], f.r2) != (1, 1), "(k, r2) = (1, 1) is excluded")


@_row(
    "imag_neg_modular",
    [("field", "field"), ("k", "int"), ("z", "complex")],
    "modular relation for purely imaginary fields at negative odd integers",
    validate=lambda p: (_v_imag_neg(p), _need_upper(p["z"])),
    grid=lambda: _grid_fkz(("quad:-1", "quad:-3"), (2, 3)),
)
def _imag_neg_modular(p, opts):
    F, k, z = _field(p["field"]), p["k"], p["z"]
    c = c_term(F, -k, opts)
    U = lambda x: f_series(F, 1 - 2 * k, x, opts).value - c
    return z ** (2 * k) * U(z), (-1) ** ((k + F.r2) % 2) * U(-1 / z), ""


def _v_imag_exact(p):
    _v_imag_neg(p)
    _need(_field(p["field"]).r2 % 2 == 1, "r2 must be odd")


@_row(
    "imag_exact_i",
    [("field", "field"), ("k", "int")],
    "exact evaluation at z = i for purely imaginary fields with r2 odd",
    validate=_v_imag_exact,
    grid=lambda: [dict(field=f, k=k) for f in ("quad:-1", "quad:-3") for k in (2, 3)],
)
def _imag_exact_i(p, opts):
    F, k = _field(p["field"]), p["k"]
    lhs = f_series(F, 1 - 2 * k, 1j, opts)
    return lhs.value, c_term(F, -k, opts), f"terms={lhs.terms_used}"


@_row(
    "k0",
    [("field", "field"), ("z", "complex")],
    "k = 0 analogue of the Dedekind eta transformation",
    validate=lambda p: (_validate_field(p), _need_upper(p["z"])),
    grid=lambda: [dict(field=f, z=z) for f in GRID_FIELDS for z in GRID_Z],
)
def _k0(p, opts):
    F, z = _field(p["field"]), p["z"]
    T = lambda x: f_series(F, 1, x, opts).value - r1_closed(F, 0, x, opts)
    rhs = (-1) ** F.r2 * T(-1 / z) + _res(F, 0, 0, z, opts)
    return T(z), rhs, "residue at 0 by contour"


@_row(
    "k0_totally_real",
    [("field", "field"), ("z", "complex")],
    "k = 0 relation for totally real fields with explicit Laurent constants",
    validate=lambda p: (_validate_field(p, _tr, "field must be totally real"), _need_upper(p["z"])),
    grid=lambda: [dict(field=f, z=z) for f in ("Q", "quad:5", "quad:2") for z in GRID_Z],
)
def _k0_totally_real(p, opts):
    F, z = _field(p["field"]), p["z"]
    c = zeta_constants(F, opts)
    w = -1 / z
    lhs = f_series(F, 1, z, opts).value - f_series(F, 1, w, opts).value
    log_term = F.r1 * EULER_GAMMA + np.log(-((2 * math.pi) ** F.r1) * 1j * z / F.D)
    rhs = c.C_F * c.gamma_F - c.C_F * c.H_F * log_term + c.a1 * c.H_F
    rhs += r1_closed(F, 0, z, opts) - r1_closed(F, 0, w, opts)
    return lhs, rhs, ""


@_row(
    "class_number_kronecker",
    [("field", "field")],
    "Kronecker-limit type expression for C_F (diagnostic)",
    diagnostic=True,
    validate=lambda p: _validate_field(p, _tr, "field must be totally real"),
    grid=lambda: [dict(field=f) for f in ("Q", "quad:5", "quad:2")],
)
def _class_number_kronecker(p, opts):
    F = _field(p["field"])
    c = zeta_constants(F, opts)
    rhs = (c.a1 - c.A * c.gamma_F) / (F.r1 * EULER_GAMMA + math.log((2 * math.pi) ** F.r1 / F.D))
    return c.C_F, rhs, "diagnostic"


# ---------------------------------------------------------------------------
# rows: analytic building blocks
# ---------------------------------------------------------------------------


def _lambda_grid():
    rng = np.random.default_rng(20240)
    out = []
    for f in GRID_FIELDS:
        for k in GRID_K:
            for _ in range(LAMBDA_SAMPLES):
                s = complex(round(rng.uniform(-k - 3, -k + 3), 6), round(rng.uniform(0.2, 3.0), 6))
                out.append(dict(field=f, k=k, s=s))
    return out


@_row(
    "lambda_symmetry",
    [("field", "field"), ("k", "int"), ("s", "complex")],
    "symmetry Lambda(s) = (-1)^{k r1 + r2} Lambda(-s-2k)",
    validate=lambda p: (_validate_field(p), _need(p["k"] != 0, "k must be nonzero")),
    grid=_lambda_grid,
)
def _lambda_symmetry(p, opts):
    F, k, s = _field(p["field"]), p["k"], p["s"]
    _need(abs(s - round(s.real)) > 1e-9, "s must avoid the integers")
    lhs = complex(lambda_vec(F, k, np.array([s]), opts)[0])
    rhs = (-1) ** ((k * F.r1 + F.r2) % 2) * complex(lambda_vec(F, k, np.array([-s - 2 * k]), opts)[0])
    return lhs, rhs, ""


def _tau_tail(d2: int, sigma: float, N: int) -> float:
    """sum_{n > N} tau_{d2}(n) n^-sigma = zeta(sigma)^d2 - partial sum, an upper bound for the tail."""
    tau = np.zeros(N + 1)
    tau[1:] = 1.0
    ones = tau.copy()
    for _ in range(d2 - 1):
        tau = _dirichlet_convolve(tau, ones)
    n = np.arange(1, N + 1, dtype=float)
    partial = float(np.sum(tau[1:] * n**-sigma))
    return max(riemann_zeta(sigma).real ** d2 - partial, 0.0)


@_row(
    "dirichlet_series",
    [("field", "field"), ("ell", "int"), ("s", "complex"), ("N", "int")],
    "Dirichlet series of sigma_{F,ell} equals zeta_F(s) zeta_F(s-ell)",
    tol=CLOSED_FORM_TOL,
    validate=lambda p: (
        _validate_field(p),
        _need(p["N"] >= 10 and p["N"] <= 10**6, "N must lie in [10, 1e6]"),
        _need(p["s"].real > max(1, 1 + p["ell"]) + 1, "need Re s > max(1, 1+ell) + 1"),
    ),
    grid=lambda: [
        dict(field=f, ell=ell, s=s, N=2000)
        for f in GRID_FIELDS
        for ell, s in ((1, 7 + 0j), (-1, 6.5 + 2j))
    ],
)
def _dirichlet_series(p, opts):
    F, ell, s, N = _field(p["field"]), p["ell"], p["s"], p["N"]
    sig = sigma_array(F, ell, N)[1:]
    n = np.arange(1, N + 1, dtype=float)
    lhs = complex(np.sum(sig * np.exp(-s * np.log(n))))
    rhs = dedekind_zeta(F, s, opts) * dedekind_zeta(F, s - ell, opts)
    bound = _tau_tail(2 * F.d, s.real - max(0, ell), N)
    return lhs, rhs, f"tail bound {bound:.1e}"


def rational_reconstruct(x: float, max_den: int = 10**6) -> Optional[Fraction]:
    """Best continued-fraction convergent p/q with q <= max_den, if it matches x to 1e-9 relative."""
    x = float(x)
    if not math.isfinite(x) or abs(x) >= 1e12:
        return None
    h0, h1, k0, k1 = 0, 1, 1, 0
    rest = x
    best = None
    for _ in range(64):
        a = math.floor(rest)
        h0, h1 = h1, a * h1 + h0
        k0, k1 = k1, a * k1 + k0
        if k1 > max_den:
            break
        best = Fraction(h1, k1)
        frac = rest - a
        if abs(x - h1 / k1) <= 1e-15 * max(1.0, abs(x)) or frac < 1e-15:
            break
        rest = 1 / frac
    if best is None or abs(x - best) >= 1e-9 * max(1.0, abs(x)):
        return None
    return best


@_row(
    "klingen_siegel",
    [("field", "field"), ("m", "int")],
    "rationality of sqrt(D) zeta_F(2m) / pi^(2 m d) for totally real fields",
    tol=CLOSED_FORM_TOL,
    validate=lambda p: (_validate_field(p, _tr, "field must be totally real"), _need(1 <= p["m"] <= 6, "m must lie in 1..6")),
    grid=lambda: [dict(field=f, m=m) for f in ("Q", "quad:5", "quad:2") for m in (1, 2)],
)
def _klingen_siegel(p, opts):
    F, m = _field(p["field"]), p["m"]
    x = math.sqrt(F.D) * dedekind_zeta(F, 2 * m, opts).real / math.pi ** (2 * m * F.d)
    q = rational_reconstruct(x, 10**6)
    if q is None:
        return x, math.nan, "no rational with denominator <= 1e6"
    return x, float(q), f"rational={q}"


# ---------------------------------------------------------------------------
# evaluation and suites
# ---------------------------------------------------------------------------


def verify_identity(ident, tol: Optional[float] = None, opts: EvalOptions = DEFAULT_OPTS) -> CheckReport:
    """Evaluate both sides of one identity instance."""
    if isinstance(ident, str):
        ident = parse_identity(ident)
    row = ident.row
    tol = row.tol if tol is None else float(tol)
    lhs, rhs, notes = row.evaluate(ident.as_dict(), opts)
    if row.diagnostic and "diagnostic" not in notes:
        notes = f"diagnostic; {notes}" if notes else "diagnostic"
    return CheckReport(str(ident), lhs, rhs, tol, ident.json_params(), notes)


def _safe_verify(args) -> dict:
    text, tol = args
    try:
        return verify_identity(text, tol).to_dict()
    except (ZetaDomainError, IdentityError, FieldError, RuntimeError, ValueError, ArithmeticError) as exc:
        ident = parse_identity(text)
        notes = f"error: {type(exc).__name__}: {exc}"
        if ident.row.diagnostic:
            notes = "diagnostic; " + notes
        rep = CheckReport(text, 0j, 0j, tol if tol is not None else ident.row.tol, ident.json_params(), notes,
                          abs_err=math.inf, rel_err=math.inf, passed=False)
        return rep.to_dict()


def default_cases(patterns: Iterable[str] = ()) -> list:
    """Identity strings of the default grid whose name or full id matches one of the patterns."""
    patterns = list(patterns)
    out = []
    for name in sorted(REGISTRY):
        row = REGISTRY[name]
        for values in row.grid():
            text = str(make_identity(name, **values))
            if not patterns or any(fnmatch.fnmatchcase(name, pat) or fnmatch.fnmatchcase(text, pat) for pat in patterns):
                out.append(text)
    return sorted(set(out))


@dataclass
class SuiteReport:
    reports: list = dc_field(default_factory=list)

    @property
    def summary(self) -> dict:
        worst: dict = {}
        passed = failed = flagged = 0
        for r in self.reports:
            name = r.id.split(":", 1)[0]
            worst[name] = max(worst.get(name, 0.0), r.rel_err)
            if r.passed:
                passed += 1
            elif r.diagnostic:
                flagged += 1
            else:
                failed += 1
        return {
            "summary": True,
            "total": len(self.reports),
            "passed": passed,
            "failed": failed,
            "flagged": flagged,
            "worst_rel_err": dict(sorted(worst.items())),
        }

    @property
    def ok(self) -> bool:
        return self.summary["failed"] == 0

    def to_jsonl(self) -> str:
        import json

        lines = [r.to_json() for r in self.reports]
        lines.append(json.dumps(self.summary, sort_keys=True))
        return "\n".join(lines) + "\n"


def run_suite(patterns: Iterable[str] = (), tol: Optional[float] = None, parallelism: int = 1) -> SuiteReport:
    """Run the default grid filtered by patterns; results are sorted by id."""
    if parallelism < 1:
        raise ValueError("parallelism must be >= 1")
    cases = [(text, tol) for text in default_cases(patterns)]
    if parallelism == 1 or len(cases) < 2:
        dicts = [_safe_verify(c) for c in cases]
    else:
        with ProcessPoolExecutor(max_workers=parallelism) as pool:
            dicts = list(pool.map(_safe_verify, cases, chunksize=1))
    reports = sorted((CheckReport.from_dict(d) for d in dicts), key=lambda r: r.id)
    return SuiteReport(reports)
