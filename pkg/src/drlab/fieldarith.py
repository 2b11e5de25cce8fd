"""Exact arithmetic layer: fields, quadratic characters, ideal counts, Bernoulli numbers.

Every field handled here has a Dedekind zeta function that factors as
``zeta(s) * prod_i L(s, chi_i)`` over a list of Dirichlet characters.
The coefficients ``a_F(n)`` are therefore the Dirichlet convolution
``1 * chi_1 * ... * chi_{d-1}``, which is how they are computed.
"""

from __future__ import annotations

import json
import math
import threading
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from functools import lru_cache
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

FACTOR_CAP = 10**8
BERNOULLI_CAP = 200


class FieldError(ValueError):
    """Invalid field description or unsupported operation on a field."""


# ---------------------------------------------------------------------------
# field descriptors
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FieldSpec:
    """User-facing field description: ``Rational``, ``Quadratic(m)`` or ``LData(path)``."""

    kind: str
    m: Optional[int] = None
    path: Optional[str] = None

    @classmethod
    def rational(cls) -> "FieldSpec":
        return cls("rational")

    @classmethod
    def quadratic(cls, m: int) -> "FieldSpec":
        return cls("quadratic", m=int(m))

    @classmethod
    def ldata(cls, path) -> "FieldSpec":
        return cls("ldata", path=str(path))

    def __str__(self) -> str:
        if self.kind == "rational":
            return "Q"
        if self.kind == "quadratic":
            return f"quad:{self.m}"
        return f"file:{self.path}"


def parse_field_spec(text: str) -> FieldSpec:
    """Parse the CLI grammar ``Q`` | ``quad:<m>`` | ``file:<path>``."""
    t = text.strip()
    if t in ("Q", "q", "QQ", "rational"):
        return FieldSpec.rational()
    head, sep, tail = t.partition(":")
    if sep and head == "quad":
        try:
            return FieldSpec.quadratic(int(tail))
        except ValueError:
            raise FieldError(f"bad quadratic parameter in {text!r}") from None
    if sep and head == "file":
        return FieldSpec.ldata(tail)
    raise FieldError(f"unrecognised field spec {text!r}")


@dataclass(eq=False)
class CharacterTable:
    """A Dirichlet character mod ``modulus``; ``values[a]`` is chi(a) for 0 <= a < modulus."""

    modulus: int
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=complex)
        if self.values.shape != (self.modulus,):
            raise FieldError("character table length must equal its modulus")

    def __call__(self, n: int) -> complex:
        return complex(self.values[n % self.modulus])

    @property
    def is_real(self) -> bool:
        return bool(np.all(np.abs(self.values.imag) < 1e-12))

    @property
    def is_principal(self) -> bool:
        q = self.modulus
        return all(
            abs(self.values[a] - (1.0 if math.gcd(a, q) == 1 else 0.0)) < 1e-12
            for a in range(q)
        )

    @property
    def parity(self) -> int:
        """0 for even characters, 1 for odd ones."""
        return 0 if abs(self(-1) - 1) < 1e-9 else 1

    def validate(self) -> None:
        q = self.modulus
        v = self.values
        for a in range(q):
            coprime = math.gcd(a, q) == 1
            if not coprime and abs(v[a]) > 1e-12:
                raise FieldError(f"chi({a}) must vanish mod {q}")
            if coprime and abs(abs(v[a]) - 1) > 1e-9:
                raise FieldError(f"chi({a}) is not a root of unity")
        if q > 1 and abs(v[1 % q] - 1) > 1e-9:
            raise FieldError("chi(1) must be 1")
        for a in range(q):
            for b in range(a, q):
                if abs(v[a * b % q] - v[a] * v[b]) > 1e-9:
                    raise FieldError("character table is not multiplicative")


@dataclass(eq=False)
class Field:
    """Number field data: signature, discriminant and its L-factorisation."""

    name: str
    r1: int
    r2: int
    D: int
    factors: tuple = ()
    knowns: Optional[dict] = None
    m: Optional[int] = None
    _cache: dict = dc_field(default_factory=dict, repr=False)

    def __post_init__(self):
        if self.D < 1:
            raise FieldError("absolute discriminant must be positive")
        if len(self.factors) != self.d - 1:
            raise FieldError(
                f"a degree {self.d} field needs {self.d - 1} L-factors, got {len(self.factors)}"
            )

    @property
    def d(self) -> int:
        return self.r1 + 2 * self.r2

    @property
    def r(self) -> int:
        return self.r1 + self.r2 - 1

    @property
    def is_quadratic(self) -> bool:
        return self.m is not None

    @property
    def totally_real(self) -> bool:
        return self.r2 == 0

    @property
    def purely_imaginary(self) -> bool:
        return self.r1 == 0

    def __str__(self) -> str:
        return self.name


def is_squarefree(m: int) -> bool:
    m = abs(m)
    if m == 0:
        return False
    return all(e == 1 for e in factorize(m).values())


def quadratic_discriminant(m: int) -> int:
    """Signed fundamental discriminant of Q(sqrt m)."""
    return m if m % 4 == 1 else 4 * m


def make_field(spec: FieldSpec) -> Field:
    if spec.kind == "rational":
        return Field("Q", 1, 0, 1)
    if spec.kind == "quadratic":
        m = spec.m
        if m in (0, 1) or not is_squarefree(m):
            raise FieldError(f"m={m} must be squarefree and not 0 or 1")
        disc = quadratic_discriminant(m)
        D = abs(disc)
        chi = CharacterTable(D, [kronecker_symbol(disc, a) for a in range(D)])
        r1, r2 = (2, 0) if m > 0 else (0, 1)
        return Field(f"Q(sqrt({m}))", r1, r2, D, (chi,), m=m)
    if spec.kind == "ldata":
        return load_ldata(spec.path)
    raise FieldError(f"unknown field kind {spec.kind!r}")


def field_from_text(text: str) -> Field:
    return make_field(parse_field_spec(text))


def load_ldata(path) -> Field:
    """Read an LData JSON file, ``{"r1", "r2", "abs_disc", "factors": [{"modulus", "values"}]}``."""
    p = Path(path)
    try:
        raw = json.loads(p.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise FieldError(f"cannot read LData file {path}: {exc}") from None
    try:
        r1, r2, D = int(raw["r1"]), int(raw["r2"]), int(raw["abs_disc"])
        factors = []
        for f in raw["factors"]:
            q = int(f["modulus"])
            vals = [complex(float(re), float(im)) for re, im in f["values"]]
            factors.append(CharacterTable(q, vals))
    except (KeyError, TypeError, ValueError) as exc:
        raise FieldError(f"malformed LData file {path}: {exc}") from None
    if r1 < 0 or r2 < 0 or r1 + 2 * r2 < 1:
        raise FieldError("bad signature in LData file")
    for chi in factors:
        chi.validate()
        if chi.is_principal:
            raise FieldError("LData factors must be non-principal characters")
    name = raw.get("name", p.stem)
    return Field(name, r1, r2, D, tuple(factors), knowns=raw.get("knowns"))


# ---------------------------------------------------------------------------
# integers
# ---------------------------------------------------------------------------


def jacobi_symbol(a: int, n: int) -> int:
    if n <= 0 or n % 2 == 0:
        raise ValueError("Jacobi symbol needs odd positive n")
    a %= n
    result = 1
    while a:
        while a % 2 == 0:
            a //= 2
            if n % 8 in (3, 5):
                result = -result
        a, n = n, a
        if a % 4 == 3 and n % 4 == 3:
            result = -result
        a %= n
    return result if n == 1 else 0


def kronecker_symbol(a: int, n: int) -> int:
    """Kronecker symbol (a/n) with the usual extension to n even and negative."""
    if n == 0:
        return 1 if abs(a) == 1 else 0
    sign = 1
    if n < 0:
        n = -n
        if a < 0:
            sign = -1
    v = 0
    while n % 2 == 0:
        n //= 2
        v += 1
    if v:
        if a % 2 == 0:
            return 0
        if v % 2 == 1 and a % 8 in (3, 5):
            sign = -sign
    if n == 1:
        return sign
    return sign * jacobi_symbol(a, n)


def kronecker_chi(field: Field, n: int) -> int:
    """The quadratic character of ``field`` at ``n``."""
    if not field.is_quadratic:
        raise FieldError("kronecker_chi needs a quadratic field")
    return kronecker_symbol(quadratic_discriminant(field.m), n)


@lru_cache(maxsize=65536)
def _factorize(n: int) -> tuple:
    out = []
    for p in (2, 3):
        e = 0
        while n % p == 0:
            n //= p
            e += 1
        if e:
            out.append((p, e))
    p = 5
    step = 2
    while p * p <= n:
        e = 0
        while n % p == 0:
            n //= p
            e += 1
        if e:
            out.append((p, e))
        p += step
        step = 6 - step
    if n > 1:
        out.append((n, 1))
    return tuple(out)


def factorize(n: int) -> dict:
    """Prime factorisation by trial division, capped at ``FACTOR_CAP``."""
    n = int(n)
    if n < 1:
        raise ValueError("factorize needs n >= 1")
    if n > FACTOR_CAP:
        raise ValueError(f"n={n} exceeds the factorisation cap {FACTOR_CAP}")
    return dict(_factorize(n))


def divisors(n: int) -> list:
    divs = [1]
    for p, e in factorize(n).items():
        divs = [d * p**k for d in divs for k in range(e + 1)]
    return sorted(divs)


def _local_coefficient(field: Field, p: int, e: int) -> complex:
    # coefficient of x^e in (1-x)^-1 prod_i (1 - chi_i(p) x)^-1
    poly = np.ones(e + 1, dtype=complex)
    for chi in field.factors:
        c = chi(p)
        geo = c ** np.arange(e + 1)
        poly = np.convolve(poly, geo)[: e + 1]
    return poly[e]


def _round_count(value: complex) -> int:
    k = int(round(value.real))
    if abs(value - k) > 1e-6:
        raise FieldError("ideal count is not an integer; check the character tables")
    return k


def ideal_count(field: Field, n: int) -> int:
    """a_F(n): number of ideals of norm ``n``, from the Euler factors."""
    if n < 1:
        raise ValueError("ideal_count needs n >= 1")
    total = 1 + 0j
    for p, e in factorize(n).items():
        total *= _local_coefficient(field, p, e)
    return _round_count(total)


def ideal_count_convolution(field: Field, n: int) -> int:
    """a_F(n) by brute-force divisor convolution of the characters (cross-check path)."""
    divs = divisors(n)
    f = {d: 1 + 0j for d in divs}
    for chi in field.factors:
        f = {d: sum(f[e] * chi(d // e) for e in divs if d % e == 0 and e <= d) for d in divs}
    return _round_count(f[n])


def divisor_sigma(field: Field, ell, n: int):
    """sigma_{F,ell}(n) = sum_{d | n} a_F(d) a_F(n/d) d^ell.

    Integer ``ell`` gives an exact int (ell >= 0) or Fraction (ell < 0);
    anything else gives a complex number.
    """
    divs = divisors(n)
    a = {d: ideal_count(field, d) for d in divs}
    if isinstance(ell, (int, np.integer)) and not isinstance(ell, bool):
        ell = int(ell)
        if ell >= 0:
            return sum(a[d] * a[n // d] * d**ell for d in divs)
        return sum(Fraction(a[d] * a[n // d], d ** (-ell)) for d in divs)
    ell = complex(ell)
    return complex(sum(a[d] * a[n // d] * complex(d) ** ell for d in divs))


def _dirichlet_convolve(f: np.ndarray, g: np.ndarray) -> np.ndarray:
    N = len(f) - 1
    out = np.zeros(N + 1, dtype=np.result_type(f, g))
    for d in range(1, N + 1):
        fd = f[d]
        if fd != 0:
            out[d::d] += fd * g[1 : N // d + 1]
    return out


_sieve_lock = threading.Lock()


def ideal_counts(field: Field, N: int) -> np.ndarray:
    """Array ``a`` with ``a[n] = a_F(n)`` for 1 <= n <= N (``a[0] = 0``)."""
    cached = field._cache.get("ideal_counts")
    if cached is not None and len(cached) > N:
        return cached[: N + 1]
    a = np.ones(N + 1, dtype=complex)
    a[0] = 0
    n = np.arange(N + 1)
    for chi in field.factors:
        a = _dirichlet_convolve(a, chi.values[n % chi.modulus] * (n > 0))
    counts = np.rint(a.real).astype(np.int64)
    if np.max(np.abs(a - counts)) > 1e-6:
        raise FieldError("ideal counts are not integers; check the character tables")
    with _sieve_lock:
        field._cache["ideal_counts"] = counts
    return counts


def sigma_array(field: Field, ell, N: int) -> np.ndarray:
    """Array ``s`` with ``s[n] = sigma_{F,ell}(n)`` for 1 <= n <= N."""
    ell = complex(ell)
    key = ("sigma", ell)
    cached = field._cache.get(key)
    if cached is not None and len(cached) > N:
        return cached[: N + 1]
    a = ideal_counts(field, N).astype(float)
    n = np.arange(N + 1, dtype=float)
    n[0] = 1.0
    if ell.imag == 0:
        weighted = a * n**ell.real
    else:
        weighted = a * np.exp(ell * np.log(n))
    out = _dirichlet_convolve(weighted, a)
    with _sieve_lock:
        field._cache[key] = out
    return out


# ---------------------------------------------------------------------------
# Bernoulli numbers, Ramanujan polynomial, even zeta values
# ---------------------------------------------------------------------------

_bernoulli_table = [Fraction(1)]
_bernoulli_lock = threading.Lock()


def bernoulli(n: int) -> Fraction:
    """Exact B_n for even n (and n = 0), memoised; B_1 and odd indices are rejected."""
    if n < 0 or (n % 2 == 1):
        raise ValueError("bernoulli is defined here for even n >= 0 only")
    if n > BERNOULLI_CAP:
        raise ValueError(f"n={n} exceeds the Bernoulli cap {BERNOULLI_CAP}")
    if n < len(_bernoulli_table):
        return _bernoulli_table[n]
    with _bernoulli_lock:
        table = list(_bernoulli_table)
        for m in range(len(table), n + 1):
            acc = sum(math.comb(m + 1, k) * table[k] for k in range(m))
            table.append(-acc / (m + 1))
        _bernoulli_table[len(_bernoulli_table):] = table[len(_bernoulli_table):]
    return _bernoulli_table[n]


def ramanujan_coefficients(k: int) -> list:
    """Coefficients c_j of z^(2k+2-2j), j = 0..k+1, as Fractions."""
    if k < 1:
        raise ValueError("ramanujan polynomial needs k >= 1")
    return [
        bernoulli(2 * j) / math.factorial(2 * j)
        * bernoulli(2 * k + 2 - 2 * j) / math.factorial(2 * k + 2 - 2 * j)
        for j in range(k + 2)
    ]


def ramanujan_poly(k: int, z: complex) -> complex:
    """R_{2k+1}(z) by Horner's rule in z^2."""
    w = complex(z) ** 2
    acc = 0j
    for c in ramanujan_coefficients(k):
        acc = acc * w + float(c)
    return acc


def ramanujan_poly_exact(k: int, re: Fraction, im: Fraction = Fraction(0)) -> tuple:
    """R_{2k+1}(re + i*im) in exact Gaussian-rational arithmetic, as (real, imag)."""
    re, im = Fraction(re), Fraction(im)
    wr, wi = re * re - im * im, 2 * re * im
    ar, ai = Fraction(0), Fraction(0)
    for c in ramanujan_coefficients(k):
        ar, ai = ar * wr - ai * wi + c, ar * wi + ai * wr
    return ar, ai


def euler_zeta_even(k: int) -> float:
    if k < 1:
        raise ValueError("k must be positive")
    b = bernoulli(2 * k)
    return float((-1) ** (k + 1) * b / (2 * math.factorial(2 * k))) * (2 * math.pi) ** (2 * k)


def zeta_at_negative_odd(k: int) -> Fraction:
    """zeta(1-2k) = -B_{2k}/(2k), exact."""
    return -bernoulli(2 * k) / (2 * k)
