"""Dedekind zeta values, Steen-function series and numerical checks of Ramanujan-type transformation formulas."""

from .fieldarith import (
    CharacterTable,
    Field,
    FieldError,
    FieldSpec,
    bernoulli,
    divisor_sigma,
    euler_zeta_even,
    field_from_text,
    ideal_count,
    kronecker_chi,
    make_field,
    parse_field_spec,
    ramanujan_poly,
)
from .report import CheckReport, SeriesValue
from .serieskit import f_series, lambert_f, residue_term
from .steen import SteenParams, bessel_k0, steen_v
from .verify import parse_identity, rational_reconstruct, run_suite, verify_identity
from .zetalab import (
    EvalOptions,
    ZetaConstants,
    ZetaDomainError,
    dedekind_zeta,
    dedekind_zeta_deriv,
    dirichlet_l,
    gamma_fn,
    hurwitz_zeta,
    lambda_completed,
    riemann_zeta,
    zeta_constants,
)

__version__ = "0.1.0"
