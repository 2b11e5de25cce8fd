"""Command-line front end: evaluate primitives, check identities, run suites, print tables."""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from dataclasses import dataclass
from typing import Optional

from . import serieskit
from .fieldarith import FieldError, divisor_sigma, field_from_text, ideal_counts, sigma_array
from .report import SeriesValue
from .serieskit import SeriesCapError, f_series, residue_term
from .steen import SteenDomainError, SteenParams, steen_v
from .verify import (
    REGISTRY,
    IdentityError,
    make_identity,
    parse_complex,
    parse_identity,
    run_suite,
    verify_identity,
)
from .zetalab import EvalOptions, ZetaDomainError, dedekind_zeta_deriv, dedekind_zeta_value, dirichlet_l

EXIT_OK, EXIT_USAGE, EXIT_DOMAIN, EXIT_FAIL = 0, 2, 3, 4
TOL_RANGE = (1e-14, 1e-2)


class UsageError(ValueError):
    pass


@dataclass(frozen=True)
class CliConfig:
    field_spec: str = "Q"
    tol: Optional[float] = None
    max_terms: int = serieskit.TERM_CAP
    output: str = "human"
    parallelism: int = 1

    def __post_init__(self):
        if self.tol is not None and not TOL_RANGE[0] <= self.tol <= TOL_RANGE[1]:
            raise UsageError(f"tol must lie in [{TOL_RANGE[0]:g}, {TOL_RANGE[1]:g}]")
        if self.parallelism < 1:
            raise UsageError("parallelism must be >= 1")
        if self.max_terms < 1:
            raise UsageError("max-terms must be positive")
        if self.output not in ("human", "json", "csv"):
            raise UsageError("output must be human, json or csv")


def _complex_arg(text: str) -> complex:
    try:
        return parse_complex(text)
    except IdentityError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _range_arg(text: str) -> tuple:
    lo, sep, hi = text.partition("..")
    try:
        a, b = int(lo), int(hi)
    except ValueError:
        raise argparse.ArgumentTypeError(f"range must look like a..b, got {text!r}") from None
    if not sep or b < a:
        raise argparse.ArgumentTypeError(f"range must look like a..b with a <= b, got {text!r}")
    return a, b


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--tol", type=float, default=None, help="check tolerance (default per identity, or $DRL_DEFAULT_TOL)")
    p.add_argument("--max-terms", type=int, default=serieskit.TERM_CAP, help="series truncation cap")
    p.add_argument("--output", choices=("human", "json", "csv"), default="human")
    p.add_argument("--parallelism", type=int, default=1, help="worker processes for suite runs")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(prog="drlab", description=__doc__, parents=[common])
    sub = parser.add_subparsers(dest="command", required=True)

    ev = sub.add_parser("eval", parents=[common], help="evaluate a primitive")
    ev.add_argument("target", choices=("zeta", "lfun", "steen", "sigma", "fseries", "residue"))
    ev.add_argument("--field", default="Q", help="Q, quad:<m> or file:<path>")
    ev.add_argument("--s", type=_complex_arg, help="argument s (use --s=-1.5 for negative values)")
    ev.add_argument("--z", type=_complex_arg, help="argument z")
    ev.add_argument("--k", type=int)
    ev.add_argument("--ell", type=_complex_arg)
    ev.add_argument("--n", type=int)
    ev.add_argument("--deriv", type=int, default=0, help="derivative order for zeta")
    ev.add_argument("--index", type=int, default=0, help="which L-factor of the field for lfun")
    ev.add_argument("--params", default="0,0", help="comma-separated Steen parameters")
    ev.add_argument("--pole", type=int, help="pole location for residue")

    vf = sub.add_parser("verify", parents=[common], help="check one identity instance")
    vf.add_argument("identity", help="name or full id such as main:field=quad:5,k=1,z=0.4+1.3i")
    for key in ("field", "k", "z", "m", "alpha", "s", "ell", "N"):
        vf.add_argument(f"--{key}", dest=f"p_{key}", default=None)

    st = sub.add_parser("suite", parents=[common], help="run the default identity grid")
    st.add_argument("--filter", action="append", default=[], help="identity name or glob (repeatable, comma lists allowed)")

    tb = sub.add_parser("table", parents=[common], help="print a CSV table")
    tb.add_argument("kind", choices=("ideal_counts", "sigma", "zeta_values"))
    tb.add_argument("--field", default="Q")
    tb.add_argument("--range", type=_range_arg, default=(1, 20), help="a..b inclusive")
    tb.add_argument("--ell", type=_complex_arg, default=1)
    return parser


# ---------------------------------------------------------------------------
# output helpers
# ---------------------------------------------------------------------------


def _pair(z) -> list:
    z = complex(z)
    return [z.real, z.imag]


def _emit_value(cfg: CliConfig, target: str, sv: SeriesValue, out) -> None:
    z = complex(sv.value)
    if cfg.output == "json":
        rec = {"target": target, "value": _pair(z), "err_estimate": sv.err_estimate, "terms_used": sv.terms_used}
        out.write(json.dumps(rec, sort_keys=True) + "\n")
    elif cfg.output == "csv":
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["target", "re", "im", "err_estimate", "terms_used"])
        w.writerow([target, repr(z.real), repr(z.imag), repr(sv.err_estimate), sv.terms_used])
    else:
        out.write(f"{target} = {z.real:.16g} {z.imag:+.16g}i\n")
        out.write(f"err_estimate = {sv.err_estimate:.3e}\nterms_used = {sv.terms_used}\n")


def _need(value, name: str):
    if value is None:
        raise UsageError(f"--{name} is required")
    return value


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def cmd_eval(args, cfg: CliConfig, out) -> int:
    opts = EvalOptions()
    target = args.target
    if target == "zeta":
        field = field_from_text(args.field)
        s = _need(args.s, "s")
        if args.deriv:
            sv = SeriesValue(dedekind_zeta_deriv(field, s, args.deriv, opts), 0.0, opts.circle_nodes)
        else:
            sv = dedekind_zeta_value(field, s, opts)
    elif target == "lfun":
        field = field_from_text(args.field)
        if not field.factors:
            raise UsageError(f"{field} has no non-principal L-factors")
        if not 0 <= args.index < len(field.factors):
            raise UsageError(f"--index must lie in [0, {len(field.factors) - 1}]")
        sv = SeriesValue(dirichlet_l(field.factors[args.index], _need(args.s, "s"), opts), 0.0, 0)
    elif target == "steen":
        try:
            params = SteenParams(tuple(float(a) for a in args.params.split(",")))
        except ValueError as exc:
            raise UsageError(f"bad --params: {exc}") from None
        sv = steen_v(_need(args.z, "z"), params)
    elif target == "sigma":
        field = field_from_text(args.field)
        n = _need(args.n, "n")
        if n < 1:
            raise UsageError("--n must be positive")
        ell = _need(args.ell, "ell")
        ell = int(ell.real) if ell.imag == 0 and ell.real.is_integer() else ell
        sv = SeriesValue(complex(divisor_sigma(field, ell, n)), 0.0, 1)
    elif target == "fseries":
        field = field_from_text(args.field)
        sv = f_series(field, _need(args.k, "k"), _need(args.z, "z"), opts)
    else:
        field = field_from_text(args.field)
        r = residue_term(field, _need(args.k, "k"), _need(args.pole, "pole"), _need(args.z, "z"), opts)
        sv = SeriesValue(r.value, r.err_estimate, r.order_used)
    _emit_value(cfg, target, sv, out)
    return EXIT_OK


def _identity_from_args(args):
    flags = {key[2:]: val for key, val in vars(args).items() if key.startswith("p_") and val is not None}
    text = args.identity
    if ":" in text:
        ident = parse_identity(text)
        if flags:
            values = {k: v for k, v in ident.params}
            values.update(flags)
            ident = make_identity(ident.name, **values)
        return ident
    return make_identity(text, **flags)


def cmd_verify(args, cfg: CliConfig, out) -> int:
    ident = _identity_from_args(args)
    rep = verify_identity(ident, cfg.tol)
    if cfg.output == "json":
        out.write(rep.to_json() + "\n")
    else:
        out.write(rep.summary_line() + "\n")
        if rep.notes:
            out.write(f"notes: {rep.notes}\n")
    return EXIT_OK if rep.passed else EXIT_FAIL


def cmd_suite(args, cfg: CliConfig, out) -> int:
    patterns = []
    for item in args.filter:
        for piece in (p.strip() for p in item.split(",")):
            if not piece:
                continue
            # a bare key=value piece continues a full id such as main:field=Q,k=1,z=i
            if patterns and "=" in piece and ":" not in piece.split("=", 1)[0] and ":" in patterns[-1]:
                patterns[-1] += "," + piece
            else:
                patterns.append(piece)
    for pat in patterns:
        if not any(ch in pat for ch in "*?[") and pat.split(":", 1)[0] not in REGISTRY:
            raise UsageError(f"unknown identity {pat!r}")
    suite = run_suite(patterns, cfg.tol, cfg.parallelism)
    if cfg.output == "json":
        out.write(suite.to_jsonl())
    else:
        for rep in suite.reports:
            out.write(rep.summary_line() + "\n")
        s = suite.summary
        out.write(f"total={s['total']} passed={s['passed']} failed={s['failed']} flagged={s['flagged']}\n")
        for name, worst in s["worst_rel_err"].items():
            out.write(f"  {name:<24s} worst rel_err {worst:.2e}\n")
    return EXIT_OK if suite.ok else EXIT_FAIL


def cmd_table(args, cfg: CliConfig, out) -> int:
    field = field_from_text(args.field)
    lo, hi = args.range
    w = csv.writer(out, lineterminator="\n")
    if args.kind == "ideal_counts":
        if lo < 1:
            raise UsageError("range must start at 1 or above")
        a = ideal_counts(field, hi)
        w.writerow(["n", "a_F"])
        for n in range(lo, hi + 1):
            w.writerow([n, int(a[n])])
    elif args.kind == "sigma":
        if lo < 1:
            raise UsageError("range must start at 1 or above")
        ell = args.ell
        vals = sigma_array(field, ell, hi)
        w.writerow(["n", "sigma"])
        for n in range(lo, hi + 1):
            v = complex(vals[n])
            w.writerow([n, _fmt_num(v)])
    else:
        opts = EvalOptions()
        w.writerow(["s", "re", "im", "err_estimate"])
        for s in range(lo, hi + 1):
            if s == 1:
                continue
            sv = dedekind_zeta_value(field, float(s), opts)
            w.writerow([s, repr(sv.value.real), repr(sv.value.imag), f"{sv.err_estimate:.3e}"])
    return EXIT_OK


def _fmt_num(v: complex) -> str:
    if v.imag == 0:
        r = v.real
        return str(int(r)) if r.is_integer() and abs(r) < 2**53 else repr(r)
    return f"{v.real!r}{v.imag:+}i"


COMMANDS = {"eval": cmd_eval, "verify": cmd_verify, "suite": cmd_suite, "table": cmd_table}


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    err = sys.stderr
    try:
        tol = args.tol
        if tol is None and os.environ.get("DRL_DEFAULT_TOL"):
            tol = float(os.environ["DRL_DEFAULT_TOL"])
        cfg = CliConfig(getattr(args, "field", "Q"), tol, args.max_terms, args.output, args.parallelism)
        serieskit.TERM_CAP = cfg.max_terms
        buf = io.StringIO()
        code = COMMANDS[args.command](args, cfg, buf)
        out.write(buf.getvalue())
        return code
    except (UsageError, IdentityError, FieldError) as exc:
        err.write(f"drlab: error: {exc}\n")
        return EXIT_USAGE
    except (ZetaDomainError, SteenDomainError, SeriesCapError, ArithmeticError) as exc:
        err.write(f"drlab: numeric domain error: {exc}\n")
        return EXIT_DOMAIN
    except ValueError as exc:
        err.write(f"drlab: error: {exc}\n")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
