"""Value and report records shared by the numeric modules and the CLI."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Any


@dataclass(frozen=True)
class SeriesValue:
    """A computed value with a heuristic error estimate and the number of terms used."""

    value: complex
    err_estimate: float = 0.0
    terms_used: int = 0

    def __post_init__(self):
        if not self.err_estimate >= 0:
            object.__setattr__(self, "err_estimate", abs(self.err_estimate))

    def __complex__(self) -> complex:
        return complex(self.value)


def _pair(z: complex) -> list:
    z = complex(z)
    return [z.real, z.imag]


@dataclass
class CheckReport:
    """LHS/RHS comparison for one identity instance."""

    id: str
    lhs: complex
    rhs: complex
    tol: float
    params: dict = field(default_factory=dict)
    notes: str = ""
    abs_err: float = math.nan
    rel_err: float = math.nan
    passed: bool = False

    def __post_init__(self):
        self.lhs = complex(self.lhs)
        self.rhs = complex(self.rhs)
        if math.isnan(self.abs_err):
            self.abs_err = abs(self.lhs - self.rhs)
            self.rel_err = self.abs_err / max(abs(self.lhs), abs(self.rhs), 1e-300)
            finite = math.isfinite(self.abs_err)
            self.passed = finite and (self.abs_err <= self.tol or self.rel_err <= self.tol)

    @property
    def diagnostic(self) -> bool:
        return "diagnostic" in self.notes

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "params": self.params,
            "lhs": _pair(self.lhs),
            "rhs": _pair(self.rhs),
            "abs_err": self.abs_err,
            "rel_err": self.rel_err,
            "pass": self.passed,
            "tol": self.tol,
            "notes": self.notes,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "CheckReport":
        return cls(
            id=d["id"],
            lhs=complex(*d["lhs"]),
            rhs=complex(*d["rhs"]),
            tol=d["tol"],
            params=d.get("params", {}),
            notes=d.get("notes", ""),
            abs_err=d["abs_err"],
            rel_err=d["rel_err"],
            passed=d["pass"],
        )

    @classmethod
    def from_json(cls, text: str) -> "CheckReport":
        return cls.from_dict(json.loads(text))

    def __eq__(self, other) -> bool:
        if not isinstance(other, CheckReport):
            return NotImplemented
        return self.to_dict() == other.to_dict()

    def summary_line(self) -> str:
        status = "PASS" if self.passed else ("FLAG" if self.diagnostic else "FAIL")
        return (
            f"{status} {self.id}  lhs={self.lhs:.15g}  rhs={self.rhs:.15g}  "
            f"abs={self.abs_err:.2e}  rel={self.rel_err:.2e}  tol={self.tol:.0e}"
        )
