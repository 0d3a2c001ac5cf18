"""Defect computations and pass/fail verdicts.

Each check computes a canonical witness expression (the defect) measuring
how far a law is from holding: antisymmetry of a bracket, the Leibniz rule
under time evolution, hermiticity of a time derivative, or conservation of
an observable.  A failing check is a result, never an error.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Mapping

from .algebra import (
    HybridExpr,
    ValidationError,
    add,
    dagger,
    is_zero,
    mul,
    sub,
)
from .calculus import BracketKind, bracket, eom
from .printer import pretty


class CheckKind(enum.Enum):
    ANTISYMMETRY = "antisymmetry"
    LEIBNIZ = "leibniz"
    HERMITICITY_OF_EOM = "hermiticity_of_eom"
    CONSERVATION = "conservation"

    @classmethod
    def from_name(cls, name: str) -> "CheckKind":
        for kind in cls:
            if kind.value == name:
                return kind
        raise ValidationError(f"unknown check kind {name!r}")


@dataclass(frozen=True)
class CheckSpec:
    """One declared check inside a scenario, with everything pre-parsed."""

    kind: CheckKind
    bracket: BracketKind
    expect: str | None
    exprs: Mapping[str, HybridExpr]
    texts: Mapping[str, str]


@dataclass(frozen=True, eq=False)
class CheckReport:
    """Outcome of one check: inputs as rendered text plus the defect witness."""

    kind: CheckKind
    bracket: BracketKind
    inputs: dict[str, str]
    passed: bool
    defect: HybridExpr

    @classmethod
    def build(cls, kind, bracket_kind, inputs, defect) -> "CheckReport":
        # passed is derived, never stated independently of the witness.
        return cls(kind, bracket_kind, dict(inputs), is_zero(defect), defect)


def antisymmetry_defect(kind: BracketKind, a: HybridExpr, b: HybridExpr) -> HybridExpr:
    """bracket(a,b) + bracket(b,a); zero iff the bracket is antisymmetric here."""
    return add(bracket(kind, a, b), bracket(kind, b, a))


def leibniz_defect(
    kind: BracketKind, a: HybridExpr, b: HybridExpr, h: HybridExpr
) -> HybridExpr:
    """d(a*b)/dt minus the Leibniz expansion da/dt * b + a * db/dt.

    The factor order is preserved exactly as written; the defect for (a, b)
    and for (b, a) generally differ and only their sum is meaningful for a
    symmetrized product.
    """
    direct = eom(kind, mul(a, b), h)
    expanded = add(mul(eom(kind, a, h), b), mul(a, eom(kind, b, h)))
    return sub(direct, expanded)


def hermiticity_defect(expr: HybridExpr) -> HybridExpr:
    """expr - dagger(expr): twice the antihermitian part."""
    return sub(expr, dagger(expr))


def conservation_check(kind: BracketKind, a: HybridExpr, h: HybridExpr) -> CheckReport:
    """Is the observable a conserved under h? The defect is its time derivative."""
    defect = eom(kind, a, h)
    inputs = {"observable": pretty(a), "hamiltonian": pretty(h)}
    return CheckReport.build(CheckKind.CONSERVATION, kind, inputs, defect)


def run_checks(scenario) -> list[CheckReport]:
    """Evaluate every check declared in a scenario, in order.

    Scenario validation happens at parse time; here a failing check simply
    produces a report with passed=False and a nonzero defect.
    """
    reports: list[CheckReport] = []
    for spec in scenario.checks:
        kind = spec.kind
        b = spec.bracket
        h = spec.exprs.get("hamiltonian", scenario.hamiltonian)
        inputs = dict(spec.texts)
        if kind is CheckKind.ANTISYMMETRY:
            defect = antisymmetry_defect(b, spec.exprs["a"], spec.exprs["b"])
        elif kind is CheckKind.LEIBNIZ:
            d_ab = leibniz_defect(b, spec.exprs["a"], spec.exprs["b"], h)
            d_ba = leibniz_defect(b, spec.exprs["b"], spec.exprs["a"], h)
            inputs["defect_ab"] = pretty(d_ab)
            inputs["defect_ba"] = pretty(d_ba)
            defect = add(d_ab, d_ba)
        elif kind is CheckKind.HERMITICITY_OF_EOM:
            rate = eom(b, spec.exprs["observable"], h)
            inputs["eom"] = pretty(rate)
            defect = hermiticity_defect(rate)
        elif kind is CheckKind.CONSERVATION:
            defect = eom(b, spec.exprs["observable"], h)
        else:  # pragma: no cover - enum is exhaustive
            raise ValidationError(f"unknown check kind {kind!r}")
        reports.append(CheckReport.build(kind, b, inputs, defect))
    return reports
