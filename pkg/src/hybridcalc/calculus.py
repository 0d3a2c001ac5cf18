"""Derivations and brackets on hybrid expressions.

Provides the classical partial derivatives, the commutator, the ordered
Poisson bracket, the two hybrid bracket conventions (the one-sided
"anderson" form and the antisymmetric "aleksandrov" form), and the
equation-of-motion operator dA/dt = -i * bracket(A, H).
"""

from __future__ import annotations

import enum
from fractions import Fraction

from .algebra import (
    Coefficient,
    FuncLetter,
    HybridExpr,
    MINUS_I,
    I,
    Term,
    ValidationError,
    _check_tables,
    add,
    canonicalize,
    mul,
    scale,
    sub,
    zero,
)

I_HALF = Coefficient(Fraction(0), Fraction(1, 2))
MINUS_I_HALF = Coefficient(Fraction(0), Fraction(-1, 2))


class BracketKind(enum.Enum):
    """Selector among the supported bracket operations."""

    COMMUTATOR = "commutator"
    POISSON = "poisson"
    ANDERSON = "anderson"
    ALEKSANDROV = "aleksandrov"

    @classmethod
    def from_name(cls, name: str) -> "BracketKind":
        for kind in cls:
            if kind.value == name:
                return kind
        raise ValidationError(f"unknown bracket kind {name!r}")


def _check_dof(expr: HybridExpr, dof: int) -> None:
    if not isinstance(dof, int) or not 1 <= dof <= expr.table.classical_dofs:
        raise ValidationError(
            f"classical dof {dof} out of range (table has {expr.table.classical_dofs})")


def pd_x(expr: HybridExpr, dof: int = 1) -> HybridExpr:
    """Partial derivative with respect to the classical position x_dof."""
    _check_dof(expr, dof)
    out: list[Term] = []
    for term in expr.terms:
        exponent = term.classical.x_power(dof)
        if exponent:
            out.append(Term(
                term.coeff * exponent,
                term.classical.with_x(dof, exponent - 1),
                term.word,
            ))
        for i, letter in enumerate(term.word):
            if isinstance(letter, FuncLetter):
                rate = letter.factor.arg.x_coeff(dof)
                if rate:
                    lifted = FuncLetter(letter.factor.derivative())
                    out.append(Term(
                        term.coeff * rate,
                        term.classical,
                        term.word[:i] + (lifted,) + term.word[i + 1:],
                    ))
    return canonicalize(HybridExpr(expr.table, tuple(out)))


def pd_k(expr: HybridExpr, dof: int = 1) -> HybridExpr:
    """Partial derivative with respect to the classical momentum k_dof."""
    _check_dof(expr, dof)
    out: list[Term] = []
    for term in expr.terms:
        exponent = term.classical.k_power(dof)
        if exponent:
            out.append(Term(
                term.coeff * exponent,
                term.classical.with_k(dof, exponent - 1),
                term.word,
            ))
        for i, letter in enumerate(term.word):
            if isinstance(letter, FuncLetter):
                rate = letter.factor.arg.k_coeff(dof)
                if rate:
                    lifted = FuncLetter(letter.factor.derivative())
                    out.append(Term(
                        term.coeff * rate,
                        term.classical,
                        term.word[:i] + (lifted,) + term.word[i + 1:],
                    ))
    return canonicalize(HybridExpr(expr.table, tuple(out)))


def commutator(a: HybridExpr, b: HybridExpr) -> HybridExpr:
    """[a, b] = a*b - b*a in canonical form."""
    _check_tables(a, b)
    return sub(mul(a, b), mul(b, a))


def poisson(a: HybridExpr, b: HybridExpr) -> HybridExpr:
    """Ordered Poisson bracket {a, b}.

    Sum over classical dofs of dx(a)*dk(b) - dk(a)*dx(b), with the
    a-derivative always multiplied on the left and the b-derivative on the
    right.  The operand order matters because the factors need not commute.
    """
    _check_tables(a, b)
    total = zero(a.table)
    for dof in range(1, a.table.classical_dofs + 1):
        total = add(total, sub(
            mul(pd_x(a, dof), pd_k(b, dof)),
            mul(pd_k(a, dof), pd_x(b, dof)),
        ))
    return total


def bracket(kind: BracketKind, a: HybridExpr, b: HybridExpr) -> HybridExpr:
    """Evaluate the selected bracket of a and b."""
    _check_tables(a, b)
    if kind is BracketKind.COMMUTATOR:
        return commutator(a, b)
    if kind is BracketKind.POISSON:
        return poisson(a, b)
    if kind is BracketKind.ANDERSON:
        return add(commutator(a, b), scale(I, poisson(a, b)))
    if kind is BracketKind.ALEKSANDROV:
        return add(
            commutator(a, b),
            add(
                scale(I_HALF, poisson(a, b)),
                scale(MINUS_I_HALF, poisson(b, a)),
            ),
        )
    raise ValidationError(f"unknown bracket kind {kind!r}")


def eom(kind: BracketKind, a: HybridExpr, h: HybridExpr) -> HybridExpr:
    """Time derivative of a under the Hamiltonian h: -i * bracket(a, h)."""
    if kind is BracketKind.POISSON:
        raise ValidationError("the plain poisson bracket does not generate time evolution")
    return scale(MINUS_I, bracket(kind, a, h))
