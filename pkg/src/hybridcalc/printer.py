"""Deterministic rendering of canonical expressions.

The output re-parses to an equal expression: explicit '*', '^' powers,
rationals as a/b, the imaginary unit as i, derivatives as repeated primes.
"""

from __future__ import annotations

from fractions import Fraction

from .algebra import (
    ClassicalMonomial,
    Coefficient,
    FuncFactor,
    FuncLetter,
    HybridExpr,
    LinearArg,
    Mom,
    Pos,
    SymbolTable,
    Word,
)


def frac_str(value: Fraction) -> str:
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def symbol_name(kind: str, index: int, count: int) -> str:
    # Single-mode tables print bare names so the familiar q, p, x, k appear.
    if count == 1:
        return kind
    return f"{kind}{index}"


def render_linear_arg(arg: LinearArg, table: SymbolTable) -> str:
    parts: list[tuple[Fraction, str | None]] = []
    for mode, coeff in arg.q_coeffs:
        parts.append((coeff, symbol_name("q", mode, table.quantum_modes)))
    for dof, coeff in arg.x_coeffs:
        parts.append((coeff, symbol_name("x", dof, table.classical_dofs)))
    for dof, coeff in arg.k_coeffs:
        parts.append((coeff, symbol_name("k", dof, table.classical_dofs)))
    if arg.constant:
        parts.append((arg.constant, None))
    pieces: list[str] = []
    for coeff, name in parts:
        negative = coeff < 0
        magnitude = -coeff if negative else coeff
        if name is None:
            body = frac_str(magnitude)
        elif magnitude == 1:
            body = name
        else:
            body = f"{frac_str(magnitude)}*{name}"
        if not pieces:
            pieces.append(f"-{body}" if negative else body)
        else:
            pieces.append(f" - {body}" if negative else f" + {body}")
    return "".join(pieces)


def render_func(factor: FuncFactor, table: SymbolTable) -> str:
    primes = "'" * factor.deriv_order
    return f"{factor.symbol}{primes}({render_linear_arg(factor.arg, table)})"


def _grouped_powers(items: list[str]) -> list[str]:
    out: list[str] = []
    i = 0
    while i < len(items):
        j = i
        while j < len(items) and items[j] == items[i]:
            j += 1
        out.append(items[i] if j - i == 1 else f"{items[i]}^{j - i}")
        i = j
    return out


def _classical_factors(mono: ClassicalMonomial, table: SymbolTable) -> list[str]:
    out = []
    for dof, exponent in mono.x_exponents:
        name = symbol_name("x", dof, table.classical_dofs)
        out.append(name if exponent == 1 else f"{name}^{exponent}")
    for dof, exponent in mono.k_exponents:
        name = symbol_name("k", dof, table.classical_dofs)
        out.append(name if exponent == 1 else f"{name}^{exponent}")
    return out


def _word_factors(word: Word, table: SymbolTable) -> list[str]:
    rendered = []
    for letter in word:
        if isinstance(letter, Pos):
            rendered.append(symbol_name("q", letter.mode, table.quantum_modes))
        elif isinstance(letter, Mom):
            rendered.append(symbol_name("p", letter.mode, table.quantum_modes))
        elif isinstance(letter, FuncLetter):
            rendered.append(render_func(letter.factor, table))
    return _grouped_powers(rendered)


def _coeff_parts(coeff: Coefficient) -> tuple[bool, str | None]:
    """Split a coefficient into (is_negative, magnitude text).

    The magnitude text is None when it is exactly 1 and can be elided in
    front of other factors.
    """
    re_, im = coeff.re, coeff.im
    if im == 0:
        negative = re_ < 0
        magnitude = -re_ if negative else re_
        return negative, None if magnitude == 1 else frac_str(magnitude)
    if re_ == 0:
        negative = im < 0
        magnitude = -im if negative else im
        return negative, "i" if magnitude == 1 else f"{frac_str(magnitude)}*i"
    negative = re_ < 0
    c = -coeff if negative else coeff
    im_mag = c.im if c.im > 0 else -c.im
    im_txt = "i" if im_mag == 1 else f"{frac_str(im_mag)}*i"
    sign = "+" if c.im > 0 else "-"
    return negative, f"({frac_str(c.re)} {sign} {im_txt})"


def pretty(expr: HybridExpr) -> str:
    """Canonical textual rendering; parse(pretty(e)) == e."""
    if not expr.terms:
        return "0"
    pieces: list[str] = []
    for term in expr.terms:
        negative, coeff_txt = _coeff_parts(term.coeff)
        factors = _classical_factors(term.classical, expr.table)
        factors += _word_factors(term.word, expr.table)
        if coeff_txt is None:
            body = "*".join(factors) if factors else "1"
        elif factors:
            body = "*".join([coeff_txt] + factors)
        else:
            body = coeff_txt
        if not pieces:
            pieces.append(f"-{body}" if negative else body)
        else:
            pieces.append(f" - {body}" if negative else f" + {body}")
    return "".join(pieces)
