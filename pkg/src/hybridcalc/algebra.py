"""Exact symbolic algebra over hybrid quantum-classical generators.

Expressions live in the *-algebra generated by quantum canonical pairs
(q_m, p_m) obeying [q_m, p_n] = i for m == n (hbar = 1), classical
phase-space variables (x_d, k_d) that commute with everything, and
self-adjoint function letters such as V'(q - x).  Every public operation
returns the unique canonical form: each product is normal ordered as
positions, then function letters, then momenta; like terms are merged;
coefficients are exact Gaussian rationals.  No floating point is used
anywhere.
"""

from __future__ import annotations

import re as _re
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Mapping, Union

RationalLike = Union[int, Fraction]


class ValidationError(ValueError):
    """A value violates a structural rule of the algebra."""


class TableMismatchError(ValidationError):
    """Two expressions belong to different symbol tables."""


_NAME_RE = _re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")
_GENERATOR_NAME_RE = _re.compile(r"[qpxk][0-9]*\Z")

#: Names that the expression language claims for itself.
RESERVED_NAMES = frozenset({"i", "dag", "comm", "pb", "anderson", "alex"})


def _as_fraction(value: RationalLike) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    raise ValidationError(f"expected an exact rational, got {value!r}")


# ---------------------------------------------------------------------------
# Symbol table


@dataclass(frozen=True)
class FunctionSymbol:
    """A declared real function symbol, applied to linear arguments."""

    name: str
    real: bool = True

    def __post_init__(self) -> None:
        if not _NAME_RE.match(self.name):
            raise ValidationError(f"invalid function name {self.name!r}")
        if self.name in RESERVED_NAMES or _GENERATOR_NAME_RE.match(self.name):
            raise ValidationError(
                f"function name {self.name!r} collides with a reserved symbol")
        if not self.real:
            # Complex symbols would break self-adjointness of function letters.
            raise ValidationError(
                f"function {self.name!r} must be declared real")


@dataclass(frozen=True)
class SymbolTable:
    """Immutable declaration of the generators an expression may use.

    Quantum modes are numbered 1..quantum_modes and carry a canonical pair
    (q_m, p_m); classical degrees of freedom are numbered 1..classical_dofs
    and carry a commuting pair (x_d, k_d).
    """

    quantum_modes: int = 1
    classical_dofs: int = 1
    functions: tuple[FunctionSymbol, ...] = ()

    def __post_init__(self) -> None:
        if not isinstance(self.quantum_modes, int) or self.quantum_modes < 1:
            raise ValidationError("quantum_modes must be a positive integer")
        if not isinstance(self.classical_dofs, int) or self.classical_dofs < 1:
            raise ValidationError("classical_dofs must be a positive integer")
        object.__setattr__(self, "functions", tuple(self.functions))
        names = [f.name for f in self.functions]
        if len(set(names)) != len(names):
            raise ValidationError("duplicate function names in symbol table")

    def function(self, name: str) -> FunctionSymbol:
        for f in self.functions:
            if f.name == name:
                return f
        raise ValidationError(f"function {name!r} is not declared")

    def has_function(self, name: str) -> bool:
        return any(f.name == name for f in self.functions)


# ---------------------------------------------------------------------------
# Coefficients: exact Gaussian rationals


@dataclass(frozen=True)
class Coefficient:
    """An exact complex number re + im*i with rational parts."""

    re: Fraction = Fraction(0)
    im: Fraction = Fraction(0)

    def __post_init__(self) -> None:
        object.__setattr__(self, "re", _as_fraction(self.re))
        object.__setattr__(self, "im", _as_fraction(self.im))

    @classmethod
    def from_value(cls, value: CoefficientLike) -> "Coefficient":
        if isinstance(value, Coefficient):
            return value
        return cls(_as_fraction(value))

    def is_zero(self) -> bool:
        return not self.re and not self.im

    def conjugate(self) -> "Coefficient":
        return Coefficient(self.re, -self.im)

    def __add__(self, other: "Coefficient") -> "Coefficient":
        if not isinstance(other, Coefficient):
            return NotImplemented
        return Coefficient(self.re + other.re, self.im + other.im)

    def __neg__(self) -> "Coefficient":
        return Coefficient(-self.re, -self.im)

    def __sub__(self, other: "Coefficient") -> "Coefficient":
        if not isinstance(other, Coefficient):
            return NotImplemented
        return Coefficient(self.re - other.re, self.im - other.im)

    def __mul__(self, other):
        if isinstance(other, Coefficient):
            return Coefficient(
                self.re * other.re - self.im * other.im,
                self.re * other.im + self.im * other.re,
            )
        if isinstance(other, (int, Fraction)):
            return Coefficient(self.re * other, self.im * other)
        return NotImplemented

    __rmul__ = __mul__


CoefficientLike = Union[int, Fraction, Coefficient]

ZERO = Coefficient()
ONE = Coefficient(Fraction(1))
I = Coefficient(Fraction(0), Fraction(1))
MINUS_I = Coefficient(Fraction(0), Fraction(-1))


# ---------------------------------------------------------------------------
# Function letters


def _normalize_coeff_map(
    values: Mapping[int, RationalLike] | None, what: str
) -> tuple[tuple[int, Fraction], ...]:
    if not values:
        return ()
    out = []
    for index, coeff in values.items():
        if not isinstance(index, int) or index < 1:
            raise ValidationError(f"{what} index {index!r} must be a positive integer")
        frac = _as_fraction(coeff)
        if frac:
            out.append((index, frac))
    out.sort()
    return tuple(out)


@dataclass(frozen=True)
class LinearArg:
    """A hermitian real-linear combination of q, x, k plus a constant.

    Momenta are excluded by construction, which keeps every function letter
    commuting with positions and with other function letters.
    """

    q_coeffs: tuple[tuple[int, Fraction], ...] = ()
    x_coeffs: tuple[tuple[int, Fraction], ...] = ()
    k_coeffs: tuple[tuple[int, Fraction], ...] = ()
    constant: Fraction = Fraction(0)

    @classmethod
    def build(
        cls,
        q: Mapping[int, RationalLike] | None = None,
        x: Mapping[int, RationalLike] | None = None,
        k: Mapping[int, RationalLike] | None = None,
        constant: RationalLike = 0,
    ) -> "LinearArg":
        arg = cls(
            _normalize_coeff_map(q, "quantum mode"),
            _normalize_coeff_map(x, "classical dof"),
            _normalize_coeff_map(k, "classical dof"),
            _as_fraction(constant),
        )
        if not (arg.q_coeffs or arg.x_coeffs or arg.k_coeffs or arg.constant):
            raise ValidationError("function argument must not be identically zero")
        return arg

    def q_coeff(self, mode: int) -> Fraction:
        return dict(self.q_coeffs).get(mode, Fraction(0))

    def x_coeff(self, dof: int) -> Fraction:
        return dict(self.x_coeffs).get(dof, Fraction(0))

    def k_coeff(self, dof: int) -> Fraction:
        return dict(self.k_coeffs).get(dof, Fraction(0))

    def key(self) -> tuple:
        return (self.q_coeffs, self.x_coeffs, self.k_coeffs, self.constant)


@dataclass(frozen=True)
class FuncFactor:
    """A derivative-tagged function of a linear argument, e.g. V''(q - x)."""

    symbol: str
    deriv_order: int
    arg: LinearArg

    def __post_init__(self) -> None:
        if not isinstance(self.deriv_order, int) or self.deriv_order < 0:
            raise ValidationError("derivative order must be a nonnegative integer")

    def derivative(self) -> "FuncFactor":
        return FuncFactor(self.symbol, self.deriv_order + 1, self.arg)

    def key(self) -> tuple:
        return (self.symbol, self.deriv_order, self.arg.key())


# ---------------------------------------------------------------------------
# Classical monomials and quantum words


def _normalize_exponents(
    values: Mapping[int, int] | None, what: str
) -> tuple[tuple[int, int], ...]:
    if not values:
        return ()
    out = []
    for index, exponent in values.items():
        if not isinstance(index, int) or index < 1:
            raise ValidationError(f"{what} index {index!r} must be a positive integer")
        if not isinstance(exponent, int) or exponent < 0:
            raise ValidationError(f"exponent for {what} {index} must be nonnegative")
        if exponent:
            out.append((index, exponent))
    out.sort()
    return tuple(out)


@dataclass(frozen=True)
class ClassicalMonomial:
    """A commutative monomial in the classical variables x_d, k_d."""

    x_exponents: tuple[tuple[int, int], ...] = ()
    k_exponents: tuple[tuple[int, int], ...] = ()

    @classmethod
    def build(
        cls,
        x: Mapping[int, int] | None = None,
        k: Mapping[int, int] | None = None,
    ) -> "ClassicalMonomial":
        return cls(_normalize_exponents(x, "dof"), _normalize_exponents(k, "dof"))

    def is_empty(self) -> bool:
        return not self.x_exponents and not self.k_exponents

    def degree(self) -> int:
        return sum(e for _, e in self.x_exponents) + sum(e for _, e in self.k_exponents)

    def x_power(self, dof: int) -> int:
        return dict(self.x_exponents).get(dof, 0)

    def k_power(self, dof: int) -> int:
        return dict(self.k_exponents).get(dof, 0)

    def with_x(self, dof: int, exponent: int) -> "ClassicalMonomial":
        exps = dict(self.x_exponents)
        exps[dof] = exponent
        return ClassicalMonomial.build(exps, dict(self.k_exponents))

    def with_k(self, dof: int, exponent: int) -> "ClassicalMonomial":
        exps = dict(self.k_exponents)
        exps[dof] = exponent
        return ClassicalMonomial.build(dict(self.x_exponents), exps)

    def mul(self, other: "ClassicalMonomial") -> "ClassicalMonomial":
        xs = dict(self.x_exponents)
        for dof, e in other.x_exponents:
            xs[dof] = xs.get(dof, 0) + e
        ks = dict(self.k_exponents)
        for dof, e in other.k_exponents:
            ks[dof] = ks.get(dof, 0) + e
        return ClassicalMonomial.build(xs, ks)


EMPTY_MONOMIAL = ClassicalMonomial()


@dataclass(frozen=True)
class Pos:
    """Position letter q_mode inside a quantum word."""

    mode: int


@dataclass(frozen=True)
class Mom:
    """Momentum letter p_mode inside a quantum word."""

    mode: int


@dataclass(frozen=True)
class FuncLetter:
    """Function letter F inside a quantum word."""

    factor: FuncFactor


Letter = Union[Pos, Mom, FuncLetter]
Word = tuple  # tuple[Letter, ...]


def _letter_key(letter: Letter) -> tuple:
    # Normal order within a word: positions, then function letters, then
    # momenta; ties broken by mode / function identity.
    if isinstance(letter, Pos):
        return (0, (letter.mode,))
    if isinstance(letter, FuncLetter):
        return (1, letter.factor.key())
    return (2, (letter.mode,))


def is_canonical_word(word: Word) -> bool:
    keys = [_letter_key(l) for l in word]
    return all(keys[i] <= keys[i + 1] for i in range(len(keys) - 1))


# ---------------------------------------------------------------------------
# Terms and expressions


@dataclass(frozen=True)
class Term:
    coeff: Coefficient
    classical: ClassicalMonomial
    word: Word

    def degree(self) -> int:
        return self.classical.degree() + len(self.word)


@dataclass(frozen=True)
class HybridExpr:
    """A finite sum of terms over a fixed symbol table.

    Instances produced by the public operations are always canonical; the
    constructor itself accepts arbitrary well-formed term lists so that
    canonicalize() has something to chew on.
    """

    table: SymbolTable
    terms: tuple[Term, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "terms", tuple(self.terms))
        for term in self.terms:
            self._validate_term(term)

    def _validate_term(self, term: Term) -> None:
        table = self.table
        for dof, _ in term.classical.x_exponents + term.classical.k_exponents:
            if dof > table.classical_dofs:
                raise ValidationError(
                    f"classical dof {dof} out of range (table has {table.classical_dofs})")
        for letter in term.word:
            if isinstance(letter, (Pos, Mom)):
                if letter.mode > table.quantum_modes:
                    raise ValidationError(
                        f"quantum mode {letter.mode} out of range "
                        f"(table has {table.quantum_modes})")
            elif isinstance(letter, FuncLetter):
                factor = letter.factor
                table.function(factor.symbol)
                for mode, _ in factor.arg.q_coeffs:
                    if mode > table.quantum_modes:
                        raise ValidationError(
                            f"quantum mode {mode} out of range in function argument")
                for dof, _ in factor.arg.x_coeffs + factor.arg.k_coeffs:
                    if dof > table.classical_dofs:
                        raise ValidationError(
                            f"classical dof {dof} out of range in function argument")
            else:
                raise ValidationError(f"unknown word letter {letter!r}")

    # -- convenience operators ------------------------------------------------

    def __add__(self, other: "HybridExpr") -> "HybridExpr":
        if not isinstance(other, HybridExpr):
            return NotImplemented
        return add(self, other)

    def __sub__(self, other: "HybridExpr") -> "HybridExpr":
        if not isinstance(other, HybridExpr):
            return NotImplemented
        return sub(self, other)

    def __neg__(self) -> "HybridExpr":
        return scale(-1, self)

    def __mul__(self, other):
        if isinstance(other, HybridExpr):
            return mul(self, other)
        if isinstance(other, (int, Fraction, Coefficient)):
            return scale(other, self)
        return NotImplemented

    def __rmul__(self, other):
        if isinstance(other, (int, Fraction, Coefficient)):
            return scale(other, self)
        return NotImplemented

    def __pow__(self, exponent: int) -> "HybridExpr":
        if not isinstance(exponent, int) or exponent < 0:
            raise ValidationError("exponent must be a nonnegative integer")
        out = one(self.table)
        for _ in range(exponent):
            out = mul(out, self)
        return out

    def dagger(self) -> "HybridExpr":
        return dagger(self)

    def is_zero(self) -> bool:
        return is_zero(self)

    def is_hermitian(self) -> bool:
        return is_hermitian(self)


# ---------------------------------------------------------------------------
# Canonicalization


def _first_inversion(word: Word) -> int | None:
    for i in range(len(word) - 1):
        if _letter_key(word[i]) > _letter_key(word[i + 1]):
            return i
    return None


@lru_cache(maxsize=None)
def _normal_order(word: Word) -> tuple[tuple[Word, Coefficient], ...]:
    """Rewrite a word into a combination of normal-ordered words.

    Rules: p_m q_m -> q_m p_m - i, and p_m F -> F p_m - i*a_m*F' where a_m
    is the q_m coefficient of F's argument.  All other adjacent swaps are
    free.  Each rewrite either shortens the word or removes an inversion,
    so the loop terminates; the commuting-letter structure makes the result
    independent of the order in which inversions are resolved.
    """
    out: dict[Word, Coefficient] = {}
    pending: list[tuple[Word, Coefficient]] = [(word, ONE)]
    while pending:
        w, c = pending.pop()
        i = _first_inversion(w)
        if i is None:
            prev = out.get(w, ZERO)
            out[w] = prev + c
            continue
        a, b = w[i], w[i + 1]
        pending.append((w[:i] + (b, a) + w[i + 2:], c))
        if isinstance(a, Mom):
            if isinstance(b, Pos):
                if a.mode == b.mode:
                    pending.append((w[:i] + w[i + 2:], c * MINUS_I))
            elif isinstance(b, FuncLetter):
                rate = b.factor.arg.q_coeff(a.mode)
                if rate:
                    lifted = FuncLetter(b.factor.derivative())
                    pending.append(
                        (w[:i] + (lifted,) + w[i + 2:], c * Coefficient(Fraction(0), -rate)))
    return tuple((w, c) for w, c in out.items() if not c.is_zero())


def _term_sort_key(term: Term) -> tuple:
    # Deterministic global order: the interleaved factor sequence (word
    # letters, then classical letters) compared lexicographically, with
    # classical letters ranking below quantum ones and the pure constant
    # term sorting last.
    seq: list[tuple] = []
    for letter in term.word:
        rank, detail = _letter_key(letter)
        seq.append((rank + 2, detail))
    for dof, exponent in term.classical.x_exponents:
        seq.extend([(0, (dof,))] * exponent)
    for dof, exponent in term.classical.k_exponents:
        seq.extend([(1, (dof,))] * exponent)
    if not seq:
        return (1,)
    return (0, tuple(seq))


def canonicalize(expr: HybridExpr) -> HybridExpr:
    """Return the unique canonical form of an expression (idempotent)."""
    merged: dict[tuple[ClassicalMonomial, Word], Coefficient] = {}
    for term in expr.terms:
        if term.coeff.is_zero():
            continue
        for word, factor in _normal_order(term.word):
            key = (term.classical, word)
            merged[key] = merged.get(key, ZERO) + term.coeff * factor
    terms = [
        Term(coeff, classical, word)
        for (classical, word), coeff in merged.items()
        if not coeff.is_zero()
    ]
    terms.sort(key=_term_sort_key)
    return HybridExpr(expr.table, tuple(terms))


def _check_tables(a: HybridExpr, b: HybridExpr) -> None:
    if a.table != b.table:
        raise TableMismatchError("expressions belong to different symbol tables")


# ---------------------------------------------------------------------------
# Arithmetic


def add(a: HybridExpr, b: HybridExpr) -> HybridExpr:
    _check_tables(a, b)
    return canonicalize(HybridExpr(a.table, a.terms + b.terms))


def sub(a: HybridExpr, b: HybridExpr) -> HybridExpr:
    return add(a, scale(-1, b))


def mul(a: HybridExpr, b: HybridExpr) -> HybridExpr:
    _check_tables(a, b)
    return canonicalize(_raw_mul(a, b))


def scale(factor: CoefficientLike, expr: HybridExpr) -> HybridExpr:
    return canonicalize(_raw_scale(factor, expr))


def dagger(expr: HybridExpr) -> HybridExpr:
    """Hermitian conjugate: conjugate coefficients, reverse every word.

    All letters are self-adjoint (q, p hermitian; function letters are real
    functions of hermitian arguments), so only order and coefficients flip.
    """
    terms = tuple(
        Term(t.coeff.conjugate(), t.classical, tuple(reversed(t.word)))
        for t in expr.terms
    )
    return canonicalize(HybridExpr(expr.table, terms))


def equals(a: HybridExpr, b: HybridExpr) -> bool:
    _check_tables(a, b)
    return canonicalize(a).terms == canonicalize(b).terms


def is_zero(expr: HybridExpr) -> bool:
    return not canonicalize(expr).terms


def is_hermitian(expr: HybridExpr) -> bool:
    return equals(expr, dagger(expr))


# -- raw (non-canonicalizing) combinators, used by the independent oracle ----


def _raw_mul(a: HybridExpr, b: HybridExpr) -> HybridExpr:
    _check_tables(a, b)
    terms = tuple(
        Term(ta.coeff * tb.coeff, ta.classical.mul(tb.classical), ta.word + tb.word)
        for ta in a.terms
        for tb in b.terms
    )
    return HybridExpr(a.table, terms)


def _raw_add(a: HybridExpr, b: HybridExpr) -> HybridExpr:
    _check_tables(a, b)
    return HybridExpr(a.table, a.terms + b.terms)


def _raw_scale(factor: CoefficientLike, expr: HybridExpr) -> HybridExpr:
    c = Coefficient.from_value(factor)
    return HybridExpr(
        expr.table, tuple(Term(c * t.coeff, t.classical, t.word) for t in expr.terms))


# ---------------------------------------------------------------------------
# Builders


def zero(table: SymbolTable) -> HybridExpr:
    return HybridExpr(table, ())


def one(table: SymbolTable) -> HybridExpr:
    return constant(table, 1)


def constant(table: SymbolTable, value: CoefficientLike) -> HybridExpr:
    c = Coefficient.from_value(value)
    if c.is_zero():
        return zero(table)
    return HybridExpr(table, (Term(c, EMPTY_MONOMIAL, ()),))


def q(table: SymbolTable, mode: int = 1) -> HybridExpr:
    return HybridExpr(table, (Term(ONE, EMPTY_MONOMIAL, (Pos(mode),)),))


def p(table: SymbolTable, mode: int = 1) -> HybridExpr:
    return HybridExpr(table, (Term(ONE, EMPTY_MONOMIAL, (Mom(mode),)),))


def x(table: SymbolTable, dof: int = 1) -> HybridExpr:
    return HybridExpr(
        table, (Term(ONE, ClassicalMonomial.build(x={dof: 1}), ()),))


def k(table: SymbolTable, dof: int = 1) -> HybridExpr:
    return HybridExpr(
        table, (Term(ONE, ClassicalMonomial.build(k={dof: 1}), ()),))


def func(table: SymbolTable, name: str, deriv_order: int, arg: LinearArg) -> HybridExpr:
    factor = FuncFactor(name, deriv_order, arg)
    return HybridExpr(table, (Term(ONE, EMPTY_MONOMIAL, (FuncLetter(factor),)),))


def expr_from_terms(table: SymbolTable, terms: Iterable[Term]) -> HybridExpr:
    """Canonical expression from an arbitrary term list."""
    return canonicalize(HybridExpr(table, tuple(terms)))
