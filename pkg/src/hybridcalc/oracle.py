"""Independent brute-force equivalence tester.

Quantum generators are represented as exact differential operators on
polynomials: q_m multiplies by the formal variable s_m and p_m applies
-i * d/ds_m, so [q_m, p_m] = i holds exactly on every polynomial.
Classical variables ride along symbolically.  Function letters are first
concretized to monomial powers of their argument.  None of this touches
the normal-ordering engine, so agreement between a raw expression and its
canonical form is genuine independent evidence.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction

from .algebra import (
    ClassicalMonomial,
    Coefficient,
    EMPTY_MONOMIAL,
    FuncLetter,
    HybridExpr,
    MINUS_I,
    Mom,
    ONE,
    Pos,
    Term,
    ValidationError,
    ZERO,
    _check_tables,
    _raw_add,
    _raw_mul,
    _raw_scale,
)
from .calculus import BracketKind, pd_k, pd_x

I_HALF = Coefficient(Fraction(0), Fraction(1, 2))
MINUS_I_HALF = Coefficient(Fraction(0), Fraction(-1, 2))


class OracleError(ValidationError):
    """The oracle configuration does not cover the expressions under test."""


@dataclass
class OracleConfig:
    """Test-state degree bound and function concretization powers.

    Each function symbol is replaced by (argument)^g with g strictly above
    every derivative order that appears, so no concretized derivative
    collapses to zero; distinct symbols get distinct g to avoid accidental
    coincidences.
    """

    max_test_degree: int
    func_powers: dict[str, int] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not isinstance(self.max_test_degree, int) or self.max_test_degree < 0:
            raise OracleError("max_test_degree must be a nonnegative integer")
        powers = list(self.func_powers.values())
        if len(set(powers)) != len(powers):
            raise OracleError("distinct function symbols need distinct powers")
        for name, g in self.func_powers.items():
            if not isinstance(g, int) or g < 1:
                raise OracleError(f"power for {name!r} must be a positive integer")

    @classmethod
    def for_exprs(cls, *exprs: HybridExpr, min_degree: int = 4) -> "OracleConfig":
        """Derive a valid configuration covering the given expressions."""
        max_deriv = _max_derivative_orders(*exprs)
        powers = {}
        for offset, name in enumerate(sorted(max_deriv)):
            powers[name] = max_deriv[name] + 1 + offset
        degree = min_degree
        for expr in exprs:
            for term in expr.terms:
                per_mode: dict[int, int] = {}
                for letter in term.word:
                    if isinstance(letter, Mom):
                        per_mode[letter.mode] = per_mode.get(letter.mode, 0) + 1
                for count in per_mode.values():
                    degree = max(degree, count)
        return cls(degree, powers)


def _max_derivative_orders(*exprs: HybridExpr) -> dict[str, int]:
    orders: dict[str, int] = {}
    for expr in exprs:
        for term in expr.terms:
            for letter in term.word:
                if isinstance(letter, FuncLetter):
                    name = letter.factor.symbol
                    orders[name] = max(orders.get(name, -1), letter.factor.deriv_order)
    return orders


# ---------------------------------------------------------------------------
# Polynomial states


@dataclass(frozen=True)
class PolyState:
    """Exact polynomial in s_1..s_n with hybrid classical coefficients."""

    n_modes: int
    coeffs: tuple[tuple[tuple[tuple[int, ...], ClassicalMonomial], Coefficient], ...]

    @classmethod
    def _from_dict(cls, n_modes, data) -> "PolyState":
        items = tuple(sorted(
            ((key, c) for key, c in data.items() if not c.is_zero()),
            key=lambda kv: (kv[0][0], kv[0][1].x_exponents, kv[0][1].k_exponents),
        ))
        return cls(n_modes, items)

    @classmethod
    def zero(cls, n_modes: int) -> "PolyState":
        return cls(n_modes, ())

    @classmethod
    def monomial(cls, n_modes: int, exponents: tuple[int, ...]) -> "PolyState":
        if len(exponents) != n_modes:
            raise OracleError("monomial exponent tuple has the wrong length")
        return cls._from_dict(n_modes, {(tuple(exponents), EMPTY_MONOMIAL): ONE})

    def _data(self) -> dict:
        return dict(self.coeffs)

    def add(self, other: "PolyState") -> "PolyState":
        data = self._data()
        for key, c in other.coeffs:
            data[key] = data.get(key, ZERO) + c
        return PolyState._from_dict(self.n_modes, data)

    def scale(self, factor: Coefficient) -> "PolyState":
        return PolyState._from_dict(
            self.n_modes, {key: factor * c for key, c in self.coeffs})

    def mul_s(self, mode: int) -> "PolyState":
        data = {}
        for (exps, mono), c in self.coeffs:
            lifted = list(exps)
            lifted[mode - 1] += 1
            data[(tuple(lifted), mono)] = c
        return PolyState._from_dict(self.n_modes, data)

    def diff_s(self, mode: int) -> "PolyState":
        data: dict = {}
        for (exps, mono), c in self.coeffs:
            e = exps[mode - 1]
            if e:
                lowered = list(exps)
                lowered[mode - 1] = e - 1
                key = (tuple(lowered), mono)
                data[key] = data.get(key, ZERO) + c * e
        return PolyState._from_dict(self.n_modes, data)

    def mul_classical(self, mono: ClassicalMonomial) -> "PolyState":
        if mono.is_empty():
            return self
        data = {}
        for (exps, old), c in self.coeffs:
            data[(exps, old.mul(mono))] = c
        return PolyState._from_dict(self.n_modes, data)

    def is_zero(self) -> bool:
        return not self.coeffs


# ---------------------------------------------------------------------------
# Concretization of function letters


def _linear_arg_poly(arg) -> dict[tuple, Fraction]:
    # Keys are (q_exps sorted tuple, x_exps, k_exps); values are rational.
    poly: dict[tuple, Fraction] = {}
    for mode, coeff in arg.q_coeffs:
        poly[(((mode, 1),), (), ())] = coeff
    for dof, coeff in arg.x_coeffs:
        key = ((), ((dof, 1),), ())
        poly[key] = poly.get(key, Fraction(0)) + coeff
    for dof, coeff in arg.k_coeffs:
        key = ((), (), ((dof, 1),))
        poly[key] = poly.get(key, Fraction(0)) + coeff
    if arg.constant:
        poly[((), (), ())] = arg.constant
    return poly


def _poly_mul(a: dict, b: dict) -> dict:
    out: dict[tuple, Fraction] = {}
    for (qa, xa, ka), ca in a.items():
        for (qb, xb, kb), cb in b.items():
            key = (_merge_exps(qa, qb), _merge_exps(xa, xb), _merge_exps(ka, kb))
            out[key] = out.get(key, Fraction(0)) + ca * cb
    return {key: c for key, c in out.items() if c}


def _merge_exps(a: tuple, b: tuple) -> tuple:
    merged = dict(a)
    for index, e in b:
        merged[index] = merged.get(index, 0) + e
    return tuple(sorted(merged.items()))


def _concretize_factor(factor, g: int) -> list[tuple[Fraction, tuple, ClassicalMonomial]]:
    """Expand F(symbol, n, arg) as g(g-1)...(g-n+1) * arg^(g-n).

    Returns (rational coefficient, q-letter tuple, classical monomial)
    pieces; the q letters commute with everything to the left of the
    original function letter, so splicing them in place is exact.
    """
    n = factor.deriv_order
    if g <= n:
        raise OracleError(
            f"power {g} for {factor.symbol!r} does not exceed derivative order {n}")
    scalar = Fraction(1)
    for j in range(n):
        scalar *= (g - j)
    power = {((), (), ()): Fraction(1)}
    base = _linear_arg_poly(factor.arg)
    for _ in range(g - n):
        power = _poly_mul(power, base)
    pieces = []
    for (q_exps, x_exps, k_exps), coeff in power.items():
        letters = tuple(
            Pos(mode) for mode, e in q_exps for _ in range(e))
        mono = ClassicalMonomial(x_exps, k_exps)
        pieces.append((scalar * coeff, letters, mono))
    return pieces


def concretize_functions(expr: HybridExpr, cfg: OracleConfig) -> HybridExpr:
    """Replace every function letter by a polynomial, without normal ordering.

    The result is a raw expression (words are left exactly where the
    original letters sat) so that it can be fed to rep_apply directly.
    """
    orders = _max_derivative_orders(expr)
    for name, order in orders.items():
        if name not in cfg.func_powers:
            raise OracleError(f"no concretization power configured for {name!r}")
        if cfg.func_powers[name] <= order:
            raise OracleError(
                f"power {cfg.func_powers[name]} for {name!r} does not exceed "
                f"derivative order {order}")
    out: list[Term] = []
    for term in expr.terms:
        partials: list[tuple[Coefficient, ClassicalMonomial, tuple]] = [
            (term.coeff, term.classical, ())]
        for letter in term.word:
            if isinstance(letter, FuncLetter):
                pieces = _concretize_factor(
                    letter.factor, cfg.func_powers[letter.factor.symbol])
                partials = [
                    (c * piece_coeff, mono.mul(piece_mono), word + piece_letters)
                    for c, mono, word in partials
                    for piece_coeff, piece_letters, piece_mono in pieces
                ]
            else:
                partials = [(c, mono, word + (letter,)) for c, mono, word in partials]
        for c, mono, word in partials:
            if not c.is_zero():
                out.append(Term(c, mono, word))
    return HybridExpr(expr.table, tuple(out))


# ---------------------------------------------------------------------------
# Operator application and equality testing


def rep_apply(expr: HybridExpr, state: PolyState) -> PolyState:
    """Apply a function-free expression as an operator to a polynomial state.

    Word letters act right to left: q_m multiplies by s_m, p_m applies
    -i * d/ds_m; classical monomials and coefficients multiply through.
    """
    if state.n_modes != expr.table.quantum_modes:
        raise OracleError("state has the wrong number of modes for this table")
    total = PolyState.zero(state.n_modes)
    for term in expr.terms:
        current = state
        for letter in reversed(term.word):
            if isinstance(letter, Pos):
                current = current.mul_s(letter.mode)
            elif isinstance(letter, Mom):
                current = current.diff_s(letter.mode).scale(MINUS_I)
            else:
                raise OracleError(
                    "function letter encountered; concretize the expression first")
        current = current.scale(term.coeff).mul_classical(term.classical)
        total = total.add(current)
    return total


def oracle_equal(a: HybridExpr, b: HybridExpr, cfg: OracleConfig) -> bool:
    """Compare two expressions by their action on all small test monomials.

    For function-free inputs this is a complete equality test once
    max_test_degree reaches the maximum per-mode momentum degree of a - b;
    with concretized functions it is sound for refutation and serves as
    corroboration.
    """
    _check_tables(a, b)
    ca = concretize_functions(a, cfg)
    cb = concretize_functions(b, cfg)
    n = a.table.quantum_modes
    for exponents in itertools.product(range(cfg.max_test_degree + 1), repeat=n):
        state = PolyState.monomial(n, tuple(exponents))
        if rep_apply(ca, state) != rep_apply(cb, state):
            return False
    return True


# ---------------------------------------------------------------------------
# Raw bracket combinations (for double-checking printed identities)


def raw_bracket_combination(kind: BracketKind, a: HybridExpr, b: HybridExpr) -> HybridExpr:
    """The defining combination of a bracket, built without normal ordering.

    Products are raw concatenations, so comparing this against the engine's
    bracket output via oracle_equal exercises the normal-ordering and
    merging machinery end to end.
    """
    _check_tables(a, b)
    comm = _raw_add(_raw_mul(a, b), _raw_scale(-1, _raw_mul(b, a)))
    if kind is BracketKind.COMMUTATOR:
        return comm

    def raw_poisson(u: HybridExpr, v: HybridExpr) -> HybridExpr:
        total = HybridExpr(u.table, ())
        for dof in range(1, u.table.classical_dofs + 1):
            left = _raw_mul(pd_x(u, dof), pd_k(v, dof))
            right = _raw_scale(-1, _raw_mul(pd_k(u, dof), pd_x(v, dof)))
            total = _raw_add(total, _raw_add(left, right))
        return total

    if kind is BracketKind.POISSON:
        return raw_poisson(a, b)
    if kind is BracketKind.ANDERSON:
        return _raw_add(comm, _raw_scale(Coefficient(Fraction(0), Fraction(1)),
                                         raw_poisson(a, b)))
    if kind is BracketKind.ALEKSANDROV:
        return _raw_add(comm, _raw_add(
            _raw_scale(I_HALF, raw_poisson(a, b)),
            _raw_scale(MINUS_I_HALF, raw_poisson(b, a)),
        ))
    raise ValidationError(f"unknown bracket kind {kind!r}")


def raw_eom_combination(kind: BracketKind, a: HybridExpr, h: HybridExpr) -> HybridExpr:
    if kind is BracketKind.POISSON:
        raise ValidationError("the plain poisson bracket does not generate time evolution")
    return _raw_scale(MINUS_I, raw_bracket_combination(kind, a, h))
