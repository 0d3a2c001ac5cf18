"""Textual expression language and scenario-file reader.

Grammar (explicit '*' required, '^' for powers, primes for derivatives):

    sum     := prod (('+' | '-') prod)*
    prod    := unary ('*' unary)*
    unary   := '-' unary | power
    power   := atom ('^' nat)?
    atom    := rational | 'i' | symbol | funcapp | builtin '(' args ')'
             | '(' sum ')'
    symbol  := ('q' | 'p' | 'x' | 'k') index?        (index defaults to 1)
    funcapp := ident primes '(' sum ')'               (sum must be linear)

Builtins: dag(e), comm(a,b), pb(a,b), anderson(a,b), alex(a,b).
Scenario files are JSON documents with a required "version": 1 field.
"""

from __future__ import annotations

import json
import re as _re
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

from . import algebra
from .algebra import (
    Coefficient,
    FuncLetter,
    FunctionSymbol,
    HybridExpr,
    LinearArg,
    Mom,
    Pos,
    SymbolTable,
    ValidationError,
    _GENERATOR_NAME_RE,
    _NAME_RE,
    RESERVED_NAMES,
)
from .calculus import BracketKind, bracket, commutator, poisson
from .checks import CheckKind, CheckSpec
from .printer import pretty  # re-exported: rendering lives with the language

__all__ = [
    "Ast", "Call", "FuncApp", "ImagUnit", "Neg", "ParseError", "Power",
    "Product", "Rational", "Scenario", "ScenarioError", "Sum", "Symbol",
    "parse", "parse_raw", "parse_scenario", "pretty",
]

BUILTINS = ("dag", "comm", "pb", "anderson", "alex")


class ParseError(ValueError):
    """Syntax error with the byte offset of the first offending token."""

    def __init__(self, position: int, message: str, expected: str | None = None):
        self.position = position
        self.message = message
        self.expected = expected
        detail = f" (expected {expected})" if expected else ""
        super().__init__(f"at position {position}: {message}{detail}")


class ScenarioError(ValidationError):
    """Scenario schema violation, with a JSON-pointer-style path."""

    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{path}: {message}")


# ---------------------------------------------------------------------------
# Abstract syntax


@dataclass(frozen=True)
class Sum:
    parts: tuple


@dataclass(frozen=True)
class Product:
    factors: tuple


@dataclass(frozen=True)
class Power:
    base: "Ast"
    exponent: int


@dataclass(frozen=True)
class Neg:
    operand: "Ast"


@dataclass(frozen=True)
class Rational:
    value: Fraction


@dataclass(frozen=True)
class ImagUnit:
    pass


@dataclass(frozen=True)
class Symbol:
    name: str


@dataclass(frozen=True)
class FuncApp:
    name: str
    derivs: int
    arg: "Ast"


@dataclass(frozen=True)
class Call:
    builtin: str
    args: tuple


Ast = Union[Sum, Product, Power, Neg, Rational, ImagUnit, Symbol, FuncApp, Call]


# ---------------------------------------------------------------------------
# Tokenizer


@dataclass(frozen=True)
class _Token:
    kind: str  # 'num', 'ident', 'prime', 'op', 'eof'
    text: str
    pos: int


_TOKEN_RE = _re.compile(
    r"(?P<num>[0-9]+)|(?P<ident>[A-Za-z_][A-Za-z0-9_]*)|(?P<prime>')|(?P<op>[-+*/^(),])")


def _tokenize(text: str) -> list[_Token]:
    tokens = []
    pos = 0
    n = len(text)
    while pos < n:
        if text[pos].isspace():
            pos += 1
            continue
        m = _TOKEN_RE.match(text, pos)
        if not m:
            raise ParseError(pos, f"unexpected character {text[pos]!r}", "a token")
        kind = m.lastgroup or "op"
        tokens.append(_Token(kind, m.group(), pos))
        pos = m.end()
    tokens.append(_Token("eof", "", n))
    return tokens


class _Parser:
    def __init__(self, tokens: list[_Token]):
        self.tokens = tokens
        self.idx = 0

    def peek(self) -> _Token:
        return self.tokens[self.idx]

    def take(self) -> _Token:
        tok = self.tokens[self.idx]
        self.idx += 1
        return tok

    def accept_op(self, *ops: str) -> _Token | None:
        tok = self.peek()
        if tok.kind == "op" and tok.text in ops:
            return self.take()
        return None

    def expect_op(self, op: str) -> _Token:
        tok = self.peek()
        if tok.kind != "op" or tok.text != op:
            raise ParseError(tok.pos, f"expected {op!r}", repr(op))
        return self.take()

    def parse_sum(self) -> Ast:
        parts = [self.parse_prod()]
        while True:
            tok = self.accept_op("+", "-")
            if tok is None:
                break
            rhs = self.parse_prod()
            parts.append(Neg(rhs) if tok.text == "-" else rhs)
        return parts[0] if len(parts) == 1 else Sum(tuple(parts))

    def parse_prod(self) -> Ast:
        factors = [self.parse_unary()]
        while self.accept_op("*"):
            factors.append(self.parse_unary())
        return factors[0] if len(factors) == 1 else Product(tuple(factors))

    def parse_unary(self) -> Ast:
        if self.accept_op("-"):
            return Neg(self.parse_unary())
        return self.parse_power()

    def parse_power(self) -> Ast:
        base = self.parse_atom()
        if self.accept_op("^"):
            tok = self.peek()
            if tok.kind != "num":
                raise ParseError(tok.pos, "expected an exponent", "positive integer")
            self.take()
            exponent = int(tok.text)
            if exponent < 1:
                raise ParseError(tok.pos, "exponent must be at least 1",
                                 "positive integer")
            return Power(base, exponent)
        return base

    def parse_atom(self) -> Ast:
        tok = self.peek()
        if tok.kind == "num":
            self.take()
            numerator = int(tok.text)
            if self.accept_op("/"):
                den_tok = self.peek()
                if den_tok.kind != "num":
                    raise ParseError(den_tok.pos, "expected a denominator",
                                     "positive integer")
                self.take()
                if int(den_tok.text) == 0:
                    raise ParseError(den_tok.pos, "denominator must be nonzero",
                                     "positive integer")
                return Rational(Fraction(numerator, int(den_tok.text)))
            return Rational(Fraction(numerator))
        if tok.kind == "ident":
            self.take()
            name = tok.text
            if name == "i":
                return ImagUnit()
            if name in BUILTINS:
                self.expect_op("(")
                args = [self.parse_sum()]
                while self.accept_op(","):
                    args.append(self.parse_sum())
                self.expect_op(")")
                return Call(name, tuple(args))
            derivs = 0
            while self.peek().kind == "prime":
                self.take()
                derivs += 1
            if self.peek().kind == "op" and self.peek().text == "(":
                self.take()
                arg = self.parse_sum()
                self.expect_op(")")
                return FuncApp(name, derivs, arg)
            if derivs:
                raise ParseError(self.peek().pos,
                                 "a primed name must be applied to an argument", "'('")
            return Symbol(name)
        if tok.kind == "op" and tok.text == "(":
            self.take()
            inner = self.parse_sum()
            self.expect_op(")")
            return inner
        raise ParseError(tok.pos, "expected an expression atom",
                         "rational, symbol, or '('")


def parse_ast(text: str) -> Ast:
    """Parse text to an Ast without resolving any symbols."""
    parser = _Parser(_tokenize(text))
    ast = parser.parse_sum()
    tail = parser.peek()
    if tail.kind != "eof":
        raise ParseError(tail.pos, f"unexpected trailing input {tail.text!r}",
                         "end of input")
    return ast


# ---------------------------------------------------------------------------
# Evaluation


class _RawUnsupported(Exception):
    pass


def _extract_linear_arg(expr: HybridExpr) -> LinearArg:
    q: dict[int, Fraction] = {}
    xs: dict[int, Fraction] = {}
    ks: dict[int, Fraction] = {}
    const = Fraction(0)
    for term in expr.terms:
        if term.coeff.im:
            raise ValidationError("function argument must have real coefficients")
        coeff = term.coeff.re
        word = term.word
        mono = term.classical
        if any(isinstance(l, Mom) for l in word):
            raise ValidationError("momentum generators are not allowed in a "
                                  "function argument")
        if any(isinstance(l, FuncLetter) for l in word):
            raise ValidationError("nested function letters are not allowed in a "
                                  "function argument")
        if len(word) + mono.degree() > 1:
            raise ValidationError("function argument must be linear in q, x, k")
        if len(word) == 1:
            mode = word[0].mode
            q[mode] = q.get(mode, Fraction(0)) + coeff
        elif mono.x_exponents:
            dof = mono.x_exponents[0][0]
            xs[dof] = xs.get(dof, Fraction(0)) + coeff
        elif mono.k_exponents:
            dof = mono.k_exponents[0][0]
            ks[dof] = ks.get(dof, Fraction(0)) + coeff
        else:
            const += coeff
    return LinearArg.build(q=q, x=xs, k=ks, constant=const)


_GEN_SPLIT_RE = _re.compile(r"([qpxk])([0-9]*)\Z")


def _eval(node: Ast, table: SymbolTable, env, raw: bool) -> HybridExpr:
    if isinstance(node, Rational):
        return algebra.constant(table, node.value)
    if isinstance(node, ImagUnit):
        return algebra.constant(table, algebra.I)
    if isinstance(node, Symbol):
        m = _GEN_SPLIT_RE.match(node.name)
        if m:
            kind, digits = m.groups()
            index = int(digits) if digits else 1
            builder = {"q": algebra.q, "p": algebra.p, "x": algebra.x, "k": algebra.k}
            return builder[kind](table, index)
        if env and node.name in env:
            return env[node.name]
        raise ValidationError(f"unknown symbol {node.name!r}")
    if isinstance(node, FuncApp):
        table.function(node.name)
        arg_expr = _eval(node.arg, table, env, raw=False)
        arg = _extract_linear_arg(algebra.canonicalize(arg_expr))
        return algebra.func(table, node.name, node.derivs, arg)
    if isinstance(node, Neg):
        inner = _eval(node.operand, table, env, raw)
        return algebra._raw_scale(-1, inner) if raw else algebra.scale(-1, inner)
    if isinstance(node, Sum):
        out = algebra.zero(table)
        for part in node.parts:
            rhs = _eval(part, table, env, raw)
            out = algebra._raw_add(out, rhs) if raw else algebra.add(out, rhs)
        return out
    if isinstance(node, Product):
        out = algebra.one(table)
        for factor in node.factors:
            rhs = _eval(factor, table, env, raw)
            out = algebra._raw_mul(out, rhs) if raw else algebra.mul(out, rhs)
        return out
    if isinstance(node, Power):
        base = _eval(node.base, table, env, raw)
        out = algebra.one(table)
        for _ in range(node.exponent):
            out = algebra._raw_mul(out, base) if raw else algebra.mul(out, base)
        return out
    if isinstance(node, Call):
        if raw:
            raise _RawUnsupported()
        args = tuple(_eval(arg, table, env, raw=False) for arg in node.args)
        if node.builtin == "dag":
            if len(args) != 1:
                raise ValidationError("dag takes exactly one argument")
            return algebra.dagger(args[0])
        if len(args) != 2:
            raise ValidationError(f"{node.builtin} takes exactly two arguments")
        if node.builtin == "comm":
            return commutator(*args)
        if node.builtin == "pb":
            return poisson(*args)
        if node.builtin == "anderson":
            return bracket(BracketKind.ANDERSON, *args)
        return bracket(BracketKind.ALEKSANDROV, *args)
    raise ValidationError(f"unknown ast node {node!r}")  # pragma: no cover


def parse(text: str, table: SymbolTable, env=None) -> HybridExpr:
    """Parse and evaluate an expression to canonical form.

    env maps previously defined names (from a scenario or a REPL session)
    to expressions; generator names q, p, x, k with optional indices always
    resolve to the table's generators.
    """
    return algebra.canonicalize(_eval(parse_ast(text), table, env, raw=False))


def parse_raw(text: str, table: SymbolTable, env=None) -> HybridExpr | None:
    """Evaluate without canonicalizing, or None if the text uses builtins.

    Used to feed the oracle an expression whose words are exactly as
    written, so the oracle can independently confirm the canonical form.
    """
    try:
        return _eval(parse_ast(text), table, env, raw=True)
    except _RawUnsupported:
        return None


# ---------------------------------------------------------------------------
# Scenario files


@dataclass
class Scenario:
    """A validated declarative check suite."""

    name: str
    table: SymbolTable
    definitions: dict[str, HybridExpr]
    definition_texts: dict[str, str]
    hamiltonian: HybridExpr | None
    hamiltonian_text: str | None
    bracket: BracketKind
    checks: tuple[CheckSpec, ...]


def _require(data: dict, key: str, path: str):
    if key not in data:
        raise ScenarioError(f"{path}/{key}", "missing required field")
    return data[key]


def _check_keys(data: dict, allowed: set, path: str) -> None:
    for key in data:
        if key not in allowed:
            raise ScenarioError(f"{path}/{key}", "unknown field")


def _expect_type(value, types, path: str, what: str):
    if not isinstance(value, types) or isinstance(value, bool) and types is int:
        raise ScenarioError(path, f"must be {what}")
    return value


_CHECK_FIELDS = {
    CheckKind.ANTISYMMETRY: ("a", "b"),
    CheckKind.LEIBNIZ: ("a", "b"),
    CheckKind.HERMITICITY_OF_EOM: ("observable",),
    CheckKind.CONSERVATION: ("observable",),
}

_HAMILTONIAN_KINDS = (
    CheckKind.LEIBNIZ, CheckKind.HERMITICITY_OF_EOM, CheckKind.CONSERVATION)


def _parse_scenario_expr(text, table, env, path: str) -> HybridExpr:
    if not isinstance(text, str):
        raise ScenarioError(path, "must be an expression string")
    try:
        return parse(text, table, env)
    except ParseError as err:
        raise ParseError(err.position, f"{path}: {err.message}", err.expected) from err
    except ScenarioError:
        raise
    except ValidationError as err:
        raise ScenarioError(path, str(err)) from err


def parse_scenario(text: str, name: str | None = None) -> Scenario:
    """Parse and fully validate a scenario document.

    All expressions are parsed eagerly so that every error surfaces before
    any check runs.
    """
    try:
        data = json.loads(text)
    except json.JSONDecodeError as err:
        raise ParseError(err.pos, f"invalid scenario JSON: {err.msg}") from err
    if not isinstance(data, dict):
        raise ScenarioError("", "scenario document must be a JSON object")
    _check_keys(data, {"version", "name", "symbols", "definitions",
                       "hamiltonian", "bracket", "checks"}, "")
    version = _require(data, "version", "")
    if version != 1:
        raise ScenarioError("/version", "must be 1")

    symbols = _expect_type(_require(data, "symbols", ""), dict, "/symbols", "an object")
    _check_keys(symbols, {"quantum_modes", "classical_dofs", "functions"}, "/symbols")
    modes = _expect_type(symbols.get("quantum_modes", 1), int,
                         "/symbols/quantum_modes", "an integer")
    dofs = _expect_type(symbols.get("classical_dofs", 1), int,
                        "/symbols/classical_dofs", "an integer")
    functions = []
    for idx, entry in enumerate(_expect_type(symbols.get("functions", []), list,
                                             "/symbols/functions", "a list")):
        fpath = f"/symbols/functions/{idx}"
        _expect_type(entry, dict, fpath, "an object")
        _check_keys(entry, {"name", "real"}, fpath)
        fname = _expect_type(_require(entry, "name", fpath), str,
                             f"{fpath}/name", "a string")
        real = entry.get("real", True)
        try:
            functions.append(FunctionSymbol(fname, real))
        except ValidationError as err:
            raise ScenarioError(fpath, str(err)) from err
    try:
        table = SymbolTable(modes, dofs, tuple(functions))
    except ValidationError as err:
        raise ScenarioError("/symbols", str(err)) from err

    definitions: dict[str, HybridExpr] = {}
    definition_texts: dict[str, str] = {}
    raw_defs = _expect_type(data.get("definitions", {}), dict,
                            "/definitions", "an object")
    for def_name, def_text in raw_defs.items():
        dpath = f"/definitions/{def_name}"
        if not _NAME_RE.match(def_name) or def_name in RESERVED_NAMES \
                or _GENERATOR_NAME_RE.match(def_name):
            raise ScenarioError(dpath, "invalid definition name")
        definitions[def_name] = _parse_scenario_expr(def_text, table, definitions, dpath)
        definition_texts[def_name] = def_text

    hamiltonian = None
    hamiltonian_text = None
    if "hamiltonian" in data:
        hamiltonian_text = _expect_type(data["hamiltonian"], str,
                                        "/hamiltonian", "an expression string")
        hamiltonian = _parse_scenario_expr(hamiltonian_text, table, definitions,
                                           "/hamiltonian")
    elif "H" in definitions:
        hamiltonian = definitions["H"]
        hamiltonian_text = definition_texts["H"]

    bracket_name = _expect_type(_require(data, "bracket", ""), str,
                                "/bracket", "a string")
    try:
        default_bracket = BracketKind.from_name(bracket_name)
    except ValidationError as err:
        raise ScenarioError("/bracket", str(err)) from err

    checks: list[CheckSpec] = []
    raw_checks = _expect_type(_require(data, "checks", ""), list, "/checks", "a list")
    for idx, entry in enumerate(raw_checks):
        cpath = f"/checks/{idx}"
        _expect_type(entry, dict, cpath, "an object")
        kind_name = _expect_type(_require(entry, "kind", cpath), str,
                                 f"{cpath}/kind", "a string")
        try:
            kind = CheckKind.from_name(kind_name)
        except ValidationError as err:
            raise ScenarioError(f"{cpath}/kind", str(err)) from err
        allowed = {"kind", "bracket", "expect"} | set(_CHECK_FIELDS[kind])
        if kind in _HAMILTONIAN_KINDS:
            allowed.add("hamiltonian")
        _check_keys(entry, allowed, cpath)

        check_bracket = default_bracket
        if "bracket" in entry:
            bname = _expect_type(entry["bracket"], str, f"{cpath}/bracket", "a string")
            try:
                check_bracket = BracketKind.from_name(bname)
            except ValidationError as err:
                raise ScenarioError(f"{cpath}/bracket", str(err)) from err
        if kind is not CheckKind.ANTISYMMETRY and check_bracket is BracketKind.POISSON:
            raise ScenarioError(f"{cpath}/bracket",
                                "the poisson bracket cannot drive this check")

        expect = entry.get("expect")
        if expect is not None and expect not in ("pass", "fail"):
            raise ScenarioError(f"{cpath}/expect", "must be 'pass' or 'fail'")

        exprs: dict[str, HybridExpr] = {}
        texts: dict[str, str] = {}
        for field_name in _CHECK_FIELDS[kind]:
            value = _require(entry, field_name, cpath)
            exprs[field_name] = _parse_scenario_expr(
                value, table, definitions, f"{cpath}/{field_name}")
            texts[field_name] = value
        if kind in _HAMILTONIAN_KINDS:
            if "hamiltonian" in entry:
                texts["hamiltonian"] = entry["hamiltonian"]
                exprs["hamiltonian"] = _parse_scenario_expr(
                    entry["hamiltonian"], table, definitions, f"{cpath}/hamiltonian")
            elif hamiltonian is not None:
                texts["hamiltonian"] = hamiltonian_text or ""
            else:
                raise ScenarioError(cpath, "check needs a hamiltonian but the "
                                           "scenario declares none")
        checks.append(CheckSpec(kind, check_bracket, expect, exprs, texts))

    scenario_name = data.get("name") or name or "scenario"
    if not isinstance(scenario_name, str):
        raise ScenarioError("/name", "must be a string")
    return Scenario(
        name=scenario_name,
        table=table,
        definitions=definitions,
        definition_texts=definition_texts,
        hamiltonian=hamiltonian,
        hamiltonian_text=hamiltonian_text,
        bracket=default_bracket,
        checks=tuple(checks),
    )
