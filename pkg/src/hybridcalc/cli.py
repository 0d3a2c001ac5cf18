"""Command-line front end.

Commands: canon, bracket, eom, run, repl.  Exit codes: 0 success,
1 assertion/oracle failure, 2 parse error, 3 validation error, 4 I/O error.
Identical invocations produce byte-identical output.
"""

from __future__ import annotations

import argparse
import json
import shlex
import sys
from fractions import Fraction
from pathlib import Path

from .algebra import (
    FuncLetter,
    FunctionSymbol,
    HybridExpr,
    Mom,
    Pos,
    SymbolTable,
    Term,
    ValidationError,
    canonicalize,
    zero,
)
from .calculus import BracketKind, bracket, eom
from .checks import CheckKind, run_checks
from .dsl import ParseError, parse, parse_raw, parse_scenario, pretty
from .oracle import (
    OracleConfig,
    oracle_equal,
    raw_bracket_combination,
    raw_eom_combination,
)
from .printer import frac_str


def _add_table_flags(cmd: argparse.ArgumentParser) -> None:
    cmd.add_argument("--modes", type=int, default=1,
                     help="number of quantum modes (default 1)")
    cmd.add_argument("--dofs", type=int, default=1,
                     help="number of classical degrees of freedom (default 1)")
    cmd.add_argument("--func", action="append", default=[], metavar="NAME",
                     help="declare a real function symbol (repeatable)")


def _add_common_flags(cmd: argparse.ArgumentParser) -> None:
    cmd.add_argument("--oracle", action="store_true",
                     help="double-check the result against the polynomial oracle")
    cmd.add_argument("--seed", type=int, default=0,
                     help="seed for randomized suites (reserved; default 0)")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hybridcalc",
        description="Exact symbolic calculus for hybrid quantum-classical brackets.")
    sub = parser.add_subparsers(dest="command", required=True)

    canon = sub.add_parser("canon", help="canonicalize an expression")
    canon.add_argument("expr")
    _add_table_flags(canon)
    _add_common_flags(canon)

    br = sub.add_parser("bracket", help="evaluate a bracket of two expressions")
    br.add_argument("--kind", required=True,
                    choices=[k.value for k in BracketKind])
    br.add_argument("a")
    br.add_argument("b")
    _add_table_flags(br)
    _add_common_flags(br)

    em = sub.add_parser("eom", help="time derivative of an observable")
    em.add_argument("--kind", required=True,
                    choices=[k.value for k in BracketKind])
    em.add_argument("--ham", required=True, help="Hamiltonian expression")
    em.add_argument("observable")
    _add_table_flags(em)
    _add_common_flags(em)

    run = sub.add_parser("run", help="run a scenario file")
    run.add_argument("scenario", help="path to a scenario JSON document")
    run.add_argument("--out", help="write the JSON report to this path")
    run.add_argument("--assert", dest="assert_mode", action="store_true",
                     help="exit 1 when an 'expect' annotation is violated")
    _add_common_flags(run)

    repl = sub.add_parser("repl", help="interactive session")
    _add_table_flags(repl)
    _add_common_flags(repl)

    return parser


def _table_from_args(args) -> SymbolTable:
    functions = tuple(FunctionSymbol(name) for name in args.func)
    return SymbolTable(args.modes, args.dofs, functions)


def _coeff_obj(term: Term) -> dict:
    return {"re": frac_str(term.coeff.re), "im": frac_str(term.coeff.im)}


def _linear_arg_obj(arg) -> dict:
    return {
        "q": [[mode, frac_str(c)] for mode, c in arg.q_coeffs],
        "x": [[dof, frac_str(c)] for dof, c in arg.x_coeffs],
        "k": [[dof, frac_str(c)] for dof, c in arg.k_coeffs],
        "const": frac_str(arg.constant),
    }


def _term_obj(term: Term) -> dict:
    classical = [
        {"var": "x", "dof": dof, "power": e} for dof, e in term.classical.x_exponents
    ] + [
        {"var": "k", "dof": dof, "power": e} for dof, e in term.classical.k_exponents
    ]
    word = []
    for letter in term.word:
        if isinstance(letter, Pos):
            word.append({"gen": "q", "mode": letter.mode})
        elif isinstance(letter, Mom):
            word.append({"gen": "p", "mode": letter.mode})
        elif isinstance(letter, FuncLetter):
            word.append({
                "gen": "func",
                "name": letter.factor.symbol,
                "deriv": letter.factor.deriv_order,
                "arg": _linear_arg_obj(letter.factor.arg),
            })
    return {"coeff": _coeff_obj(term), "classical": classical, "word": word}


def _oracle_line(ok: bool) -> int:
    if ok:
        print("oracle: agree")
        return 0
    print("oracle: MISMATCH", file=sys.stderr)
    return 1


def _cmd_canon(args) -> int:
    table = _table_from_args(args)
    result = parse(args.expr, table)
    print(pretty(result))
    if args.oracle:
        raw = parse_raw(args.expr, table)
        reference = raw if raw is not None else result
        cfg = OracleConfig.for_exprs(reference, result)
        return _oracle_line(oracle_equal(reference, result, cfg))
    return 0


def _cmd_bracket(args) -> int:
    table = _table_from_args(args)
    kind = BracketKind.from_name(args.kind)
    a = parse(args.a, table)
    b = parse(args.b, table)
    result = bracket(kind, a, b)
    print(pretty(result))
    if args.oracle:
        combo = raw_bracket_combination(kind, a, b)
        cfg = OracleConfig.for_exprs(combo, result)
        return _oracle_line(oracle_equal(combo, result, cfg))
    return 0


def _cmd_eom(args) -> int:
    table = _table_from_args(args)
    kind = BracketKind.from_name(args.kind)
    h = parse(args.ham, table)
    a = parse(args.observable, table)
    result = eom(kind, a, h)
    print(pretty(result))
    if args.oracle:
        combo = raw_eom_combination(kind, a, h)
        cfg = OracleConfig.for_exprs(combo, result)
        return _oracle_line(oracle_equal(combo, result, cfg))
    return 0


def _cmd_run(args) -> int:
    path = Path(args.scenario)
    text = path.read_text(encoding="utf-8")
    scenario = parse_scenario(text, name=path.stem)
    reports = run_checks(scenario)

    print(f"scenario: {scenario.name}")
    expectations: list[bool] = []
    for i, (spec, report) in enumerate(zip(scenario.checks, reports), start=1):
        verdict = "pass" if report.passed else "FAIL"
        print(f"[{i}] {report.kind.value} ({report.bracket.value}) {verdict}"
              f"  defect = {pretty(report.defect)}")
        for key in sorted(report.inputs):
            print(f"    {key} = {report.inputs[key]}")
        if spec.expect is not None:
            satisfied = report.passed == (spec.expect == "pass")
            expectations.append(satisfied)
            status = "ok" if satisfied else "VIOLATED"
            print(f"    expect = {spec.expect} ({status})")
    passed = sum(1 for r in reports if r.passed)
    failed = len(reports) - passed
    print(f"summary: {passed} passed, {failed} failed")
    if expectations:
        print(f"expectations: {sum(expectations)}/{len(expectations)} satisfied")

    if args.out:
        report_obj = {
            "scenario": scenario.name,
            "results": [
                {
                    "kind": r.kind.value,
                    "bracket": r.bracket.value,
                    "inputs": {key: r.inputs[key] for key in sorted(r.inputs)},
                    "passed": r.passed,
                    "defect": pretty(r.defect),
                    "defect_terms": [_term_obj(t) for t in r.defect.terms],
                }
                for r in reports
            ],
            "summary": {"passed": passed, "failed": failed},
        }
        Path(args.out).write_text(
            json.dumps(report_obj, indent=2) + "\n", encoding="utf-8")

    if args.oracle:
        agreement = all(
            oracle_equal(r.defect, zero(scenario.table),
                         OracleConfig.for_exprs(r.defect)) == r.passed
            for r in reports
        )
        code = _oracle_line(agreement)
        if code:
            return code
    if args.assert_mode and expectations and not all(expectations):
        return 1
    return 0


_REPL_HELP = """\
commands:
  EXPR                     evaluate and print in canonical form
  :let NAME = EXPR         define a name for later use
  :bracket KIND A B        evaluate a bracket (kinds: commutator, poisson,
                           anderson, aleksandrov)
  :eom KIND H A            time derivative of A under Hamiltonian H
  :check KIND BRACKET ...  run a check: antisymmetry A B | leibniz A B |
                           hermiticity_of_eom A | conservation A
                           (uses the defined name H as the Hamiltonian)
  :help                    show this message
  :quit                    leave"""


def _cmd_repl(args) -> int:
    from .checks import (
        antisymmetry_defect,
        hermiticity_defect,
        leibniz_defect,
    )

    table = _table_from_args(args)
    env: dict[str, HybridExpr] = {}
    interactive = sys.stdin.isatty()

    def need_hamiltonian() -> HybridExpr:
        if "H" not in env:
            raise ValidationError("define a Hamiltonian first (:let H = ...)")
        return env["H"]

    while True:
        if interactive:
            sys.stdout.write("> ")
            sys.stdout.flush()
        line = sys.stdin.readline()
        if not line:
            break
        line = line.strip()
        if not line:
            continue
        try:
            if line == ":quit":
                break
            if line == ":help":
                print(_REPL_HELP)
            elif line.startswith(":let"):
                rest = line[len(":let"):].strip()
                name, sep, expr_text = rest.partition("=")
                name = name.strip()
                if not sep or not name:
                    raise ValidationError("usage: :let NAME = EXPR")
                env[name] = parse(expr_text.strip(), table, env)
            elif line.startswith(":bracket"):
                parts = shlex.split(line[len(":bracket"):])
                if len(parts) != 3:
                    raise ValidationError("usage: :bracket KIND A B")
                kind = BracketKind.from_name(parts[0])
                a = parse(parts[1], table, env)
                b = parse(parts[2], table, env)
                print(pretty(bracket(kind, a, b)))
            elif line.startswith(":eom"):
                parts = shlex.split(line[len(":eom"):])
                if len(parts) != 3:
                    raise ValidationError("usage: :eom KIND H A")
                kind = BracketKind.from_name(parts[0])
                h = parse(parts[1], table, env)
                a = parse(parts[2], table, env)
                print(pretty(eom(kind, a, h)))
            elif line.startswith(":check"):
                parts = shlex.split(line[len(":check"):])
                if len(parts) < 3:
                    raise ValidationError(
                        "usage: :check KIND BRACKET ARGS... (:help for details)")
                check_kind = CheckKind.from_name(parts[0])
                bracket_kind = BracketKind.from_name(parts[1])
                operands = [parse(t, table, env) for t in parts[2:]]
                if check_kind is CheckKind.ANTISYMMETRY:
                    if len(operands) != 2:
                        raise ValidationError("antisymmetry needs two operands")
                    defect = antisymmetry_defect(bracket_kind, *operands)
                elif check_kind is CheckKind.LEIBNIZ:
                    if len(operands) != 2:
                        raise ValidationError("leibniz needs two operands")
                    h = need_hamiltonian()
                    defect = leibniz_defect(bracket_kind, operands[0], operands[1], h) \
                        + leibniz_defect(bracket_kind, operands[1], operands[0], h)
                elif check_kind is CheckKind.HERMITICITY_OF_EOM:
                    if len(operands) != 1:
                        raise ValidationError("hermiticity_of_eom needs one operand")
                    defect = hermiticity_defect(
                        eom(bracket_kind, operands[0], need_hamiltonian()))
                else:
                    if len(operands) != 1:
                        raise ValidationError("conservation needs one operand")
                    defect = eom(bracket_kind, operands[0], need_hamiltonian())
                verdict = "pass" if defect.is_zero() else "FAIL"
                print(f"{verdict}  defect = {pretty(defect)}")
            elif line.startswith(":"):
                print(f"error: unknown command {line.split()[0]}")
            else:
                print(pretty(parse(line, table, env)))
        except (ParseError, ValidationError) as err:
            print(f"error: {err}")
    return 0


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    handlers = {
        "canon": _cmd_canon,
        "bracket": _cmd_bracket,
        "eom": _cmd_eom,
        "run": _cmd_run,
        "repl": _cmd_repl,
    }
    try:
        return handlers[args.command](args)
    except ParseError as err:
        print(f"parse error {err}", file=sys.stderr)
        return 2
    except ValidationError as err:
        print(f"validation error: {err}", file=sys.stderr)
        return 3
    except OSError as err:
        print(f"i/o error: {err}", file=sys.stderr)
        return 4


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
