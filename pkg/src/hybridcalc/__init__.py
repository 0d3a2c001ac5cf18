"""Exact symbolic calculus for hybrid quantum-classical brackets."""

from .algebra import (
    ClassicalMonomial,
    Coefficient,
    FuncFactor,
    FuncLetter,
    FunctionSymbol,
    HybridExpr,
    LinearArg,
    Mom,
    Pos,
    SymbolTable,
    TableMismatchError,
    Term,
    ValidationError,
    add,
    canonicalize,
    constant,
    dagger,
    equals,
    expr_from_terms,
    func,
    is_hermitian,
    is_zero,
    k,
    mul,
    one,
    p,
    q,
    scale,
    sub,
    x,
    zero,
)
from .calculus import BracketKind, bracket, commutator, eom, pd_k, pd_x, poisson
from .checks import (
    CheckKind,
    CheckReport,
    CheckSpec,
    antisymmetry_defect,
    conservation_check,
    hermiticity_defect,
    leibniz_defect,
    run_checks,
)
from .dsl import ParseError, Scenario, ScenarioError, parse, parse_scenario, pretty
from .oracle import (
    OracleConfig,
    OracleError,
    PolyState,
    concretize_functions,
    oracle_equal,
    rep_apply,
)

__version__ = "0.1.0"
