"""Symbolic expression core: trees, parser, canonical forms, calculus."""

from .nodes import (
    Add,
    COORDINATES,
    DomainError,
    Expr,
    ExprError,
    FUNCTIONS,
    Func,
    Mul,
    PARAMETERS,
    Pow,
    Rat,
    SYMBOL_ORDER,
    Sym,
    UNKNOWN_ARGS,
    Unknown,
    VELOCITIES,
    VELOCITY_OF,
    add,
    as_expr,
    div,
    free_symbols,
    func,
    has_unknowns,
    has_velocities,
    mul,
    neg,
    pow_,
    rat,
    sym,
    unknown,
    ONE,
    ZERO,
)
from .calculus import differentiate, replace_unknowns, substitute
from .evaluate import EvalError, PoleError, UnboundSymbolError, compile_fn, eval_numeric
from .monomials import NonPolynomialVelocity, VelocityMonomial, collect_velocity_monomials
from .parser import ParseError, parse
from .printer import to_latex, to_text
from .simplify import canonical, cleared_numerator, is_zero_expr, strip_invertible
from .zero import (
    DEFAULT_DOMAINS,
    NONZERO_THRESHOLD,
    ZERO_THRESHOLD,
    ZeroDecision,
    is_zero,
    sample_point,
    stable_seed,
)

simplify = canonical

__all__ = [name for name in dir() if not name.startswith("_")]
