"""Exact symbolic partial differentiation."""

from __future__ import annotations

from .nodes import (
    Add,
    Expr,
    Func,
    Mul,
    Pow,
    Rat,
    Sym,
    Unknown,
    add,
    func,
    mul,
    pow_,
    rat,
    sym,
    unknown,
    ONE,
    ZERO,
)
from .simplify import canonical

_memo: dict[tuple[Expr, str], Expr] = {}


def differentiate(e: Expr, var: str | Sym) -> Expr:
    """Partial derivative of ``e`` with respect to a symbol.

    Velocities, coordinates and parameters are all independent symbols.
    Derivatives of unknown-function nodes bump the multi-index; mixed
    partials commute because the multi-index is an unordered count vector.
    The result is canonical.
    """
    name = var.name if isinstance(var, Sym) else var
    sym(name)  # validates
    return canonical(_diff(canonical(e), name))


def _diff(e: Expr, v: str) -> Expr:
    key = (e, v)
    hit = _memo.get(key)
    if hit is not None:
        return hit
    out = _diff_raw(e, v)
    _memo[key] = out
    return out


def _diff_raw(e: Expr, v: str) -> Expr:
    if isinstance(e, Rat):
        return ZERO
    if isinstance(e, Sym):
        return ONE if e.name == v else ZERO
    if isinstance(e, Unknown):
        if v not in e.args:
            return ZERO
        counts = {a: n for a, n in zip(e.args, e.derivs)}
        counts[v] += 1
        return unknown(e.name, counts)
    if isinstance(e, Func):
        inner = _diff(e.arg, v)
        if inner is ZERO:
            return ZERO
        return mul(_func_derivative(e), inner)
    if isinstance(e, Pow):
        inner = _diff(e.base, v)
        if inner is ZERO:
            return ZERO
        return mul(rat(e.exp), pow_(e.base, e.exp - 1), inner)
    if isinstance(e, Add):
        return add(*[_diff(t, v) for t in e.terms])
    if isinstance(e, Mul):
        terms = []
        for i, f in enumerate(e.factors):
            df = _diff(f, v)
            if df is ZERO:
                continue
            rest = e.factors[:i] + e.factors[i + 1:]
            terms.append(mul(df, *rest))
        return add(*terms) if terms else ZERO
    raise TypeError(f"not an expression: {e!r}")


def _func_derivative(e: Func) -> Expr:
    a = e.arg
    if e.fn == "exp":
        return e
    if e.fn == "ln":
        return pow_(a, -1)
    if e.fn == "sin":
        return func("cos", a)
    if e.fn == "cos":
        return mul(rat(-1), func("sin", a))
    if e.fn == "tan":
        return pow_(func("cos", a), -2)
    if e.fn == "sec":
        return mul(func("sin", a), pow_(func("cos", a), -2))
    if e.fn == "cot":
        return mul(rat(-1), pow_(func("sin", a), -2))
    raise TypeError(f"no derivative rule for {e.fn!r}")


def substitute(e: Expr, bindings: dict[str, Expr]) -> Expr:
    """Replace free symbols by expressions; result is canonical."""
    return canonical(_subst(e, bindings))


def _subst(e: Expr, bindings: dict[str, Expr]) -> Expr:
    if isinstance(e, Rat):
        return e
    if isinstance(e, Sym):
        return bindings.get(e.name, e)
    if isinstance(e, Unknown):
        return e
    if isinstance(e, Func):
        return func(e.fn, _subst(e.arg, bindings))
    if isinstance(e, Pow):
        return pow_(_subst(e.base, bindings), e.exp)
    if isinstance(e, Add):
        return add(*[_subst(t, bindings) for t in e.terms])
    return mul(*[_subst(f, bindings) for f in e.factors])


def replace_unknowns(e: Expr, fields: dict[str, Expr]) -> Expr:
    """Substitute concrete expressions for unknown-function symbols.

    An unknown node carrying a derivative multi-index becomes the matching
    partial derivative of the concrete field.  Result is canonical.
    """
    return canonical(_replace(e, fields))


def _replace(e: Expr, fields: dict[str, Expr]) -> Expr:
    if isinstance(e, (Rat, Sym)):
        return e
    if isinstance(e, Unknown):
        concrete = fields.get(e.name)
        if concrete is None:
            return e
        out = concrete
        for arg, n in zip(e.args, e.derivs):
            for _ in range(n):
                out = differentiate(out, arg)
        return out
    if isinstance(e, Func):
        return func(e.fn, _replace(e.arg, fields))
    if isinstance(e, Pow):
        return pow_(_replace(e.base, fields), e.exp)
    if isinstance(e, Add):
        return add(*[_replace(t, fields) for t in e.terms])
    return mul(*[_replace(f, fields) for f in e.factors])
