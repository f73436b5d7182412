"""Numeric evaluation of expression trees.

``eval_numeric`` is the checked, spec-level evaluator: it raises on unbound
symbols, poles and overflow.  ``compile_fn`` emits a plain Python closure
for hot loops (geodesic right-hand sides, drift scans); callers are expected
to stay on regular points and to catch ``ArithmeticError``/``ValueError``
when they cannot guarantee that.
"""

from __future__ import annotations

import math
from typing import Callable, Mapping, Sequence

from .nodes import Add, Expr, Func, Mul, Pow, Rat, Sym, Unknown, free_symbols

_POLE_EPS = 1e-300


class EvalError(ArithmeticError):
    pass


class UnboundSymbolError(EvalError):
    pass


class PoleError(EvalError):
    pass


def eval_numeric(e: Expr, point: Mapping[str, float]) -> float:
    """IEEE double evaluation of ``e`` at ``point``; deterministic."""
    try:
        v = _eval(e, point)
    except OverflowError as exc:
        raise PoleError(f"overflow while evaluating: {exc}") from exc
    if math.isnan(v) or math.isinf(v):
        raise PoleError("evaluation produced a non-finite value")
    return v


def _eval(e: Expr, point: Mapping[str, float]) -> float:
    if isinstance(e, Rat):
        return float(e.value)
    if isinstance(e, Sym):
        try:
            return float(point[e.name])
        except KeyError:
            raise UnboundSymbolError(f"unbound symbol {e.name!r}") from None
    if isinstance(e, Unknown):
        raise UnboundSymbolError(f"unknown function {e.name!r} has no numeric value")
    if isinstance(e, Func):
        x = _eval(e.arg, point)
        return _eval_func(e.fn, x)
    if isinstance(e, Pow):
        base = _eval(e.base, point)
        exp = e.exp
        if exp < 0 and abs(base) < _POLE_EPS:
            raise PoleError("pole: division by ~0")
        if exp.denominator != 1:
            if base < 0:
                raise PoleError(f"fractional power of negative base {base!r}")
            return base ** float(exp)
        return base ** exp.numerator
    if isinstance(e, Add):
        return math.fsum(_eval(t, point) for t in e.terms)
    if isinstance(e, Mul):
        out = 1.0
        for f in e.factors:
            out *= _eval(f, point)
        return out
    raise TypeError(f"not an expression: {e!r}")


def _eval_func(fn: str, x: float) -> float:
    if fn == "exp":
        if x > 709.0:
            raise PoleError("overflow in exp")
        return math.exp(x)
    if fn == "ln":
        if x <= _POLE_EPS:
            raise PoleError(f"ln of non-positive value {x!r}")
        return math.log(x)
    if fn == "sin":
        return math.sin(x)
    if fn == "cos":
        return math.cos(x)
    if fn == "tan":
        c = math.cos(x)
        if abs(c) < _POLE_EPS:
            raise PoleError("pole of tan")
        return math.sin(x) / c
    if fn == "sec":
        c = math.cos(x)
        if abs(c) < _POLE_EPS:
            raise PoleError("pole of sec")
        return 1.0 / c
    if fn == "cot":
        s = math.sin(x)
        if abs(s) < _POLE_EPS:
            raise PoleError("pole of cot")
        return math.cos(x) / s
    raise EvalError(f"unknown function {fn!r}")


# ---------------------------------------------------------------------------
# compilation

_FN_SOURCE = {
    "exp": "exp", "ln": "log", "sin": "sin", "cos": "cos",
}


def compile_fn(e: Expr, variables: Sequence[str]) -> Callable[..., float]:
    """Compile ``e`` to ``f(*values)`` with ``values`` ordered like
    ``variables``.  Unbound symbols are rejected at compile time.
    """
    missing = free_symbols(e) - set(variables)
    if missing:
        raise UnboundSymbolError(f"free symbols {sorted(missing)} not in variable list")
    names = {v: f"_v{i}" for i, v in enumerate(variables)}
    source = f"lambda {', '.join(names[v] for v in variables)}: {_emit(e, names)}"
    env = {
        "exp": math.exp, "log": math.log, "sin": math.sin, "cos": math.cos,
        "tan": math.tan,
    }
    return eval(source, env)  # noqa: S307 - source is generated here


def _emit(e: Expr, names: Mapping[str, str]) -> str:
    if isinstance(e, Rat):
        q = e.value
        return f"({q.numerator}/{q.denominator})" if q.denominator != 1 else f"({q.numerator})"
    if isinstance(e, Sym):
        return names[e.name]
    if isinstance(e, Func):
        arg = _emit(e.arg, names)
        if e.fn in _FN_SOURCE:
            return f"{_FN_SOURCE[e.fn]}({arg})"
        if e.fn == "tan":
            return f"tan({arg})"
        if e.fn == "sec":
            return f"(1.0/cos({arg}))"
        if e.fn == "cot":
            return f"(cos({arg})/sin({arg}))"
        raise EvalError(f"cannot compile function {e.fn!r}")
    if isinstance(e, Pow):
        base = _emit(e.base, names)
        if e.exp.denominator == 1:
            return f"({base})**({e.exp.numerator})"
        return f"({base})**({float(e.exp)!r})"
    if isinstance(e, Add):
        return "(" + " + ".join(_emit(t, names) for t in e.terms) + ")"
    if isinstance(e, Mul):
        return "(" + " * ".join(_emit(f, names) for f in e.factors) + ")"
    if isinstance(e, Unknown):
        raise UnboundSymbolError(f"unknown function {e.name!r} cannot be compiled")
    raise TypeError(f"not an expression: {e!r}")
