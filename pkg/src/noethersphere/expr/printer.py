"""Deterministic text and LaTeX rendering of expression trees.

``to_text`` emits the grammar accepted by :mod:`noethersphere.expr.parser`,
so printing a canonical expression and reparsing it rebuilds the same node.
"""

from __future__ import annotations

from fractions import Fraction

from .nodes import Add, Expr, Func, Mul, Pow, Rat, Sym, Unknown, ExprError

_PREC_ADD = 0
_PREC_MUL = 1
_PREC_POW = 2
_PREC_ATOM = 3


def to_text(e: Expr) -> str:
    return _render(e, _PREC_ADD)


def _render(e: Expr, ctx: int) -> str:
    if isinstance(e, Rat):
        s = str(e.value)
        need = ("/" in s and ctx >= _PREC_MUL) or (e.value < 0 and ctx > _PREC_ADD)
        return f"({s})" if need else s
    if isinstance(e, Sym):
        return e.name
    if isinstance(e, Unknown):
        suffix = "".join(a * n for a, n in zip(e.args, e.derivs))
        return f"{e.name}_{suffix}" if suffix else e.name
    if isinstance(e, Func):
        return f"{e.fn}({_render(e.arg, _PREC_ADD)})"
    if isinstance(e, Pow):
        return _render_pow(e, ctx)
    if isinstance(e, Mul):
        out = _render_mul(e)
        return f"({out})" if ctx > _PREC_MUL else out
    if isinstance(e, Add):
        parts = [_render(e.terms[0], _PREC_ADD if _is_negative(e.terms[0]) else _PREC_MUL)]
        for t in e.terms[1:]:
            if _is_negative(t):
                parts.append(" - " + _render_mul(_negate(t)))
            else:
                parts.append(" + " + _render(t, _PREC_MUL))
        out = "".join(parts)
        return f"({out})" if ctx > _PREC_ADD else out
    raise TypeError(f"not an expression: {e!r}")


def _render_pow(e: Pow, ctx: int) -> str:
    base, exp = e.base, e.exp
    if exp.denominator == 2:
        inner = f"sqrt({_render(base, _PREC_ADD)})"
        if exp.numerator == 1:
            return inner
        return f"{inner}^{exp.numerator}"
    if exp.denominator != 1:
        raise ExprError(f"cannot render exponent {exp} as grammar text")
    b = _render(base, _PREC_ATOM)
    return f"{b}^{exp.numerator}"


def _render_mul(e: Expr) -> str:
    if not isinstance(e, Mul):
        return _render(e, _PREC_MUL)
    factors = list(e.factors)
    lead = ""
    if isinstance(factors[0], Rat):
        c = factors[0].value
        factors = factors[1:]
        lead = "-" if c == -1 else f"{c}*"
    return lead + "*".join(_render(f, _PREC_POW) for f in factors)


def _is_negative(t: Expr) -> bool:
    if isinstance(t, Rat):
        return t.value < 0
    if isinstance(t, Mul) and isinstance(t.factors[0], Rat):
        return t.factors[0].value < 0
    return False


def _negate(t: Expr) -> Expr:
    from .nodes import mul, rat

    return mul(rat(-1), t)


# ---------------------------------------------------------------------------
# LaTeX

_LATEX_SYM = {
    "theta": r"\theta",
    "phi": r"\phi",
    "td": r"\dot{t}",
    "rd": r"\dot{r}",
    "thetad": r"\dot{\theta}",
    "phid": r"\dot{\phi}",
    "alpha": r"\alpha",
    "beta": r"\beta",
}

_LATEX_UNKNOWN = {
    "xi": r"\xi",
    "eta0": r"\eta^0",
    "eta1": r"\eta^1",
    "eta2": r"\eta^2",
    "eta3": r"\eta^3",
    "A": "A",
    "nu": r"\nu",
    "mu": r"\mu",
}


def to_latex(e: Expr) -> str:
    return _latex(e, _PREC_ADD)


def _latex(e: Expr, ctx: int) -> str:
    if isinstance(e, Rat):
        q = e.value
        if q.denominator == 1:
            s = str(q.numerator)
        else:
            sign = "-" if q < 0 else ""
            s = sign + r"\frac{%d}{%d}" % (abs(q.numerator), q.denominator)
        return f"({s})" if q < 0 and ctx > _PREC_ADD else s
    if isinstance(e, Sym):
        return _LATEX_SYM.get(e.name, e.name)
    if isinstance(e, Unknown):
        head = _LATEX_UNKNOWN[e.name]
        subs = "".join(_LATEX_SYM.get(a, a) * n for a, n in zip(e.args, e.derivs))
        return f"{head}_{{{subs}}}" if subs else head
    if isinstance(e, Func):
        name = {"ln": r"\ln", "exp": r"\exp", "sin": r"\sin", "cos": r"\cos",
                "tan": r"\tan", "sec": r"\sec", "cot": r"\cot"}[e.fn]
        return rf"{name}\left({_latex(e.arg, _PREC_ADD)}\right)"
    if isinstance(e, Pow):
        if e.exp == Fraction(1, 2):
            return rf"\sqrt{{{_latex(e.base, _PREC_ADD)}}}"
        base = _latex(e.base, _PREC_ATOM)
        if not isinstance(e.base, (Sym, Unknown, Func, Rat)):
            base = rf"\left({_latex(e.base, _PREC_ADD)}\right)"
        exp = str(e.exp) if e.exp.denominator == 1 else f"{e.exp.numerator}/{e.exp.denominator}"
        return f"{base}^{{{exp}}}"
    if isinstance(e, Mul):
        factors = list(e.factors)
        lead = ""
        if isinstance(factors[0], Rat):
            c = factors.pop(0).value
            lead = "-" if c == -1 else _latex(_as_rat(c), _PREC_MUL) + " "
        body = r" \, ".join(_latex(f, _PREC_POW) for f in factors)
        out = lead + body
        return rf"\left({out}\right)" if ctx > _PREC_MUL else out
    if isinstance(e, Add):
        parts = [_latex(e.terms[0], _PREC_ADD)]
        for t in e.terms[1:]:
            if _is_negative(t):
                parts.append(" - " + _latex(_negate(t), _PREC_MUL))
            else:
                parts.append(" + " + _latex(t, _PREC_MUL))
        out = "".join(parts)
        return rf"\left({out}\right)" if ctx > _PREC_ADD else out
    raise TypeError(f"not an expression: {e!r}")


def _as_rat(q: Fraction):
    from .nodes import rat

    return rat(q)
