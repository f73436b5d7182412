"""Velocity monomials and coefficient collection."""

from __future__ import annotations

from fractions import Fraction
from typing import NamedTuple

from .nodes import (
    Add,
    Expr,
    Mul,
    Pow,
    Sym,
    VELOCITIES,
    add,
    free_symbols,
    mul,
    rat,
    sym,
    pow_,
    ExprError,
)
from .simplify import canonical


class NonPolynomialVelocity(ExprError):
    """The expression is not polynomial in the velocity symbols."""


class VelocityMonomial(NamedTuple):
    """Exponents of (td, rd, thetad, phid)."""

    td: int
    rd: int
    thetad: int
    phid: int

    @property
    def degree(self) -> int:
        return sum(self)

    def label(self) -> str:
        if self.degree == 0:
            return "1"
        parts = []
        for name, n in zip(VELOCITIES, self):
            if n == 1:
                parts.append(name)
            elif n > 1:
                parts.append(f"{name}^{n}")
        return "*".join(parts)

    def as_expr(self) -> Expr:
        factors = [pow_(sym(n), k) for n, k in zip(VELOCITIES, self) if k]
        return mul(*factors) if factors else rat(1)


def collect_velocity_monomials(e: Expr) -> dict[VelocityMonomial, Expr]:
    """Decompose ``e`` as a polynomial in the four velocity symbols.

    Coefficients are velocity-free canonical expressions; recombining
    monomial * coefficient reproduces ``e``.  Raises
    :class:`NonPolynomialVelocity` for things like ``sin(td)`` or ``1/rd``.
    """
    c = canonical(e)
    buckets: dict[VelocityMonomial, list[Expr]] = {}
    for term in c.terms if isinstance(c, Add) else (c,):
        mono, coeff = _split_term(term)
        buckets.setdefault(mono, []).append(coeff)
    return {m: canonical(add(*parts)) for m, parts in sorted(buckets.items())}


def _split_term(term: Expr) -> tuple[VelocityMonomial, Expr]:
    exps = dict.fromkeys(VELOCITIES, 0)
    rest: list[Expr] = []
    for f in term.factors if isinstance(term, Mul) else (term,):
        base, q = (f.base, f.exp) if isinstance(f, Pow) else (f, Fraction(1))
        if isinstance(base, Sym) and base.name in exps:
            if q.denominator != 1 or q < 0:
                raise NonPolynomialVelocity(f"velocity power {base.name}^{q}")
            exps[base.name] += int(q)
        else:
            if any(v in free_symbols(f) for v in VELOCITIES):
                raise NonPolynomialVelocity(f"velocity inside non-polynomial factor {f!r}")
            rest.append(f)
    mono = VelocityMonomial(*(exps[v] for v in VELOCITIES))
    return mono, mul(*rest) if rest else rat(1)
