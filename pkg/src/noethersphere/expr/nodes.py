"""Immutable symbolic expression trees.

Nodes are interned: structurally equal expressions are the same object, so
equality and hashing are O(1) and caches keyed on nodes are cheap.  Raw
construction performs only safe, order-preserving normalisation (flattening
of nested sums/products, exact folding of rational constants, rejection of
division by a syntactic zero).  Everything else is the job of
:func:`noethersphere.expr.simplify.canonical`.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Mapping


class ExprError(Exception):
    """Base class for expression-level failures."""


class DomainError(ExprError):
    """Raised for division by a syntactic zero or 0^0 at construction time."""


# Closed symbol set: coordinates, velocities, parameters.  The fixed order
# doubles as the canonical tie-break so golden output stays stable.
COORDINATES = ("s", "t", "r", "theta", "phi")
VELOCITIES = ("td", "rd", "thetad", "phid")
PARAMETERS = ("alpha", "beta", "a", "b", "p")
SYMBOL_ORDER = COORDINATES + VELOCITIES + PARAMETERS
_SYMBOL_RANK = {name: i for i, name in enumerate(SYMBOL_ORDER)}

# Velocity symbol paired with the coordinate it differentiates.
VELOCITY_OF = {"t": "td", "r": "rd", "theta": "thetad", "phi": "phid"}

FUNCTIONS = ("exp", "ln", "sin", "cos", "tan", "sec", "cot")
_FUNC_RANK = {name: i for i, name in enumerate(FUNCTIONS)}

# Unknown-function signatures: name -> argument list.  xi/eta*/A are the
# point-symmetry coefficients; nu/mu are the radial metric profiles used by
# the symbolic determining-system family.
UNKNOWN_ARGS: dict[str, tuple[str, ...]] = {
    "xi": COORDINATES,
    "eta0": COORDINATES,
    "eta1": COORDINATES,
    "eta2": COORDINATES,
    "eta3": COORDINATES,
    "A": COORDINATES,
    "nu": ("r",),
    "mu": ("r",),
}
_UNKNOWN_RANK = {name: i for i, name in enumerate(UNKNOWN_ARGS)}

_intern: dict[tuple, "Expr"] = {}


def _interned(cls, key: tuple, *fields):
    node = _intern.get(key)
    if node is None:
        node = object.__new__(cls)
        for slot, value in zip(cls.__slots__, fields):
            object.__setattr__(node, slot, value)
        _intern[key] = node
    return node


class Expr:
    """Base expression node.  Instances are immutable and interned."""

    __slots__ = ()

    def __setattr__(self, name, value):
        raise AttributeError("expressions are immutable")

    # Arithmetic builds raw (non-canonical) nodes.
    def __add__(self, other):
        return add(self, as_expr(other))

    def __radd__(self, other):
        return add(as_expr(other), self)

    def __sub__(self, other):
        return add(self, neg(as_expr(other)))

    def __rsub__(self, other):
        return add(as_expr(other), neg(self))

    def __mul__(self, other):
        return mul(self, as_expr(other))

    def __rmul__(self, other):
        return mul(as_expr(other), self)

    def __truediv__(self, other):
        return div(self, as_expr(other))

    def __rtruediv__(self, other):
        return div(as_expr(other), self)

    def __pow__(self, exponent):
        return pow_(self, exponent)

    def __neg__(self):
        return neg(self)

    def __repr__(self):
        from .printer import to_text

        return to_text(self)


class Rat(Expr):
    __slots__ = ("value",)
    value: Fraction


class Sym(Expr):
    __slots__ = ("name",)
    name: str


class Unknown(Expr):
    """Opaque function symbol with a partial-derivative multi-index.

    ``derivs`` counts derivatives per argument, so mixed partials commute by
    construction: d/dt d/dr xi and d/dr d/dt xi intern to the same node.
    """

    __slots__ = ("name", "args", "derivs")
    name: str
    args: tuple[str, ...]
    derivs: tuple[int, ...]


class Func(Expr):
    __slots__ = ("fn", "arg")
    fn: str
    arg: Expr


class Pow(Expr):
    __slots__ = ("base", "exp")
    base: Expr
    exp: Fraction


class Add(Expr):
    __slots__ = ("terms",)
    terms: tuple[Expr, ...]


class Mul(Expr):
    __slots__ = ("factors",)
    factors: tuple[Expr, ...]


def rat(value, den=None) -> Rat:
    if den is not None:
        value = Fraction(value, den)
    elif not isinstance(value, Fraction):
        value = Fraction(value)
    return _interned(Rat, ("q", value), value)


ZERO = rat(0)
ONE = rat(1)
MINUS_ONE = rat(-1)
HALF = Fraction(1, 2)


def sym(name: str) -> Sym:
    if name not in _SYMBOL_RANK:
        raise ExprError(f"unknown symbol {name!r}; allowed: {', '.join(SYMBOL_ORDER)}")
    return _interned(Sym, ("s", name), name)


def unknown(name: str, derivs: Mapping[str, int] | Iterable[str] | None = None) -> Unknown:
    """An unknown-function node, optionally differentiated.

    ``derivs`` may be a mapping var -> count or an iterable of variable
    names (repeats allowed).  Variables must belong to the function's
    argument list.
    """
    args = UNKNOWN_ARGS.get(name)
    if args is None:
        raise ExprError(f"unknown function name {name!r}; allowed: {', '.join(UNKNOWN_ARGS)}")
    counts = dict.fromkeys(args, 0)
    if derivs:
        items = derivs.items() if isinstance(derivs, Mapping) else ((v, 1) for v in derivs)
        for var, n in items:
            if var not in counts:
                raise ExprError(f"{name} does not depend on {var!r}")
            counts[var] += n
    dtuple = tuple(counts[a] for a in args)
    return _interned(Unknown, ("u", name, dtuple), name, args, dtuple)


def func(fn: str, arg: Expr) -> Expr:
    if fn == "sqrt":
        return pow_(arg, HALF)
    if fn not in _FUNC_RANK:
        raise ExprError(f"unknown function {fn!r}; allowed: {', '.join(FUNCTIONS)}, sqrt")
    return _interned(Func, ("f", fn, arg), fn, arg)


def pow_(base: Expr, exponent) -> Expr:
    exp = exponent if isinstance(exponent, Fraction) else Fraction(exponent)
    if isinstance(base, Rat):
        if base.value == 0:
            if exp < 0:
                raise DomainError("division by syntactic zero")
            if exp == 0:
                raise DomainError("0^0 is undefined")
            return ZERO
        if exp.denominator == 1:
            return rat(base.value ** exp.numerator)
        folded = _rat_root(base.value, exp)
        if folded is not None:
            return folded
    if exp == 0:
        return ONE
    if exp == 1:
        return base
    if isinstance(base, Pow) and exp.denominator == 1:
        return pow_(base.base, base.exp * exp)
    return _interned(Pow, ("p", base, exp), base, exp)


def _rat_root(q: Fraction, exp: Fraction) -> Rat | None:
    # Fold c^(k/2) when c is a perfect square of a rational.
    if exp.denominator != 2 or q < 0:
        return None
    num = _isqrt_exact(q.numerator)
    den = _isqrt_exact(q.denominator)
    if num is None or den is None:
        return None
    return rat(Fraction(num, den) ** exp.numerator)


def _isqrt_exact(n: int) -> int | None:
    root = int(n**0.5)
    for c in (root - 1, root, root + 1):
        if c >= 0 and c * c == n:
            return c
    return None


def add(*terms: Expr) -> Expr:
    flat: list[Expr] = []
    const = Fraction(0)
    has_const = False
    for term in terms:
        if isinstance(term, Add):
            inner = term.terms
        else:
            inner = (term,)
        for t in inner:
            if isinstance(t, Rat):
                const += t.value
                has_const = True
            else:
                flat.append(t)
    if has_const and (const != 0 or not flat):
        flat.insert(0, rat(const))
    if not flat:
        return ZERO
    if len(flat) == 1:
        return flat[0]
    return _interned(Add, ("+",) + tuple(flat), tuple(flat))


def mul(*factors: Expr) -> Expr:
    flat: list[Expr] = []
    coeff = Fraction(1)
    for factor in factors:
        if isinstance(factor, Mul):
            inner = factor.factors
        else:
            inner = (factor,)
        for f in inner:
            if isinstance(f, Rat):
                coeff *= f.value
            else:
                flat.append(f)
    if coeff == 0:
        return ZERO
    if coeff != 1 or not flat:
        flat.insert(0, rat(coeff))
    if len(flat) == 1:
        return flat[0]
    return _interned(Mul, ("*",) + tuple(flat), tuple(flat))


def neg(e: Expr) -> Expr:
    return mul(MINUS_ONE, e)


def div(numer: Expr, denom: Expr) -> Expr:
    if isinstance(denom, Rat) and denom.value == 0:
        raise DomainError("division by syntactic zero")
    if isinstance(denom, Rat):
        return mul(rat(1 / denom.value), numer)
    return mul(numer, pow_(denom, -1))


def as_expr(x) -> Expr:
    if isinstance(x, Expr):
        return x
    if isinstance(x, (int, Fraction)):
        return rat(x)
    raise TypeError(f"cannot coerce {type(x).__name__} to Expr")


def sort_key(e: Expr):
    """Total order on expressions; fixed so reports and exports are stable."""
    if isinstance(e, Rat):
        return (0, e.value)
    if isinstance(e, Sym):
        return (1, _SYMBOL_RANK[e.name])
    if isinstance(e, Unknown):
        return (2, _UNKNOWN_RANK[e.name], sum(e.derivs), e.derivs)
    if isinstance(e, Func):
        return (3, _FUNC_RANK[e.fn], sort_key(e.arg))
    if isinstance(e, Pow):
        return (4, sort_key(e.base), e.exp)
    if isinstance(e, Add):
        return (5, tuple(sort_key(t) for t in e.terms))
    return (6, tuple(sort_key(f) for f in e.factors))


_free_cache: dict[Expr, frozenset[str]] = {}


def free_symbols(e: Expr) -> frozenset[str]:
    """Names of free Sym nodes (Unknown nodes are reported via their args)."""
    cached = _free_cache.get(e)
    if cached is not None:
        return cached
    if isinstance(e, Rat):
        out = frozenset()
    elif isinstance(e, Sym):
        out = frozenset((e.name,))
    elif isinstance(e, Unknown):
        out = frozenset(e.args)
    elif isinstance(e, Func):
        out = free_symbols(e.arg)
    elif isinstance(e, Pow):
        out = free_symbols(e.base)
    elif isinstance(e, Add):
        out = frozenset().union(*(free_symbols(t) for t in e.terms))
    else:
        out = frozenset().union(*(free_symbols(f) for f in e.factors))
    _free_cache[e] = out
    return out


_unknown_cache: dict[Expr, bool] = {}


def has_unknowns(e: Expr) -> bool:
    cached = _unknown_cache.get(e)
    if cached is not None:
        return cached
    if isinstance(e, Unknown):
        out = True
    elif isinstance(e, (Rat, Sym)):
        out = False
    elif isinstance(e, Func):
        out = has_unknowns(e.arg)
    elif isinstance(e, Pow):
        out = has_unknowns(e.base)
    elif isinstance(e, Add):
        out = any(has_unknowns(t) for t in e.terms)
    else:
        out = any(has_unknowns(f) for f in e.factors)
    _unknown_cache[e] = out
    return out


def has_velocities(e: Expr) -> bool:
    return any(v in free_symbols(e) for v in VELOCITIES)
