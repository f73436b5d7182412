"""Canonical forms for expression trees.

The canonical form is a fully expanded sum of terms.  Each term is an exact
rational coefficient times a product of atom^exponent factors, with atoms
ordered under the fixed total order of :func:`nodes.sort_key`.  Atoms are
symbols, unknown-function nodes, elementary function applications with
canonical arguments, and primitive sums (which appear only as bases of
non-expandable powers, e.g. ``(b^2 - r^2)^(1/2)``).

Rewrites applied on top of the expand/collect normalisation:

* ``tan/sec/cot`` are eliminated in favour of ``sin`` and ``cos``;
* even powers of ``sin`` are reduced via ``sin^2 = 1 - cos^2``;
* ``exp`` factors in a term are merged, ``exp(q*ln(u))`` becomes ``u^q``;
* ``ln`` distributes over products and rational powers, ``ln(exp(x)) = x``.

Rational powers of symbolic quantities assume positive bases; all catalog
quantities are sampled on domains where this holds.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd

from .nodes import (
    Add,
    DomainError,
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
    sort_key,
    ONE,
    ZERO,
)

# A monomial maps atoms to exponents; polys map monomials to coefficients.
Monom = tuple[tuple[Expr, Fraction], ...]
Poly = dict[Monom, Fraction]

_canon_memo: dict[Expr, Expr] = {}


def canonical(e: Expr) -> Expr:
    """Canonical form of ``e``.  Idempotent; results are interned."""
    hit = _canon_memo.get(e)
    if hit is not None:
        return hit
    out = _canon(e)
    _canon_memo[e] = out
    _canon_memo[out] = out
    return out


def is_zero_expr(e: Expr) -> bool:
    return canonical(e) is ZERO


def _canon(e: Expr) -> Expr:
    if isinstance(e, (Rat, Sym, Unknown)):
        return e
    if isinstance(e, Func):
        return _canon_func(e.fn, canonical(e.arg))
    if isinstance(e, Pow):
        return _canon_pow(canonical(e.base), e.exp)
    if isinstance(e, Add):
        p: Poly = {}
        for t in e.terms:
            _poly_accum(p, _to_poly(canonical(t)))
        return _from_poly(_normalize_poly(p))
    if isinstance(e, Mul):
        p = {(): Fraction(1)}
        for f in e.factors:
            p = _poly_mul(p, _to_poly(canonical(f)))
        return _from_poly(_normalize_poly(p))
    raise TypeError(f"not an expression: {e!r}")


# ---------------------------------------------------------------------------
# poly plumbing


def _to_poly(e: Expr) -> Poly:
    """Decompose a canonical expression into a poly."""
    if isinstance(e, Rat):
        return {(): e.value} if e.value else {}
    if isinstance(e, Add):
        p: Poly = {}
        for t in e.terms:
            _poly_accum(p, _term_poly(t))
        return p
    return _term_poly(e)


def _term_poly(t: Expr) -> Poly:
    coeff = Fraction(1)
    factors: dict[Expr, Fraction] = {}
    stack = list(t.factors) if isinstance(t, Mul) else [t]
    for f in stack:
        if isinstance(f, Rat):
            coeff *= f.value
        elif isinstance(f, Pow):
            factors[f.base] = factors.get(f.base, Fraction(0)) + f.exp
        else:
            factors[f] = factors.get(f, Fraction(0)) + 1
    if coeff == 0:
        return {}
    return {_monom(factors): coeff}


def _monom(factors: dict[Expr, Fraction]) -> Monom:
    items = [(a, q) for a, q in factors.items() if q != 0]
    items.sort(key=lambda it: sort_key(it[0]))
    return tuple(items)


def _poly_accum(p: Poly, q: Poly) -> None:
    for m, c in q.items():
        c2 = p.get(m, Fraction(0)) + c
        if c2:
            p[m] = c2
        else:
            p.pop(m, None)


def _poly_mul(p: Poly, q: Poly) -> Poly:
    out: Poly = {}
    for m1, c1 in p.items():
        for m2, c2 in q.items():
            f = dict(m1)
            for a, e in m2:
                f[a] = f.get(a, Fraction(0)) + e
            m = _monom(f)
            c = c1 * c2
            c2_ = out.get(m, Fraction(0)) + c
            if c2_:
                out[m] = c2_
            else:
                out.pop(m, None)
    return out


def _poly_pow(p: Poly, n: int) -> Poly:
    out: Poly = {(): Fraction(1)}
    for _ in range(n):
        out = _poly_mul(out, p)
    return out


def _from_poly(p: Poly) -> Expr:
    terms = []
    for m, c in sorted(p.items(), key=lambda kv: tuple((sort_key(a), q) for a, q in kv[0])):
        factors = [a if q == 1 else pow_(a, q) for a, q in m]
        terms.append(mul(rat(c), *factors))
    out = add(*terms)
    _canon_memo[out] = out
    return out


# ---------------------------------------------------------------------------
# term rewriting inside polys


def _normalize_poly(p: Poly) -> Poly:
    return _reduce_fractions(_normalize_core(p))


def _normalize_core(p: Poly) -> Poly:
    out: Poly = {}
    stack = list(p.items())
    while stack:
        m, c = stack.pop()
        if not c:
            continue
        rewritten = _rewrite_monom(m)
        if rewritten is None:
            c2 = out.get(m, Fraction(0)) + c
            if c2:
                out[m] = c2
            else:
                out.pop(m, None)
        else:
            for m2, c2 in rewritten.items():
                stack.append((m2, c * c2))
    return out


def _reduce_fractions(p: Poly) -> Poly:
    """Cancel sum-atom denominators: combine the poly over ``X^k`` for every
    primitive-sum atom X with a negative exponent, then divide the numerator
    back out as often as it divides exactly.  Catches cancellations such as
    ``(1 - alpha/r) * (1 - alpha/r)^-1 -> 1`` that plain exponent collection
    misses because numerators are kept expanded.
    """
    if len(p) > 400:
        return p
    while True:
        mins: dict[Expr, Fraction] = {}
        for m in p:
            for a, q in m:
                if q < 0 and isinstance(a, Add):
                    mins[a] = min(mins.get(a, Fraction(0)), q)
        work = [(a, int(-q)) for a, q in sorted(mins.items(), key=lambda kv: sort_key(kv[0])) if int(-q) >= 1]
        if not work:
            return p
        changed = False
        for atom, k in work:
            numer = _normalize_core(_poly_mul(p, {((atom, Fraction(k)),): Fraction(1)}))
            divisor = _to_poly(atom)
            j = 0
            while j < k:
                q = _poly_div_exact(numer, divisor)
                if q is None:
                    break
                numer = q
                j += 1
            if j > 0:
                if j < k:
                    numer = _poly_mul(numer, {((atom, Fraction(j - k)),): Fraction(1)})
                p = _normalize_core(numer)
                changed = True
                break
        if not changed:
            return p


def _poly_div_exact(numer: Poly, divisor: Poly) -> Poly | None:
    """Exact multivariate division, or None.  Monomials are mapped onto
    exponent vectors and processed in graded order; a step cap guards the
    (possible, with negative exponents) non-terminating cases, in which case
    the division conservatively reports failure.
    """
    if not numer:
        return {}
    atoms = sorted({a for m in list(numer) + list(divisor) for a, _ in m}, key=sort_key)
    index = {a: i for i, a in enumerate(atoms)}
    zero = tuple(Fraction(0) for _ in atoms)

    def vec(m: Monom):
        v = list(zero)
        for a, q in m:
            v[index[a]] = q
        return tuple(v)

    def grade(v):
        return (sum(v), v)

    nv = {vec(m): c for m, c in numer.items()}
    dv = {vec(m): c for m, c in divisor.items()}
    dlead = max(dv, key=grade)
    dcoef = dv[dlead]
    quot: dict[tuple, Fraction] = {}
    cap = 8 * (len(nv) + len(dv)) + 100
    steps = 0
    while nv:
        steps += 1
        if steps > cap:
            return None
        nlead = max(nv, key=grade)
        qm = tuple(n - d for n, d in zip(nlead, dlead))
        qc = nv[nlead] / dcoef
        quot[qm] = quot.get(qm, Fraction(0)) + qc
        for dm, dc in dv.items():
            m2 = tuple(a + b for a, b in zip(qm, dm))
            c2 = nv.get(m2, Fraction(0)) - qc * dc
            if c2:
                nv[m2] = c2
            else:
                nv.pop(m2, None)
    out: Poly = {}
    for v, c in quot.items():
        if not c:
            continue
        m = _monom({atoms[i]: q for i, q in enumerate(v) if q})
        out[m] = out.get(m, Fraction(0)) + c
    return {m: c for m, c in out.items() if c}


def _rewrite_monom(m: Monom) -> Poly | None:
    """One rewriting step on a monomial, or None if it is in normal form."""
    exps = [(a, q) for a, q in m if isinstance(a, Func) and a.fn == "exp"]
    if exps and (len(exps) > 1 or exps[0][1] != 1):
        rest = {a: q for a, q in m if not (isinstance(a, Func) and a.fn == "exp")}
        arg = canonical(add(*[mul(rat(q), a.arg) for a, q in exps]))
        merged = _canon_func("exp", arg)
        return _poly_mul({_monom(rest): Fraction(1)}, _to_poly(merged))

    for a, q in m:
        if isinstance(a, Add) and q >= 1:
            # expand the integer part of the power of a primitive sum
            n = int(q) if q.denominator == 1 else int(q.numerator // q.denominator)
            rest = dict(m)
            frac = q - n
            if frac:
                rest[a] = frac
            else:
                del rest[a]
            return _poly_mul({_monom(rest): Fraction(1)}, _poly_pow(_to_poly(a), n))
        if isinstance(a, Func) and a.fn == "cos" and q.denominator == 1 and q >= 2:
            # cos^n -> cos^(n mod 2) * (1 - sin^2)^(n//2); even powers of the
            # cosine are eliminated so Pythagorean combinations collapse,
            # while metric-induced sin^2 factors stay intact for stripping.
            n = int(q)
            rest = dict(m)
            if n % 2:
                rest[a] = Fraction(1)
            else:
                del rest[a]
            sin2: Poly = {(): Fraction(1), ((func("sin", a.arg), Fraction(2)),): Fraction(-1)}
            return _poly_mul({_monom(rest): Fraction(1)}, _poly_pow(sin2, n // 2))
    return None


# ---------------------------------------------------------------------------
# powers


def _canon_pow(base: Expr, exp: Fraction) -> Expr:
    if exp == 0:
        return ONE
    if exp == 1:
        return base
    if isinstance(base, Rat):
        return pow_(base, exp)
    if isinstance(base, Pow):
        return _canon_pow(base.base, base.exp * exp)
    if isinstance(base, Func) and base.fn == "exp":
        return _canon_func("exp", canonical(mul(rat(exp), base.arg)))
    if isinstance(base, Mul):
        coeff = Fraction(1)
        parts = []
        for f in base.factors:
            if isinstance(f, Rat):
                coeff = f.value
            else:
                parts.append(f)
        if coeff < 0 and exp.denominator != 1:
            # no real factorisation of a negative coefficient: keep opaque
            return pow_(base, exp)
        p: Poly = {(): Fraction(1)}
        for f in parts:
            p = _poly_mul(p, _to_poly(_canon_pow(f, exp)))
        p = _poly_mul(p, _to_poly(pow_(rat(coeff), exp)))
        return _from_poly(_normalize_poly(p))
    if isinstance(base, Add):
        if exp.denominator == 1 and exp > 0:
            return _from_poly(_normalize_poly(_poly_pow(_to_poly(base), int(exp))))
        pre, content, prim = _primitive_decompose(base)
        if prim is base and not pre and content == 1:
            return pow_(base, exp)
        p = {_monom({a: q * exp for a, q in pre.items()}): Fraction(1)}
        p = _poly_mul(p, _to_poly(pow_(rat(content), exp)))
        if isinstance(prim, Add):
            p = _poly_mul(p, {((prim, exp),): Fraction(1)})
        else:
            p = _poly_mul(p, _to_poly(_canon_pow(prim, exp)))
        return _from_poly(_normalize_poly(p))
    return pow_(base, exp)


def _common_exponents(p: Poly) -> dict[Expr, Fraction]:
    """Per atom, the minimum exponent over all monomials (absence counts as
    zero).  Nonzero entries are factors common to every term.
    """
    dicts = [dict(m) for m in p.keys()]
    union: set[Expr] = set()
    for d in dicts:
        union.update(d)
    out: dict[Expr, Fraction] = {}
    for a in union:
        lo = min(d.get(a, Fraction(0)) for d in dicts)
        if lo != 0:
            out[a] = lo
    return out


def _primitive_decompose(e: Add) -> tuple[dict[Expr, Fraction], Fraction, Expr]:
    """Split a canonical sum into common factors, rational content and a
    primitive sum.  ``e == content * prod(pre) * prim``.  The content is
    positive; term signs stay inside the primitive part so that, e.g.,
    ``1 - r^2/b^2`` and ``sqrt(b^2 - r^2)`` share the atom ``b^2 - r^2``.
    """
    p = _to_poly(e)
    mins = _common_exponents(p)
    num = gcd(*(abs(c.numerator) for c in p.values()))
    den = gcd(*(c.denominator for c in p.values()))
    content = Fraction(num, 1) / den if num else Fraction(1)
    if not mins and content == 1:
        return {}, Fraction(1), e
    stripped: Poly = {}
    for m, c in p.items():
        f = dict(m)
        for a, q in mins.items():
            f[a] = f.get(a, Fraction(0)) - q
        stripped[_monom(f)] = c / content
    prim = _from_poly(_normalize_poly(stripped))
    return mins, content, prim


# ---------------------------------------------------------------------------
# elementary functions


def _canon_func(fn: str, a: Expr) -> Expr:
    if fn == "exp":
        return _canon_exp(a)
    if fn == "ln":
        return _canon_ln(a)
    if fn == "sin":
        if a is ZERO:
            return ZERO
        sign, abs_a = _split_sign(a)
        node = func("sin", abs_a)
        _canon_memo[node] = node
        return canonical(mul(rat(sign), node)) if sign < 0 else node
    if fn == "cos":
        if a is ZERO:
            return ONE
        _, abs_a = _split_sign(a)
        node = func("cos", abs_a)
        _canon_memo[node] = node
        return node
    if fn == "tan":
        return canonical(mul(_canon_func("sin", a), _canon_pow(_canon_func("cos", a), Fraction(-1))))
    if fn == "sec":
        return _canon_pow(_canon_func("cos", a), Fraction(-1))
    if fn == "cot":
        return canonical(mul(_canon_func("cos", a), _canon_pow(_canon_func("sin", a), Fraction(-1))))
    raise DomainError(f"unknown function {fn!r}")


def _canon_exp(a: Expr) -> Expr:
    if a is ZERO:
        return ONE
    # exp(sum of q*ln(u) terms + rest) -> u^q * ... * exp(rest)
    log_parts: list[tuple[Expr, Fraction]] = []
    rest_terms: list[Expr] = []
    for term in a.terms if isinstance(a, Add) else (a,):
        coeff, factors = _coeff_factors(term)
        if len(factors) == 1 and factors[0][1] == 1 and isinstance(factors[0][0], Func) and factors[0][0].fn == "ln":
            log_parts.append((factors[0][0].arg, coeff))
        else:
            rest_terms.append(term)
    if not log_parts:
        node = func("exp", a)
        _canon_memo[node] = node
        return node
    pieces = [_canon_pow(u, q) if q != 1 else u for u, q in log_parts]
    rest = add(*rest_terms)
    if rest is not ZERO:
        pieces.append(_canon_exp(canonical(rest)))
    return canonical(mul(*pieces))


def _canon_ln(a: Expr) -> Expr:
    if a is ONE:
        return ZERO
    if isinstance(a, Func) and a.fn == "exp":
        return a.arg
    if isinstance(a, Pow):
        return canonical(mul(rat(a.exp), _canon_ln(a.base)))
    if isinstance(a, Mul):
        coeff, factors = _coeff_factors(a)
        if coeff > 0:
            parts = [mul(rat(q), _canon_ln(atom)) for atom, q in factors]
            if coeff != 1:
                node = func("ln", rat(coeff))
                _canon_memo[node] = node
                parts.append(node)
            return canonical(add(*parts))
    node = func("ln", a)
    _canon_memo[node] = node
    return node


def _coeff_factors(term: Expr) -> tuple[Fraction, list[tuple[Expr, Fraction]]]:
    coeff = Fraction(1)
    factors: list[tuple[Expr, Fraction]] = []
    for f in term.factors if isinstance(term, Mul) else (term,):
        if isinstance(f, Rat):
            coeff *= f.value
        elif isinstance(f, Pow):
            factors.append((f.base, f.exp))
        else:
            factors.append((f, Fraction(1)))
    return coeff, factors


def _split_sign(a: Expr) -> tuple[int, Expr]:
    """Canonical sign extraction used to normalise odd/even function args."""
    if isinstance(a, Rat):
        return (-1, rat(-a.value)) if a.value < 0 else (1, a)
    if isinstance(a, Mul):
        first = a.factors[0]
        if isinstance(first, Rat) and first.value < 0:
            return -1, canonical(mul(rat(-1), a))
        return 1, a
    if isinstance(a, Add):
        sign, _ = _split_sign(a.terms[0])
        if sign < 0:
            return -1, canonical(mul(rat(-1), a))
        return 1, a
    return 1, a


# ---------------------------------------------------------------------------
# helpers used by zero-testing and equation normalisation


def cleared_numerator(e: Expr) -> Expr:
    """Multiply away denominator atoms (factors with a negative minimum
    exponent).  The result vanishes identically iff ``e`` does, away from
    the zero set of the cleared factors.
    """
    c = canonical(e)
    p = _to_poly(c)
    if not p:
        return ZERO
    mins: dict[Expr, Fraction] = {}
    for m in p:
        for a, q in m:
            if q < 0:
                mins[a] = min(mins.get(a, Fraction(0)), q)
    if not mins:
        return c
    shift = {_monom({a: -q for a, q in mins.items()}): Fraction(1)}
    return _from_poly(_normalize_poly(_poly_mul(p, shift)))


def strip_invertible(e: Expr) -> Expr:
    """Normalise an equation up to an overall invertible factor: clear
    denominators, divide out common factors that are nonzero on the sample
    domain (exponentials always; other atoms only when unknown-free), scale
    by the leading coefficient.  Used to compare determining equations "up
    to an overall constant".
    """
    from .nodes import has_unknowns

    c = canonical(e)
    if c is ZERO or isinstance(c, Rat):
        return c
    p = _to_poly(c)
    mins = {
        a: q
        for a, q in _common_exponents(p).items()
        if (isinstance(a, Func) and a.fn == "exp") or not has_unknowns(a)
    }
    stripped: Poly = {}
    for m, c2 in p.items():
        f = dict(m)
        for a, q in mins.items():
            f[a] = f.get(a, Fraction(0)) - q
        stripped[_monom(f)] = c2
    stripped = _normalize_poly(stripped)
    if not stripped:
        return ZERO
    items = sorted(stripped.items(), key=lambda kv: tuple((sort_key(a), q) for a, q in kv[0]))
    lead = items[0][1]
    out = {m: c2 / lead for m, c2 in items}
    return _from_poly(out)
