"""Differentiation rules and randomized expression-level properties."""

from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from noethersphere.expr import (
    ZERO,
    add,
    canonical,
    collect_velocity_monomials,
    differentiate,
    eval_numeric,
    free_symbols,
    func,
    is_zero,
    mul,
    parse,
    pow_,
    rat,
    sample_point,
    sym,
    unknown,
    NonPolynomialVelocity,
    VelocityMonomial,
)

import numpy as np


class TestDifferentiate:
    def test_chain_rule_unknown_profile(self):
        e = func("exp", unknown("nu"))
        d = differentiate(e, "r")
        assert d is canonical(mul(unknown("nu", ["r"]), func("exp", unknown("nu"))))

    def test_sin_squared(self):
        d = differentiate(parse("sin(theta)^2"), "theta")
        assert d is canonical(parse("2*sin(theta)*cos(theta)"))

    def test_velocity_is_independent_symbol(self):
        d = differentiate(parse("r^2*sin(theta)^2*phid"), "phid")
        assert d is canonical(parse("r^2*sin(theta)^2"))

    def test_constant_derivative_is_zero(self):
        assert differentiate(parse("5/7"), "r") is ZERO

    def test_unknown_derivative_of_foreign_variable_is_zero(self):
        assert differentiate(unknown("nu"), "t") is ZERO

    def test_mixed_partials_commute_structurally(self):
        xi = unknown("xi")
        a = differentiate(differentiate(xi, "t"), "r")
        b = differentiate(differentiate(xi, "r"), "t")
        assert a is b


# bounded random expression trees over a small symbol pool
_symbols = st.sampled_from(["s", "t", "r", "theta", "alpha"])
_consts = st.integers(min_value=-4, max_value=4).map(rat)


def _exprs(depth: int):
    if depth == 0:
        return st.one_of(_symbols.map(sym), _consts)
    sub = _exprs(depth - 1)
    return st.one_of(
        _symbols.map(sym),
        _consts,
        st.tuples(sub, sub).map(lambda ab: add(*ab)),
        st.tuples(sub, sub).map(lambda ab: mul(*ab)),
        st.tuples(sub, st.integers(min_value=1, max_value=3)).map(lambda be: pow_(be[0], be[1])),
        sub.map(lambda e: func("sin", e)),
        sub.map(lambda e: func("cos", e)),
    )


@settings(max_examples=60, deadline=None)
@given(e1=_exprs(3), e2=_exprs(3), a=st.integers(min_value=-3, max_value=3))
def test_differentiate_is_linear(e1, e2, a):
    v = "r"
    lhs = differentiate(add(mul(rat(a), e1), e2), v)
    rhs = canonical(add(mul(rat(a), differentiate(e1, v)), differentiate(e2, v)))
    assert lhs is rhs


@settings(max_examples=60, deadline=None)
@given(e=_exprs(3))
def test_eval_matches_after_simplify(e):
    c = canonical(e)
    names = free_symbols(e)
    rng = np.random.default_rng(11)
    for _ in range(5):
        pt = sample_point(rng, names)
        try:
            va = eval_numeric(e, pt)
            vb = eval_numeric(c, pt)
        except ArithmeticError:
            continue
        assert abs(va - vb) <= 1e-10 * max(1.0, abs(va), abs(vb))


class TestMonomials:
    def test_lagrangian_style_decomposition(self):
        e = parse("exp(ln(1 - alpha/r))*td^2 - exp(-ln(1 - alpha/r))*rd^2")
        mono = collect_velocity_monomials(e)
        assert set(mono) == {VelocityMonomial(2, 0, 0, 0), VelocityMonomial(0, 2, 0, 0)}
        assert mono[VelocityMonomial(2, 0, 0, 0)] is canonical(parse("1 - alpha/r"))

    def test_constant_bucket(self):
        mono = collect_velocity_monomials(parse("5"))
        assert mono == {VelocityMonomial(0, 0, 0, 0): canonical(parse("5"))}

    def test_like_terms_collect(self):
        nu_r = unknown("nu", ["r"])
        e = add(mul(sym("td"), sym("rd"), nu_r), mul(sym("td"), sym("rd")))
        mono = collect_velocity_monomials(e)
        assert mono[VelocityMonomial(1, 1, 0, 0)] is canonical(add(nu_r, rat(1)))

    def test_nonpolynomial_velocity_rejected(self):
        with pytest.raises(NonPolynomialVelocity):
            collect_velocity_monomials(parse("sin(td)"))
        with pytest.raises(NonPolynomialVelocity):
            collect_velocity_monomials(parse("1/rd"))


@settings(max_examples=40, deadline=None)
@given(e=_exprs(2), k1=st.integers(min_value=0, max_value=2), k2=st.integers(min_value=0, max_value=2))
def test_monomial_reconstruction(e, k1, k2):
    poly = add(mul(e, pow_(sym("td"), k1)), mul(rat(3), pow_(sym("rd"), k2)))
    mono = collect_velocity_monomials(poly)
    rebuilt = add(*[mul(mn.as_expr(), coeff) for mn, coeff in mono.items()])
    assert is_zero(add(rebuilt, mul(rat(-1), poly)), seed=2).status == "zero"
