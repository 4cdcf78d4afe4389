"""Exact polynomial engine: parsing, arithmetic, substitution, content."""

from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lojalab.poly import (
    ParseError,
    Polynomial,
    PolynomialLimitError,
    Substitution,
    parse,
)


# ----------------------------------------------------------------------
# parsing
# ----------------------------------------------------------------------


def test_parse_cusp():
    p = parse("x^2 - y^3")
    assert p.variables == ("x", "y")
    assert p.terms == {(2, 0): Fraction(1), (0, 3): Fraction(-1)}


def test_parse_zero():
    assert parse("0").terms == {}


def test_parse_single_term_with_coefficient():
    p = parse("3*x1*x2")
    assert p.variables == ("x1", "x2")
    assert p.terms == {(1, 1): Fraction(3)}


def test_parse_ratio_literal():
    p = parse("1/2*x + 3/4")
    assert p.terms == {(1,): Fraction(1, 2), (0,): Fraction(3, 4)}


def test_parse_parentheses_and_signs():
    assert parse("-(x - 2)*(x + 2)") == parse("4 - x^2")


def test_parse_declared_variables_pin_dimension():
    p = parse("x^2", variables=["x", "y"])
    assert p.variables == ("x", "y")
    assert p.terms == {(2, 0): Fraction(1)}


def test_parse_error_reports_position():
    with pytest.raises(ParseError) as err:
        parse("x + $")
    assert err.value.position == 4


def test_parse_rejects_implicit_multiplication():
    with pytest.raises(ParseError):
        parse("3x")


def test_parse_rejects_non_integer_exponent():
    with pytest.raises(ParseError, match="non-integer exponent"):
        parse("x^1/2")


def test_parse_rejects_undeclared_variable():
    with pytest.raises(ParseError):
        parse("x + z", variables=["x", "y"])


def test_parse_print_parse_is_idempotent():
    for text in ("x^2 - y^3", "3*x1*x2 + 1/2", "0", "x^4 - 2*x^2*y + y^2"):
        once = parse(text)
        twice = parse(str(once))
        assert once == twice
        assert str(once) == str(twice)


def test_degree_cap_enforced():
    with pytest.raises(PolynomialLimitError):
        parse("x^65")
    with pytest.raises(PolynomialLimitError):
        parse("x^33") * parse("x^33")


# ----------------------------------------------------------------------
# evaluation
# ----------------------------------------------------------------------


def test_evaluate_on_cusp_points():
    p = parse("x^2 - y^3")
    assert p.evaluate([1.0, 1.0]) == 0.0
    assert p.evaluate([2.0, 1.0]) == 3.0


def test_evaluate_product_point():
    assert parse("x1*x2").evaluate([0.5, 0.5]) == 0.25


def test_evaluate_dimension_mismatch():
    with pytest.raises(ValueError):
        parse("x + y").evaluate([1.0])


def test_evaluate_exact_matches_float():
    p = parse("x^3 - 2/3*x*y + y^2")
    pt = [Fraction(1, 3), Fraction(-2, 7)]
    exact = p.evaluate_exact(pt)
    assert abs(p.evaluate([float(v) for v in pt]) - float(exact)) < 1e-15


def test_numeric_batch_matches_pointwise():
    p = parse("x^2*y - 3*y^2 + 1/2")
    pts = np.array([[0.1, 0.2], [-1.0, 2.0], [0.0, 0.0]])
    batch = p.numeric()(pts)
    for row, expected in zip(pts, batch):
        assert p.evaluate(list(row)) == pytest.approx(expected, rel=1e-14)


# ----------------------------------------------------------------------
# calculus
# ----------------------------------------------------------------------


def test_gradient_power_rule():
    gx, gy = parse("x^2 - y^3").gradient()
    assert gx == parse("2*x", variables=["x", "y"])
    assert gy == parse("0 - 3*y^2", variables=["x", "y"])


def test_gradient_product():
    g1, g2 = parse("x1*x2").gradient()
    assert g1 == parse("x2")
    assert g2 == parse("x1")


def test_gradient_of_constant_is_zero():
    g = parse("5", variables=["x", "y", "z"]).gradient()
    assert all(component.is_zero for component in g)


# ----------------------------------------------------------------------
# substitution
# ----------------------------------------------------------------------


def _chart(u: str, v: str, mapping: dict[str, str]) -> Substitution:
    # mapping: source var -> product expression over (u, v)
    return Substitution({k: parse(e) for k, e in mapping.items()})


def test_substitute_first_blowup_chart():
    p = parse("x^2 - y^3")
    sub = Substitution({"x": parse("u*v"), "y": parse("v", variables=["u", "v"])})
    assert p.substitute(sub) == parse("u^2*v^2 - v^3")


def test_substitute_second_blowup_chart():
    p = parse("x^2 - y^3")
    sub = Substitution({"x": parse("a", variables=["a", "b"]), "y": parse("a*b")})
    assert p.substitute(sub) == parse("a^2 - a^3*b^3")


def test_substitute_identity():
    p = parse("x^2*y - y + 7")
    sub = Substitution({"x": parse("x"), "y": parse("y")})
    assert p.substitute(sub) == p


def test_substitute_unknown_variable_rejected():
    with pytest.raises(ValueError, match="not in"):
        parse("x^2").substitute(Substitution({"q": parse("x")}))


def test_substitute_collision_rejected():
    p = parse("x + y")
    with pytest.raises(ValueError, match="collide"):
        p.substitute(Substitution({"x": parse("y + 1")}))


def test_translation_reusing_same_variable_allowed():
    p = parse("x^2")
    shifted = p.substitute(Substitution({"x": parse("x + 1")}))
    assert shifted == parse("x^2 + 2*x + 1")


# ----------------------------------------------------------------------
# monomial content
# ----------------------------------------------------------------------


def test_monomial_content_after_blowup():
    content, quotient = parse("u^2*v^2 - v^3").monomial_content()
    assert content == (0, 2)
    assert quotient == parse("u^2 - v")


def test_monomial_content_final_chart():
    content, quotient = parse("a^6*b^2 - a^6*b^3").monomial_content()
    assert content == (6, 2)
    assert quotient == parse("1 - b", variables=["a", "b"])


def test_monomial_content_trivial():
    p = parse("x^2 - y^3")
    content, quotient = p.monomial_content()
    assert content == (0, 0)
    assert quotient == p


def test_monomial_content_zero_rejected():
    with pytest.raises(ValueError):
        parse("0").monomial_content()


# ----------------------------------------------------------------------
# property tests
# ----------------------------------------------------------------------

_coeffs = st.fractions(
    min_value=-5, max_value=5, max_denominator=4
)


@st.composite
def polynomials(draw, dim: int | None = None, max_degree: int = 3):
    d = draw(st.integers(1, 3)) if dim is None else dim
    variables = ("x", "y", "z")[:d]
    n_terms = draw(st.integers(0, 5))
    terms = {}
    for _ in range(n_terms):
        exponent = tuple(draw(st.integers(0, max_degree)) for _ in range(d))
        terms[exponent] = draw(_coeffs)
    return Polynomial(variables, terms)


_points = st.lists(
    st.fractions(min_value=-3, max_value=3, max_denominator=5), min_size=3, max_size=3
)


@given(polynomials(dim=2), polynomials(dim=2), _points)
@settings(max_examples=100, deadline=None)
def test_product_evaluation_homomorphism(p, q, point):
    pt = point[:2]
    exact = (p * q).evaluate_exact(pt)
    assert exact == p.evaluate_exact(pt) * q.evaluate_exact(pt)
    float_pt = [float(v) for v in pt]
    lhs = (p * q).evaluate(float_pt)
    rhs = p.evaluate(float_pt) * q.evaluate(float_pt)
    assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-12)


@given(polynomials(dim=2), polynomials(dim=2), _coeffs, _coeffs)
@settings(max_examples=100, deadline=None)
def test_gradient_is_linear(p, q, a, b):
    combined = (p.scale(a) + q.scale(b)).gradient()
    expected = tuple(
        gp.scale(a) + gq.scale(b) for gp, gq in zip(p.gradient(), q.gradient())
    )
    assert combined == expected


@given(polynomials(dim=2, max_degree=2), _points)
@settings(max_examples=60, deadline=None)
def test_substitution_commutes_with_evaluation(p, point):
    pt = point[:2]
    sub = Substitution({"x": parse("s + t"), "y": parse("s*t")})
    composed = p.substitute(sub)
    s, t = Fraction(1, 2), Fraction(-2, 3)
    direct = p.evaluate_exact([s + t, s * t])
    assert composed.evaluate_exact([s, t]) == direct


@given(polynomials())
@settings(max_examples=100, deadline=None)
def test_monomial_content_roundtrip(p):
    if p.is_zero:
        return
    content, quotient = p.monomial_content()
    monomial = Polynomial(p.variables, {content: Fraction(1)})
    assert monomial * quotient == p
    again, _ = quotient.monomial_content()
    assert again == (0,) * len(p.variables)
