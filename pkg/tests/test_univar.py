"""Exact univariate root extraction and real-root counting."""

from fractions import Fraction

import pytest

from lojalab.poly import parse
from lojalab.univar import (
    coeffs_from_poly,
    count_distinct_real_roots,
    evaluate,
    rational_roots,
)


def _coeffs(text: str):
    return coeffs_from_poly(parse(text))


def test_rational_roots_simple():
    roots = dict(rational_roots(_coeffs("z^3 - z")))
    assert roots == {Fraction(0): 1, Fraction(1): 1, Fraction(-1): 1}


def test_rational_roots_with_multiplicity():
    # (z - 1)^2 * (2z + 3)
    roots = dict(rational_roots(_coeffs("(z - 1)*(z - 1)*(2*z + 3)")))
    assert roots == {Fraction(1): 2, Fraction(-3, 2): 1}


def test_rational_roots_none_for_irreducible():
    assert rational_roots(_coeffs("z^2 - 2")) == []
    assert rational_roots(_coeffs("z^2 + 1")) == []


def test_count_distinct_real_roots():
    assert count_distinct_real_roots(_coeffs("z^2 - 2")) == 2
    assert count_distinct_real_roots(_coeffs("z^2 + 1")) == 0
    assert count_distinct_real_roots(_coeffs("z^3 - z")) == 3
    # Multiplicities collapse: (z-1)^2 has one distinct root.
    assert count_distinct_real_roots(_coeffs("(z - 1)*(z - 1)")) == 1


def test_evaluate_horner():
    coeffs = _coeffs("2*z^2 - 3*z + 1")
    assert evaluate(coeffs, Fraction(1, 2)) == 0
    assert evaluate(coeffs, Fraction(2)) == 3


def test_constant_and_zero_edge_cases():
    assert rational_roots(_coeffs("5")) == []
    assert count_distinct_real_roots(_coeffs("5")) == 0
    assert coeffs_from_poly(parse("0")) == []


def test_multivariate_rejected():
    with pytest.raises(ValueError):
        coeffs_from_poly(parse("x*y"))
