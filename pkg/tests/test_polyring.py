from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from polyauto import (CYCLO5, NEG_INF, NumberField, Poly, QQ, parse_poly,
                      poly_to_str, weighted_degree)

xs3 = Poly.variables(3, QQ)


def small_polys(n=3, maxdeg=3, maxterms=4):
    def build(pairs):
        terms = {}
        for e, c in pairs:
            terms[tuple(e)] = terms.get(tuple(e), 0) + Fraction(c)
        return Poly(n, QQ, terms)
    exp = st.lists(st.integers(0, maxdeg), min_size=n, max_size=n)
    coeff = st.fractions(min_value=-9, max_value=9, max_denominator=6)
    return st.lists(st.tuples(exp, coeff), max_size=maxterms).map(build)


@given(small_polys(), small_polys(), small_polys())
@settings(max_examples=60, deadline=None)
def test_ring_laws(p, q, r):
    assert p + q == q + p
    assert p * q == q * p
    assert (p + q) + r == p + (q + r)
    assert (p * q) * r == p * (q * r)
    assert p * (q + r) == p * q + p * r
    assert p + Poly.zero(3) == p
    assert p * Poly.const(3, 1) == p


@given(small_polys(), small_polys())
@settings(max_examples=40, deadline=None)
def test_degree_of_product_adds(p, q):
    if p.is_zero() or q.is_zero():
        assert (p * q).is_zero()
    else:
        assert (p * q).total_degree() == p.total_degree() + q.total_degree()
        w = (1, 2, 3)
        assert ((p * q).weighted_degree(w)
                == p.weighted_degree(w) + q.weighted_degree(w))


@given(small_polys())
@settings(max_examples=40, deadline=None)
def test_parse_print_roundtrip(p):
    assert parse_poly(poly_to_str(p), 3) == p


def test_substitute_composes():
    x, y, z = xs3
    p = x * y + z ** 2
    images = [y + 1, x * z, z - y]
    assert p.substitute(images) == (y + 1) * (x * z) + (z - y) ** 2


def test_substitution_is_a_homomorphism():
    x, y, z = xs3
    images = [x + y, y * z, z + 1]
    p, q = x ** 2 + z, y * z - x
    assert (p * q).substitute(images) == p.substitute(images) * q.substitute(images)
    assert (p + q).substitute(images) == p.substitute(images) + q.substitute(images)


def test_weighted_degree_examples():
    x, y, z = xs3
    assert weighted_degree(x * y ** 2, (1, 1, 0)) == 3
    assert weighted_degree(x * y ** 2 * z ** 5, (3, 3, 1)) == 14
    assert weighted_degree(Poly.zero(3), (1, 1, 1)) is NEG_INF


def test_partial_and_difference():
    x, y, z = xs3
    p = x ** 3 + 2 * x * y
    assert p.partial_derivative(1) == 3 * x ** 2 + 2 * y
    shifted = p.substitute([x + 1, y, z])
    assert p.finite_difference(1) == shifted - p


def test_cyclotomic_field_arithmetic():
    u = CYCLO5.gen()
    assert u ** 5 == 1
    assert u ** 30 == 1
    assert u ** 6 == u
    assert u ** 6 != 1
    assert sum(u ** k for k in range(5)) == 0
    assert (1 / u) * u == 1


def test_number_field_rejects_mixed_fields():
    other = NumberField([2, 0, 1])
    with pytest.raises(TypeError):
        CYCLO5.gen() + other.gen()


def test_quadratic_field_inverse():
    f = NumberField([-2, 0, 1])
    r = f.gen()
    assert r * r == 2
    assert (1 + r) * (1 + r).inverse() == 1
