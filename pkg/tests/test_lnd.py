import random

import pytest

from polyauto import (Poly, QQ, TriangularDerivation, exponential,
                      nagata_derivation, nagata_endo, parse_derivation,
                      derivation_to_str)

from genutil import rand_poly

rng = random.Random(733)

x, y, z = Poly.variables(3, QQ)


def chain_derivation():
    return TriangularDerivation([Poly.zero(3, QQ), x, y])


def test_leibniz_and_linearity():
    d = chain_derivation()
    for _ in range(20):
        p = rand_poly(rng, 3, QQ, [1, 2, 3], 3)
        q = rand_poly(rng, 3, QQ, [1, 2, 3], 3)
        assert d.apply(p * q) == p * d.apply(q) + q * d.apply(p)
        assert d.apply(p + q) == d.apply(p) + d.apply(q)


def test_rejects_non_triangular_images():
    with pytest.raises(ValueError):
        TriangularDerivation([y, x, z])


def test_kernel_membership():
    d, f = nagata_derivation()
    assert d.kernel_member(f)
    assert d.kernel_member(f ** 3)
    assert not d.kernel_member(y)
    assert d.apply(f).is_zero()


def test_exponential_is_automorphism():
    d = chain_derivation()
    e = exponential(d, x ** 2)  # x in ker D
    inv = exponential(d, -(x ** 2))
    assert e.compose(inv).is_identity()
    assert inv.compose(e).is_identity()


def test_exponential_fixes_kernel():
    d, f = nagata_derivation()
    e = exponential(d, f)
    assert f.substitute(list(e.components)) == f


def test_exponential_requires_kernel_slope():
    d = chain_derivation()
    with pytest.raises(ValueError):
        exponential(d, y)


def test_nagata_components():
    e = nagata_endo()
    d, f = nagata_derivation()
    assert e.components[0] == x
    assert e.components[1] == y + x * f
    assert e.components[2] == z - 2 * y * f - x * f ** 2
    inv = exponential(d, -f)
    assert e.compose(inv).is_identity()


def test_exponential_additivity_in_time():
    # exp(fD) exp(fD) == exp(2fD) for f in ker D
    d, f = nagata_derivation()
    e1 = exponential(d, f)
    e2 = exponential(d, f * 2)
    assert e1.compose(e1) == e2


def test_derivation_text_roundtrip():
    d = chain_derivation()
    assert parse_derivation(derivation_to_str(d), 3) == d
    d2, _f = nagata_derivation()
    assert parse_derivation("D: x -> 0; y -> x; z -> -2*y", 3) == d2
