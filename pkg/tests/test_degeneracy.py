import random
from fractions import Fraction

import pytest

from polyauto import (AutoWord, Endo, NotDegenerate, Poly, QQ, TTDParams,
                      Triangular, eliminate_x1, factorize_td,
                      formal_translation_conjugate, invert_triangular_like,
                      jordan_normalize, parse_endo, td_test, ttd_build,
                      ttd_build_via_exp)
from polyauto.degeneracy import extract_linear_system

from genutil import rand_td_word, rand_ttd_params

rng = random.Random(5151)


def chain_tau():
    return parse_endo(
        "(x, y - 1/2*x^2, z - x*y + 1/3*x^3)", 3)


def test_td_example_and_its_inverse():
    tau = chain_tau()
    assert td_test(tau, 1)
    assert not td_test(invert_triangular_like(tau), 1)


def test_formal_conjugate_matches_hand_computation():
    # tau^-1 theta_{1,t} tau with t as the inert fourth variable
    tau = chain_tau()
    conj = formal_translation_conjugate(AutoWord([Triangular.from_endo(tau)]), 1)
    x, y, z, t = Poly.variables(4, QQ)
    assert conj.components == (
        x + t,
        y + t * x + t ** 2 * Fraction(1, 2),
        z + t * y + t ** 2 * x * Fraction(1, 2) + t ** 3 * Fraction(1, 6),
        t)


def test_translations_are_degenerate_everywhere():
    e = parse_endo("(x + 1, y - 2, z)", 3)
    for r in (1, 2, 3):
        assert td_test(e, r)


def test_ttd_build_matches_exponential_form():
    for _ in range(20):
        params = rand_ttd_params(rng, rng.randint(3, 5), QQ)
        assert ttd_build(params) == ttd_build_via_exp(params)


def test_ttd_example_parameters():
    # chain_tau has b2 = b3 = 0 and d2 = d3 = 1
    assert ttd_build(TTDParams([0, 0], [1, 1], QQ)) == chain_tau()
    # the map (x, y - 1/2 x^2, z, ...) has d2 = 1, the rest zero
    assert ttd_build(TTDParams([0, 0, 0], [1, 0, 0], QQ)) == parse_endo(
        "(x1, x2 - 1/2*x1^2, x3, x4)", 4)


def test_ttd_forms_are_degenerate():
    for _ in range(10):
        tau = ttd_build(rand_ttd_params(rng, 3, QQ))
        assert td_test(tau, 1)


def test_extract_linear_system_on_chain():
    data = extract_linear_system(AutoWord([Triangular.from_endo(chain_tau())]))
    # dH/dx1 = A H + b with A the nilpotent lower shift
    assert data.a == ((0, 0, 0), (1, 0, 0), (0, 1, 0))
    assert data.b == (1, 0, 0)


def test_jordan_normalize_is_idempotent_shape():
    for _ in range(10):
        w = rand_td_word(rng, 3, QQ, 2)
        if w is None:
            continue
        lam, data = jordan_normalize(w)
        n = w.n
        for i in range(n):
            for j in range(n):
                if j != i - 1:
                    assert data.a[i][j] == 0
                else:
                    assert data.a[i][j] in (0, 1)
        assert data.b[0] == 1


def test_eliminate_x1_kills_the_variable():
    for _ in range(15):
        w = rand_td_word(rng, rng.choice([3, 4]), QQ, 2)
        if w is None:
            continue
        lam, _data = jordan_normalize(w)
        tau, gs = eliminate_x1(AutoWord(list(w.tokens) + [lam]))
        for g in gs:
            assert g.partial_derivative(1).is_zero()
        assert td_test(tau, 1)


def test_factorize_td_roundtrip():
    for _ in range(25):
        n = rng.choice([3, 4])
        w = rand_td_word(rng, n, QQ, 2)
        if w is None:
            continue
        fac = factorize_td(w, 1)
        assert fac.verify(w)
        assert fac.recompose() == w.inverse().flatten()


def test_factorize_other_variable():
    # degenerate in x2: conjugate the chain form by the swap
    from polyauto.degeneracy import _coerce_word
    tau = ttd_build(TTDParams([1, 0], [1, 1], QQ))
    swap = parse_endo("(y, x, z)", 3)
    e = swap.compose(tau).compose(swap)
    assert td_test(e, 2)
    fac = factorize_td(e, 2)
    assert fac.verify(_coerce_word(e))


def test_non_degenerate_raises():
    tau = chain_tau()
    with pytest.raises(NotDegenerate):
        factorize_td(invert_triangular_like(tau), 1)
    with pytest.raises(NotDegenerate):
        factorize_td(parse_endo("(x^2, y, z)", 3), 1)
