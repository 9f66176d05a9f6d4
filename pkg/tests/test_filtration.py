import random

import pytest
from hypothesis import given, settings, strategies as st

from polyauto import (CYCLO5, AutoWord, Poly, QQ, build_generators,
                      case_classify, gamma_closed_form, ldeg2, le2,
                      order2_key, parse_endo, qstar_member,
                      random_qstar_member, verify_degree_table,
                      verify_stability, verify_theorem_noncotame, word_to_str)
from polyauto.filtration import FiltrationError, _target_index

rng = random.Random(2718)

x, y, z = Poly.variables(3, QQ)

triples = st.tuples(st.integers(0, 9), st.integers(0, 9), st.integers(0, 9))


@given(triples, triples)
@settings(max_examples=80, deadline=None)
def test_order_is_total_and_antisymmetric(v, w):
    assert le2(v, w) or le2(w, v)
    if le2(v, w) and le2(w, v):
        assert v == w


@given(triples, triples, triples)
@settings(max_examples=80, deadline=None)
def test_order_is_translation_invariant(v, w, t):
    shifted_v = tuple(a + b for a, b in zip(v, t))
    shifted_w = tuple(a + b for a, b in zip(w, t))
    assert le2(v, w) == le2(shifted_v, shifted_w)


def test_leading_exponent_examples():
    assert ldeg2(x) == (1, 0, 0)
    # x sits strictly below the constants
    assert le2((1, 0, 0), (0, 0, 0))
    assert not le2((0, 0, 0), (1, 0, 0))
    assert ldeg2(x + y) == (0, 1, 0)
    assert ldeg2(y ** 2 + y * z ** 5) == (0, 2, 0)
    assert ldeg2(y * z ** 5 + y * z) == (0, 1, 5)
    with pytest.raises(FiltrationError):
        ldeg2(Poly.zero(3))


def test_qstar_membership_examples():
    assert qstar_member(y ** 4, 4, 0)
    assert not qstar_member(y ** 3, 4, 0)
    assert not qstar_member(x * y ** 4, 4, 0)
    # x*y^4 breaks the (1,1,0)-degree bound even though y^4 still leads
    assert not qstar_member(y ** 4 + x * y ** 4, 4, 0)
    assert qstar_member(y ** 4 + z ** 2, 4, 0)
    assert not qstar_member(y ** 4 + z ** 13, 4, 0)


def test_leading_exponent_is_multiplicative():
    for _ in range(25):
        p = _rand_nonzero()
        q = _rand_nonzero()
        got = ldeg2(p * q)
        want = tuple(a + b for a, b in zip(ldeg2(p), ldeg2(q)))
        assert got == want


def _rand_nonzero():
    while True:
        terms = {}
        for _ in range(rng.randint(1, 4)):
            e = (rng.randint(0, 3), rng.randint(0, 3), rng.randint(0, 3))
            terms[e] = QQ.coerce(rng.randint(-3, 3) or 1)
        p = Poly(3, QQ, terms)
        if not p.is_zero():
            return p


def test_generators_shape():
    beta, pi, theta = build_generators()
    assert beta.flatten() == parse_endo(
        "(x + y^2*(y + z^2)^2, y + z^2, z)", 3)
    pie = pi.flatten()
    assert pie.compose(pie).is_identity()
    t1 = theta(1)
    assert t1.flatten().compose(t1.flatten()).is_identity()


def test_theta_is_a_formal_involution():
    # theta_N = g pi g^-1 for g = (pi beta)^N, so theta_N^2 cancels
    # tokenwise; for N >= 2 the flatten is far too large to touch
    beta, pi, theta = build_generators()
    for big in (1, 2, 3):
        w = theta(big)
        toks = list(w.tokens)
        half = (len(toks) - 1) // 2
        g = AutoWord(toks[:half])
        assert word_to_str(AutoWord(toks[half + 1:])) == word_to_str(
            g.inverse())
        assert word_to_str(AutoWord([toks[half]])) == word_to_str(pi)


def test_case_classification():
    assert case_classify(2, 0, 0) == "A"
    assert case_classify(CYCLO5.gen(), 0, 1, CYCLO5) == "B2"
    assert case_classify(1, 1, 0) == "B1"
    assert case_classify(1, 0, 1) == "B0"
    with pytest.raises(FiltrationError):
        case_classify(1, 0, 0)
    with pytest.raises(FiltrationError):
        case_classify(0, 1, 1)


def test_gamma_closed_form_agreement():
    gamma, X, Y, Z, Z1, Z2 = gamma_closed_form(2, 0, 0)
    assert gamma.components == (X, Y, Z)
    u = QQ.coerce(2)
    assert Z1 == z * z * u ** 8
    assert Z2 == z * z * (u ** 8 - u ** 2)
    # when u^6 = 1 the second auxiliary form drops to degree <= 1
    _, _, _, _, _, Z2b = gamma_closed_form(1, 1, 7)
    assert Z2b == z + 7
    # u = 1, c = d = 0 makes Z2 vanish entirely
    _, X0, _, _, _, Z20 = gamma_closed_form(1, 0, 0)
    assert Z20.is_zero()


def test_degree_table_per_case():
    for u, c, d, field in ((2, 0, 0, QQ), (CYCLO5.gen(), 0, 1, CYCLO5),
                           (1, 1, 0, QQ), (1, 0, 1, QQ)):
        rep = verify_degree_table(u, c, d, field)
        assert rep.ok, rep.text()


def test_degree_table_reports_lines():
    rep = verify_degree_table(2, 0, 0)
    assert any("ldeg_2(X)" in name for name, *_ in rep.lines)
    assert "pass" in rep.text()


def test_stability_identity_map():
    from polyauto import Endo
    rep = verify_stability(Endo.identity(3, QQ), (4, 0), (4, 0))
    assert rep.ok, rep.text()


def test_stability_lattice_and_samples():
    beta, pi, _ = build_generators()
    e = (pi * beta).flatten()
    rep = verify_stability(e, (4, 2), _target_index("A", 4, 2))
    assert rep.ok, rep.text()
    rep = verify_stability(e, (4, 2), _target_index("A", 4, 2),
                           mode="samples", samples=5, seed=1)
    assert rep.ok, rep.text()


def test_stability_detects_wrong_target():
    beta, pi, _ = build_generators()
    e = (pi * beta).flatten()
    rep = verify_stability(e, (4, 0), (16, 1))
    assert not rep.ok


def test_random_members_live_where_claimed():
    for _ in range(10):
        m, n = rng.randint(1, 6), rng.randint(0, 6)
        p = random_qstar_member(m, n, QQ, rng)
        assert qstar_member(p, m, n)


def test_theorem_check_small_window():
    rep = verify_theorem_noncotame(N=2, M=4,
                                   parameter_samples=[(2, 0, 0, QQ)])
    assert rep.ok, rep.text()


def test_theorem_check_rejects_shallow_depth():
    with pytest.raises(FiltrationError):
        verify_theorem_noncotame(N=1)
