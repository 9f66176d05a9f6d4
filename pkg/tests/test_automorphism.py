import random

import pytest

from polyauto import (Affine, AutoWord, Endo, Permutation, Poly, QQ,
                      Triangular, classify, invert_token,
                      invert_triangular_like, is_affine, is_parabolic,
                      is_triangular, parse_endo, parse_word, try_invert_endo,
                      word_to_str)

from genutil import rand_3tri_word, rand_affine, rand_parabolic, rand_triangular

rng = random.Random(411)


def test_compose_right_action_order():
    # (P)(phi psi) applies phi first, then psi
    phi = parse_endo("(x + y, y, z)", 3)
    psi = parse_endo("(x, y + x^2, z)", 3)
    both = phi.compose(psi)
    x, y, z = Poly.variables(3, QQ)
    assert both.components[0] == x + y + x ** 2


def test_token_inverses_cancel():
    for _ in range(15):
        tok = rand_triangular(rng, 3, QQ, 3)
        e = tok.to_endo().compose(invert_token(tok).to_endo())
        assert e.is_identity()
    for _ in range(15):
        tok = rand_affine(rng, 3, QQ)
        assert tok.to_endo().compose(tok.inverse().to_endo()).is_identity()


def test_word_inverse_flattens_to_inverse():
    for _ in range(10):
        w = rand_3tri_word(rng, 3, QQ, 2)
        assert w.flatten().compose(w.inverse().flatten()).is_identity()


def test_word_text_roundtrip():
    for _ in range(10):
        w = rand_3tri_word(rng, 3, QQ, 2)
        w2 = parse_word(word_to_str(w), 3)
        assert w2.flatten() == w.flatten()


def test_classify_labels():
    assert "identity" in classify(Endo.identity(3, QQ))
    assert "permutation" in classify(Permutation([2, 1, 3]).to_endo())
    assert "translation" in classify(Affine.translation(3, 2, QQ.coerce(5)).to_endo())
    e = parse_endo("(x, y + x^2, z)", 3)
    assert "triangular" in classify(e)
    assert "affine" not in classify(e)


def test_structure_predicates():
    assert is_triangular(parse_endo("(x, y + x^2, 2*z + x*y)", 3))
    assert not is_triangular(parse_endo("(x + y, y, z)", 3).compose(
        parse_endo("(x, y + x^2, z)", 3)))
    assert is_parabolic(parse_endo("(x + y^2, y, z + x*y)", 3))
    assert not is_parabolic(parse_endo("(x + z^2, y, z)", 3))
    assert is_affine(parse_endo("(x + y + 1, y - z, z)", 3))


def test_invert_triangular_like():
    for _ in range(20):
        t = rand_triangular(rng, 4, QQ, 3).to_endo()
        inv = invert_triangular_like(t)
        assert t.compose(inv).is_identity()
        assert inv.compose(t).is_identity()


def test_try_invert_supported_shapes():
    for e in (rand_triangular(rng, 3, QQ, 2).to_endo(),
              rand_affine(rng, 3, QQ).to_endo(),
              parse_endo("(x + y, y + 1, 2*z + x*y^2)", 3)):
        inv = try_invert_endo(e)
        assert inv is not None and e.compose(inv).is_identity()
    assert try_invert_endo(parse_endo("(x^2, y, z)", 3)) is None


def test_permutation_from_cycles():
    p = Permutation.from_cycles([[1, 3]], 3)
    assert p.to_endo() == Permutation([3, 2, 1]).to_endo()


def test_affine_requires_invertible_matrix():
    with pytest.raises(ValueError):
        Affine([[1, 0, 0], [1, 0, 0], [0, 0, 1]], [0, 0, 0], QQ)


def test_triangular_rejects_bad_shape():
    with pytest.raises(ValueError):
        Triangular.from_endo(parse_endo("(x + z, y, z)", 3))


def test_parabolic_random_instances():
    for _ in range(10):
        assert is_parabolic(rand_parabolic(rng, 3, QQ, 3))
