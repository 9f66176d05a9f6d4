import json
import random

import pytest

from polyauto import (Affine, AutoWord, Endo, EngineError, Permutation, Poly,
                      QQ, ReductionTrace, Triangular, conjugate_descent_step,
                      d_r_vector, derksen_endo, lambda_construct,
                      nagata_derivation, parse_endo, reduce_3triangular,
                      reduce_biparabolic, reduce_exp, reduce_parabolic,
                      reduce_td, reduce_triangular, verify_trace)

from genutil import (rand_3tri_word, rand_affine, rand_exp_case,
                     rand_parabolic, rand_poly, rand_td_word, rand_triangular,
                     rand_ttd_params)
from polyauto import ttd_build

rng = random.Random(90210)


def reduced_ok(tr):
    assert verify_trace(tr)
    assert tr.terminal["kind"] in ("affine", "derksen")
    return tr


def test_d_r_vector():
    e = parse_endo("(x + z^2, y + z^3, z)", 3)
    assert d_r_vector(e, 3) == (2, 3, 1)
    assert d_r_vector(e, 1) == (1, 0, 0)


def test_descent_step_decreases_degree():
    hits = 0
    while hits < 20:
        tau = rand_triangular(rng, 3, QQ, 3).to_endo()
        r = rng.randint(1, 3)
        v = [QQ.zero] * 3
        v[r - 1] = QQ.coerce(rng.randint(1, 3))
        theta = Affine.translation(3, r, v[r - 1])
        before = d_r_vector(tau, r)
        unit = tuple(1 if i == r - 1 else 0 for i in range(3))
        if not before > unit:
            continue
        out = conjugate_descent_step(tau, theta)
        assert d_r_vector(out, r) < before
        hits += 1


def test_descent_step_rejects_flat_input():
    tau = parse_endo("(x, y, z + x^2)", 3)
    theta = Affine.translation(3, 3, QQ.coerce(1))
    with pytest.raises(EngineError):
        conjugate_descent_step(tau, theta)


def test_reduce_derksen_terminal():
    tr = reduce_parabolic(derksen_endo(3))
    assert verify_trace(tr)
    assert tr.terminal["kind"] == "derksen"


def test_reduce_triangular_random():
    for _ in range(12):
        reduced_ok(reduce_triangular(rand_triangular(rng, 3, QQ, 4)))


def test_reduce_parabolic_random():
    for _ in range(12):
        reduced_ok(reduce_parabolic(rand_parabolic(rng, 3, QQ, 3)))


def test_reduce_biparabolic_random():
    for _ in range(8):
        tr = reduce_biparabolic(rand_parabolic(rng, 3, QQ, 2),
                                rand_affine(rng, 3, QQ),
                                rand_parabolic(rng, 3, QQ, 2))
        reduced_ok(tr)


def test_reduce_3triangular_worked_example():
    t = Triangular.from_endo(parse_endo("(x, y + x^2, z + y^2)", 3))
    a = Permutation([3, 2, 1])
    tr = reduce_3triangular(AutoWord([t, a, t, a, t]))
    reduced_ok(tr)


def test_reduce_3triangular_random():
    for _ in range(8):
        reduced_ok(reduce_3triangular(rand_3tri_word(rng, 3, QQ, 2)))


def test_reduce_exp_nagata():
    d, f = nagata_derivation()
    tr = reduce_exp(Endo.identity(3, QQ), d, f, Endo.identity(3, QQ))
    reduced_ok(tr)


def test_reduce_exp_random():
    done = 0
    while done < 6:
        case = rand_exp_case(rng, QQ, 2)
        if case is None:
            continue
        d, f = case
        tr = reduce_exp(rand_parabolic(rng, 3, QQ, 2), d, f,
                        rand_parabolic(rng, 3, QQ, 2))
        reduced_ok(tr)
        done += 1


def test_reduce_td_random():
    done = 0
    while done < 12:
        w = rand_td_word(rng, rng.choice([3, 4]), QQ, 2)
        if w is None:
            continue
        reduced_ok(reduce_td(w, 1))
        done += 1


def test_reduce_affine_input_is_trivial():
    tr = reduce_td(rand_affine(rng, 3, QQ).to_endo(), 1)
    assert tr.terminal["kind"] == "affine"
    assert tr.steps == []
    assert verify_trace(tr)


def test_trace_json_roundtrip():
    tr = reduce_triangular(rand_triangular(rng, 3, QQ, 3))
    tr2 = ReductionTrace.from_json(tr.to_json())
    assert verify_trace(tr2)
    assert tr2.to_json() == tr.to_json()


def test_tampered_trace_fails():
    t = Triangular.from_endo(parse_endo("(x, y + x^2, z + y^2)", 3))
    a = Permutation([3, 2, 1])
    tr = reduce_3triangular(AutoWord([t, a, t, a, t]))
    assert tr.steps
    data = json.loads(tr.to_json())
    data["steps"][0]["digest"] = "0" * len(data["steps"][0]["digest"])
    bad = ReductionTrace.from_json(json.dumps(data))
    assert not verify_trace(bad)


def test_lambda_construct_closed_form():
    for n in (3, 4, 5):
        for _ in range(5):
            params = rand_ttd_params(rng, n, QQ)
            params = type(params)(params.b, [1] * (n - 1), QQ)
            g = QQ.coerce(rng.randint(-3, 3))
            res = lambda_construct(params, 2, g)
            tau = ttd_build(params)
            from polyauto import invert_triangular_like
            lhs = tau.compose(res.lam).compose(invert_triangular_like(tau))
            assert lhs == res.lam_tilde
            from polyauto import is_affine
            assert is_affine(res.lam_tilde)


def test_lambda_construct_needs_full_chain():
    params = rand_ttd_params(rng, 3, QQ)
    params = type(params)(params.b, [0, 1], QQ)
    with pytest.raises(ValueError):
        lambda_construct(params, 2, QQ.one)
