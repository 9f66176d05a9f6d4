"""Random instance generators shared across the test modules."""

from fractions import Fraction

from polyauto import (Affine, AutoWord, Endo, EndoPair, InverseOf, Poly,
                      Triangular, TTDParams, is_affine, try_invert_endo,
                      ttd_build)


def rand_poly(rng, n, field, vars_allowed, maxdeg, terms=3):
    out = Poly.zero(n, field)
    for _ in range(terms):
        e = [0] * n
        for _k in range(rng.randint(1, maxdeg)):
            e[rng.choice(vars_allowed) - 1] += 1
        c = rng.randint(-3, 3) or 1
        out = out + Poly(n, field, {tuple(e): field.coerce(c)})
    return out


def rand_triangular(rng, n, field, maxdeg):
    xs = Poly.variables(n, field)
    comps = []
    for i in range(1, n + 1):
        u = field.coerce(rng.choice([1, 1, 2, -1]))
        tail = (Poly.zero(n, field) if i == 1
                else rand_poly(rng, n, field, list(range(1, i)), maxdeg,
                               terms=rng.randint(1, 3)))
        comps.append(xs[i - 1] * u + tail)
    return Triangular.from_endo(Endo(comps))


def rand_affine(rng, n, field):
    while True:
        try:
            mat = [[field.coerce(rng.randint(-2, 2)) for _ in range(n)]
                   for _ in range(n)]
            vec = [field.coerce(rng.randint(-2, 2)) for _ in range(n)]
            return Affine(mat, vec, field)
        except ValueError:
            continue


def rand_parabolic(rng, n, field, maxdeg):
    """First n-1 components triangular in x1..x_{n-1}, last a shear of xn."""
    xs = Poly.variables(n, field)
    tri = rand_triangular(rng, n - 1, field, maxdeg)
    emb = [c.shift_variables(n) for c in tri.to_endo().components]
    last = (xs[n - 1] * field.coerce(rng.choice([1, 2, -1]))
            + rand_poly(rng, n, field, list(range(1, n)), maxdeg,
                        terms=rng.randint(1, 3)))
    return Endo(emb[:n - 1] + [last])


def rand_3tri_word(rng, n, field, maxdeg):
    toks = []
    for _k in range(rng.randint(2, 3)):
        toks.append(rand_triangular(rng, n, field, maxdeg))
        toks.append(rand_affine(rng, n, field))
    return AutoWord(toks[:-1] if rng.random() < 0.5 else toks)


def rand_ttd_params(rng, n, field):
    bv = [field.coerce(rng.randint(1, 3)) for _ in range(n - 1)]
    dv = [rng.randint(0, 1) for _ in range(n - 1)]
    return TTDParams(bv, dv, field)


def rand_exp_case(rng, field, maxdeg):
    """A locally nilpotent derivation D(x2)=p(x1), D(x3)=q(x1) with a
    kernel slice built from p*x3 - q*x2; None if the slice leaves the
    kernel."""
    from polyauto import TriangularDerivation
    xs = Poly.variables(3, field)
    p = rand_poly(rng, 3, field, [1], maxdeg, terms=2)
    q = rand_poly(rng, 3, field, [1], maxdeg, terms=2)
    d = TriangularDerivation([Poly.zero(3, field), p, q])
    h = p * xs[2] - q * xs[1]
    f = h ** rng.randint(1, 2) + rand_poly(rng, 3, field, [1], maxdeg, terms=2)
    if not d.kernel_member(f):
        return None
    return d, f


def rand_td_word(rng, n, field, maxdeg):
    """A translation-degenerate word in x1: random TTD form times a
    one-variable-tail conjugator."""
    tau = ttd_build(rand_ttd_params(rng, n, field))
    kind = rng.randint(0, 2)
    if kind == 0:
        if is_affine(tau):
            return None
        return AutoWord([Triangular.from_endo(tau)])
    xs = Poly.variables(n, field)
    if kind == 1:
        tail = rand_poly(rng, n, field, list(range(2, n)), maxdeg,
                         terms=rng.randint(1, 2))
        gam = Endo(list(xs[:n - 1]) + [xs[n - 1] + tail * tail])
        return AutoWord([InverseOf(EndoPair(gam, try_invert_endo(gam))),
                         Triangular.from_endo(tau)])
    tail = rand_poly(rng, n, field, list(range(2, n + 1)), maxdeg,
                     terms=rng.randint(1, 2))
    mu = Endo([xs[0] + tail * tail] + list(xs[1:]))
    return AutoWord([EndoPair(try_invert_endo(mu), mu),
                     Triangular.from_endo(tau)])
