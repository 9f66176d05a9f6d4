"""Weighted-degree filtration on K[x,y,z] and monomial-level stability checks.

The maps under study are beta = (x + y^2*(y + z^2)^2, y + z^2, z), the swap
pi = (y, x, z), and theta_N = (pi beta)^N pi (pi beta)^-N.  The sets Q*_{m,n}
collect polynomials constrained by two weighted degrees and a leading
exponent; their stability under pi*beta, pi*beta^-1, and the conjugated
affine twists certifies that no theta_2-word over the affine group can
shrink those degrees back.
"""

import random

from .polyring import QQ, NumberField, Poly, poly_to_str, scalar_to_str
from .automorphism import (Affine, AutoWord, Endo, Permutation, Triangular,
                           parse_endo)

__all__ = [
    "CYCLO5", "Report", "order2_key", "le2", "ldeg2", "qstar_member",
    "build_generators", "gamma_closed_form", "case_classify",
    "verify_degree_table", "verify_stability", "verify_theorem_noncotame",
    "default_parameter_samples", "random_qstar_member",
]

# smallest field where u^30 = 1 with u^6 != 1 is realizable
CYCLO5 = NumberField([1, 1, 1, 1, 1], "u")

W110 = (1, 1, 0)
W331 = (3, 3, 1)


class FiltrationError(ValueError):
    pass


# ---------------------------------------------------------------------------
# the order on exponent triples and the Q* sets
# ---------------------------------------------------------------------------

def order2_key(v):
    """Sort key realizing the total order on exponent triples."""
    i, j, k = v
    return (-i, j, k)


def le2(v, w):
    return order2_key(v) <= order2_key(w)


def ldeg2(p):
    """The maximal exponent triple in the support of a nonzero polynomial."""
    if p.is_zero():
        raise FiltrationError("leading exponent of the zero polynomial")
    if p.n != 3:
        raise FiltrationError("leading exponent needs three variables")
    return max(p.support(), key=order2_key)


def qstar_member(p, m, n):
    """Membership in Q*_{m,n}: two weighted degree bounds and the leading
    exponent pinned at (0, m, n)."""
    if p.is_zero():
        raise FiltrationError("membership of the zero polynomial")
    if m < 1 or n < 0:
        raise FiltrationError("index out of range")
    return (p.weighted_degree(W110) <= m
            and p.weighted_degree(W331) <= 3 * m + n
            and ldeg2(p) == (0, m, n))


# ---------------------------------------------------------------------------
# generators
# ---------------------------------------------------------------------------

def build_generators(field=QQ):
    """The words beta, pi, and the family N -> theta_N.

    beta is triangular from the top, so it is stored as a swap-conjugated
    triangular token; every word built here inverts tokenwise.
    """
    sig = Permutation([3, 2, 1], field)
    beta_e = parse_endo("(x + y^2*(y + z^2)^2, y + z^2, z)", 3, field)
    sig_e = sig.to_endo()
    tri = Triangular.from_endo(sig_e.compose(beta_e).compose(sig_e))
    beta = AutoWord([sig, tri, sig])
    pi = AutoWord([Permutation([2, 1, 3], field)])

    def theta(N):
        if N < 1:
            raise FiltrationError("conjugation depth must be positive")
        pb = (pi * beta).tokens
        pbi = (pi * beta).inverse().tokens
        return AutoWord(list(pb) * N + list(pi.tokens) + list(pbi) * N)

    return beta, pi, theta


def _alpha_map(u, c, d, field):
    z = field.zero
    u8 = u ** 8
    return Affine([[u8, z, c], [z, u * u, z], [z, z, u]], [d, z, z], field)


# ---------------------------------------------------------------------------
# the closed form of gamma
# ---------------------------------------------------------------------------

def gamma_closed_form(u, c, d, field=QQ):
    """gamma = beta^-1 pi beta^-1 alpha beta pi beta for
    alpha = (u^8 x + c z + d, u^2 y, u z).

    Returns (gamma, X, Y, Z, Z1, Z2) after checking that the word flatten,
    the factored form, and the expanded form of X agree exactly.  The two
    closed forms fix four transcription slips in the usual display: the
    leading term is u^2 x (not z^2 x), the y^3 coefficient carries 2u^22 c
    and 2u^22 d inside the outer 2u^2 (not u^22 c, u^22 d), the y^2
    coefficient starts with u^2 z^4 (not z^4), and the y coefficient
    carries u^8 (not u^2).
    """
    u, c, d = field.coerce(u), field.coerce(c), field.coerce(d)
    if u == 0:
        raise FiltrationError("unit parameter must be nonzero")
    beta, pi, _ = build_generators(field)
    alpha = _alpha_map(u, c, d, field)
    word = (beta.inverse() * pi * beta.inverse() * AutoWord([alpha])
            * beta * pi * beta)
    gamma = word.flatten()

    x, y, zz = Poly.variables(3, field)
    P = lambda v: Poly.const(3, v, field)
    u2, u8 = u * u, u ** 8
    Z1 = P(u8) * zz * zz + P(c) * zz + P(d)
    Z2 = P(u8 - u2) * zz * zz + P(c) * zz + P(d)
    X = (P(u2) * x + P(u2) * y * y * (y + zz * zz) ** 2
         - ((P(u8) * y + Z1) * (P(u8) * y + Z2)) ** 2)
    Y = P(u8) * y + Z2
    Z = P(u) * zz

    u16, u22, u24, u30 = u ** 16, u ** 22, u ** 24, u ** 30
    X_expanded = (
        P(u2) * x
        + P(u2 * (1 - u30)) * y ** 4
        + P(2 * u2) * (P(1 - u24 * (2 * u ** 6 - 1)) * zz * zz
                       - P(2 * u22 * c) * zz - P(2 * u22 * d)) * y ** 3
        + (P(u2) * zz ** 4 - P(u16) * (Z1 * Z1 + P(4) * Z1 * Z2 + Z2 * Z2))
        * y * y
        - P(2 * u8) * (Z1 * Z2 * Z2 + Z1 * Z1 * Z2) * y
        - (Z1 * Z2) ** 2)

    if gamma.components != (X, Y, Z):
        raise FiltrationError("factored form disagrees with the word flatten")
    if X != X_expanded:
        raise FiltrationError("expanded form disagrees with the word flatten")
    return gamma, X, Y, Z, Z1, Z2


def case_classify(u, c, d, field=QQ):
    """One of "A", "B2", "B1", "B0" from the parameter conditions."""
    u, c, d = field.coerce(u), field.coerce(c), field.coerce(d)
    if u == 0:
        raise FiltrationError("unit parameter must be nonzero")
    if u ** 30 != 1:
        return "A"
    if u ** 6 != 1:
        return "B2"
    if c != 0:
        return "B1"
    if d != 0:
        return "B0"
    # alpha is then diagonal-affine and gamma collapses out of the table
    raise FiltrationError("parameters degenerate: u^6 = 1, c = 0, d = 0")


_CASE_L = {"B0": 0, "B1": 1, "B2": 2}


def _case_table_rows(tag):
    if tag == "A":
        xrow = (4, 12, (0, 4, 0))
    else:
        l = _CASE_L[tag]
        xrow = (3, 9 + l, (0, 3, l))
    return {"X": xrow, "Y": (1, 3, (0, 1, 0)), "Z": (0, 1, (0, 0, 1))}


def _target_index(tag, m, n):
    if tag == "A":
        return 4 * m, n
    return 3 * m, _CASE_L[tag] * m + n


# ---------------------------------------------------------------------------
# reports
# ---------------------------------------------------------------------------

class Report:
    """Named comparisons, one line each."""

    def __init__(self):
        self.lines = []

    def check(self, name, got, want):
        ok = got == want
        self.lines.append((name, ok, got, want))
        return ok

    def merge(self, other, prefix=""):
        for name, ok, got, want in other.lines:
            self.lines.append((prefix + name, ok, got, want))

    @property
    def ok(self):
        return all(ok for _, ok, _, _ in self.lines)

    def text(self):
        out = []
        for name, ok, got, want in self.lines:
            if ok:
                out.append("%s: pass" % name)
            else:
                out.append("%s: FAIL (got %r, want %r)" % (name, got, want))
        return "\n".join(out)


def verify_degree_table(u, c, d, field=QQ):
    """Compare the three degree statistics of X, Y, Z with the case table."""
    tag = case_classify(u, c, d, field)
    _, X, Y, Z, _, _ = gamma_closed_form(u, c, d, field)
    rows = _case_table_rows(tag)
    rep = Report()
    rep.check("case", tag, tag)
    for name, p in (("X", X), ("Y", Y), ("Z", Z)):
        want = rows[name]
        rep.check("deg_(1,1,0)(%s)" % name, p.weighted_degree(W110), want[0])
        rep.check("deg_(3,3,1)(%s)" % name, p.weighted_degree(W331), want[1])
        rep.check("ldeg_2(%s)" % name, ldeg2(p), want[2])
    return rep


# ---------------------------------------------------------------------------
# stability
# ---------------------------------------------------------------------------

def _lattice_points(m, n):
    for i in range(m + 1):
        for j in range(m - i + 1):
            for k in range(3 * m + n - 3 * i - 3 * j + 1):
                yield (i, j, k)


def _component_stats(e):
    stats = []
    for p in e.components:
        stats.append((p.weighted_degree(W110), p.weighted_degree(W331),
                      ldeg2(p)))
    return stats


def _stability_lattice(stats, m, n, tm, tn, rep):
    bad110 = bad331 = badle = badeq = 0
    lead = (0, tm, tn)
    count = 0
    for i, j, k in _lattice_points(m, n):
        count += 1
        if (i * stats[0][0] + j * stats[1][0] + k * stats[2][0]) > tm:
            bad110 += 1
        if (i * stats[0][1] + j * stats[1][1] + k * stats[2][1]) > 3 * tm + tn:
            bad331 += 1
        img = tuple(i * a + j * b + k * c for a, b, c in
                    zip(stats[0][2], stats[1][2], stats[2][2]))
        if not le2(img, lead):
            badle += 1
        if (img == lead) != ((i, j, k) == (0, m, n)):
            badeq += 1
    rep.check("lattice points", count > 0, True)
    rep.check("deg_(1,1,0) bound violations", bad110, 0)
    rep.check("deg_(3,3,1) bound violations", bad331, 0)
    rep.check("leading-order violations", badle, 0)
    rep.check("equality characterization violations", badeq, 0)


def random_qstar_member(m, n, field, rng, extra=3):
    """A random member of Q*_{m,n}: the pinned leading monomial plus a few
    support points strictly below it."""
    lead = (0, m, n)
    terms = {lead: field.coerce(rng.randint(1, 5))}
    tries = 0
    while len(terms) < 1 + extra and tries < 20 * extra:
        tries += 1
        i = rng.randint(0, m)
        j = rng.randint(0, m - i)
        kmax = 3 * m + n - 3 * i - 3 * j
        k = rng.randint(0, kmax)
        v = (i, j, k)
        if v != lead and order2_key(v) < order2_key(lead):
            co = rng.randint(-5, 5)
            if co:
                terms[v] = field.coerce(co)
    p = Poly(3, field, terms)
    if not qstar_member(p, m, n):
        raise FiltrationError("sample construction left the set")
    return p


# fast coefficient arithmetic for the sampling loop: over the degree-4
# cyclotomic field, integer elements ride in Z[u]/(u^5 - 1) as 5-tuples
# (the quotient map onto the field kills exactly the constant tuples)

def _cyc5(c):
    out = [0] * 5
    for i, a in enumerate(c.coeffs):
        if a.denominator != 1:
            return None
        out[i] = a.numerator
    return tuple(out)


def _cyc5_mul(a, b):
    nz = [i for i, v in enumerate(b) if v]
    if len(nz) == 1:
        r, v = nz[0], b[nz[0]]
        out = [0] * 5
        for i, w in enumerate(a):
            out[(i + r) % 5] = w * v
        return tuple(out)
    out = [0] * 5
    for i, w in enumerate(a):
        if w:
            for r, v in enumerate(b):
                out[(i + r) % 5] += w * v
    return tuple(out)


def _cyc5_add(a, b):
    return tuple(x + y for x, y in zip(a, b))


def _cyc5_zero(a):
    return a[0] == a[1] == a[2] == a[3] == a[4]


def _frac_id(c):
    return c


def _coeff_codec(field):
    """(to_rep, mul, add, is_zero) for raw coefficient arithmetic."""
    if isinstance(field, NumberField):
        if tuple(field.modulus) != (1,) * 5:
            return None
        return _cyc5, _cyc5_mul, _cyc5_add, _cyc5_zero
    return (_frac_id, lambda a, b: a * b, lambda a, b: a + b,
            lambda a: a == 0)


class _ImageCache:
    """Cached monomial images under a fixed polynomial map."""

    def __init__(self, e):
        self.comps = e.components
        self.field = e.field
        one = Poly.const(3, 1, self.field)
        self.pows = [{0: one}, {0: one}, {0: one}]
        self.pairs = {}
        self.codec = _coeff_codec(self.field)
        self.mono3 = None
        if self.codec and len(e.components[2].terms) == 1:
            (e3, s3), = e.components[2].terms.items()
            s3r = self.codec[0](s3)
            if s3r is not None:
                self.mono3 = (e3, [self.codec[0](self.field.one), s3r])
        self.fast_pairs = {}

    def _power(self, t, k):
        cache = self.pows[t]
        if k not in cache:
            m = max(cache)
            while m < k:
                cache[m + 1] = cache[m] * self.comps[t]
                m += 1
        return cache[k]

    def _pair(self, i, j):
        if (i, j) not in self.pairs:
            self.pairs[i, j] = self._power(0, i) * self._power(1, j)
        return self.pairs[i, j]

    def monomial_image(self, v):
        i, j, k = v
        return self._pair(i, j) * self._power(2, k)

    def image(self, p):
        out = Poly.zero(3, self.field)
        for v, c in p.terms.items():
            out = out + self.monomial_image(v) * Poly.const(3, c, self.field)
        return out

    def _fast_pair(self, i, j):
        if (i, j) not in self.fast_pairs:
            to_rep = self.codec[0]
            fp = {}
            for e, co in self._pair(i, j).terms.items():
                r = to_rep(co)
                if r is None:
                    fp = None
                    break
                fp[e] = r
            self.fast_pairs[i, j] = fp
        return self.fast_pairs[i, j]

    def image_support(self, p):
        """Exponents carrying a nonzero coefficient in the image of p."""
        if self.mono3 is None:
            return list(self.image(p).terms)
        to_rep, mul, add, is_zero = self.codec
        e3, pow3 = self.mono3
        acc = {}
        for (i, j, k), c in p.terms.items():
            cr = to_rep(c)
            fp = self._fast_pair(i, j)
            if cr is None or fp is None:
                return list(self.image(p).terms)
            while len(pow3) <= k:
                pow3.append(mul(pow3[-1], pow3[1]))
            s = mul(pow3[k], cr)
            d0, d1, d2 = e3[0] * k, e3[1] * k, e3[2] * k
            for e, co in fp.items():
                key = (e[0] + d0, e[1] + d1, e[2] + d2)
                v = mul(co, s)
                cur = acc.get(key)
                acc[key] = v if cur is None else add(cur, v)
        return [e for e, v in acc.items() if not is_zero(v)]


def verify_stability(word, source, target, mode="lattice",
                     samples=50, seed=0, cache=None):
    """Check that the map sends Q*_{source} into Q*_{target}.

    Lattice mode walks every exponent triple allowed in the source support
    and checks the two degree chains plus the leading-order chain with its
    equality characterization.  Samples mode applies the map to random
    members and tests membership at the target index.
    """
    e = word.flatten() if isinstance(word, AutoWord) else word
    if e.n != 3:
        raise FiltrationError("stability needs three variables")
    m, n = source
    tm, tn = target
    rep = Report()
    if mode == "lattice":
        _stability_lattice(_component_stats(e), m, n, tm, tn, rep)
        return rep
    if mode != "samples":
        raise FiltrationError("unknown mode %r" % (mode,))
    rng = random.Random("%s|%d|%d|%s" % (seed, m, n, e.digest()))
    cache = cache if cache is not None else _ImageCache(e)
    bad = 0
    for _ in range(samples):
        p = random_qstar_member(m, n, e.field, rng)
        supp = cache.image_support(p)
        if not (supp
                and max(i + j for i, j, _ in supp) <= tm
                and max(3 * i + 3 * j + k for i, j, k in supp) <= 3 * tm + tn
                and max(supp, key=order2_key) == (0, tm, tn)):
            bad += 1
    rep.check("sample membership failures (%d samples)" % samples, bad, 0)
    return rep


# ---------------------------------------------------------------------------
# the composite theorem check
# ---------------------------------------------------------------------------

def default_parameter_samples():
    """One parameter set per case, plus extras exercising the cyclotomic
    field and nonzero c, d together."""
    z5 = CYCLO5.gen()
    return [
        (2, 0, 0, QQ),
        (1, 1, 0, QQ),
        (1, 0, 1, QQ),
        (z5, 0, 1, CYCLO5),
        (z5, 3, 5, CYCLO5),
    ]


def _param_label(u, c, d):
    return "(%s,%s,%s)" % (scalar_to_str(u), scalar_to_str(c),
                           scalar_to_str(d))


def verify_theorem_noncotame(N=2, parameter_samples=None, M=8,
                             samples=0, seed=0):
    """The computational core behind the fixed-set obstruction for theta_N.

    (a) the closed form of gamma agrees with the word flatten for every
    parameter set; (b) the degree table holds for each; (c) Q*_{m,n} is
    carried into the tabulated target index by pi*beta, pi*beta^-1, and
    pi*gamma for all 4 <= m <= M, 0 <= n <= M.  The group-theoretic wrapper
    around these facts is out of scope here.
    """
    if N < 2:
        raise FiltrationError("the obstruction needs conjugation depth >= 2")
    params = (default_parameter_samples() if parameter_samples is None
              else parameter_samples)
    rep = Report()
    maps = []
    for u, c, d, field in params:
        label = _param_label(field.coerce(u), field.coerce(c),
                             field.coerce(d))
        try:
            gamma = gamma_closed_form(u, c, d, field)[0]
            rep.check("closed form %s" % label, True, True)
        except FiltrationError as ex:
            rep.check("closed form %s" % label, str(ex), "agreement")
            continue
        tag = case_classify(u, c, d, field)
        rep.merge(verify_degree_table(u, c, d, field),
                  "table %s " % label)
        beta, pi, _ = build_generators(field)
        pig = pi.flatten().compose(gamma)
        maps.append(("pi*gamma %s case %s" % (label, tag), pig, tag))
    beta, pi, _ = build_generators(QQ)
    maps.append(("pi*beta", (pi * beta).flatten(), "A"))
    maps.append(("pi*beta^-1", (pi * beta.inverse()).flatten(), "A"))
    for label, e, tag in maps:
        caches = _ImageCache(e) if samples else None
        for m in range(4, M + 1):
            for n in range(0, M + 1):
                sub = verify_stability(e, (m, n), _target_index(tag, m, n),
                                       "lattice")
                rep.check("stability %s (m=%d,n=%d)" % (label, m, n),
                          sub.ok, True)
                if samples:
                    sub = verify_stability(
                        e, (m, n), _target_index(tag, m, n), "samples",
                        samples=samples, seed=seed, cache=caches)
                    rep.check("samples %s (m=%d,n=%d)" % (label, m, n),
                              sub.ok, True)
    return rep
