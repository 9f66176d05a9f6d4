"""
Translation-degenerate automorphisms: detection, the nilpotent linear system
satisfied by the inverse's components, Jordan normalization, triangular
translation-degenerate (TTD) forms, and the five-factor decomposition
phi^{-1} = lambda . tau^{-1} . gamma . mu . rho.
"""

from fractions import Fraction

from .polyring import Poly
from . import linalg
from .automorphism import (Endo, Affine, Triangular, Permutation, AutoWord,
                           EndoPair, invert_token, invert_triangular_like,
                           try_invert_endo)
from .lnd import TriangularDerivation


class NotDegenerate(ValueError):
    """The word is not translation degenerate in the requested variable."""


# ---------------------------------------------------------------------------
# the formal parameter t is an inert extra variable
# ---------------------------------------------------------------------------

def _extend_endo(e, extra=1):
    """View an n-dimensional Endo in n+extra variables, fixing the new ones."""
    n, field = e.n, e.field
    comps = [c.shift_variables(n + extra) for c in e.components]
    comps += [Poly.variable(n + i + 1, n + extra, field) for i in range(extra)]
    return Endo(comps)


def _coerce_word(w):
    if isinstance(w, AutoWord):
        return w
    inv = try_invert_endo(w)
    if inv is None:
        raise NotDegenerate("map is not invertible in the supported shapes")
    return AutoWord([EndoPair(w, inv)])


def formal_translation_conjugate(w, r):
    """phi^{-1} theta_{r,t} phi with t carried as an inert (n+1)-th variable.

    Absorbs one word token at a time, so intermediate maps never exceed the
    size of the true partial conjugates."""
    w = _coerce_word(w)
    n, field = w.n, w.field
    conj = Endo([Poly.variable(i, n + 1, field)
                 + (Poly.variable(n + 1, n + 1, field) if i == r else 0)
                 for i in range(1, n + 1)]
                + [Poly.variable(n + 1, n + 1, field)])
    for tok in w.tokens:
        te = _extend_endo(tok.to_endo())
        tie = _extend_endo(invert_token(tok).to_endo())
        conj = tie.compose(conj).compose(te)
    return conj


def td_test(w, r):
    """True iff every component of the formal conjugate is affine in x1..xn."""
    n = w.n
    conj = formal_translation_conjugate(w, r)
    for c in conj.components[:n]:
        for e in c.terms:
            if sum(e[:n]) > 1:
                return False
    return True


# ---------------------------------------------------------------------------
# the linear system dH_i/dx1 = sum_j a_ij H_j + b_i
# ---------------------------------------------------------------------------

class LinearSystemData:
    def __init__(self, a, b):
        self.a = tuple(tuple(row) for row in a)
        self.b = tuple(b)

    @property
    def n(self):
        return len(self.b)


def extract_linear_system(w):
    """Solve dH_i/dx1 = sum_j a_ij H_j + b_i for the inverse components H."""
    w = _coerce_word(w)
    n, field = w.n, w.field
    h = w.inverse().flatten().components
    const = (0,) * n
    monomials = set()
    for p in h:
        monomials |= p.support()
    monomials.add(const)
    derivs = [p.partial_derivative(1) for p in h]
    for p in derivs:
        monomials |= p.support()
    monomials = sorted(monomials)
    rows = []
    for m in monomials:
        row = [hj.coefficient(m) for hj in h]
        row.append(field.one if m == const else field.zero)
        rows.append(row)
    a = []
    b = []
    for i in range(n):
        rhs = [derivs[i].coefficient(m) for m in monomials]
        sol = linalg.solve(rows, rhs, field)
        if sol is None:
            raise NotDegenerate(
                "no linear relation for dH_%d/dx1: not translation degenerate"
                % (i + 1))
        a.append(sol[:n])
        b.append(sol[n])
    power = [list(row) for row in a]
    for _ in range(n - 1):
        power = linalg.mat_mul(power, [list(row) for row in a], field)
    if not linalg.mat_eq_zero(power):
        raise NotDegenerate("extracted matrix is not nilpotent")
    return LinearSystemData(a, b)


# ---------------------------------------------------------------------------
# Jordan chains of a nilpotent matrix (exact, deterministic)
# ---------------------------------------------------------------------------

def nilpotent_jordan_chains(a, field):
    """Chains [v, Av, A^2 v, ...] forming a Jordan basis; deterministic."""
    n = len(a)
    if linalg.mat_eq_zero(a):
        return [[_unit_vec(i, n, field)] for i in range(n)]
    piv = linalg.column_space_basis_indices(a, field)
    w_cols = [[a[i][j] for i in range(n)] for j in piv]
    w_mat = [[w_cols[j][i] for j in range(len(piv))] for i in range(n)]
    # A restricted to its column space, in the w-basis
    a_w = []
    for col in w_cols:
        img = linalg.mat_vec(a, col, field)
        coords = linalg.solve(w_mat, img, field)
        a_w.append(coords)
    a_w = [[a_w[j][i] for j in range(len(piv))] for i in range(len(piv))]
    sub = nilpotent_jordan_chains(a_w, field)
    chains = []
    vectors = []
    for chain in sub:
        chain_v = [linalg.mat_vec(w_mat, y, field) for y in chain]
        u = linalg.solve(a, chain_v[0], field)
        if u is None:
            raise AssertionError("chain top has no preimage")
        new_chain = [u] + chain_v
        chains.append(new_chain)
        vectors.extend(new_chain)
    # complete with kernel vectors, preferring standard basis vectors
    candidates = []
    for i in range(n):
        col = [a[r][i] for r in range(n)]
        if all(x == 0 for x in col):
            candidates.append(_unit_vec(i, n, field))
    candidates.extend(linalg.nullspace(a, field))
    for v in candidates:
        if len(vectors) == n:
            break
        trial = vectors + [v]
        mat = [[trial[j][i] for j in range(len(trial))] for i in range(n)]
        if linalg.rank(mat, field) == len(trial):
            chains.append([v])
            vectors.append(v)
    if len(vectors) != n:
        raise AssertionError("failed to complete a Jordan basis")
    mat = [[vectors[j][i] for j in range(len(vectors))] for i in range(n)]
    if linalg.rank(mat, field) != n:
        raise AssertionError("Jordan basis is not independent")
    return chains


def _unit_vec(i, n, field):
    return [field.one if j == i else field.zero for j in range(n)]


def jordan_normalize(w):
    """Linear lambda with extract_linear_system(w . lambda) in lower Jordan
    form with b_1 = 1; returns (lambda as an Affine token, normalized data)."""
    w = _coerce_word(w)
    field = w.field
    data = extract_linear_system(w)
    n = data.n
    a = [list(row) for row in data.a]
    chains = nilpotent_jordan_chains(a, field)
    order = sorted(range(len(chains)),
                   key=lambda i: (-len(chains[i]), i))
    chains = [chains[i] for i in order]

    def build_matrix(chs):
        cols = [v for ch in chs for v in ch]
        return [[cols[j][i] for j in range(n)] for i in range(n)]

    l_mat = build_matrix(chains)
    b_prime = linalg.mat_vec(linalg.mat_inverse(l_mat, field),
                             list(data.b), field)
    lead = 0
    chosen = None
    leads = []
    for ch in chains:
        leads.append(lead)
        lead += len(ch)
    for idx, start in enumerate(leads):
        if b_prime[start] != 0:
            chosen = idx
            break
    if chosen is None:
        raise NotDegenerate("no Jordan block with nonzero leading b entry")
    chains = [chains[chosen]] + chains[:chosen] + chains[chosen + 1:]
    l_mat = build_matrix(chains)
    b_prime = linalg.mat_vec(linalg.mat_inverse(l_mat, field),
                             list(data.b), field)
    s = b_prime[0]
    chains[0] = [[x * s for x in v] for v in chains[0]]
    l_mat = build_matrix(chains)
    lam = Affine(l_mat, [field.zero] * n, field)
    new_data = extract_linear_system(AutoWord(list(w.tokens) + [lam]))
    _check_normalized(new_data)
    return lam, new_data


def _check_normalized(data):
    n = data.n
    if data.b[0] != 1:
        raise AssertionError("normalization failed: b_1 != 1")
    for i in range(n):
        for j in range(n):
            x = data.a[i][j]
            if i == j + 1:
                if x != 0 and x != 1:
                    raise AssertionError("subdiagonal entry not 0/1")
            elif x != 0:
                raise AssertionError("matrix not in lower Jordan form")


# ---------------------------------------------------------------------------
# TTD forms
# ---------------------------------------------------------------------------

class TTDParams:
    """b_2..b_n scalars and d_2..d_n in {0,1}; b_1 = 1 and d_1 = 0 implicit."""

    def __init__(self, b, d, field):
        self.field = field
        self.b = tuple(field.coerce(x) for x in b)
        self.d = tuple(int(x) for x in d)
        if len(self.b) != len(self.d):
            raise ValueError("b and d must have equal length (n-1)")
        if any(x not in (0, 1) for x in self.d):
            raise ValueError("d entries must be 0 or 1")

    @property
    def n(self):
        return len(self.b) + 1

    def b_at(self, k):
        """b_k with b_1 = 1."""
        if k == 1:
            return self.field.one
        return self.b[k - 2]

    def d_at(self, k):
        """d_k with d_1 = 0."""
        if k == 1:
            return 0
        return self.d[k - 2]

    def d_prod(self, j, k):
        """d_{j,k} = d_j ... d_k, empty product 1 when k < j."""
        out = 1
        for i in range(j, k + 1):
            out *= self.d_at(i)
        return out

    @staticmethod
    def from_system(data, field):
        _check_normalized(data)
        n = data.n
        d = [int(data.a[k - 1][k - 2] == 1) for k in range(2, n + 1)]
        b = [data.b[k - 1] for k in range(2, n + 1)]
        return TTDParams(b, d, field)


def ttd_build(params, n=None):
    """The explicit TTD-form triangular map for the given parameters."""
    if n is None:
        n = params.n
    if n != params.n:
        raise ValueError("dimension mismatch with parameter count")
    field = params.field
    xs = Poly.variables(n, field)
    x1 = xs[0]
    comps = [x1]
    for k in range(2, n + 1):
        p = xs[k - 1]
        for r in range(1, k):
            coeff = Fraction((-1) ** r, _factorial(r))
            inner = (xs[k - r - 1] * params.d_prod(k - r + 1, k)
                     + Poly.const(n, params.b_at(k - r + 1), field)
                     * params.d_prod(k - r + 2, k))
            p = p + x1 ** r * inner * coeff
        p = p + x1 ** k * (Fraction((-1) ** k, _factorial(k))
                           * params.d_prod(2, k))
        comps.append(p)
    return Endo(comps)


def ttd_build_via_exp(params, n=None):
    """Cross-check construction: nu . exp(-x1 D) with D(x_k)=d_k x_{k-1}+b_k."""
    if n is None:
        n = params.n
    field = params.field
    xs = Poly.variables(n, field)
    images = [Poly.zero(n, field)]
    for k in range(2, n + 1):
        images.append(xs[k - 2] * params.d_at(k)
                      + Poly.const(n, params.b_at(k), field))
    d = TriangularDerivation(images)
    exp_endo = Endo(d.exponential_components(-xs[0]))
    nu_comps = [xs[0]]
    for k in range(2, n + 1):
        nu_comps.append(xs[k - 1] + xs[0] ** k
                        * (Fraction((-1) ** k, _factorial(k))
                           * params.d_prod(2, k)))
    return Endo(nu_comps).compose(exp_endo)


def _factorial(k):
    out = 1
    for i in range(2, k + 1):
        out *= i
    return out


# ---------------------------------------------------------------------------
# elimination and factorization
# ---------------------------------------------------------------------------

def eliminate_x1(w):
    """For a normalized TD word, return (tau in TTD form, G_2..G_n) with
    tau . w^{-1} = (H_1, G_2, ..., G_n) and every G_k free of x1."""
    w = _coerce_word(w)
    field = w.field
    data = extract_linear_system(w)
    _check_normalized(data)
    params = TTDParams.from_system(data, field)
    tau = ttd_build(params)
    h = w.inverse().flatten()
    prod = tau.compose(h)
    gs = list(prod.components[1:])
    for k, g in enumerate(gs, start=2):
        if not g.partial_derivative(1).is_zero():
            raise AssertionError("G_%d still involves x1" % k)
    return tau, gs


class TDFactorization:
    """phi^{-1} = lam . tau^{-1} . gamma . mu . rho, all factors explicit."""

    def __init__(self, lam, tau, params, gamma, mu, rho):
        self.lam = lam          # linear Endo
        self.tau = tau          # TTD-form triangular Endo
        self.params = params    # its TTDParams
        self.gamma = gamma      # (x1, G_2, ..., G_n), G_i free of x1
        self.mu = mu            # (x1 + G, x2, ..., xn), G free of x1
        self.rho = rho          # permutation Endo (x1 <-> x_r or identity)

    def recompose(self):
        tau_inv = invert_triangular_like(self.tau)
        out = self.lam
        for f in (tau_inv, self.gamma, self.mu, self.rho):
            out = out.compose(f)
        return out

    def verify(self, w):
        return self.recompose() == w.inverse().flatten()


def factorize_td(w, r):
    """Factor a word translation degenerate in x_r per the five-factor form."""
    w = _coerce_word(w)
    if not td_test(w, r):
        raise NotDegenerate("word is not translation degenerate in x%d" % r)
    n, field = w.n, w.field
    if r == 1:
        rho_tok = None
        w0 = w
    else:
        images = list(range(1, n + 1))
        images[0], images[r - 1] = r, 1
        rho_tok = Permutation(images, field)
        w0 = AutoWord([rho_tok] + list(w.tokens))
    lam_tok, data = jordan_normalize(w0)
    w1 = AutoWord(list(w0.tokens) + [lam_tok])
    tau, gs = eliminate_x1(w1)
    params = TTDParams.from_system(data, field)
    h1 = w1.inverse().flatten().components[0]
    xs = Poly.variables(n, field)
    g1 = h1 - xs[0]
    if not g1.partial_derivative(1).is_zero():
        raise AssertionError("mu tail still involves x1")
    mu = Endo([h1] + xs[1:])
    gamma = Endo([xs[0]] + gs)
    rho = rho_tok.to_endo() if rho_tok is not None else Endo.identity(n, field)
    fac = TDFactorization(lam_tok.to_endo(), tau, params, gamma, mu, rho)
    if not fac.verify(w):
        raise AssertionError("factor recomposition failed")
    return fac
