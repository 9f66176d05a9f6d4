"""
Polynomial automorphisms as words in generator tokens.

Composition uses the right-action convention (P)(phi psi) = ((P)phi)psi, so a
word's tokens apply left to right. Maps are carried as words whenever an
inverse may be needed: inversion is always syntactic (affine by linear
algebra, triangular by back-substitution, exp(FD) by negating F).
"""

import hashlib

from .polyring import (QQ, Poly, poly_to_str, parse_poly, default_names,
                       scalar_to_str)
from . import linalg
from .lnd import TriangularDerivation, parse_derivation, derivation_to_str


class Endo:
    """A polynomial endomorphism given by its component tuple ((x_i)phi)."""

    __slots__ = ("components", "n", "field")

    def __init__(self, components):
        comps = tuple(components)
        if not comps:
            raise ValueError("need at least one component")
        n = len(comps)
        field = comps[0].field
        for c in comps:
            if c.n != n or c.field != field:
                raise ValueError("component dimension or ring mismatch")
        self.components = comps
        self.n = n
        self.field = field

    @staticmethod
    def identity(n, field=QQ):
        return Endo(Poly.variables(n, field))

    def apply(self, p):
        """(P)phi."""
        return p.substitute(list(self.components))

    def compose(self, other):
        """The map phi·other: apply self, then other."""
        if self.n != other.n or self.field != other.field:
            raise ValueError("dimension or ring mismatch")
        return Endo([c.substitute(list(other.components))
                     for c in self.components])

    def is_identity(self):
        return all(c == Poly.variable(i + 1, self.n, self.field)
                   for i, c in enumerate(self.components))

    def max_degree(self):
        return max(int(c.total_degree()) for c in self.components
                   if not c.is_zero())

    def __eq__(self, other):
        if not isinstance(other, Endo):
            return NotImplemented
        return self.components == other.components

    def canonical_str(self, names=None):
        return "(" + ", ".join(poly_to_str(c, names)
                               for c in self.components) + ")"

    def digest(self):
        text = "n=%d;%s" % (self.n, self.canonical_str())
        return hashlib.sha256(text.encode("utf-8")).hexdigest()

    def __repr__(self):
        return self.canonical_str()


# ---------------------------------------------------------------------------
# generator tokens
# ---------------------------------------------------------------------------

class GeneratorToken:
    kind = "token"

    def to_endo(self):
        raise NotImplementedError

    def inverse(self):
        raise NotImplementedError


class Affine(GeneratorToken):
    """(x_i)alpha = sum_j M[i][j] x_j + v[i], with M invertible."""

    kind = "aff"

    def __init__(self, matrix, vector, field=QQ):
        n = len(matrix)
        self.n = n
        self.field = field
        self.matrix = tuple(tuple(field.coerce(x) for x in row)
                            for row in matrix)
        self.vector = tuple(field.coerce(x) for x in vector)
        if len(self.vector) != n or any(len(r) != n for r in self.matrix):
            raise ValueError("shape mismatch")
        self._inv_matrix = linalg.mat_inverse(
            [list(r) for r in self.matrix], field)  # raises if singular

    @staticmethod
    def from_endo(e):
        m, v = affine_part(e)
        if Endo([p for p in e.components]) != Endo(_affine_components(m, v, e.field)):
            raise ValueError("endomorphism is not affine")
        return Affine(m, v, e.field)

    @staticmethod
    def translation(n, r, c, field=QQ):
        """theta_{r,c}: x_r -> x_r + c."""
        v = [field.zero] * n
        v[r - 1] = field.coerce(c)
        return Affine(linalg.identity_matrix(n, field), v, field)

    @staticmethod
    def elementary(n, target, source, c, field=QQ):
        """x_target -> x_target + c * x_source (target != source)."""
        m = linalg.identity_matrix(n, field)
        m[target - 1][source - 1] = field.coerce(c)
        return Affine(m, [field.zero] * n, field)

    def to_endo(self):
        return Endo(_affine_components(self.matrix, self.vector, self.field))

    def inverse(self):
        # (x)alpha = Mx + v  =>  inverse has matrix M^-1, vector -M^-1 v
        mi = self._inv_matrix
        v = linalg.mat_vec(mi, list(self.vector), self.field)
        return Affine(mi, [-x for x in v], self.field)

    def __repr__(self):
        return "aff: " + _matrix_str(self.matrix) + " + " + _vector_str(self.vector)


def _affine_components(matrix, vector, field):
    n = len(vector)
    comps = []
    for i in range(n):
        p = Poly.const(n, vector[i], field)
        for j in range(n):
            if matrix[i][j] != 0:
                p = p + Poly.variable(j + 1, n, field) * matrix[i][j]
        comps.append(p)
    return comps


class Triangular(GeneratorToken):
    """(u_1 x_1 + P_1, u_2 x_2 + P_2(x_1), ...) with nonzero units."""

    kind = "tri"

    def __init__(self, units, tails, field=QQ):
        n = len(units)
        self.n = n
        self.field = field
        self.units = tuple(field.coerce(u) for u in units)
        if any(u == 0 for u in self.units):
            raise ValueError("triangular units must be nonzero")
        if len(tails) != n:
            raise ValueError("need one tail per variable")
        tl = []
        for i, p in enumerate(tails, start=1):
            if p.n != n or p.field != field:
                raise ValueError("tail dimension or ring mismatch")
            for j in range(i, n + 1):
                if p.degree_in(j) > 0:
                    raise ValueError("tail P_%d involves x%d" % (i, j))
            tl.append(p)
        self.tails = tuple(tl)

    @staticmethod
    def from_endo(e):
        units, tails = [], []
        for i, c in enumerate(e.components, start=1):
            ei = [0] * e.n
            ei[i - 1] = 1
            u = c.coefficient(ei)
            tail = c - Poly.variable(i, e.n, e.field) * u
            if u == 0:
                raise ValueError("unit of x%d vanishes" % i)
            for j in range(i, e.n + 1):
                if tail.degree_in(j) > 0:
                    raise ValueError("component %d is not triangular" % i)
            units.append(u)
            tails.append(tail)
        return Triangular(units, tails, e.field)

    def to_endo(self):
        return Endo([Poly.variable(i + 1, self.n, self.field) * u + t
                     for i, (u, t) in enumerate(zip(self.units, self.tails))])

    def inverse(self):
        # back-substitution: g_i = (x_i - P_i(g_1,...,g_{i-1})) / u_i
        n, field = self.n, self.field
        g = Poly.variables(n, field)
        for i in range(1, n + 1):
            tail = self.tails[i - 1]
            g[i - 1] = (Poly.variable(i, n, field)
                        - tail.substitute(g)) / self.units[i - 1]
        return Triangular.from_endo(Endo(g))

    def __repr__(self):
        return "tri: " + self.to_endo().canonical_str()


class Permutation(GeneratorToken):
    """(x_i)sigma = x_{images[i]}."""

    kind = "perm"

    def __init__(self, images, field=QQ):
        imgs = tuple(images)
        n = len(imgs)
        if sorted(imgs) != list(range(1, n + 1)):
            raise ValueError("not a permutation of 1..n")
        self.images = imgs
        self.n = n
        self.field = field

    @staticmethod
    def from_cycles(cycles, n, field=QQ):
        imgs = list(range(1, n + 1))
        for cyc in cycles:
            for a, b in zip(cyc, cyc[1:] + cyc[:1]):
                imgs[a - 1] = b
        return Permutation(imgs, field)

    def to_endo(self):
        return Endo([Poly.variable(j, self.n, self.field)
                     for j in self.images])

    def inverse(self):
        inv = [0] * self.n
        for i, j in enumerate(self.images, start=1):
            inv[j - 1] = i
        return Permutation(inv, self.field)

    def __repr__(self):
        return "perm: " + " ".join(str(j) for j in self.images)


class ExpFD(GeneratorToken):
    """exp(FD) for a triangular derivation D and kernel element F."""

    kind = "exp"

    def __init__(self, d, f):
        if not d.kernel_member(f):
            raise ValueError("F is not in the kernel of D")
        self.d = d
        self.f = f
        self.n = d.n
        self.field = d.field

    def to_endo(self):
        return Endo(self.d.exponential_components(self.f))

    def inverse(self):
        return ExpFD(self.d, -self.f)

    def __repr__(self):
        return "exp: %s; F = %s" % (derivation_to_str(self.d),
                                    poly_to_str(self.f))


class EndoPair(GeneratorToken):
    """An opaque invertible map carried with its precomputed inverse."""

    kind = "pair"

    def __init__(self, endo, inv):
        if endo.n != inv.n or endo.field != inv.field:
            raise ValueError("dimension or ring mismatch")
        if not endo.compose(inv).is_identity() or not inv.compose(endo).is_identity():
            raise ValueError("the two maps are not mutually inverse")
        self.endo = endo
        self.inv = inv
        self.n = endo.n
        self.field = endo.field

    def to_endo(self):
        return self.endo

    def inverse(self):
        return EndoPair(self.inv, self.endo)

    def __repr__(self):
        return "pair: %s | %s" % (self.endo.canonical_str(),
                                  self.inv.canonical_str())


class InverseOf(GeneratorToken):
    kind = "inv"

    def __init__(self, token):
        self.token = token
        self.n = token.n
        self.field = token.field

    def to_endo(self):
        return invert_token(self.token).to_endo()

    def inverse(self):
        return self.token

    def __repr__(self):
        return repr(self.token) + " inv"


def invert_token(t):
    if isinstance(t, InverseOf):
        return t.token
    return t.inverse()


class AutoWord:
    """A finite word of generator tokens, applied left to right."""

    def __init__(self, tokens):
        toks = tuple(tokens)
        if toks:
            n, field = toks[0].n, toks[0].field
            for t in toks:
                if t.n != n or t.field != field:
                    raise ValueError("token dimension or ring mismatch")
        self.tokens = toks

    @property
    def n(self):
        return self.tokens[0].n

    @property
    def field(self):
        return self.tokens[0].field

    def flatten(self):
        e = self.tokens[0].to_endo()
        for t in self.tokens[1:]:
            e = e.compose(t.to_endo())
        return e

    def inverse(self):
        return AutoWord([invert_token(t) for t in reversed(self.tokens)])

    def __mul__(self, other):
        return AutoWord(self.tokens + other.tokens)

    def __len__(self):
        return len(self.tokens)

    def __repr__(self):
        return word_to_str(self)


def flatten(w):
    return w.flatten()


def verify_automorphism(w):
    return w.flatten().compose(w.inverse().flatten()).is_identity()


# ---------------------------------------------------------------------------
# structure of flattened maps
# ---------------------------------------------------------------------------

def affine_part(e):
    """Degree <= 1 truncation as (matrix, vector)."""
    n, field = e.n, e.field
    mat = linalg.zero_matrix(n, n, field)
    vec = [field.zero] * n
    for i, c in enumerate(e.components):
        vec[i] = c.constant_term()
        for j in range(n):
            ej = [0] * n
            ej[j] = 1
            mat[i][j] = c.coefficient(ej)
    return mat, vec


def is_affine(e):
    return all(c.total_degree() <= 1 for c in e.components)


def is_triangular(e):
    for i, c in enumerate(e.components, start=1):
        ei = [0] * e.n
        ei[i - 1] = 1
        if c.coefficient(ei) == 0:
            return False
        tail = c - Poly.variable(i, e.n, e.field) * c.coefficient(ei)
        for j in range(i, e.n + 1):
            if tail.degree_in(j) > 0:
                return False
    return True


def is_parabolic(e):
    """First n-1 components free of x_n; last = a*x_n + P_n, P_n free of x_n."""
    n = e.n
    for c in e.components[:n - 1]:
        if c.degree_in(n) > 0:
            return False
    last = e.components[n - 1]
    en = [0] * n
    en[n - 1] = 1
    a = last.coefficient(en)
    if a == 0:
        return False
    rest = last - Poly.variable(n, n, e.field) * a
    return rest.degree_in(n) <= 0


def classify(e):
    """Set of structural labels of a flattened automorphism."""
    labels = set()
    n, field = e.n, e.field
    if is_affine(e):
        mat, vec = affine_part(e)
        try:
            linalg.mat_inverse([list(r) for r in mat], field)
            labels.add("affine")
        except ValueError:
            pass
        if "affine" in labels:
            if all(v == 0 for v in vec):
                labels.add("linear")
            ident = linalg.identity_matrix(n, field)
            if mat == ident:
                labels.add("translation")
                if all(v == 0 for v in vec):
                    labels.add("identity")
            if (all(v == 0 for v in vec)
                    and all(sum(1 for x in row if x != 0) == 1 for row in mat)
                    and all(x == 0 or x == 1 for row in mat for x in row)):
                labels.add("permutation")
    if is_triangular(e):
        labels.add("triangular")
    if is_parabolic(e):
        labels.add("parabolic")
    return labels


def invert_triangular_like(e):
    """
    Inverse of a map that is triangular with respect to some variable order
    (e.g. upper triangular, or triangular after permuting coordinates).
    Raises ValueError when no such order exists.
    """
    n, field = e.n, e.field
    order = []
    avail = set(range(1, n + 1))
    tails = {}
    units = {}
    while avail:
        found = None
        for i in sorted(avail):
            c = e.components[i - 1]
            ei = [0] * n
            ei[i - 1] = 1
            u = c.coefficient(ei)
            if u == 0:
                continue
            rest = c - Poly.variable(i, n, field) * u
            if all(rest.degree_in(j) <= 0 for j in avail):
                found = (i, u, rest)
                break
        if found is None:
            raise ValueError("map is not triangular in any variable order")
        i, u, rest = found
        order.append(i)
        avail.remove(i)
        units[i] = u
        tails[i] = rest
    g = Poly.variables(n, field)
    for i in order:
        g[i - 1] = (Poly.variable(i, n, field)
                    - tails[i].substitute(g)) / units[i]
    inv = Endo(g)
    if not e.compose(inv).is_identity() or not inv.compose(e).is_identity():
        raise ValueError("back-substitution failed to invert the map")
    return inv


def try_invert_endo(e):
    """Best-effort structural inverse of an Endo, or None."""
    if is_affine(e):
        try:
            return Affine.from_endo(e).inverse().to_endo()
        except ValueError:
            return None
    try:
        return invert_triangular_like(e)
    except ValueError:
        pass
    # parabolic with affine first n-1 components: e = B . sigma
    if is_parabolic(e) and all(c.total_degree() <= 1
                               for c in e.components[:e.n - 1]):
        try:
            b_endo, sigma = parabolic_split(e)
        except ValueError:
            return None
        b_tok = Affine.from_endo(b_endo)
        sig_inv = invert_triangular_like(sigma)
        inv = sig_inv.compose(b_tok.inverse().to_endo())
        if e.compose(inv).is_identity():
            return inv
    return None


def parabolic_split(e):
    """Write a parabolic e with affine upper part as B . sigma (flatten order),
    B affine and sigma = (x1, ..., x_{n-1}, a*xn + R)."""
    n, field = e.n, e.field
    mat, vec = affine_part(e)
    # B acts as e on the first n-1 coordinates and fixes x_n
    bm = [list(row) for row in mat]
    bv = list(vec)
    for j in range(n):
        bm[n - 1][j] = field.one if j == n - 1 else field.zero
    bv[n - 1] = field.zero
    for i in range(n - 1):
        bm[i][n - 1] = field.zero
    b = Affine(bm, bv, field)  # raises if singular
    b_endo = b.to_endo()
    sigma = b.inverse().to_endo().compose(e)
    if e != b_endo.compose(sigma):
        raise ValueError("parabolic split failed")
    return b_endo, sigma


def affine_normalize(e):
    """Strip the affine part: returns (alpha1, core, alpha2) with
    alpha1 . core . alpha2 = e and core having identity affine part."""
    labels = classify(e)
    if "triangular" not in labels and "parabolic" not in labels:
        raise ValueError("affine_normalize needs a triangular or parabolic map")
    mat, vec = affine_part(e)
    alpha = Affine(mat, vec, e.field)  # invertible: constant Jacobian
    alpha1 = alpha.to_endo()
    core = alpha.inverse().to_endo().compose(e)
    alpha2 = Endo.identity(e.n, e.field)
    return alpha1, core, alpha2


def parse_endo(text, n, field=QQ, names=None):
    """Parse a parenthesized component tuple into an Endo."""
    body = text.strip()
    if not (body.startswith("(") and body.endswith(")")):
        raise ValueError("endomorphism text must be a parenthesized tuple")
    comps = [parse_poly(s, n, field, names)
             for s in _split_top_level(body[1:-1], ",")]
    if len(comps) != n:
        raise ValueError("expected %d components, got %d" % (n, len(comps)))
    return Endo(comps)


# ---------------------------------------------------------------------------
# word text grammar: one token per line
# ---------------------------------------------------------------------------

def _matrix_str(m):
    return "[" + ", ".join(
        "[" + ", ".join(scalar_to_str(x) for x in row) + "]" for row in m) + "]"


def _vector_str(v):
    return "(" + ", ".join(scalar_to_str(x) for x in v) + ")"


def word_to_str(w, names=None):
    return "\n".join(_token_to_str(t, names) for t in w.tokens)


def _token_to_str(t, names=None):
    if isinstance(t, InverseOf):
        return _token_to_str(t.token, names) + " inv"
    if isinstance(t, Affine):
        return "aff: " + _matrix_str(t.matrix) + " + " + _vector_str(t.vector)
    if isinstance(t, Triangular):
        return "tri: " + t.to_endo().canonical_str(names)
    if isinstance(t, Permutation):
        return "perm: (" + " ".join(str(j) for j in t.images) + ")"
    if isinstance(t, ExpFD):
        return "exp: %s; F = %s" % (derivation_to_str(t.d, names),
                                    poly_to_str(t.f, names))
    if isinstance(t, EndoPair):
        return "pair: %s | %s" % (t.endo.canonical_str(names),
                                  t.inv.canonical_str(names))
    raise TypeError("unknown token type")


class WordParseError(ValueError):
    pass


def _split_top_level(s, sep):
    parts, depth, cur = [], 0, []
    for ch in s:
        if ch in "([":
            depth += 1
        elif ch in ")]":
            depth -= 1
        if ch == sep and depth == 0:
            parts.append("".join(cur))
            cur = []
        else:
            cur.append(ch)
    parts.append("".join(cur))
    return parts


def _parse_scalar(text, field):
    p = parse_poly(text, 1, field, names=["x1"])
    if not p.is_constant():
        raise WordParseError("expected a scalar, got %r" % text)
    return p.constant_term()


def parse_token(line, n, field=QQ, names=None):
    line = line.strip()
    inverted = False
    if line.endswith(" inv"):
        inverted = True
        line = line[:-4].strip()
    if ":" not in line:
        raise WordParseError("token line needs a 'kind:' prefix: %r" % line)
    kind, body = line.split(":", 1)
    kind = kind.strip()
    body = body.strip()
    if kind == "tri":
        if not (body.startswith("(") and body.endswith(")")):
            raise WordParseError("tri body must be a parenthesized tuple")
        comps = [parse_poly(s, n, field, names)
                 for s in _split_top_level(body[1:-1], ",")]
        if len(comps) != n:
            raise WordParseError("expected %d components" % n)
        tok = Triangular.from_endo(Endo(comps))
    elif kind == "aff":
        if "+" in body:
            mtext, vtext = _split_top_level(body, "+")[0], None
            parts = _split_top_level(body, "+")
            if len(parts) != 2:
                raise WordParseError("aff body must be matrix + vector")
            mtext, vtext = parts[0].strip(), parts[1].strip()
        else:
            mtext, vtext = body.strip(), None
        if not (mtext.startswith("[") and mtext.endswith("]")):
            raise WordParseError("matrix must be [[...],[...]]")
        rows = []
        for rtext in _split_top_level(mtext[1:-1], ","):
            rtext = rtext.strip()
            if not (rtext.startswith("[") and rtext.endswith("]")):
                raise WordParseError("matrix row must be [...]")
            rows.append([_parse_scalar(s, field)
                         for s in _split_top_level(rtext[1:-1], ",")])
        if vtext is None:
            vec = [field.zero] * n
        else:
            if not (vtext.startswith("(") and vtext.endswith(")")):
                raise WordParseError("vector must be (...)")
            vec = [_parse_scalar(s, field)
                   for s in _split_top_level(vtext[1:-1], ",")]
        tok = Affine(rows, vec, field)
    elif kind == "perm":
        body2 = body.strip()
        if body2.startswith("(") and body2.endswith(")"):
            body2 = body2[1:-1]
        entries = [int(s) for s in body2.replace(",", " ").split()]
        if sorted(entries) == list(range(1, n + 1)):
            tok = Permutation(entries, field)
        else:
            tok = Permutation.from_cycles([entries], n, field)
    elif kind == "exp":
        if ";" not in body:
            raise WordParseError("exp body must be 'D: ...; F = ...'")
        pieces = body.split(";")
        fpiece = pieces[-1].strip()
        dtext = ";".join(pieces[:-1])
        if not fpiece.startswith("F"):
            raise WordParseError("exp body must end with 'F = ...'")
        ftext = fpiece.split("=", 1)[1]
        d = parse_derivation(dtext, n, field, names)
        f = parse_poly(ftext, n, field, names)
        tok = ExpFD(d, f)
    elif kind == "pair":
        parts = _split_top_level(body, "|")
        if len(parts) != 2:
            raise WordParseError("pair body must be '(...) | (...)'")
        tok = EndoPair(parse_endo(parts[0], n, field, names),
                       parse_endo(parts[1], n, field, names))
    else:
        raise WordParseError("unknown token kind %r" % kind)
    return InverseOf(tok) if inverted else tok


def parse_word(text, n, field=QQ, names=None):
    tokens = []
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        tokens.append(parse_token(line, n, field, names))
    if not tokens:
        raise WordParseError("empty word")
    return AutoWord(tokens)
