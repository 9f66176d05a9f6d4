"""
Exact sparse multivariate polynomial arithmetic.

Coefficients live in a run-time chosen field: the rationals, or a simple
extension Q[u]/(p(u)) for a monic irreducible p with rational coefficients.
All arithmetic is exact; polynomials are kept canonical (no zero
coefficients stored), so equality is plain dictionary equality.
"""

from fractions import Fraction

NEG_INF = float("-inf")


# ---------------------------------------------------------------------------
# coefficient fields
# ---------------------------------------------------------------------------

class RationalField:
    """The field of rational numbers, with Fraction elements."""

    name = "QQ"

    def coerce(self, v):
        if isinstance(v, Fraction):
            return v
        if isinstance(v, int):
            return Fraction(v)
        if isinstance(v, NFElem):
            raise TypeError("cannot coerce extension element into QQ")
        raise TypeError("cannot coerce %r into QQ" % (v,))

    @property
    def zero(self):
        return Fraction(0)

    @property
    def one(self):
        return Fraction(1)

    def __eq__(self, other):
        return isinstance(other, RationalField)

    def __hash__(self):
        return hash("RationalField")

    def __repr__(self):
        return "QQ"


QQ = RationalField()


def _poly_trim(cs):
    while cs and cs[-1] == 0:
        cs.pop()
    return cs


def _poly_mul(a, b):
    if not a or not b:
        return []
    out = [Fraction(0)] * (len(a) + len(b) - 1)
    for i, ca in enumerate(a):
        if ca == 0:
            continue
        for j, cb in enumerate(b):
            out[i + j] += ca * cb
    return _poly_trim(out)


def _poly_divmod(a, b):
    # b nonzero; Fraction coefficients
    a = list(a)
    q = [Fraction(0)] * max(len(a) - len(b) + 1, 0)
    lb = b[-1]
    while len(a) >= len(b) and _poly_trim(a):
        if len(a) < len(b):
            break
        k = len(a) - len(b)
        f = a[-1] / lb
        q[k] = f
        for i, cb in enumerate(b):
            a[i + k] -= f * cb
        _poly_trim(a)
    return _poly_trim(q), a


class NumberField:
    """Q[u]/(p(u)) for a monic irreducible p given by ascending coefficients."""

    def __init__(self, modulus, name="u"):
        mod = [Fraction(c) for c in modulus]
        if len(mod) < 2:
            raise ValueError("modulus must have degree >= 1")
        if mod[-1] != 1:
            raise ValueError("modulus must be monic")
        self.modulus = tuple(mod)
        self.degree = len(mod) - 1
        self.name = name

    def coerce(self, v):
        if isinstance(v, NFElem):
            if v.field == self:
                return v
            raise TypeError("element of a different extension field")
        if isinstance(v, (int, Fraction)):
            cs = [Fraction(0)] * self.degree
            cs[0] = Fraction(v)
            return NFElem(self, cs)
        raise TypeError("cannot coerce %r into %r" % (v, self))

    def element(self, coeffs):
        cs = [Fraction(c) for c in coeffs]
        _, r = _poly_divmod(cs, list(self.modulus))
        r = r + [Fraction(0)] * (self.degree - len(r))
        return NFElem(self, r)

    def gen(self):
        cs = [Fraction(0)] * self.degree
        if self.degree == 1:
            return self.element([0, 1])
        cs[1] = Fraction(1)
        return NFElem(self, cs)

    @property
    def zero(self):
        return self.coerce(0)

    @property
    def one(self):
        return self.coerce(1)

    def __eq__(self, other):
        return isinstance(other, NumberField) and self.modulus == other.modulus

    def __hash__(self):
        return hash(("NumberField", self.modulus))

    def __repr__(self):
        return "QQ[%s]/(%s)" % (self.name, list(self.modulus))


class NFElem:
    """Residue class in a NumberField; coeffs ascending, length = field degree."""

    __slots__ = ("field", "coeffs")

    def __init__(self, field, coeffs):
        self.field = field
        self.coeffs = tuple(coeffs)

    def _co(self, other):
        if isinstance(other, NFElem):
            if other.field != self.field:
                raise TypeError("mixed extension fields")
            return other
        if isinstance(other, (int, Fraction)):
            return self.field.coerce(other)
        return None

    def __add__(self, other):
        o = self._co(other)
        if o is None:
            return NotImplemented
        return NFElem(self.field, [a + b for a, b in zip(self.coeffs, o.coeffs)])

    __radd__ = __add__

    def __neg__(self):
        return NFElem(self.field, [-a for a in self.coeffs])

    def __sub__(self, other):
        o = self._co(other)
        if o is None:
            return NotImplemented
        return NFElem(self.field, [a - b for a, b in zip(self.coeffs, o.coeffs)])

    def __rsub__(self, other):
        o = self._co(other)
        if o is None:
            return NotImplemented
        return o - self

    def __mul__(self, other):
        o = self._co(other)
        if o is None:
            return NotImplemented
        prod = _poly_mul(list(self.coeffs), list(o.coeffs))
        _, r = _poly_divmod(prod, list(self.field.modulus))
        r = r + [Fraction(0)] * (self.field.degree - len(r))
        return NFElem(self.field, r)

    __rmul__ = __mul__

    def inverse(self):
        # extended Euclid against the (irreducible) modulus
        if not any(self.coeffs):
            raise ZeroDivisionError("inverse of zero")
        r0, r1 = list(self.field.modulus), _poly_trim(list(self.coeffs))
        s0, s1 = [], [Fraction(1)]
        while r1:
            q, r = _poly_divmod(r0, r1)
            qs1 = _poly_mul(q, s1)
            width = max(len(s0), len(qs1))
            s0 = s0 + [Fraction(0)] * (width - len(s0))
            qs1 = qs1 + [Fraction(0)] * (width - len(qs1))
            s = _poly_trim([a - b for a, b in zip(s0, qs1)])
            r0, r1 = r1, r
            s0, s1 = s1, s
        if len(r0) != 1:
            raise ArithmeticError("modulus not irreducible: gcd has positive degree")
        inv = [c / r0[0] for c in s0]
        return self.field.element(inv)

    def __truediv__(self, other):
        o = self._co(other)
        if o is None:
            return NotImplemented
        return self * o.inverse()

    def __rtruediv__(self, other):
        o = self._co(other)
        if o is None:
            return NotImplemented
        return o * self.inverse()

    def __pow__(self, e):
        if e < 0:
            return self.inverse() ** (-e)
        out = self.field.one
        base = self
        while e:
            if e & 1:
                out = out * base
            base = base * base
            e >>= 1
        return out

    def __eq__(self, other):
        o = self._co(other)
        if o is None:
            return NotImplemented
        return self.coeffs == o.coeffs

    def __hash__(self):
        return hash((self.field.modulus, self.coeffs))

    def __repr__(self):
        return scalar_to_str(self)


def scalar_to_str(c):
    """Deterministic textual form of a coefficient."""
    if isinstance(c, Fraction):
        return str(c)
    name = c.field.name
    parts = []
    for i, a in enumerate(c.coeffs):
        if a == 0:
            continue
        if i == 0:
            parts.append(str(a))
        else:
            head = "" if a == 1 else ("-" if a == -1 else str(a) + "*")
            parts.append("%s%s" % (head, name if i == 1 else "%s^%d" % (name, i)))
    if not parts:
        return "0"
    s = " + ".join(parts).replace("+ -", "- ")
    if len(parts) > 1:
        return "(" + s + ")"
    return s


# ---------------------------------------------------------------------------
# sparse polynomials
# ---------------------------------------------------------------------------

class Poly:
    """Sparse polynomial in n variables: exponent tuple -> nonzero coefficient."""

    __slots__ = ("n", "field", "terms")

    def __init__(self, n, field, terms=None):
        self.n = n
        self.field = field
        clean = {}
        if terms:
            for e, c in terms.items():
                if len(e) != n:
                    raise ValueError("exponent length mismatch")
                c = field.coerce(c)
                if c != 0:
                    clean[tuple(e)] = c
        self.terms = clean

    # -- constructors -------------------------------------------------------

    @staticmethod
    def zero(n, field=QQ):
        return Poly(n, field)

    @staticmethod
    def const(n, c, field=QQ):
        return Poly(n, field, {(0,) * n: c})

    @staticmethod
    def variable(i, n, field=QQ):
        if not 1 <= i <= n:
            raise IndexError("variable index out of range")
        e = [0] * n
        e[i - 1] = 1
        return Poly(n, field, {tuple(e): 1})

    @staticmethod
    def variables(n, field=QQ):
        return [Poly.variable(i + 1, n, field) for i in range(n)]

    # -- predicates and accessors -------------------------------------------

    def is_zero(self):
        return not self.terms

    def is_constant(self):
        return all(sum(e) == 0 for e in self.terms)

    def constant_term(self):
        return self.terms.get((0,) * self.n, self.field.zero)

    def coefficient(self, e):
        return self.terms.get(tuple(e), self.field.zero)

    def support(self):
        return set(self.terms)

    def total_degree(self):
        if not self.terms:
            return NEG_INF
        return max(sum(e) for e in self.terms)

    def degree_in(self, r):
        if not self.terms:
            return NEG_INF
        return max(e[r - 1] for e in self.terms)

    def as_scalar(self):
        if not self.is_constant():
            raise ValueError("not a constant polynomial")
        return self.constant_term()

    # -- arithmetic ----------------------------------------------------------

    def _check(self, other):
        if self.n != other.n:
            raise ValueError("dimension mismatch")
        if self.field != other.field:
            raise ValueError("coefficient ring mismatch")

    def __add__(self, other):
        if not isinstance(other, Poly):
            other = Poly.const(self.n, other, self.field)
        self._check(other)
        out = dict(self.terms)
        for e, c in other.terms.items():
            s = out.get(e, 0) + c
            if s == 0:
                out.pop(e, None)
            else:
                out[e] = s
        p = Poly.__new__(Poly)
        p.n, p.field, p.terms = self.n, self.field, out
        return p

    __radd__ = __add__

    def __neg__(self):
        p = Poly.__new__(Poly)
        p.n, p.field = self.n, self.field
        p.terms = {e: -c for e, c in self.terms.items()}
        return p

    def __sub__(self, other):
        if not isinstance(other, Poly):
            other = Poly.const(self.n, other, self.field)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, Poly):
            c = self.field.coerce(other)
            if c == 0:
                return Poly.zero(self.n, self.field)
            p = Poly.__new__(Poly)
            p.n, p.field = self.n, self.field
            p.terms = {e: a * c for e, a in self.terms.items()}
            return p
        self._check(other)
        if isinstance(self.field, RationalField):
            out = self._mul_rational(other)
        else:
            out = {}
            for e1, c1 in self.terms.items():
                for e2, c2 in other.terms.items():
                    e = tuple(a + b for a, b in zip(e1, e2))
                    s = out.get(e, 0) + c1 * c2
                    if s == 0:
                        out.pop(e, None)
                    else:
                        out[e] = s
        p = Poly.__new__(Poly)
        p.n, p.field, p.terms = self.n, self.field, out
        return p

    def _mul_rational(self, other):
        # clear denominators so the convolution runs on plain integers
        from math import gcd
        den1 = 1
        for c in self.terms.values():
            den1 = den1 * c.denominator // gcd(den1, c.denominator)
        den2 = 1
        for c in other.terms.values():
            den2 = den2 * c.denominator // gcd(den2, c.denominator)
        ints1 = [(e, c.numerator * (den1 // c.denominator))
                 for e, c in self.terms.items()]
        ints2 = [(e, c.numerator * (den2 // c.denominator))
                 for e, c in other.terms.items()]
        acc = {}
        for e1, a in ints1:
            for e2, b in ints2:
                e = tuple(x + y for x, y in zip(e1, e2))
                acc[e] = acc.get(e, 0) + a * b
        den = den1 * den2
        return {e: Fraction(v, den) for e, v in acc.items() if v}

    __rmul__ = __mul__

    def __truediv__(self, c):
        c = self.field.coerce(c)
        if isinstance(c, Fraction):
            inv = Fraction(1) / c
        else:
            inv = c.inverse()
        return self * inv

    def __pow__(self, e):
        if e < 0:
            raise ValueError("negative power of a polynomial")
        out = Poly.const(self.n, 1, self.field)
        base = self
        while e:
            if e & 1:
                out = out * base
            base = base * base
            e >>= 1
        return out

    def __eq__(self, other):
        if not isinstance(other, Poly):
            if isinstance(other, (int, Fraction, NFElem)):
                return self == Poly.const(self.n, other, self.field)
            return NotImplemented
        return (self.n == other.n and self.field == other.field
                and self.terms == other.terms)

    def __repr__(self):
        return poly_to_str(self)

    # -- calculus and substitution -------------------------------------------

    def substitute(self, images):
        """Right action (P)phi where (x_i)phi = images[i]."""
        if len(images) != self.n:
            raise ValueError("need one image per variable")
        if not images:
            raise ValueError("dimension must be at least 1")
        m = images[0].n
        field = images[0].field
        for q in images:
            if q.n != m or q.field != field:
                raise ValueError("inconsistent images")
        def horner(terms, i):
            """Substitute variables i..n-1 into the suffix-exponent dict."""
            if i == self.n:
                c = terms.get((), 0)
                return Poly.const(m, field.coerce(c), field)
            layers = {}
            for e, c in terms.items():
                layers.setdefault(e[0], {})[e[1:]] = c
            out = Poly.zero(m, field)
            for k in range(max(layers), -1, -1):
                out = out * images[i] if not out.is_zero() else out
                if k in layers:
                    out = out + horner(layers[k], i + 1)
            return out

        if not self.terms:
            return Poly.zero(m, field)
        return horner(self.terms, 0)

    def partial_derivative(self, r):
        if not 1 <= r <= self.n:
            raise IndexError("variable index out of range")
        out = {}
        for e, c in self.terms.items():
            k = e[r - 1]
            if k == 0:
                continue
            e2 = e[:r - 1] + (k - 1,) + e[r:]
            s = out.get(e2, 0) + c * k
            if s != 0:
                out[e2] = s
            else:
                out.pop(e2, None)
        return Poly(self.n, self.field, out)

    def finite_difference(self, r):
        """Delta_r(P) = (P) theta_{r,1} - P, by one substitution."""
        if not 1 <= r <= self.n:
            raise IndexError("variable index out of range")
        images = Poly.variables(self.n, self.field)
        images[r - 1] = images[r - 1] + 1
        return self.substitute(images) - self

    def weighted_degree(self, w):
        if len(w) != self.n:
            raise ValueError("weight vector length mismatch")
        if not self.terms:
            return NEG_INF
        return max(sum(wi * ei for wi, ei in zip(w, e)) for e in self.terms)

    def shift_variables(self, m):
        """Reinterpret in m >= n variables, padding exponents with zeros."""
        if m < self.n:
            raise ValueError("cannot shrink dimension")
        pad = (0,) * (m - self.n)
        return Poly(m, self.field, {e + pad: c for e, c in self.terms.items()})


# spec-level operation names -------------------------------------------------

def arith(lhs, rhs, kind):
    if kind == "add":
        return lhs + rhs
    if kind == "sub":
        return lhs - rhs
    if kind == "mul":
        return lhs * rhs
    raise ValueError("unknown arithmetic kind %r" % (kind,))


def substitute(p, images):
    return p.substitute(images)


def weighted_degree(p, w):
    return p.weighted_degree(w)


def partial_derivative(p, r):
    return p.partial_derivative(r)


def finite_difference(p, r):
    return p.finite_difference(r)


# ---------------------------------------------------------------------------
# text form
# ---------------------------------------------------------------------------

XYZ = ("x", "y", "z")


def default_names(n):
    return ["x%d" % (i + 1) for i in range(n)]


def _grlex_key(e):
    return (sum(e), e)


def poly_to_str(p, names=None):
    if names is None:
        names = default_names(p.n)
    if not p.terms:
        return "0"
    pieces = []
    for e in sorted(p.terms, key=_grlex_key, reverse=True):
        c = p.terms[e]
        vars_part = []
        for i, ei in enumerate(e):
            if ei == 1:
                vars_part.append(names[i])
            elif ei > 1:
                vars_part.append("%s^%d" % (names[i], ei))
        cs = scalar_to_str(c)
        if vars_part:
            if cs == "1":
                body = "*".join(vars_part)
            elif cs == "-1":
                body = "-" + "*".join(vars_part)
            else:
                body = cs + "*" + "*".join(vars_part)
        else:
            body = cs
        pieces.append(body)
    out = pieces[0]
    for piece in pieces[1:]:
        if piece.startswith("-"):
            out += " - " + piece[1:]
        else:
            out += " + " + piece
    return out


class PolyParseError(ValueError):
    pass


class _Lexer:
    def __init__(self, text):
        self.text = text
        self.pos = 0
        self.toks = []
        self._lex()
        self.i = 0

    def _lex(self):
        t, i = self.text, 0
        while i < len(t):
            ch = t[i]
            if ch.isspace():
                i += 1
                continue
            if ch.isdigit():
                j = i
                while j < len(t) and t[j].isdigit():
                    j += 1
                self.toks.append(("num", int(t[i:j])))
                i = j
                continue
            if ch.isalpha() or ch == "_":
                j = i
                while j < len(t) and (t[j].isalnum() or t[j] == "_"):
                    j += 1
                self.toks.append(("name", t[i:j]))
                i = j
                continue
            if ch in "+-*^()/":
                self.toks.append((ch, ch))
                i += 1
                continue
            raise PolyParseError("unexpected character %r in %r" % (ch, self.text))

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else (None, None)

    def next(self):
        tok = self.peek()
        self.i += 1
        return tok


def parse_poly(text, n, field=QQ, names=None):
    """Parse the textual polynomial grammar into a canonical Poly."""
    if names is None:
        names = default_names(n)
    index = {nm: i + 1 for i, nm in enumerate(names)}
    if n == 3:
        for alias, i in zip(XYZ, (1, 2, 3)):
            index.setdefault(alias, i)
    lex = _Lexer(text)

    def parse_expr():
        kind, _ = lex.peek()
        neg = False
        while kind in ("+", "-"):
            lex.next()
            if kind == "-":
                neg = not neg
            kind, _ = lex.peek()
        p = parse_term()
        if neg:
            p = -p
        while True:
            kind, _ = lex.peek()
            if kind == "+":
                lex.next()
                p = p + parse_term()
            elif kind == "-":
                lex.next()
                p = p - parse_term()
            else:
                return p

    def parse_term():
        p = parse_factor()
        while True:
            kind, _ = lex.peek()
            if kind == "*":
                lex.next()
                p = p * parse_factor()
            elif kind in ("num", "name", "("):
                p = p * parse_factor()
            else:
                return p

    def parse_factor():
        kind, _ = lex.peek()
        if kind == "-":
            lex.next()
            return -parse_factor()
        p = parse_primary()
        kind, _ = lex.peek()
        if kind == "^":
            lex.next()
            k2, v = lex.next()
            if k2 != "num":
                raise PolyParseError("exponent must be a nonnegative integer")
            p = p ** v
        return p

    def parse_primary():
        kind, val = lex.next()
        if kind == "num":
            k2, _ = lex.peek()
            if k2 == "/":
                lex.next()
                k3, den = lex.next()
                if k3 != "num" or den == 0:
                    raise PolyParseError("malformed rational literal")
                return Poly.const(n, Fraction(val, den), field)
            return Poly.const(n, val, field)
        if kind == "name":
            if isinstance(field, NumberField) and val == field.name:
                return Poly.const(n, field.gen(), field)
            if val not in index:
                raise PolyParseError("unknown variable %r" % (val,))
            return Poly.variable(index[val], n, field)
        if kind == "(":
            p = parse_expr()
            k2, _ = lex.next()
            if k2 != ")":
                raise PolyParseError("missing closing parenthesis")
            return p
        raise PolyParseError("unexpected token %r" % (val,))

    p = parse_expr()
    if lex.peek()[0] is not None:
        raise PolyParseError("trailing input in %r" % (text,))
    return p
