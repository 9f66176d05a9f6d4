"""
Triangular locally nilpotent derivations and their exponentials.

A triangular derivation sends x_i into K[x_1, ..., x_{i-1}], which makes it
locally nilpotent for free; exp(FD) is then a polynomial automorphism for
any kernel element F.
"""

from .polyring import QQ, Poly, parse_poly, poly_to_str, default_names


class SeriesCapExceeded(RuntimeError):
    """The exponential series failed to terminate within the safety cap."""


class TriangularDerivation:
    """Derivation given by its images D(x_i), each in K[x_1..x_{i-1}]."""

    def __init__(self, images):
        if not images:
            raise ValueError("need at least one image")
        n = images[0].n
        field = images[0].field
        for i, p in enumerate(images, start=1):
            if p.n != n or p.field != field:
                raise ValueError("inconsistent images")
            for j in range(i, n + 1):
                if p.degree_in(j) > 0:
                    raise ValueError(
                        "D(x%d) involves x%d: not triangular" % (i, j))
        self.images = tuple(images)
        self.n = n
        self.field = field

    def apply(self, p):
        """D(p) by the Leibniz rule."""
        if p.n != self.n or p.field != self.field:
            raise ValueError("dimension or ring mismatch")
        out = Poly.zero(self.n, self.field)
        for i, im in enumerate(self.images, start=1):
            if not im.is_zero():
                out = out + im * p.partial_derivative(i)
        return out

    def kernel_member(self, f):
        return self.apply(f).is_zero()

    def __eq__(self, other):
        return (isinstance(other, TriangularDerivation)
                and self.images == other.images)

    def __repr__(self):
        return derivation_to_str(self)

    def exponential_components(self, f):
        """Components of exp(fD) as a list of Poly; f must lie in ker D."""
        if not self.kernel_member(f):
            raise ValueError("F is not in the kernel of D")
        n, field = self.n, self.field
        degs = [p.total_degree() for p in self.images] + [f.total_degree()]
        maxdeg = max([int(d) for d in degs if d >= 0] or [0])
        cap = 1 + n * (1 + maxdeg) ** n
        from fractions import Fraction
        comps = []
        for r in range(1, n + 1):
            acc = Poly.variable(r, n, field)
            term = acc
            i = 0
            while True:
                term = f * self.apply(term)
                i += 1
                if term.is_zero():
                    break
                if i > cap:
                    raise SeriesCapExceeded(
                        "exponential series for x%d exceeded %d terms" % (r, cap))
                acc = acc + term * Fraction(1, _factorial(i))
            comps.append(acc)
        return comps


def _factorial(k):
    out = 1
    for i in range(2, k + 1):
        out *= i
    return out


def apply(d, p):
    return d.apply(p)


def kernel_member(d, f):
    return d.kernel_member(f)


def exponential(d, f):
    """exp(fD) as an Endo; the series terminates by local nilpotency."""
    from .automorphism import Endo
    return Endo(d.exponential_components(f))


def nagata_derivation(field=QQ):
    """D(x1)=0, D(x2)=x1, D(x3)=-2*x2 together with the kernel element F."""
    x1, x2, x3 = Poly.variables(3, field)
    d = TriangularDerivation([Poly.zero(3, field), x1, -2 * x2])
    f = x2 ** 2 + x1 * x3
    return d, f


def nagata_endo(field=QQ):
    """The Nagata map exp(FD)."""
    d, f = nagata_derivation(field)
    return exponential(d, f)


# ---------------------------------------------------------------------------
# text form: `D: x1 -> 0; x2 -> x1; x3 -> -2 x2`
# ---------------------------------------------------------------------------

def derivation_to_str(d, names=None):
    if names is None:
        names = default_names(d.n)
    parts = ["%s -> %s" % (names[i], poly_to_str(p, names))
             for i, p in enumerate(d.images)]
    return "D: " + "; ".join(parts)


def parse_derivation(text, n, field=QQ, names=None):
    if names is None:
        names = default_names(n)
    body = text.strip()
    if body.startswith("D:"):
        body = body[2:]
    pieces = [p.strip() for p in body.split(";") if p.strip()]
    if len(pieces) != n:
        raise ValueError("expected %d images" % n)
    images = [None] * n
    index = {nm: i for i, nm in enumerate(names)}
    if n == 3:
        for alias, i in zip(("x", "y", "z"), (0, 1, 2)):
            index.setdefault(alias, i)
    for piece in pieces:
        if "->" not in piece:
            raise ValueError("malformed derivation entry %r" % piece)
        lhs, rhs = piece.split("->", 1)
        var = lhs.strip()
        if var not in index:
            raise ValueError("unknown variable %r" % var)
        images[index[var]] = parse_poly(rhs, n, field, names)
    if any(p is None for p in images):
        raise ValueError("missing image for some variable")
    return TriangularDerivation(images)
