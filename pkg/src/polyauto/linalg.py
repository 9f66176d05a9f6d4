"""Exact dense linear algebra over the coefficient fields (small matrices)."""


def identity_matrix(n, field):
    return [[field.one if i == j else field.zero for j in range(n)]
            for i in range(n)]


def zero_matrix(n, m, field):
    return [[field.zero for _ in range(m)] for _ in range(n)]


def mat_mul(a, b, field):
    n, k, m = len(a), len(b), len(b[0])
    out = zero_matrix(n, m, field)
    for i in range(n):
        for j in range(m):
            s = field.zero
            for t in range(k):
                s = s + a[i][t] * b[t][j]
            out[i][j] = s
    return out


def mat_vec(a, v, field):
    return [sum_field((a[i][j] * v[j] for j in range(len(v))), field)
            for i in range(len(a))]


def sum_field(it, field):
    s = field.zero
    for x in it:
        s = s + x
    return s


def mat_eq_zero(a):
    return all(x == 0 for row in a for x in row)


def rref(a, field):
    """Reduced row echelon form; returns (matrix, pivot column list)."""
    m = [list(row) for row in a]
    rows = len(m)
    cols = len(m[0]) if rows else 0
    pivots = []
    r = 0
    for c in range(cols):
        pr = None
        for i in range(r, rows):
            if m[i][c] != 0:
                pr = i
                break
        if pr is None:
            continue
        m[r], m[pr] = m[pr], m[r]
        inv = _inv_scalar(m[r][c], field)
        m[r] = [x * inv for x in m[r]]
        for i in range(rows):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [x - f * y for x, y in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == rows:
            break
    return m, pivots


def _inv_scalar(c, field):
    return field.one / c


def rank(a, field):
    if not a:
        return 0
    _, pivots = rref(a, field)
    return len(pivots)


def mat_inverse(a, field):
    n = len(a)
    aug = [list(row) + list(idr) for row, idr in zip(a, identity_matrix(n, field))]
    m, pivots = rref(aug, field)
    if pivots[:n] != list(range(n)):
        raise ValueError("matrix is singular")
    return [row[n:] for row in m]


def solve(a, b, field):
    """One solution of A x = b, or None if inconsistent (A may be non-square)."""
    rows = len(a)
    cols = len(a[0]) if rows else 0
    aug = [list(a[i]) + [b[i]] for i in range(rows)]
    m, pivots = rref(aug, field)
    if cols in pivots:
        return None
    x = [field.zero] * cols
    for r, c in enumerate(pivots):
        x[c] = m[r][cols]
    return x


def nullspace(a, field):
    """Basis of the kernel of A (list of vectors), deterministic."""
    rows = len(a)
    cols = len(a[0]) if rows else 0
    m, pivots = rref(a, field)
    free = [c for c in range(cols) if c not in pivots]
    basis = []
    for f in free:
        v = [field.zero] * cols
        v[f] = field.one
        for r, c in enumerate(pivots):
            v[c] = -m[r][f]
        basis.append(v)
    return basis


def column_space_basis_indices(a, field):
    """Indices of the earliest columns forming a basis of the column space."""
    _, pivots = rref(a, field)
    return pivots
