"""Exact linear algebra over the integers.

Matrices are lists of lists of Python ints.  Everything here is sized for
chain complexes with a few dozen cells, so the quadratic/cubic algorithms
below are more than fast enough and stay exact.
"""

from fractions import Fraction


def zeros(m, n):
    return [[0] * n for _ in range(m)]


def identity(n):
    return [[1 if i == j else 0 for j in range(n)] for i in range(n)]


def matmul(a, b):
    n, k, m = len(a), len(b), len(b[0]) if b else 0
    assert not a or len(a[0]) == k
    out = zeros(n, m)
    for i in range(n):
        ai = a[i]
        oi = out[i]
        for t in range(k):
            c = ai[t]
            if c:
                bt = b[t]
                for j in range(m):
                    oi[j] += c * bt[j]
    return out

def matvec(a, v):
    return [sum(ai[j] * v[j] for j in range(len(v))) for ai in a]


def transpose(a):
    return [list(col) for col in zip(*a)] if a else []


def mat_eq(a, b):
    return a == b


def _swap_rows(a, i, j):
    a[i], a[j] = a[j], a[i]


def _add_row(a, src, dst, c):
    # dst += c * src
    row_s, row_d = a[src], a[dst]
    for k in range(len(row_d)):
        row_d[k] += c * row_s[k]


def smith_normal_form(mat):
    """Return (d, U, V) with U*mat*V = diag(d), U and V unimodular.

    ``d`` is the list of diagonal entries (each dividing the next).
    """
    a = [row[:] for row in mat]
    m = len(a)
    n = len(a[0]) if m else 0
    u = identity(m)
    v = identity(n)

    def swap_cols(i, j):
        for row in a:
            row[i], row[j] = row[j], row[i]
        for row in v:
            row[i], row[j] = row[j], row[i]

    def add_col(src, dst, c):
        for row in a:
            row[dst] += c * row[src]
        for row in v:
            row[dst] += c * row[src]

    t = 0
    while t < min(m, n):
        # find a nonzero pivot of minimal absolute value
        piv = None
        for i in range(t, m):
            for j in range(t, n):
                if a[i][j] and (piv is None or abs(a[i][j]) < abs(a[piv[0]][piv[1]])):
                    piv = (i, j)
        if piv is None:
            break
        i, j = piv
        if i != t:
            _swap_rows(a, t, i)
            _swap_rows(u, t, i)
        if j != t:
            swap_cols(t, j)
        # clear row and column t
        dirty = True
        while dirty:
            dirty = False
            for i in range(t + 1, m):
                if a[i][t]:
                    q = a[i][t] // a[t][t]
                    _add_row(a, t, i, -q)
                    _add_row(u, t, i, -q)
                    if a[i][t]:
                        _swap_rows(a, t, i)
                        _swap_rows(u, t, i)
                        dirty = True
            for j in range(t + 1, n):
                if a[t][j]:
                    q = a[t][j] // a[t][t]
                    add_col(t, j, -q)
                    if a[t][j]:
                        swap_cols(t, j)
                        dirty = True
        # divisibility fix-up: pivot must divide the remaining block
        bad = None
        for i in range(t + 1, m):
            for j in range(t + 1, n):
                if a[i][j] % a[t][t]:
                    bad = i
                    break
            if bad is not None:
                break
        if bad is not None:
            _add_row(a, bad, t, 1)
            _add_row(u, bad, t, 1)
            continue
        if a[t][t] < 0:
            for j in range(n):
                a[t][j] = -a[t][j]
            for j in range(m):
                u[t][j] = -u[t][j]
        t += 1

    d = [a[i][i] for i in range(min(m, n))]
    while d and d[-1] == 0:
        d.pop()
    return d, u, v


def kernel_basis(mat):
    """Integer basis of {x : mat @ x = 0}, returned as a list of columns."""
    m = len(mat)
    n = len(mat[0]) if m else 0
    if m == 0:
        return [[1 if i == j else 0 for i in range(n)] for j in range(n)]
    d, _, v = smith_normal_form(mat)
    r = len(d)
    return [[v[i][j] for i in range(n)] for j in range(r, n)]


def solve(mat, rhs):
    """One integer solution x of mat @ x = rhs, or None if there is none."""
    m = len(mat)
    n = len(mat[0]) if m else 0
    d, u, v = smith_normal_form(mat)
    b = matvec(u, rhs)
    y = [0] * n
    for i in range(m):
        di = d[i] if i < len(d) else 0
        if di == 0:
            if b[i] != 0:
                return None
        else:
            if b[i] % di:
                return None
            y[i] = b[i] // di
    return matvec(v, y)


def inverse_unimodular(mat):
    """Exact inverse of a matrix with det = ±1 (integer entries)."""
    n = len(mat)
    a = [[Fraction(x) for x in row] + [Fraction(int(i == j)) for j in range(n)]
         for i, row in enumerate(mat)]
    for col in range(n):
        piv = next(i for i in range(col, n) if a[i][col])
        a[col], a[piv] = a[piv], a[col]
        inv = 1 / a[col][col]
        a[col] = [x * inv for x in a[col]]
        for i in range(n):
            if i != col and a[i][col]:
                c = a[i][col]
                a[i] = [x - c * y for x, y in zip(a[i], a[col])]
    out = [[a[i][n + j] for j in range(n)] for i in range(n)]
    assert all(x.denominator == 1 for row in out for x in row)
    return [[int(x) for x in row] for row in out]


def det(mat):
    """Exact determinant via fraction-valued Gaussian elimination."""
    n = len(mat)
    a = [[Fraction(x) for x in row] for row in mat]
    sign = 1
    d = Fraction(1)
    for col in range(n):
        piv = next((i for i in range(col, n) if a[i][col]), None)
        if piv is None:
            return 0
        if piv != col:
            a[col], a[piv] = a[piv], a[col]
            sign = -sign
        d *= a[col][col]
        inv = 1 / a[col][col]
        for i in range(col + 1, n):
            if a[i][col]:
                c = a[i][col] * inv
                a[i] = [x - c * y for x, y in zip(a[i], a[col])]
    d *= sign
    assert d.denominator == 1
    return int(d)


def solve_mod(mat, rhs, modulus):
    """One solution x (entries in [0, modulus)) of mat @ x = rhs (mod modulus)."""
    m = len(mat)
    n = len(mat[0]) if m else 0
    aug = [row[:] + [0] * m for row in mat]
    for i in range(m):
        aug[i][n + i] = modulus
    x = solve(aug, rhs)
    if x is None:
        return None
    return [xi % modulus for xi in x[:n]]


def qsolve(a, b):
    """Solve a @ x = b over the rationals (one solution), or None.

    ``a`` is m x n with integer or Fraction entries, ``b`` a length-m vector
    or an m x k matrix; returns Fractions.
    """
    m = len(a)
    n = len(a[0]) if m else 0
    vec = not isinstance(b[0], (list, tuple))
    rhs = [[Fraction(x)] for x in b] if vec else [[Fraction(x) for x in row] for row in b]
    k = len(rhs[0])
    aug = [[Fraction(x) for x in a[i]] + rhs[i] for i in range(m)]
    pivots = []
    row = 0
    for col in range(n):
        piv = next((i for i in range(row, m) if aug[i][col]), None)
        if piv is None:
            continue
        aug[row], aug[piv] = aug[piv], aug[row]
        inv = 1 / aug[row][col]
        aug[row] = [x * inv for x in aug[row]]
        for i in range(m):
            if i != row and aug[i][col]:
                c = aug[i][col]
                aug[i] = [x - c * y for x, y in zip(aug[i], aug[row])]
        pivots.append(col)
        row += 1
        if row == m:
            break
    # consistency
    for i in range(row, m):
        if any(aug[i][n:]):
            return None
    x = [[Fraction(0)] * k for _ in range(n)]
    for i, col in enumerate(pivots):
        for j in range(k):
            x[col][j] = aug[i][n + j]
    if vec:
        return [x[i][0] for i in range(n)]
    return x


def random_unimodular(n, rng, steps=40):
    """Random product of elementary row operations (det ±1)."""
    a = identity(n)
    for _ in range(steps):
        i = rng.randrange(n)
        j = rng.randrange(n)
        if i == j:
            continue
        c = rng.choice([-2, -1, 1, 2])
        _add_row(a, i, j, c)
        if rng.random() < 0.3:
            _swap_rows(a, i, j)
    return a
