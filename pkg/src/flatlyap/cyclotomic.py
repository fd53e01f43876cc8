"""Exact arithmetic in Q(z), z a primitive cube root of unity.

Every element is written a + b*z with rational a, b, reduced against
z^2 = -1 - z and z^3 = 1.  Conjugation sends z to z^2, i.e. (a, b) to
(a - b, -b).  All operations are exact; the only floating-point code in
this module is :func:`complex_embed`.
"""

from __future__ import annotations

import cmath
from fractions import Fraction
from math import isqrt


class CycloNum:
    """An element a + b*z of the cyclotomic field of cube roots of unity."""

    __slots__ = ("a", "b")

    def __init__(self, a=0, b=0):
        self.a = Fraction(a)
        self.b = Fraction(b)

    # -- ring structure ------------------------------------------------

    def __add__(self, other):
        other = _coerce(other)
        return CycloNum(self.a + other.a, self.b + other.b)

    __radd__ = __add__

    def __neg__(self):
        return CycloNum(-self.a, -self.b)

    def __sub__(self, other):
        other = _coerce(other)
        return CycloNum(self.a - other.a, self.b - other.b)

    def __rsub__(self, other):
        return _coerce(other) - self

    def __mul__(self, other):
        other = _coerce(other)
        # (a + bz)(c + dz) = ac + (ad + bc) z + bd z^2,  z^2 = -1 - z
        a, b, c, d = self.a, self.b, other.a, other.b
        bd = b * d
        return CycloNum(a * c - bd, a * d + b * c - bd)

    __rmul__ = __mul__

    def inverse(self):
        n = self.abs2()
        if n == 0:
            raise ZeroDivisionError("inverse of zero in the cyclotomic field")
        con = self.conj()
        return CycloNum(con.a / n, con.b / n)

    def __truediv__(self, other):
        return self * _coerce(other).inverse()

    def __rtruediv__(self, other):
        return _coerce(other) * self.inverse()

    def __pow__(self, k):
        if k < 0:
            return self.inverse() ** (-k)
        out = ONE
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    # -- field-specific pieces ------------------------------------------

    def conj(self):
        return CycloNum(self.a - self.b, -self.b)

    def abs2(self):
        """|x|^2 = x * conj(x); a rational number, >= 0."""
        p = self * self.conj()
        assert p.b == 0
        assert p.a >= 0
        return p.a

    def is_rational(self):
        return self.b == 0

    def is_zero(self):
        return self.a == 0 and self.b == 0

    # -- housekeeping ----------------------------------------------------

    def __eq__(self, other):
        if isinstance(other, (int, Fraction, CycloNum)):
            other = _coerce(other)
            return self.a == other.a and self.b == other.b
        return NotImplemented

    def __hash__(self):
        return hash((self.a, self.b))

    def __bool__(self):
        return not self.is_zero()

    def __repr__(self):
        return f"CycloNum({self.a!r}, {self.b!r})"

    def __str__(self):
        return self.to_string()

    def to_string(self):
        """Serialize as "a/b+c/d*z"."""
        return (f"{self.a.numerator}/{self.a.denominator}"
                f"{'+' if self.b >= 0 else '-'}"
                f"{abs(self.b.numerator)}/{self.b.denominator}*z")

    def to_json(self):
        """Serialize as the 4-integer array [a_num, a_den, b_num, b_den]."""
        return [self.a.numerator, self.a.denominator,
                self.b.numerator, self.b.denominator]

    @classmethod
    def from_json(cls, data):
        an, ad, bn, bd = data
        return cls(Fraction(an, ad), Fraction(bn, bd))

    @classmethod
    def from_string(cls, text):
        text = text.strip().replace(" ", "")
        if not text.endswith("*z"):
            raise ValueError(f"bad cyclotomic literal: {text!r}")
        body = text[:-2]
        # split at the sign separating the two fractions
        for k in range(1, len(body)):
            if body[k] in "+-" and body[k - 1] not in "+-/":
                a = Fraction(body[:k])
                b = Fraction(body[k:].replace("+", "", 1)) if body[k] == "+" \
                    else -Fraction(body[k + 1:])
                return cls(a, b)
        raise ValueError(f"bad cyclotomic literal: {text!r}")


def _coerce(x):
    if isinstance(x, CycloNum):
        return x
    if isinstance(x, (int, Fraction)):
        return CycloNum(x, 0)
    raise TypeError(f"cannot coerce {type(x).__name__} into the cyclotomic field")


ZERO = CycloNum(0, 0)
ONE = CycloNum(1, 0)
ZETA = CycloNum(0, 1)
ZETA2 = ZETA * ZETA
# i*sqrt(3) = z - z^2; a positive imaginary unit usable inside the field
I_SQRT3 = ZETA - ZETA2

#: the six units ±z^k, i.e. all sixth roots of unity in the field
UNIT_SCALARS = (ONE, ZETA, ZETA2, -ONE, -ZETA, -ZETA2)


def zeta_power_of_order(d, k=1):
    """exp(2*pi*i*k/d) as an exact field element, for d dividing 6."""
    if 6 % d:
        raise ValueError(f"exp(2 pi i/{d}) does not lie in the cube-root field")
    return (-ZETA2) ** (k * (6 // d))


def complex_embed(x):
    """Embed a CycloNum (or CycloMatrix, or scalar) into floating complex."""
    if isinstance(x, CycloMatrix):
        import numpy as np

        return np.array([[complex_embed(v) for v in row] for row in x.rows],
                        dtype=complex)
    x = _coerce(x)
    zeta = complex(-0.5, 3 ** 0.5 / 2)
    return complex(x.a) + complex(x.b) * zeta


class CycloMatrix:
    """A square matrix over the cyclotomic field."""

    __slots__ = ("dim", "rows")

    def __init__(self, rows):
        self.rows = [[_coerce(v) for v in row] for row in rows]
        self.dim = len(self.rows)
        if any(len(row) != self.dim for row in self.rows):
            raise ValueError("matrix must be square")

    @classmethod
    def identity(cls, n):
        return cls([[ONE if i == j else ZERO for j in range(n)] for i in range(n)])

    @classmethod
    def from_int(cls, rows):
        return cls([[CycloNum(v) for v in row] for row in rows])

    def __getitem__(self, ij):
        i, j = ij
        return self.rows[i][j]

    def __eq__(self, other):
        return isinstance(other, CycloMatrix) and self.rows == other.rows

    def __hash__(self):
        return hash(tuple(tuple(r) for r in self.rows))

    def __add__(self, other):
        return CycloMatrix([[x + y for x, y in zip(r, s)]
                            for r, s in zip(self.rows, other.rows)])

    def __sub__(self, other):
        return CycloMatrix([[x - y for x, y in zip(r, s)]
                            for r, s in zip(self.rows, other.rows)])

    def __mul__(self, other):
        if isinstance(other, CycloMatrix):
            n = self.dim
            cols = list(zip(*other.rows))
            return CycloMatrix(
                [[sum((self.rows[i][k] * cols[j][k] for k in range(n)), ZERO)
                  for j in range(n)] for i in range(n)])
        return CycloMatrix([[x * other for x in row] for row in self.rows])

    __rmul__ = __mul__

    def __neg__(self):
        return CycloMatrix([[-x for x in row] for row in self.rows])

    def __pow__(self, k):
        if k < 0:
            return self.inverse() ** (-k)
        out = CycloMatrix.identity(self.dim)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def scale(self, c):
        c = _coerce(c)
        return CycloMatrix([[x * c for x in row] for row in self.rows])

    def conj(self):
        return CycloMatrix([[x.conj() for x in row] for row in self.rows])

    def transpose(self):
        return CycloMatrix([list(col) for col in zip(*self.rows)])

    def conj_transpose(self):
        return self.conj().transpose()

    def trace(self):
        return sum((self.rows[i][i] for i in range(self.dim)), ZERO)

    def det(self):
        d, _ = self._gauss()
        return d

    def _gauss(self):
        """Return (det, reduced-augmented rows) of Gaussian elimination."""
        n = self.dim
        a = [row[:] for row in self.rows]
        d = ONE
        for col in range(n):
            piv = next((i for i in range(col, n) if a[i][col]), None)
            if piv is None:
                return ZERO, a
            if piv != col:
                a[col], a[piv] = a[piv], a[col]
                d = -d
            d = d * a[col][col]
            inv = a[col][col].inverse()
            a[col] = [x * inv for x in a[col]]
            for i in range(n):
                if i != col and a[i][col]:
                    c = a[i][col]
                    a[i] = [x - c * y for x, y in zip(a[i], a[col])]
        return d, a

    def inverse(self):
        n = self.dim
        a = [self.rows[i][:] + [ONE if i == j else ZERO for j in range(n)]
             for i in range(n)]
        for col in range(n):
            piv = next((i for i in range(col, n) if a[i][col]), None)
            if piv is None:
                raise ZeroDivisionError("matrix is singular")
            a[col], a[piv] = a[piv], a[col]
            inv = a[col][col].inverse()
            a[col] = [x * inv for x in a[col]]
            for i in range(n):
                if i != col and a[i][col]:
                    c = a[i][col]
                    a[i] = [x - c * y for x, y in zip(a[i], a[col])]
        return CycloMatrix([row[n:] for row in a])

    def is_scalar(self):
        c = self.rows[0][0]
        for i in range(self.dim):
            for j in range(self.dim):
                if (self.rows[i][j] != c) if i == j else bool(self.rows[i][j]):
                    return False
        return True

    def is_identity(self):
        return self.is_scalar() and self.rows[0][0] == ONE

    def char_poly(self):
        """Monic characteristic polynomial det(T*I - M), exact."""
        # Faddeev-LeVerrier: exact over a field of characteristic zero.
        n = self.dim
        coeffs = [ONE]  # leading coefficient of T^n
        m = CycloMatrix.identity(n)
        for k in range(1, n + 1):
            m = self * m
            c = m.trace() * Fraction(-1, k)
            coeffs.append(c)
            if k < n:
                m = m + CycloMatrix.identity(n).scale(c)
        # coeffs[i] multiplies T^(n-i); CycloPoly stores lowest degree first
        return CycloPoly(list(reversed(coeffs)))

    def to_json(self):
        return [[v.to_json() for v in row] for row in self.rows]

    @classmethod
    def from_json(cls, data):
        return cls([[CycloNum.from_json(v) for v in row] for row in data])

    def __repr__(self):
        body = "; ".join(", ".join(str(v) for v in row) for row in self.rows)
        return f"CycloMatrix[{body}]"


def det_order(m: CycloMatrix, bound: int):
    """Determinant plus the least m <= bound with M^m = I (or scalar).

    Returns a dict with keys det, order, projective_order; orders are None
    when not attained within the bound.
    """
    if bound < 1:
        raise ValueError("bound must be >= 1")
    out = {"det": m.det(), "order": None, "projective_order": None}
    p = m
    for k in range(1, bound + 1):
        if out["projective_order"] is None and p.is_scalar():
            out["projective_order"] = k
        if p.is_identity():
            out["order"] = k
            break
        p = p * m
    return out


def wedge_square(m: CycloMatrix) -> CycloMatrix:
    """Induced matrix on the second exterior power of a 4-dim space.

    Basis of Lambda^2 is e_i ^ e_j, i < j, in lexicographic order.
    """
    if m.dim != 4:
        raise ValueError("wedge_square expects a 4x4 matrix")
    pairs = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]
    rows = []
    for (i, j) in pairs:
        rows.append([m[i, k] * m[j, l] - m[i, l] * m[j, k] for (k, l) in pairs])
    return CycloMatrix(rows)


class CycloPoly:
    """Polynomial over the cyclotomic field; coefficients lowest degree first."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs):
        cs = [_coerce(c) for c in coeffs]
        while len(cs) > 1 and cs[-1].is_zero():
            cs.pop()
        self.coeffs = cs

    def degree(self):
        return len(self.coeffs) - 1 if any(map(bool, self.coeffs)) else -1

    def is_zero(self):
        return self.degree() < 0

    def __eq__(self, other):
        return isinstance(other, CycloPoly) and self.coeffs == other.coeffs

    def __hash__(self):
        return hash(tuple(self.coeffs))

    def __add__(self, other):
        a, b = self.coeffs, other.coeffs
        n = max(len(a), len(b))
        return CycloPoly([(a[i] if i < len(a) else ZERO) +
                          (b[i] if i < len(b) else ZERO) for i in range(n)])

    def __sub__(self, other):
        return self + CycloPoly([-c for c in other.coeffs])

    def __mul__(self, other):
        if isinstance(other, (int, Fraction, CycloNum)):
            other = CycloPoly([other])
        out = [ZERO] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, ci in enumerate(self.coeffs):
            if ci:
                for j, cj in enumerate(other.coeffs):
                    out[i + j] = out[i + j] + ci * cj
        return CycloPoly(out)

    __rmul__ = __mul__

    def divmod(self, other):
        """Exact polynomial division; works over the field."""
        if other.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        rem = self.coeffs[:]
        dq = len(self.coeffs) - len(other.coeffs)
        if dq < 0:
            return CycloPoly([ZERO]), CycloPoly(rem)
        lead_inv = other.coeffs[-1].inverse()
        quot = [ZERO] * (dq + 1)
        for k in range(dq, -1, -1):
            c = rem[k + len(other.coeffs) - 1] * lead_inv
            quot[k] = c
            if c:
                for j, oc in enumerate(other.coeffs):
                    rem[k + j] = rem[k + j] - c * oc
        return CycloPoly(quot), CycloPoly(rem)

    def conj(self):
        return CycloPoly([c.conj() for c in self.coeffs])

    def eval(self, x):
        out = ZERO
        for c in reversed(self.coeffs):
            out = out * x + c
        return out

    def eval_complex(self, x):
        out = 0j
        for c in reversed(self.coeffs):
            out = out * x + complex_embed(c)
        return out

    def roots_complex(self):
        import numpy as np

        cs = [complex_embed(c) for c in reversed(self.coeffs)]
        return list(np.roots(cs))

    def is_monic(self):
        return self.coeffs[-1] == ONE

    def __repr__(self):
        terms = [f"({c})*T^{i}" for i, c in enumerate(self.coeffs) if c]
        return " + ".join(terms) if terms else "0"


class IntPoly:
    """Polynomial with rational-integer coefficients, lowest degree first."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs):
        cs = [int(c) for c in coeffs]
        while len(cs) > 1 and cs[-1] == 0:
            cs.pop()
        self.coeffs = cs

    def degree(self):
        return len(self.coeffs) - 1 if any(self.coeffs) else -1

    def __eq__(self, other):
        return isinstance(other, IntPoly) and self.coeffs == other.coeffs

    def __hash__(self):
        return hash(tuple(self.coeffs))

    def __mul__(self, other):
        out = [0] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, ci in enumerate(self.coeffs):
            if ci:
                for j, cj in enumerate(other.coeffs):
                    out[i + j] += ci * cj
        return IntPoly(out)

    def divexact(self, other):
        """Exact division; raises if the remainder is nonzero."""
        q, r = CycloPoly([CycloNum(c) for c in self.coeffs]).divmod(
            CycloPoly([CycloNum(c) for c in other.coeffs]))
        if not r.is_zero():
            raise ValueError("inexact integer polynomial division")
        out = []
        for c in q.coeffs:
            assert c.is_rational() and c.a.denominator == 1
            out.append(int(c.a))
        return IntPoly(out)

    def to_cyclo(self):
        return CycloPoly([CycloNum(c) for c in self.coeffs])

    def __repr__(self):
        terms = [f"{c}*T^{i}" for i, c in enumerate(self.coeffs) if c]
        return " + ".join(terms) if terms else "0"


def galois_norm(p: CycloPoly) -> IntPoly:
    """P * conj(P) with conjugation on coefficients; must land in Z[T]."""
    prod = p * p.conj()
    coeffs = []
    for c in prod.coeffs:
        if not c.is_rational() or c.a.denominator != 1:
            raise ValueError(f"galois_norm produced a non-integer coefficient: {c}")
        coeffs.append(int(c.a))
    return IntPoly(coeffs)


def _euler_phi(n):
    out = n
    p = 2
    m = n
    while p * p <= m:
        if m % p == 0:
            out -= out // p
            while m % p == 0:
                m //= p
        p += 1
    if m > 1:
        out -= out // m
    return out


def cyclotomic_polynomial(n) -> IntPoly:
    """The n-th cyclotomic polynomial, computed by Moebius inversion."""
    num = IntPoly([1])
    den = IntPoly([1])
    for d in range(1, n + 1):
        if n % d == 0:
            mu = _moebius(n // d)
            t_d_minus_1 = IntPoly([-1] + [0] * (d - 1) + [1])
            if mu == 1:
                num = num * t_d_minus_1
            elif mu == -1:
                den = den * t_d_minus_1
    return num.divexact(den)


def _moebius(n):
    out = 1
    p = 2
    while p * p <= n:
        if n % p == 0:
            n //= p
            if n % p == 0:
                return 0
            out = -out
        p += 1
    if n > 1:
        out = -out
    return out


def candidate_cyclotomic_indices(deg):
    """All n with phi(n) = deg.  Finite: phi(n) >= sqrt(n/2)."""
    if deg < 1:
        return [1] if deg == 0 else []
    bound = 2 * deg * deg + 2
    # phi(n) >= sqrt(n/2) gives n <= 2*deg^2; pad a little for safety
    return [n for n in range(1, bound + 1) if _euler_phi(n) == deg]


def is_cyclotomic(p: IntPoly) -> bool:
    """True iff p equals Phi_n for some n (p must be monic)."""
    if p.coeffs[-1] != 1:
        raise ValueError("is_cyclotomic expects a monic polynomial")
    deg = p.degree()
    for n in candidate_cyclotomic_indices(deg):
        if cyclotomic_polynomial(n) == p:
            return True
    return False


def is_zeta_integral(x: CycloNum) -> bool:
    return x.a.denominator == 1 and x.b.denominator == 1


def zeta_nearest(x: CycloNum) -> CycloNum:
    """Nearest element of Z[z] in coordinates (good enough for Euclid)."""
    return CycloNum(round(x.a), round(x.b))


def zeta_integral_kernel(rows):
    """Saturated kernel over Z[z] of a matrix with Z[z] entries.

    Column reduction by unimodular operations (the ring is norm-Euclidean),
    tracking the transform; the kernel columns span a direct summand.
    Returns a list of vectors.
    """
    m = len(rows)
    n = len(rows[0]) if m else 0
    a = [row[:] for row in rows]
    v = [[ONE if i == j else ZERO for j in range(n)] for i in range(n)]

    def col_sub(j, p, q):
        for i in range(m):
            a[i][j] = a[i][j] - q * a[i][p]
        for i in range(n):
            v[i][j] = v[i][j] - q * v[i][p]

    def col_swap(j, p):
        for i in range(m):
            a[i][j], a[i][p] = a[i][p], a[i][j]
        for i in range(n):
            v[i][j], v[i][p] = v[i][p], v[i][j]

    col = 0
    for r in range(m):
        if col >= n:
            break
        live = [j for j in range(col, n) if a[r][j]]
        if not live:
            continue
        while True:
            live = [j for j in range(col, n) if a[r][j]]
            if len(live) == 1:
                break
            p = min(live, key=lambda j: a[r][j].abs2())
            for j in live:
                if j != p:
                    q = zeta_nearest(a[r][j] / a[r][p])
                    col_sub(j, p, q)
                    assert a[r][j].abs2() < a[r][p].abs2() or not a[r][j]
        p = live[0]
        if p != col:
            col_swap(p, col)
        col += 1
    return [[v[i][j] for i in range(n)] for j in range(col, n)]


def sqrt_rational(q: Fraction) -> Fraction:
    """Exact square root of a rational, or raise if not a perfect square."""
    num, den = q.numerator, q.denominator
    rn, rd = isqrt(num), isqrt(den)
    if rn * rn != num or rd * rd != den:
        raise ValueError(f"{q} is not the square of a rational")
    return Fraction(rn, rd)
