"""Exact arithmetic: rationals, number fields, dense exact matrices,
polynomial helpers and a few modular utilities.

Polynomials are coefficient lists, lowest degree first.
"""

from fractions import Fraction
from math import gcd

import flint


def _q(x):
    if isinstance(x, Fraction):
        return x
    return Fraction(x)


# ---------------------------------------------------------------- polynomials

def poly_trim(a):
    a = list(a)
    while a and a[-1] == 0:
        a.pop()
    return a


def poly_degree(a):
    return len(poly_trim(a)) - 1


def poly_add(a, b):
    n = max(len(a), len(b))
    out = [0] * n
    for i, c in enumerate(a):
        out[i] += c
    for i, c in enumerate(b):
        out[i] += c
    return poly_trim(out)


def poly_sub(a, b):
    return poly_add(a, [-c for c in b])


def poly_mul(a, b):
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x == 0:
            continue
        for j, y in enumerate(b):
            out[i + j] += x * y
    return poly_trim(out)


def poly_divmod(a, b):
    """Division with remainder over the rationals."""
    b = poly_trim(b)
    if not b:
        raise ZeroDivisionError("polynomial division by zero")
    r = [_q(c) for c in poly_trim(a)]
    lc = _q(b[-1])
    db = len(b) - 1
    if len(r) - 1 < db:
        return [], r
    quo = [Fraction(0)] * (len(r) - db)
    while len(r) - 1 >= db and r:
        c = r[-1] / lc
        shift = len(r) - 1 - db
        quo[shift] = c
        for i, bc in enumerate(b):
            r[shift + i] -= c * bc
        r = poly_trim(r)
    return poly_trim(quo), r


def poly_eval(a, x):
    acc = 0
    for c in reversed(a):
        acc = acc * x + c
    return acc


def poly_shift(a, c):
    """Coefficients of a(x + c)."""
    out = []
    for coef in reversed(a):
        # out = out * (x + c) + coef
        new = [0] * (len(out) + 1)
        for i, v in enumerate(out):
            new[i + 1] += v
            new[i] += v * c
        new[0] += coef
        out = new
    return poly_trim(out)


def resultant(a, b):
    """Resultant of two nonzero polynomials, Sylvester sign convention.

    Euclidean recursion over the rationals.
    """
    a = [_q(c) for c in poly_trim(a)]
    b = [_q(c) for c in poly_trim(b)]
    if not a or not b:
        raise ValueError("resultant of a zero polynomial")
    sign = 1
    scale = Fraction(1)
    while True:
        m, n = len(a) - 1, len(b) - 1
        if n == 0:
            return sign * scale * b[0] ** m
        if m == 0:
            return sign * scale * a[0] ** n
        if m < n:
            a, b = b, a
            if (m * n) % 2:
                sign = -sign
            continue
        _, r = poly_divmod(a, b)
        if not r:
            return Fraction(0)
        # res(a, b) = (-1)^(mn) res(b, a) and res(b, a) = lc(b)^(m - deg r) res(b, r)
        if (m * n) % 2:
            sign = -sign
        scale *= b[-1] ** (m - (len(r) - 1))
        a, b = b, r


# --------------------------------------------------------------- number fields

class NumberField:
    """Q[x]/(h) for a monic irreducible integer polynomial h."""

    def __init__(self, h, name="b"):
        h = [int(c) for c in poly_trim(h)]
        if len(h) < 2 or h[-1] != 1:
            raise ValueError("defining polynomial must be monic of degree >= 1")
        self.h = tuple(h)
        self.degree = len(h) - 1
        self.name = name
        self.tag = "Q[x]/(" + ",".join(str(c) for c in h) + ")"

    def __eq__(self, other):
        return isinstance(other, NumberField) and self.h == other.h

    def __hash__(self):
        return hash(self.h)

    def __repr__(self):
        return "NumberField(%s)" % (list(self.h),)

    def __call__(self, x):
        if isinstance(x, NumberFieldElement):
            if x.field != self:
                raise ValueError("element of a different field")
            return x
        if isinstance(x, (list, tuple)):
            return NumberFieldElement(self, x)
        return NumberFieldElement(self, [x])

    def gen(self):
        if self.degree == 1:
            return self([-self.h[0]])
        return self([0, 1])

    def zero(self):
        return self([0])

    def one(self):
        return self([1])


class NumberFieldElement:
    __slots__ = ("field", "coeffs")

    def __init__(self, field, coeffs):
        self.field = field
        c = [_q(x) for x in coeffs]
        if len(c) > field.degree:
            _, c = poly_divmod(c, field.h)
        c = list(c) + [Fraction(0)] * (field.degree - len(c))
        self.coeffs = tuple(c)

    def _coerce(self, other):
        if isinstance(other, NumberFieldElement):
            if other.field != self.field:
                raise ValueError("mixing elements of different fields")
            return other
        if isinstance(other, (int, Fraction)):
            return NumberFieldElement(self.field, [other])
        return NotImplemented

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return NumberFieldElement(self.field, [x + y for x, y in zip(self.coeffs, o.coeffs)])

    __radd__ = __add__

    def __neg__(self):
        return NumberFieldElement(self.field, [-x for x in self.coeffs])

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return NumberFieldElement(self.field, [x - y for x, y in zip(self.coeffs, o.coeffs)])

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return NumberFieldElement(self.field, [x * other for x in self.coeffs])
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return NumberFieldElement(self.field, poly_mul(self.coeffs, o.coeffs))

    __rmul__ = __mul__

    def inverse(self):
        if self.is_zero():
            raise ZeroDivisionError("inverse of zero in a number field")
        # extended Euclid in Q[x]
        r0, r1 = list(self.field.h), poly_trim(self.coeffs)
        s0, s1 = [], [Fraction(1)]
        while len(r1) > 1:
            q, r = poly_divmod(r0, r1)
            r0, r1 = r1, r
            s0, s1 = s1, poly_sub(s0, poly_mul(q, s1))
        c = r1[0]
        return NumberFieldElement(self.field, [x / c for x in s1])

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            return NumberFieldElement(self.field, [x / other for x in self.coeffs])
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return self * o.inverse()

    def __rtruediv__(self, other):
        return self.inverse() * other

    def __pow__(self, e):
        if e < 0:
            return self.inverse() ** (-e)
        out = self.field.one()
        base = self
        while e:
            if e & 1:
                out = out * base
            base = base * base
            e >>= 1
        return out

    def is_zero(self):
        return all(x == 0 for x in self.coeffs)

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.coeffs[0] == other and all(x == 0 for x in self.coeffs[1:])
        if isinstance(other, NumberFieldElement):
            return self.field == other.field and self.coeffs == other.coeffs
        return NotImplemented

    def __hash__(self):
        if all(x == 0 for x in self.coeffs[1:]):
            return hash(self.coeffs[0])
        return hash((self.field.h, self.coeffs))

    def is_rational(self):
        return all(x == 0 for x in self.coeffs[1:])

    def bitsize(self):
        return sum(bitsize(x) for x in self.coeffs)

    def __repr__(self):
        terms = []
        for i, c in enumerate(self.coeffs):
            if c:
                terms.append(str(c) if i == 0 else "%s*%s^%d" % (c, self.field.name, i))
        return " + ".join(terms) if terms else "0"


def bitsize(x):
    if isinstance(x, NumberFieldElement):
        return x.bitsize()
    x = _q(x)
    return x.numerator.bit_length() + x.denominator.bit_length()


def is_zero(x):
    if isinstance(x, NumberFieldElement):
        return x.is_zero()
    return x == 0


# ------------------------------------------------------------ exact matrices

class ExactMatrix:
    """Dense matrix over Q or a fixed number field.

    Entries are Fractions or NumberFieldElements; ints are promoted.
    """

    def __init__(self, rows, ncols=None):
        rows = [[x if isinstance(x, NumberFieldElement) else _q(x) for x in r] for r in rows]
        if not rows:
            if not ncols:
                raise ValueError("empty matrix")
        if ncols is None:
            ncols = len(rows[0])
        if ncols == 0:
            raise ValueError("matrix with zero columns")
        for r in rows:
            if len(r) != ncols:
                raise ValueError("ragged rows")
        self.rows = rows
        self.nrows = len(rows)
        self.ncols = ncols

    @classmethod
    def zero(cls, nrows, ncols):
        return cls([[0] * ncols for _ in range(nrows)], ncols)

    @classmethod
    def identity(cls, n):
        return cls([[int(i == j) for j in range(n)] for i in range(n)], n)

    def copy(self):
        return ExactMatrix([list(r) for r in self.rows], self.ncols)

    def __getitem__(self, ij):
        i, j = ij
        return self.rows[i][j]

    def __eq__(self, other):
        if not isinstance(other, ExactMatrix):
            return NotImplemented
        return (self.nrows, self.ncols) == (other.nrows, other.ncols) and all(
            a == b for r, s in zip(self.rows, other.rows) for a, b in zip(r, s))

    def __repr__(self):
        return "ExactMatrix(%dx%d)" % (self.nrows, self.ncols)

    def tolist(self):
        return [list(r) for r in self.rows]

    def transpose(self):
        return ExactMatrix([[self.rows[i][j] for i in range(self.nrows)] for j in range(self.ncols)],
                           self.nrows)

    def __add__(self, other):
        return ExactMatrix([[a + b for a, b in zip(r, s)] for r, s in zip(self.rows, other.rows)],
                           self.ncols)

    def __sub__(self, other):
        return ExactMatrix([[a - b for a, b in zip(r, s)] for r, s in zip(self.rows, other.rows)],
                           self.ncols)

    def scale(self, c):
        return ExactMatrix([[c * a for a in r] for r in self.rows], self.ncols)

    def __mul__(self, other):
        if isinstance(other, ExactMatrix):
            if self.ncols != other.nrows:
                raise ValueError("dimension mismatch")
            cols = other.transpose().rows
            out = []
            for r in self.rows:
                nz = [(j, a) for j, a in enumerate(r) if not is_zero(a)]
                out.append([sum((a * c[j] for j, a in nz), Fraction(0)) for c in cols])
            return ExactMatrix(out, other.ncols)
        # vector
        v = list(other)
        if len(v) != self.ncols:
            raise ValueError("dimension mismatch")
        return [sum((a * x for a, x in zip(r, v) if not is_zero(a)), Fraction(0)) for r in self.rows]

    def is_zero(self):
        return all(is_zero(a) for r in self.rows for a in r)

    def rref(self):
        return rref(self)

    def rank(self):
        return len(rref(self)[1])


def rref(M):
    """Reduced row echelon form and pivot columns.

    The pivot in each column is the candidate of smallest bit size.
    """
    rows = [list(r) for r in M.rows]
    nr, nc = M.nrows, M.ncols
    pivots = []
    top = 0
    for col in range(nc):
        if top >= nr:
            break
        best = None
        for i in range(top, nr):
            a = rows[i][col]
            if not is_zero(a):
                b = bitsize(a)
                if best is None or b < best[0]:
                    best = (b, i)
        if best is None:
            continue
        i = best[1]
        rows[top], rows[i] = rows[i], rows[top]
        piv = rows[top][col]
        inv = 1 / piv if not isinstance(piv, NumberFieldElement) else piv.inverse()
        rows[top] = [a * inv if not is_zero(a) else a for a in rows[top]]
        prow = rows[top]
        nzp = [(j, a) for j, a in enumerate(prow) if not is_zero(a)]
        for i2 in range(nr):
            if i2 == top:
                continue
            f = rows[i2][col]
            if is_zero(f):
                continue
            r = rows[i2]
            for j, a in nzp:
                r[j] = r[j] - f * a
        pivots.append(col)
        top += 1
    # canonical zero representation
    return ExactMatrix(rows, nc), pivots


def kernel_basis(M):
    """Basis of the right kernel {v : M v = 0}."""
    R, pivots = rref(M)
    pivset = set(pivots)
    zero = _zero_like(M)
    basis = []
    for f in range(M.ncols):
        if f in pivset:
            continue
        v = [zero] * M.ncols
        v[f] = zero + 1
        for i, pc in enumerate(pivots):
            v[pc] = -R.rows[i][f]
        basis.append(v)
    return basis


def _zero_like(M):
    for r in M.rows:
        for a in r:
            if isinstance(a, NumberFieldElement):
                return a.field.zero()
    return Fraction(0)


def solve_linear(M, b):
    """Exact solution x of M x = b, or None when the system is inconsistent."""
    b = list(b)
    if len(b) != M.nrows:
        raise ValueError("dimension mismatch: %d rows, right side of length %d" % (M.nrows, len(b)))
    A = ExactMatrix([list(r) + [bi] for r, bi in zip(M.rows, b)], M.ncols + 1)
    R, pivots = rref(A)
    if pivots and pivots[-1] == M.ncols:
        return None
    zero = _zero_like(A)
    x = [zero] * M.ncols
    for i, pc in enumerate(pivots):
        x[pc] = R.rows[i][M.ncols]
    return x


# ---------------------------------------------------------- modular helpers

def valuation_int(x, p):
    """p-adic valuation of a nonzero integer or rational."""
    x = _q(x)
    if x == 0:
        raise ValueError("valuation of zero")
    v = 0
    n, d = x.numerator, x.denominator
    while n % p == 0:
        n //= p
        v += 1
    while d % p == 0:
        d //= p
        v -= 1
    return v


def crt_pair(r1, m1, r2, m2):
    g = gcd(m1, m2)
    if g != 1:
        raise ValueError("moduli not coprime")
    t = ((r2 - r1) * pow(m1, -1, m2)) % m2
    return r1 + m1 * t, m1 * m2


def rational_reconstruct(a, m):
    """Return Fraction n/d with n = a d mod m, |n|, d <= sqrt(m/2), or None."""
    a %= m
    bound = int((m // 2) ** 0.5)
    while (bound + 1) * (bound + 1) * 2 <= m:
        bound += 1
    r0, r1 = m, a
    t0, t1 = 0, 1
    while r1 > bound:
        q = r0 // r1
        r0, r1 = r1, r0 - q * r1
        t0, t1 = t1, t0 - q * t1
    if t1 == 0 or abs(t1) > bound:
        return None
    if gcd(r1, abs(t1)) != 1:
        return None
    if t1 < 0:
        r1, t1 = -r1, -t1
    return Fraction(r1, t1)


def nullspace_mod(rows, q):
    """Right kernel basis of an integer matrix modulo a prime q.

    rows: list of lists or 2-d numpy array. Returns a list of integer vectors.
    """
    if hasattr(rows, "tolist"):
        rows = rows.tolist()
    M = flint.nmod_mat(rows, q)
    X, nul = M.nullspace()
    ncols = M.ncols()
    out = []
    for j in range(nul):
        out.append([int(X[i, j]) for i in range(ncols)])
    return out


def random_prime_list(count, start=(1 << 31) - 1):
    """Deterministic list of primes below 2^31, descending."""
    out = []
    n = start
    while len(out) < count:
        if flint.fmpz(n).is_prime():
            out.append(n)
        n -= 2
    return out


def kronecker(d, n):
    """Kronecker symbol (d / n)."""
    if n == 0:
        return 1 if abs(d) == 1 else 0
    out = 1
    if n < 0:
        n = -n
        if d < 0:
            out = -out
    while n % 2 == 0:
        n //= 2
        if d % 2 == 0:
            return 0
        if d % 8 in (3, 5):
            out = -out
    # Jacobi symbol (d / n) for odd n > 0
    a = d % n
    while a:
        while a % 2 == 0:
            a //= 2
            if n % 8 in (3, 5):
                out = -out
        a, n = n, a
        if a % 4 == 3 and n % 4 == 3:
            out = -out
        a %= n
    return out if n == 1 else 0
