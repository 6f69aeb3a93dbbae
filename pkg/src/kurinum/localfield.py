"""Completion of a Hecke field at a prime above p.

A prime is described by a monic local factor g of the defining polynomial,
written in the variable y = x - shift, with coefficients known modulo p^M.
Only two shapes are first class: unramified factors (e = 1), where the
powers of y form an integral basis, and Eisenstein factors (f = 1), where
y itself is a uniformizer.
"""

from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd

import flint

from .arith import NumberFieldElement, is_zero, poly_shift, poly_trim, valuation_int


class PrecisionError(ArithmeticError):
    pass


class UnvalidatedPrime(ValueError):
    pass


class AmbiguousSelector(ValueError):
    pass


class _Infinity:
    def __repr__(self):
        return "Infinity"

    def __reduce__(self):
        # unpickle to the module singleton so that "is INFINITY" keeps working
        return "INFINITY"

    def __eq__(self, other):
        return isinstance(other, _Infinity)

    def __hash__(self):
        return 0

    def __gt__(self, other):
        return not isinstance(other, _Infinity)

    def __ge__(self, other):
        return True

    def __lt__(self, other):
        return False

    def __le__(self, other):
        return isinstance(other, _Infinity)


INFINITY = _Infinity()


@dataclass(frozen=True)
class AtLeast:
    """Valuation known only to be at least m."""
    m: int

    def __repr__(self):
        return ">=%d" % self.m


# ------------------------------------------------------ polynomials mod p^k

def _pmod(a, q):
    return poly_trim([c % q for c in a])


def _pmul(a, b, q):
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return _pmod(out, q)


def _pdivmod_monic(a, g, q):
    """a = quo*g + rem over Z/q, g monic."""
    r = [c % q for c in a]
    dg = len(g) - 1
    if len(r) - 1 < dg:
        return [], poly_trim(r)
    quo = [0] * (len(r) - dg)
    for s in range(len(r) - 1 - dg, -1, -1):
        c = r[s + dg] % q
        quo[s] = c
        if c:
            for i, gc in enumerate(g):
                r[s + i] = (r[s + i] - c * gc) % q
    return _pmod(quo, q), _pmod(r[:dg], q)


def _padd(a, b, q):
    n = max(len(a), len(b))
    return _pmod([(a[i] if i < len(a) else 0) + (b[i] if i < len(b) else 0) for i in range(n)], q)


def _psub(a, b, q):
    return _padd(a, [-c for c in b], q)


def _bezout_mod_p(g, h, p):
    """s, t with s*g + t*h = 1 mod p (g, h coprime mod p)."""
    G = flint.nmod_poly(list(g), p)
    H = flint.nmod_poly(list(h), p)
    d, s, t = G.xgcd(H)
    if d.degree() != 0:
        raise ValueError("factors not coprime mod p")
    inv = pow(int(d[0]), -1, p)
    return [int(c) * inv % p for c in s.coeffs()], [int(c) * inv % p for c in t.coeffs()]


def hensel_lift_pair(f, g, h, p, M):
    """Lift f = g*h mod p (g monic, coprime to h) to precision p^M."""
    s, t = _bezout_mod_p(g, h, p)
    q = p
    g, h = list(g), list(h)
    for _ in range(1, M):
        qn = q * p
        err = _psub(f, _pmul(g, h, qn), qn)
        err = [(c // q) % p for c in err]
        # dg*h + dh*g = err mod p with deg dg < deg g
        _, dg = _pdivmod_monic(_pmul(t, err, p), g, p)
        rest = _psub(err, _pmul(dg, h, p), p)
        dh, r = _pdivmod_monic(rest, g, p)
        if r:
            raise ArithmeticError("Hensel step failed")
        g = _padd(g, [c * q for c in dg], qn)
        h = _padd(h, [c * q for c in dh], qn)
        q = qn
    return g, h


def hensel_lift(f, factors, p, M):
    """Lift a coprime factorization f = lc * prod(factors) mod p to p^M.

    factors are monic and pairwise coprime mod p; f is monic.
    """
    out = []
    rest = list(f)
    remaining = list(factors)
    while len(remaining) > 1:
        g = remaining.pop(0)
        h = [1]
        for other in remaining:
            h = _pmul(h, other, p)
        g_l, h_l = hensel_lift_pair(rest, g, h, p, M)
        out.append(g_l)
        rest = h_l
    out.append(_pmod(rest, p ** M))
    return out


def newton_polygon(coeffs, p, cap):
    """Lower convex hull of (i, v_p(c_i)); zero coefficients get valuation cap.

    Returns segments as (slope_as_Fraction, length), slope = root valuation.
    """
    pts = []
    for i, c in enumerate(coeffs):
        v = cap if c == 0 else min(valuation_int(c, p), cap)
        pts.append((i, v))
    hull = [pts[0]]
    i = 0
    n = len(pts) - 1
    while i < n:
        best = None
        for j in range(i + 1, n + 1):
            s = Fraction(pts[j][1] - pts[i][1], j - pts[i][0])
            if best is None or s <= best[0]:
                best = (s, j)
        hull.append(pts[best[1]])
        i = best[1]
    segs = []
    for (i0, v0), (i1, v1) in zip(hull, hull[1:]):
        segs.append((Fraction(v0 - v1, i1 - i0), i1 - i0))
    return segs


def _simple_root(poly, p, M):
    """Hensel-lift the unique simple root mod p of an integer polynomial."""
    roots = [r for r in range(1, p) if sum(c * pow(r, i, p) for i, c in enumerate(poly)) % p == 0]
    dpoly = [i * c for i, c in enumerate(poly)][1:]
    roots = [r for r in roots if sum(c * pow(r, i, p) for i, c in enumerate(dpoly)) % p]
    if len(roots) != 1:
        raise UnvalidatedPrime("segment root is not a unique simple root mod p")
    r = roots[0]
    q = p
    while q < p ** M:
        q = min(q * q, p ** M)
        fv = sum(c * pow(r, i, q) for i, c in enumerate(poly)) % q
        dv = sum(c * pow(r, i, q) for i, c in enumerate(dpoly)) % q
        r = (r - fv * pow(dv, -1, q)) % q
    return r


@dataclass(frozen=True)
class LocalFactor:
    poly: tuple          # monic, in y = x - shift, coefficients mod p^M
    shift: int
    e: int
    f: int


def _factor_local(h, p, M):
    """All local factors of h over Q_p at precision about p^M."""
    extra = 2 * len(h)
    W = M + extra
    q = p ** W
    F = flint.nmod_poly(list(h), p)
    lc, facs = F.factor()
    base = []
    for fac, k in facs:
        c = [int(x) for x in fac.coeffs()]
        base.append((c, k))
    powers = []
    for c, k in base:
        pw = [1]
        for _ in range(k):
            pw = _pmul(pw, c, p)
        powers.append(pw)
    lifted = hensel_lift([x % q for x in h], powers, p, W)
    out = []
    for (c, k), G in zip(base, lifted):
        if k == 1:
            out.append(LocalFactor(tuple(x % p ** M for x in G), 0, 1, len(c) - 1))
            continue
        if len(c) != 2:
            raise UnvalidatedPrime("repeated nonlinear factor mod p")
        c0 = (-c[0]) % p
        Gs = [x % q for x in poly_shift(G, c0)]
        Gs = Gs + [0] * (len(G) - len(Gs))
        segs = newton_polygon(Gs, p, W)
        rest = list(Gs)
        ram = []
        for s, length in segs:
            if s.denominator == 1 and length == 1:
                sv = int(s)
                # roots y = p^sv z, z a simple root of the rescaled polynomial
                scaled = [x * p ** (sv * i) for i, x in enumerate(rest)]
                vmin = min(valuation_int(x, p) for x in scaled if x)
                scaled = [x // p ** vmin for x in scaled]
                z0 = _simple_root(scaled, p, max(1, W - vmin))
                y0 = (z0 * p ** sv) % q
                quo, r = _pdivmod_monic(rest, [(-y0) % q, 1], q)
                rest = quo
                out.append(LocalFactor(tuple(x % p ** M for x in [(-y0) % p ** M, 1]), c0, 1, 1))
            elif s.denominator == length and s.numerator == 1:
                ram.append(length)
            else:
                raise UnvalidatedPrime("Newton polygon segment %s of length %d" % (s, length))
        if len(ram) > 1:
            raise UnvalidatedPrime("several ramified segments over one residue root")
        if ram:
            if len(rest) - 1 != ram[0]:
                raise ArithmeticError("inconsistent segment degrees")
            out.append(LocalFactor(tuple(x % p ** M for x in rest), c0, ram[0], 1))
    return out


@dataclass(frozen=True)
class LocalPrimeData:
    p: int
    defining_poly: tuple
    local_factor: tuple
    shift: int
    e: int
    f_res: int
    precision_M: int
    factors: tuple = field(default=())
    validated: bool = True

    @property
    def degree(self):
        return self.e * self.f_res

    @property
    def rational(self):
        return len(self.defining_poly) == 2

    def global_uniformizer(self, K=None):
        """An element of K (or Q) with pi-adic valuation 1."""
        if self.e == 1:
            return self.p
        if K is None:
            raise ValueError("ramified prime needs the global field")
        return K([-self.shift, 1])


def split_prime(p, h, selector=None, M=20):
    """Local data of the chosen prime above p in Q[x]/(h)."""
    h = [int(c) for c in poly_trim(h)]
    if h[-1] != 1:
        raise ValueError("defining polynomial must be monic")
    if M < 1:
        raise ValueError("precision must be positive")
    facs = _factor_local(h, p, M)
    ef = tuple((lf.e, lf.f) for lf in facs)
    if sum(e * f for e, f in ef) != len(h) - 1:
        raise ArithmeticError("local degrees do not add up")
    if selector is None:
        if len(facs) != 1:
            raise AmbiguousSelector("%d primes above %d; give a selector" % (len(facs), p))
        chosen = facs[0]
    elif "root" in selector:
        r = int(selector["root"])
        chosen = None
        for lf in facs:
            if lf.e * lf.f != 1:
                continue
            y0 = (-lf.poly[0]) % p ** M
            k = int(selector.get("digits", 1))
            if (r - lf.shift - y0) % p ** k == 0:
                if chosen is not None:
                    raise AmbiguousSelector("root approximation matches several primes")
                chosen = lf
        if chosen is None:
            raise ValueError("no degree-one prime matches the root approximation")
    else:
        want = (int(selector.get("e", 1)), int(selector.get("f", 1)))
        match = [lf for lf in facs if (lf.e, lf.f) == want]
        if len(match) != 1:
            if not match:
                raise ValueError("no prime with (e, f) = %s; available %s" % (want, ef))
            raise AmbiguousSelector("(e, f) = %s is shared by %d primes; give a root" % (want, len(match)))
        chosen = match[0]
    validated = len(h) - 1 <= 4 and chosen.e <= 2 and (chosen.e == 1 or chosen.f == 1)
    return LocalPrimeData(p, tuple(h), chosen.poly, chosen.shift, chosen.e, chosen.f, M, ef, validated)


# ------------------------------------------------------------ local images

def _coeffs_of(x):
    if isinstance(x, NumberFieldElement):
        return list(x.coeffs)
    return [Fraction(x)]


def local_image(x, L, digits=None):
    """Image of an exact element in O_F.

    Returns (t, c) meaning p^t * sum c_j y^j with integer c_j mod p^digits.
    """
    if digits is None:
        digits = L.precision_M
    coeffs = _coeffs_of(x)
    if all(c == 0 for c in coeffs):
        return 0, [0] * L.degree
    a = poly_shift(coeffs, L.shift) if L.shift else list(coeffs)
    den = 1
    for c in a:
        den = den * Fraction(c).denominator // gcd(den, Fraction(c).denominator)
    t = 0
    while den % L.p == 0:
        den //= L.p
        t -= 1
    if digits > L.precision_M:
        raise PrecisionError("requested %d digits, prime known to %d" % (digits, L.precision_M))
    q = L.p ** digits
    ui = pow(den, -1, q)
    ints = [int(Fraction(c) * den * L.p ** (-t)) * ui % q for c in a]
    if len(ints) > L.degree:
        _, r = _pdivmod_monic(ints, list(L.local_factor), q)
    else:
        r = ints
    r = list(r) + [0] * (L.degree - len(r))
    return t, r


def _min_val(c, L, digits):
    best = None
    for j, cj in enumerate(c):
        if cj % L.p ** digits == 0:
            continue
        v = valuation_int(cj, L.p)
        w = L.e * v + j if L.e > 1 else v
        if best is None or w < best:
            best = w
    return best


@dataclass(frozen=True)
class LocalValue:
    """An element of O_F known modulo pi^known_precision (None = exact).

    Exact values carry their global representative; truncated values carry
    integer coordinates in the basis y^j.
    """
    representative: object = None
    known_precision: object = None
    residue: tuple = None

    @property
    def exact(self):
        return self.known_precision is None


def valuation(x, L):
    """pi-adic valuation: an int, AtLeast(m), or INFINITY for exact zero."""
    if not isinstance(x, LocalValue):
        x = LocalValue(x)
    if x.exact:
        rep = x.representative
        if rep == 0 or (isinstance(rep, NumberFieldElement) and rep.is_zero()):
            return INFINITY
        t, c = local_image(rep, L)
        v = _min_val(c, L, L.precision_M)
        if v is None:
            raise PrecisionError("all %d tracked digits vanish; raise M" % L.precision_M)
        return L.e * t + v
    m = x.known_precision
    digits = -(-m // L.e)
    v = _min_val(list(x.residue), L, digits)
    if v is None or v >= m:
        return AtLeast(m)
    return v


def reduce_mod(x, m, L):
    """Canonical coordinates of x modulo pi^m."""
    if not isinstance(x, LocalValue):
        x = LocalValue(x)
    if x.exact:
        t, c = local_image(x.representative, L)
        if t < 0:
            nz = _min_val(c, L, L.precision_M)
            if nz is None or L.e * t + nz < 0:
                raise ValueError("element is not integral at pi")
            c = [ci // L.p ** (-t) for ci in c]
            t = 0
        c = [ci * L.p ** t for ci in c]
    else:
        if m > x.known_precision:
            raise PrecisionError("m = %d exceeds known precision %d" % (m, x.known_precision))
        c = list(x.residue)
    out = []
    for j, cj in enumerate(c):
        if L.e == 1:
            out.append(cj % L.p ** m)
        else:
            k = -(-(m - j) // L.e)
            out.append(cj % L.p ** k if k > 0 else 0)
    return tuple(out)


def integer_congruence_exponent(t, L):
    """v_pi of a nonzero rational integer."""
    if t == 0:
        raise ValueError("exponent of zero is infinite")
    return L.e * valuation_int(t, L.p)


def valuation_by_resultant(x, L):
    """v_pi through the local norm: v_p(Res(g, x(y + shift))) / f."""
    from .arith import resultant
    coeffs = _coeffs_of(x)
    a = poly_shift(coeffs, L.shift) if L.shift else coeffs
    g = list(L.local_factor)
    if len(g) == 2:
        y0 = -g[0]
        val = sum(Fraction(c) * y0 ** i for i, c in enumerate(a))
        n = val
    else:
        n = resultant(g, a) if len(poly_trim(a)) > 1 else Fraction(a[0]) ** (len(g) - 1)
    if n == 0:
        raise PrecisionError("norm vanishes at working precision")
    return Fraction(valuation_int(n, L.p), L.f_res)


def integral_coords(x, L, digits):
    """Integer coordinates (basis y^j) of a pi-integral element, mod p^digits."""
    if is_zero(x):
        return [0] * L.degree
    t, c = local_image(x, L, L.precision_M)
    if t < 0:
        s = L.p ** (-t)
        if any(cj % s for cj in c):
            raise ValueError("element is not integral at the chosen prime")
        if digits > L.precision_M + t:
            raise PrecisionError("need %d digits, have %d" % (digits, L.precision_M + t))
        c = [cj // s for cj in c]
    else:
        if digits > L.precision_M + t:
            raise PrecisionError("need %d digits, have %d" % (digits, L.precision_M + t))
        c = [cj * L.p ** t for cj in c]
    q = L.p ** digits
    return [cj % q for cj in c]


def residue_valuation(coords, m, L):
    """Valuation of an element given by coordinates known mod pi^m."""
    return valuation(LocalValue(None, m, tuple(coords)), L)
