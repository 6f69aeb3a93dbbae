"""Kolyvagin primes, the moduli n built from them, and discrete logs."""

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .localfield import INFINITY, integer_congruence_exponent, valuation
from .msym import factor_int, primes_upto


@dataclass(frozen=True)
class Rejection:
    ell: int
    reason: str

    def __bool__(self):
        return False


@dataclass(frozen=True, eq=False)
class AdmissiblePrime:
    ell: int
    v1: object
    v2: object
    eta: int
    log_table: np.ndarray

    @property
    def level(self):
        return min(self.v1, self.v2)

    def dlog(self, a):
        return dlog(self.log_table, a)


@dataclass(frozen=True)
class KolyvaginModulus:
    n: int
    primes: tuple
    nu: int
    In_exp: object

    @property
    def label(self):
        return "*".join(str(q.ell) for q in self.primes) if self.primes else "1"


def make_modulus(primes):
    primes = tuple(sorted(primes, key=lambda q: q.ell))
    n = 1
    for q in primes:
        n *= q.ell
    exp = min((q.level for q in primes), default=INFINITY)
    return KolyvaginModulus(n, primes, len(primes), exp)


def choose_primitive_root(ell, seed=None):
    """Smallest primitive root mod ell; seed k picks the k-th one after it."""
    if ell == 2:
        return 1
    qs = [q for q, _ in factor_int(ell - 1)]
    skip = 0 if seed is None else int(seed)
    for g in range(2, ell):
        if all(pow(g, (ell - 1) // q, ell) != 1 for q in qs):
            if skip == 0:
                return g
            skip -= 1
    # fewer roots than the seed asked for: wrap around
    return choose_primitive_root(ell, int(seed) % _count_roots(ell, qs))


def _count_roots(ell, qs):
    return sum(1 for g in range(2, ell) if all(pow(g, (ell - 1) // q, ell) != 1 for q in qs))


def log_table(ell, eta):
    """table[a] = log_eta(a) for 1 <= a < ell; table[0] = -1."""
    t = np.full(ell, -1, dtype=np.int64)
    x = 1
    for i in range(ell - 1):
        t[x] = i
        x = x * eta % ell
    return t


def dlog(table, a):
    ell = len(table)
    a %= ell
    if a == 0:
        raise ValueError("log of a non-unit")
    return int(table[a])


def is_admissible(ell, m, form, L, seed=None):
    """AdmissiblePrime if ell is in P_m for the form at L, else a Rejection."""
    N, k = form.level, form.weight
    if (N * L.p) % ell == 0:
        return Rejection(ell, "divides Np")
    v1 = integer_congruence_exponent(ell - 1, L)
    if v1 < m:
        return Rejection(ell, "v(ell - 1) = %d < %d" % (v1, m))
    a = form.a(ell)
    t = 1 - a + ell ** (k - 1)
    v2 = valuation(t, L)
    if v2 is not INFINITY and v2 < m:
        return Rejection(ell, "v(1 - a + ell^(k-1)) = %s < %d" % (v2, m))
    eta = choose_primitive_root(ell, seed)
    return AdmissiblePrime(ell, v1, v2, eta, log_table(ell, eta))


def admissible_primes(form, L, m, bound, seed=None, extra=()):
    out = []
    for ell in sorted(set(primes_upto(bound - 1)) | set(extra)):
        if ell >= bound and ell not in extra:
            continue
        r = is_admissible(ell, m, form, L, seed)
        if r:
            out.append(r)
    return out


def enumerate_moduli(form, L, m, nu, prime_bound, seed=None, primes=None):
    """All squarefree products of nu admissible primes below the bound."""
    if nu == 0:
        yield make_modulus(())
        return
    if primes is None:
        primes = admissible_primes(form, L, m, prime_bound, seed)
    for combo in combinations(primes, nu):
        yield make_modulus(combo)


def weights(modulus, digits, p):
    """Residues a in (Z/n)^x and prod_l log(a) mod p^digits."""
    n = modulus.n
    a = np.arange(n, dtype=np.int64)
    mask = np.gcd(a, n) == 1
    a = a[mask]
    q = p ** digits
    w = np.ones(a.size, dtype=np.int64)
    for pr in modulus.primes:
        w = w * (pr.log_table[a % pr.ell] % q) % q
    return a, w


