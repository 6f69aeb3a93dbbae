"""Kurihara numbers, symbol-level quadratic twists, and stratified scans."""

import json
import multiprocessing
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from math import factorial, gcd

import numpy as np

from .arith import valuation_int
from .forms import QuadraticCharacter
from .kolyvagin import admissible_primes, enumerate_moduli, make_modulus, weights
from .localfield import (INFINITY, AtLeast, LocalValue, PrecisionError, integral_coords,
                         valuation)
from .msym import P1List, evaluate_lambda, path_values
from .periods import MinimalEigensymbol

CHUNK = 1 << 19


class SignMismatch(ValueError):
    pass


@dataclass
class KuriharaNumber:
    modulus: object
    r: int
    value: LocalValue
    val: object
    predicted_zero: bool

    @property
    def nonzero(self):
        return isinstance(self.val, int)

    def record(self):
        m = self.modulus
        if isinstance(self.val, int):
            v = self.val
        elif self.val is INFINITY:
            v = {"ge": "inf"}
        else:
            v = {"ge": self.val.m}
        exp = m.In_exp if m.In_exp is not INFINITY else "inf"
        return {"n": m.label, "nu": m.nu, "In_exp": exp, "val": v,
                "predicted_zero": self.predicted_zero}


def _digits(m, L):
    return -(-m // L.e)


# ----------------------------------------------------------------- twists

def twist_lambda(phi0, chi, j, a, n):
    """Exact lambda of f0 x chi, up to one constant common to all (a, n)."""
    D = chi.conductor if isinstance(chi, QuadraticCharacter) else int(chi)
    if gcd(D, n) != 1:
        raise ValueError("twist needs gcd(D, n) = 1")
    base = phi0.base if isinstance(phi0, MinimalEigensymbol) else phi0
    scale = phi0.scale if isinstance(phi0, MinimalEigensymbol) else 1
    if D == 1:
        return evaluate_lambda(base, j, a, n) * scale
    acc = base._zero()
    for u in range(D):
        c = chi(u)
        if c:
            acc = acc + evaluate_lambda(base, j, a * D + u * n, n * D) * c
    return acc * scale / Fraction(D) ** j


class TwistedMinimalSymbol:
    """The symbol of f0 x chi, freshly normalized at the prime of f0.

    Values come from the base table through
    Phi_f(P(z) {oo, x}) = sum_u chi(u) Phi_0(P(z - u/D) {oo, x + u/D}),
    and the minimal normalization is recomputed over the generators of
    level N0 D^2. Only unramified primes are supported.
    """

    def __init__(self, base, chi, digits=None):
        L = base.prime
        if L.e != 1:
            raise NotImplementedError("twisted normalization needs an unramified prime")
        self.base = base
        self.chi = chi
        self.prime = L
        self.D = chi.conductor
        if gcd(self.D, base.space.N * L.p) != 1:
            raise ValueError("character conductor must be prime to Np")
        self.N = base.space.N * self.D * self.D
        self.k = base.space.k
        self.sign = base.sign * chi.parity()
        T = digits
        if T is None:
            T = 1
            while L.p ** (T + 1) < (1 << 30) and T + 1 <= L.precision_M:
                T += 1
        self.T = T
        self.us = [u for u in range(self.D) if chi(u)]
        self.chis = np.array([chi(u) for u in self.us], dtype=np.int64)
        gen = self._generator_values(T)
        vmin = None
        for x in gen.reshape(-1).tolist():
            if x % L.p ** T:
                v = valuation_int(x, L.p)
                vmin = v if vmin is None else min(vmin, v)
        if vmin is None:
            raise PrecisionError("all twisted generator values vanish mod p^%d" % T)
        self.vmin = vmin
        self.shift_m = -vmin
        self.avail = T - vmin
        self.gen_values = gen

    def _raw(self, j, num, den, E, F, weights, digits, per_path=False):
        """Unnormalized twisted sums (or per-path values) mod p^digits."""
        L = self.prime
        q = L.p ** digits
        D = self.D
        num = np.asarray(num, dtype=np.int64)
        den = np.broadcast_to(np.asarray(den, dtype=np.int64), num.shape)
        E = np.broadcast_to(np.asarray(E, dtype=np.int64), num.shape)
        F = np.broadcast_to(np.asarray(F, dtype=np.int64), num.shape)
        dinv = pow(pow(D, j, q), -1, q)
        table = self.base.table(digits)
        nu = len(self.us)
        us = np.array(self.us, dtype=np.int64)
        out = np.zeros((num.size if per_path else 1, L.degree), dtype=np.int64)
        step = max(1, CHUNK // nu)
        for s in range(0, num.size, step):
            sl = slice(s, s + step)
            b = num[sl].size
            nn = (num[sl][:, None] * D + us[None, :] * den[sl][:, None]).reshape(-1)
            dd = np.repeat(den[sl] * D, nu)
            EE = np.repeat(E[sl] * D, nu)
            FF = (E[sl][:, None] * us[None, :] + F[sl][:, None] * D).reshape(-1)
            vals = path_values(self.base.space, table, nn, dd, EE, FF, j, q)
            cw = np.tile(self.chis % q, b) * dinv % q
            vals = vals * cw[:, None] % q
            vals = vals.reshape(b, nu, L.degree).sum(axis=1) % q
            if per_path:
                out[sl] = vals
            else:
                w = np.asarray(weights, dtype=np.int64)[sl] % q
                out[0] = (out[0] + (vals * w[:, None] % q).sum(axis=0)) % q
        return out if per_path else out[0]

    def _generator_values(self, T):
        L = self.prime
        q = L.p ** T
        w = self.k - 2
        p1 = P1List(self.N)
        lifts = p1.lifts()
        a, b, c, d = (lifts[:, i] for i in range(4))
        ends = np.concatenate([np.stack([a, c], 1), np.stack([b, d], 1)])
        g = np.gcd(ends[:, 0], ends[:, 1])
        g = np.where(g == 0, 1, g)
        ends = ends // g[:, None]
        neg = ends[:, 1] < 0
        ends[neg] *= -1
        uniq, inv = np.unique(ends, axis=0, return_inverse=True)
        inv = inv.reshape(-1)
        cv = [self._raw(i, uniq[:, 0], uniq[:, 1], 1, 0, None, T, per_path=True) for i in range(w + 1)]
        M = p1.size
        beta_i, alpha_i = inv[:M], inv[M:]
        out = np.zeros((M, w + 1, L.degree), dtype=np.int64)
        # m(z^j, g) = Phi((dz - b)^j (a - cz)^(w-j) {b/d, a/c})
        from .msym import _lin_power_product
        for j in range(w + 1):
            co = _lin_power_product(d % q, (-b) % q, (-c) % q, a % q, j, w, q)
            acc = np.zeros((M, L.degree), dtype=np.int64)
            for t in range(w + 1):
                diff = (cv[t][beta_i] - cv[t][alpha_i]) % q
                acc = (acc + co[t][:, None] * diff) % q
            out[:, j] = acc
        return out

    def lambda_sums(self, j, num, den, E, F, weights, digits):
        if digits > self.avail:
            raise PrecisionError("need %d digits, twisted symbol known to %d" % (digits, self.avail))
        L = self.prime
        raw = self._raw(j, num, den, E, F, weights, digits + self.vmin)
        s = L.p ** self.vmin
        if any(int(x) % s for x in raw):
            raise ArithmeticError("twisted value not divisible by the normalizing power")
        return [int(x) // s % L.p ** digits for x in raw]


# ------------------------------------------------------- Kurihara numbers

def _check_sign(phi, r):
    if phi.sign != (-1) ** (r - 1):
        raise SignMismatch("symbol sign %d does not match r = %d" % (phi.sign, r))


def kurihara_number(phi, modulus, r, w=None):
    """delta~_n for a minimal symbol (plain or twisted)."""
    _check_sign(phi, r)
    L = phi.prime
    pz = w is not None and (-1) ** modulus.nu != w
    if modulus.nu == 0:
        if isinstance(phi, MinimalEigensymbol):
            lv = normalized_delta_one(phi, r)
            return KuriharaNumber(modulus, r, lv, valuation(lv, L), pz)
        digits = phi.avail
        coords = phi.lambda_sums(r - 1, [1], 1, 1, [1], [1], digits)
        lv = LocalValue(None, L.e * digits, tuple(coords))
        return KuriharaNumber(modulus, r, lv, valuation(lv, L), pz)
    m = modulus.In_exp
    digits = _digits(m, L)
    a, wts = weights(modulus, digits, L.p)
    coords = phi.lambda_sums(r - 1, a, modulus.n, modulus.n, a, wts, digits)
    lv = LocalValue(None, m, tuple(coords))
    return KuriharaNumber(modulus, r, lv, valuation(lv, L), pz)


def normalized_delta_one(phi, r):
    v = evaluate_lambda(phi.base, r - 1, 1, 1) * phi.scale
    return LocalValue(v)


def delta_one_valuation(phi, r, L=None):
    """v(delta~_1) - v((r-1)!)."""
    L = L or phi.prime
    k = kurihara_number(phi, make_modulus(()), r)
    v = k.val
    if not isinstance(v, int):
        return v
    return v - L.e * valuation_int(factorial(r - 1), L.p)


# ------------------------------------------------------------------ scans

@dataclass
class DeltaScan:
    form_id: str
    p: int
    m: int
    bound: int
    r: int
    w: object
    e: int = 1
    rational: bool = True
    strata: dict = field(default_factory=dict)
    indeterminate: list = field(default_factory=list)

    def counts(self):
        out = {}
        for nu, ks in sorted(self.strata.items()):
            nz = sum(1 for k in ks if k.nonzero)
            out[nu] = (nz, len(ks) - nz, self.bound)
        return out

    def records(self):
        rows = []
        for nu in sorted(self.strata):
            for k in sorted(self.strata[nu], key=lambda k: k.modulus.n):
                rows.append(k.record())
        return rows

    def jsonl(self):
        return "".join(json.dumps(r, sort_keys=True) + "\n" for r in self.records())

    def summary(self):
        return {nu: "%d/%d (< %d)" % c for nu, c in self.counts().items()}


_STATE = {}


def _work(chunk):
    phi, primes, r, w = _STATE["args"]
    out = []
    for idx in chunk:
        mod = make_modulus([primes[i] for i in idx])
        try:
            out.append(("ok", kurihara_number(phi, mod, r, w)))
        except PrecisionError as exc:
            out.append(("indeterminate", (mod.label, str(exc))))
    return out


def scan(phi, L, m, strata, bound, form, r, w=None, include_predicted_zero=False,
         workers=1, seed=None, only=None, extra_primes=()):
    """delta~_n over squarefree products of admissible primes, per stratum.

    only: optional set of n (ints) restricting the computation.
    """
    if L is not phi.prime and L != phi.prime:
        raise ValueError("scan prime differs from the symbol's prime")
    _check_sign(phi, r)
    primes = admissible_primes(form, L, m, bound, seed, extra=tuple(extra_primes))
    index = {q.ell: i for i, q in enumerate(primes)}
    base = form.twist[0] if form.twist is not None else form
    sc = DeltaScan(form.label, L.p, m, bound, r, w, L.e, base.field is None)
    jobs = []
    from itertools import combinations
    for nu in strata:
        if w is not None and (-1) ** nu != w and not include_predicted_zero:
            continue
        sc.strata[nu] = []
        if nu == 0:
            jobs.append(())
            continue
        for combo in combinations(range(len(primes)), nu):
            if only is not None:
                n = 1
                for i in combo:
                    n *= primes[i].ell
                if n not in only:
                    continue
            jobs.append(combo)
    # warm the tables before forking
    if isinstance(phi, MinimalEigensymbol):
        for d in {_digits(min(q.level for q in (primes[i] for i in c)), L) for c in jobs if c}:
            phi.table(d)
    _STATE["args"] = (phi, primes, r, w)
    results = []
    if workers <= 1 or len(jobs) < 2:
        results = _work(jobs)
    else:
        chunks = [jobs[i::workers * 4] for i in range(workers * 4)]
        ctx = multiprocessing.get_context("fork")
        with ProcessPoolExecutor(workers, mp_context=ctx) as ex:
            for part in ex.map(_work, chunks):
                results.extend(part)
    for kind, item in results:
        if kind == "ok":
            sc.strata.setdefault(item.modulus.nu, []).append(item)
            if item.predicted_zero and item.nonzero:
                raise ArithmeticError("delta~_%s is nonzero in a stratum the functional equation kills"
                                      % item.modulus.label)
        else:
            sc.indeterminate.append(item)
    for nu in sc.strata:
        sc.strata[nu].sort(key=lambda k: k.modulus.n)
    sc.indeterminate.sort()
    return sc
