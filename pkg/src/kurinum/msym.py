"""Weight-k modular symbols for Gamma_0(N) through Manin symbols.

Conventions used throughout:

* The generator m(z^j, (c:d)) is Phi(z^j|g^{-1} {g0, g oo}) for any g in
  SL2(Z) with bottom row (c, d); the right action on polynomials is
  (P|g)(z) = (cz+d)^(k-2) P(gz).
* The star involution is m(z^j,(c:d)) -> (-1)^j m(z^j,(-c:d)); a symbol of
  sign s satisfies Phi o star = s Phi.
* lambda(z^j; a, n) = Phi((nz - a)^j {oo, a/n}).

Spaces can be built exactly (rational arithmetic, small levels) or modulo
a word-size prime (large levels); see ``ManinSpace``.
"""

import copy
import hashlib
import heapq
import json
from fractions import Fraction
from math import comb, gcd

import numpy as np
import scipy.sparse

from .arith import ExactMatrix, NumberFieldElement, is_zero, kernel_basis


# ------------------------------------------------------------------ P^1(Z/N)

def factor_int(n):
    out = []
    p = 2
    while p * p <= n:
        if n % p == 0:
            e = 0
            while n % p == 0:
                n //= p
                e += 1
            out.append((p, e))
        p += 1
    if n > 1:
        out.append((n, 1))
    return out


class P1List:
    """Canonical enumeration of P^1(Z/N) as a product of local lines."""

    def __init__(self, N):
        self.N = N
        self.parts = []
        size = 1
        for p, e in factor_int(N):
            q = p ** e
            inv = np.zeros(q, dtype=np.int64)
            for x in range(q):
                if x % p:
                    inv[x] = pow(x, -1, q)
            self.parts.append((p, q, inv))
            size *= q + q // p
        strides = []
        s = 1
        for p, q, inv in reversed(self.parts):
            strides.append(s)
            s *= q + q // p
        self.strides = list(reversed(strides))
        self.size = size
        self._reps = None
        self._lifts = None

    def index(self, c, d):
        """Index of (c:d); -1 where (c, d) is not a point of P^1(Z/N)."""
        c = np.asarray(c, dtype=np.int64)
        d = np.asarray(d, dtype=np.int64)
        out = np.zeros(np.broadcast(c, d).shape, dtype=np.int64)
        bad = np.zeros(out.shape, dtype=bool)
        for (p, q, inv), stride in zip(self.parts, self.strides):
            cc = c % q
            dd = d % q
            unit_d = (dd % p) != 0
            unit_c = (cc % p) != 0
            loc_a = (cc * inv[dd]) % q
            loc_b = q + ((dd * inv[cc]) % q) // p
            loc = np.where(unit_d, loc_a, loc_b)
            bad |= ~(unit_d | unit_c)
            out += loc * stride
        return np.where(bad, -1, out)

    def reps(self):
        """Canonical representatives (c, d) with 0 <= c, d < N."""
        if self._reps is not None:
            return self._reps
        idx = np.arange(self.size, dtype=np.int64)
        c = np.zeros(self.size, dtype=np.int64)
        d = np.zeros(self.size, dtype=np.int64)
        mod = 1
        for (p, q, inv), stride in zip(self.parts, self.strides):
            loc = (idx // stride) % (q + q // p)
            lc = np.where(loc < q, loc, 1)
            ld = np.where(loc < q, 1, p * (loc - q))
            m1 = pow(mod, -1, q) if q > 1 else 0
            c = c + mod * (((lc - c) % q) * m1 % q)
            d = d + mod * (((ld - d) % q) * m1 % q)
            mod *= q
        if self.N == 1:
            c[:] = 0
            d[:] = 1
        self._reps = (c, d)
        return self._reps

    def lifts(self):
        """Matrices [[a, b], [c, d]] in SL2(Z) lifting each representative."""
        if self._lifts is not None:
            return self._lifts
        cs, ds = self.reps()
        N = self.N
        out = np.zeros((self.size, 4), dtype=np.int64)
        for i, (c, d) in enumerate(zip(cs.tolist(), ds.tolist())):
            if c == 0 and N > 1:
                c = N
            if N == 1:
                c, d = 0, 1
            while gcd(c, d) != 1:
                d += N
            g, x, y = _xgcd(d, c)
            # a d - b c = 1 with a = x, b = -y
            out[i] = (x, -y, c, d)
        self._lifts = out
        return out


def _xgcd(a, b):
    x0, y0, x1, y1 = 1, 0, 0, 1
    while b:
        q = a // b
        a, b = b, a - q * b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    return a, x0, y0


# -------------------------------------------------------- polynomial helpers

def _lin_power_product(A, B, G, D, j, w, mod=None):
    """Coefficients of (A z + B)^j (G z + D)^(w - j), vectorized.

    Returns a list of w+1 arrays (coefficient of z^t).
    """
    def red(x):
        return x % mod if mod is not None else x

    one = np.ones_like(A)
    zero = np.zeros_like(A)
    poly = [one] + [zero] * w
    for _ in range(j):
        new = [zero] * (w + 1)
        for t in range(w + 1):
            if t + 1 <= w:
                new[t + 1] = red(new[t + 1] + poly[t] * A)
            new[t] = red(new[t] + poly[t] * B)
        poly = new
    for _ in range(w - j):
        new = [zero] * (w + 1)
        for t in range(w + 1):
            if t + 1 <= w:
                new[t + 1] = red(new[t + 1] + poly[t] * G)
            new[t] = red(new[t] + poly[t] * D)
        poly = new
    return poly


def _cf_steps(num, den):
    """Unimodular decomposition of {oo, num/den}, vectorized over a batch.

    Yields (idx, alpha, beta, gamma, delta) for each continued-fraction
    step: {oo, x} = sum_i g_i {0, oo} with g_i = [[alpha, beta], [gamma, delta]].
    Entries with den == 0 contribute nothing.
    """
    num = np.asarray(num, dtype=np.int64)
    den = np.asarray(den, dtype=np.int64)
    neg = den < 0
    num = np.where(neg, -num, num)
    den = np.where(neg, -den, den)
    live = den != 0
    g = np.gcd(num, den)
    g = np.where(g == 0, 1, g)
    num = num // g
    den = den // g
    idx = np.nonzero(live)[0]
    num, den = num[idx], den[idx]
    a0 = np.floor_divide(num, den)
    rem = num - a0 * den
    p_prev, p_cur = np.ones_like(num), a0
    q_prev, q_cur = np.zeros_like(num), np.ones_like(num)
    sign = -1  # (-1)^(i-1) at i = 0
    while idx.size:
        yield idx, sign * p_cur, p_prev, sign * q_cur, q_prev
        more = rem > 0
        if not more.any():
            break
        idx = idx[more]
        den, rem = den[more], rem[more]
        p_prev, p_cur = p_prev[more], p_cur[more]
        q_prev, q_cur = q_prev[more], q_cur[more]
        a = den // rem
        den, rem = rem, den - a * rem
        p_prev, p_cur = p_cur, a * p_cur + p_prev
        q_prev, q_cur = q_cur, a * q_cur + q_prev
        sign = -sign


# ------------------------------------------------------- sparse elimination

def _sparse_eliminate(rows, ncols, mod=None):
    """Eliminate sparse relation rows {col: coef}.

    Returns pivots [(col, expr)] in elimination order, where expr expresses
    x_col through columns still alive at that moment. Later pivot
    expressions never mention earlier pivots.
    """
    if mod is None:
        conv = Fraction
    else:
        def conv(v):
            return int(v) % mod
    rows = [{int(k): conv(v) for k, v in r.items() if conv(v) != 0} for r in rows]
    col_rows = {}
    for ri, r in enumerate(rows):
        for k in r:
            col_rows.setdefault(k, set()).add(ri)
    alive = set(range(len(rows)))
    heap = [(len(r), ri) for ri, r in enumerate(rows)]
    heapq.heapify(heap)
    pivots = []
    while heap:
        ln, ri = heapq.heappop(heap)
        if ri not in alive:
            continue
        r = rows[ri]
        if len(r) != ln:
            heapq.heappush(heap, (len(r), ri))
            continue
        alive.discard(ri)
        if not r:
            continue
        pc = min(r, key=lambda k: (len(col_rows[k]), k))
        pv = r[pc]
        if mod is None:
            expr = {k: -v / pv for k, v in r.items() if k != pc}
        else:
            inv = pow(pv, -1, mod)
            expr = {k: (-v * inv) % mod for k, v in r.items() if k != pc}
        for k in r:
            col_rows[k].discard(ri)
        pivots.append((pc, expr))
        for rj in sorted(col_rows[pc]):
            rr = rows[rj]
            f = rr.pop(pc)
            for k, v in expr.items():
                nv = rr.get(k, 0) + f * v
                if mod is not None:
                    nv %= mod
                if nv:
                    if k not in rr:
                        col_rows[k].add(rj)
                    rr[k] = nv
                elif k in rr:
                    del rr[k]
                    col_rows[k].discard(rj)
            heapq.heappush(heap, (len(rr), rj))
        col_rows[pc] = set()
    return pivots


# -------------------------------------------------------------- Heilbronn

def heilbronn_merel(n):
    """{[[a,b],[c,d]] : ad - bc = n, a > b >= 0, d > c >= 0}."""
    out = []
    for a in range(1, n + 1):
        for d in range(1, n + 2 - a):
            m = a * d - n
            if m < 0:
                continue
            if m == 0:
                for b in range(a):
                    out.append((a, b, 0, d))
                for c in range(1, d):
                    out.append((a, 0, c, d))
                continue
            for b in range(1, a):
                if m % b == 0:
                    c = m // b
                    if c < d:
                        out.append((a, b, c, d))
    return out


def heilbronn_cremona(p):
    """Cremona's Heilbronn matrices for an odd prime p (p = 2 special)."""
    if p == 2:
        return [(1, 0, 0, 2), (2, 0, 0, 1), (2, 1, 0, 1), (1, 0, 1, 2)]
    out = [(1, 0, 0, p)]
    half = (p - 1) // 2
    for r in range(-half, half + 1):
        x1, x2, y1, y2, a, b = p, -r, 0, 1, -p, r
        out.append((x1, x2, y1, y2))
        while b != 0:
            qf = a / b
            q = int(qf + 0.5) if qf >= 0 else -int(-qf + 0.5)
            c = a - b * q
            a, b = -b, c
            x1, x2 = x2, q * x2 - x1
            y1, y2 = y2, q * y2 - y1
            out.append((x1, x2, y1, y2))
    return out


def is_prime(n):
    if n < 2:
        return False
    i = 2
    while i * i <= n:
        if n % i == 0:
            return False
        i += 1
    return True


# ------------------------------------------------------------- the space

class ManinSpace:
    """Manin-symbol presentation of weight-k modular symbols on Gamma_0(N).

    sign = 0 gives the full space; sign = +1 or -1 the quotient on which
    the star involution acts by that sign. With ``modulus`` set, the linear
    algebra is done modulo that prime (class relations stay exact).
    """

    def __init__(self, N, k, sign=0, modulus=None):
        if k < 2 or k % 2:
            raise ValueError("weight must be even and at least 2, got %r" % (k,))
        if N < 1:
            raise ValueError("level must be positive")
        if sign not in (0, 1, -1):
            raise ValueError("sign must be 0, 1 or -1")
        self.N, self.k, self.sign, self.modulus = N, k, sign, modulus
        self.w = k - 2
        self.p1 = P1List(N)
        self.M = self.p1.size
        self._build_classes()
        self._build_relations()
        self._eliminate()
        self._cusp_data = None
        self._cuspidal = None

    def with_modulus(self, q):
        """The same presentation with the quotient recomputed modulo q."""
        other = copy.copy(self)
        other.modulus = q
        other._cusp_data = None
        other._cuspidal = None
        other._eliminate()
        return other

    # -- generators and 2-term relations

    def _build_classes(self):
        M, w = self.M, self.w
        c, d = self.p1.reps()
        nm = w + 1
        cos = np.repeat(np.arange(M, dtype=np.int64), nm)
        js = np.tile(np.arange(nm, dtype=np.int64), M)
        gid = cos * nm + js
        sig_cos = self.p1.index(d, -c)[cos]
        sig = sig_cos * nm + (w - js)
        f_sig = np.where(js % 2 == 0, -1, 1)        # (-1)^(j+1)
        imgs = [gid, sig]
        facs = [np.ones_like(gid), f_sig]
        if self.sign:
            st_cos = self.p1.index(-c, d)[cos]
            st = st_cos * nm + js
            f_st = self.sign * np.where(js % 2 == 0, 1, -1)
            # sigma applied after star
            st_j = js
            f_sig_st = np.where(st_j % 2 == 0, -1, 1)
            sig_st = self.p1.index(d, -c)[st_cos] * nm + (w - st_j)
            imgs += [st, sig_st]
            facs += [f_st, f_st * f_sig_st]
        imgs = np.stack(imgs)
        facs = np.stack(facs)
        rep = imgs.min(axis=0)
        which = imgs.argmin(axis=0)
        fac = facs[which, np.arange(gid.size)]
        zero = ((imgs == gid) & (facs == -1)).any(axis=0)
        zero_rep = np.zeros(gid.size, dtype=bool)
        np.logical_or.at(zero_rep, rep, zero)
        dead = zero_rep[rep]
        reps_live = np.unique(rep[~dead])
        class_of = -np.ones(gid.size, dtype=np.int64)
        class_of[reps_live] = np.arange(reps_live.size)
        self.gen_class = np.where(dead, -1, class_of[rep]).reshape(M, nm)
        self.gen_factor = np.where(dead, 0, fac).reshape(M, nm)
        self.n_classes = int(reps_live.size)
        self.class_gen = np.stack([reps_live // nm, reps_live % nm], axis=1)

    # -- 3-term relations

    def _build_relations(self):
        M, w = self.M, self.w
        c, d = self.p1.reps()
        i1 = np.arange(M, dtype=np.int64)
        i2 = self.p1.index(d, -c - d)
        i3 = self.p1.index(-c - d, c)
        keep = np.nonzero(i1 == np.minimum(np.minimum(i1, i2), i3))[0]
        # z^j | tau = (-1)^j (z-1)^(w-j),  z^j | tau^2 = z^(w-j) (z-1)^j
        tau_polys = []
        tau2_polys = []
        for j in range(w + 1):
            p_tau = [0] * (w + 1)
            for t in range(w - j + 1):
                p_tau[t] = (-1) ** j * comb(w - j, t) * (-1) ** (w - j - t)
            p_tau2 = [0] * (w + 1)
            for t in range(j + 1):
                p_tau2[w - j + t] = comb(j, t) * (-1) ** (j - t)
            tau_polys.append(p_tau)
            tau2_polys.append(p_tau2)
        gc, gf = self.gen_class, self.gen_factor
        rows = []
        a1, a2, a3 = i1[keep].tolist(), i2[keep].tolist(), i3[keep].tolist()
        for x1, x2, x3 in zip(a1, a2, a3):
            for j in range(w + 1):
                row = {}
                terms = [(x1, j, 1)]
                terms += [(x2, t, cf) for t, cf in enumerate(tau_polys[j]) if cf]
                terms += [(x3, t, cf) for t, cf in enumerate(tau2_polys[j]) if cf]
                for x, t, cf in terms:
                    cl = gc[x, t]
                    if cl < 0:
                        continue
                    row[int(cl)] = row.get(int(cl), 0) + cf * int(gf[x, t])
                row = {kk: v for kk, v in row.items() if v}
                if row:
                    rows.append(row)
        self.relations = rows

    # -- quotient

    def _eliminate(self):
        pivots = _sparse_eliminate(self.relations, self.n_classes, self.modulus)
        piv_cols = {pc for pc, _ in pivots}
        self.basis_classes = [c for c in range(self.n_classes) if c not in piv_cols]
        self.dimension = len(self.basis_classes)
        bidx = {c: i for i, c in enumerate(self.basis_classes)}
        self._basis_index = bidx
        if self.modulus is None:
            expr = {}
            for c in self.basis_classes:
                expr[c] = {bidx[c]: Fraction(1)}
            for pc, e in reversed(pivots):
                out = {}
                for col, coef in e.items():
                    for b, v in expr[col].items():
                        nv = out.get(b, 0) + coef * v
                        if nv:
                            out[b] = nv
                        elif b in out:
                            del out[b]
                expr[pc] = out
            self.class_expr = [expr[c] for c in range(self.n_classes)]
            self.R = None
        else:
            q = self.modulus
            R = np.zeros((self.n_classes, self.dimension), dtype=np.int64)
            for c in self.basis_classes:
                R[c, bidx[c]] = 1
            for pc, e in reversed(pivots):
                acc = np.zeros(self.dimension, dtype=np.int64)
                for col, coef in e.items():
                    acc = (acc + coef * R[col]) % q
                R[pc] = acc
            self.R = R
            self.class_expr = None

    # -- vectors

    def class_vector(self, coeffs):
        """Basis coordinates (dict) of sum coeffs[class] * class."""
        if self.modulus is not None:
            q = self.modulus
            v = np.zeros(self.dimension, dtype=np.int64)
            for c, a in coeffs.items():
                v = (v + (int(a) % q) * self.R[c]) % q
            return v
        out = {}
        for c, a in coeffs.items():
            if not a:
                continue
            for b, v in self.class_expr[c].items():
                nv = out.get(b, 0) + a * v
                if nv:
                    out[b] = nv
                elif b in out:
                    del out[b]
        return out

    def dense(self, vec):
        row = [Fraction(0)] * self.dimension
        for b, v in vec.items():
            row[b] = v
        return row

    def generator_classes(self, coset, j):
        cl = int(self.gen_class[coset, j])
        if cl < 0:
            return {}
        return {cl: int(self.gen_factor[coset, j])}

    def relation_matrix(self):
        """3-term relations over the classes as a dense exact matrix."""
        rows = [[r.get(c, 0) for c in range(self.n_classes)] for r in self.relations]
        return ExactMatrix(rows, self.n_classes)

    # -- modular symbols of paths

    def path_class_coeffs(self, num, den, E=1, F=0, j=0, weights=None):
        """Class coefficients of sum_b weights_b (E_b z - F_b)^j {oo, num_b/den_b}."""
        num = np.atleast_1d(np.asarray(num, dtype=np.int64))
        den = np.broadcast_to(np.asarray(den, dtype=np.int64), num.shape)
        E = np.broadcast_to(np.asarray(E, dtype=np.int64), num.shape)
        F = np.broadcast_to(np.asarray(F, dtype=np.int64), num.shape)
        wts = [1] * num.size if weights is None else list(weights)
        out = {}
        for idx, al, be, ga, de in _cf_steps(num, den):
            Eo = E[idx].astype(object)
            Fo = F[idx].astype(object)
            A = Eo * al.astype(object) - Fo * ga.astype(object)
            B = Eo * be.astype(object) - Fo * de.astype(object)
            coefs = _lin_power_product(A, B, ga.astype(object), de.astype(object), j, self.w)
            cos = self.p1.index(ga, de)
            for t in range(self.w + 1):
                cls = self.gen_class[cos, t]
                fac = self.gen_factor[cos, t]
                for bi, cl, f, cf in zip(idx.tolist(), cls.tolist(), fac.tolist(), coefs[t].tolist()):
                    if cl < 0 or not cf:
                        continue
                    v = out.get(cl, 0) + wts[bi] * f * cf
                    if v:
                        out[cl] = v
                    elif cl in out:
                        del out[cl]
        return out

    def symbol_classes(self, poly, alpha, beta):
        """Class coefficients of P {alpha, beta}; cusps as (num, den) pairs."""
        out = {}
        for sgn, (u, v) in ((1, beta), (-1, alpha)):
            if v == 0:
                continue
            for t, cf in enumerate(poly):
                if not cf:
                    continue
                part = self.path_class_coeffs([u], [v], 1, 0, t)
                for cl, x in part.items():
                    nv = out.get(cl, 0) + sgn * cf * x
                    if nv:
                        out[cl] = nv
                    elif cl in out:
                        del out[cl]
        return out

    def generator_symbol(self, coset, j):
        """(poly, alpha, beta) with m(z^j, coset) = Phi(poly {alpha, beta})."""
        a, b, c, d = (int(x) for x in self.p1.lifts()[coset])
        # z^j | g^{-1} = (dz - b)^j (a - cz)^(w-j)
        poly = [Fraction(0)] * (self.w + 1)
        A, B, G, D = (np.array([v], dtype=object) for v in (d, -b, -c, a))
        co = _lin_power_product(A, B, G, D, j, self.w)
        for t in range(self.w + 1):
            poly[t] = int(co[t][0])
        return poly, (b, d), (a, c)

    # -- operators

    def _operator_on_basis(self, image_fn):
        """Matrix whose row b is the basis expansion of the image of basis b."""
        rows = []
        for b, cl in enumerate(self.basis_classes):
            coset, j = (int(x) for x in self.class_gen[cl])
            f = int(self.gen_factor[coset, j])
            img = image_fn(coset, j)
            if f != 1:
                img = {c: f * v for c, v in img.items()}
            vec = self.class_vector(img)
            rows.append(vec)
        if self.modulus is not None:
            return np.array(rows, dtype=np.int64).reshape(self.dimension, self.dimension)
        return ExactMatrix([self.dense(v) for v in rows], self.dimension) if rows else None

    def heilbronn(self, ell):
        if is_prime(ell) and self.N % ell and ell > 7:
            return heilbronn_cremona(ell)
        return heilbronn_merel(ell)

    def hecke_images(self, ell, cosets, js):
        """Class coefficient dicts of T_ell applied to generators (batched)."""
        c, d = self.p1.reps()
        u = c[cosets]
        v = d[cosets]
        out = [dict() for _ in range(len(cosets))]
        for (a, b, cc, dd) in self.heilbronn(ell):
            tgt = self.p1.index(u * a + v * cc, u * b + v * dd)
            for pos in range(len(cosets)):
                x = int(tgt[pos])
                if x < 0:
                    continue
                j = int(js[pos])
                co = _poly_under(a, b, cc, dd, j, self.w)
                acc = out[pos]
                for t, cf in enumerate(co):
                    if not cf:
                        continue
                    cl = int(self.gen_class[x, t])
                    if cl < 0:
                        continue
                    nv = acc.get(cl, 0) + cf * int(self.gen_factor[x, t])
                    if nv:
                        acc[cl] = nv
                    elif cl in acc:
                        del acc[cl]
        return out

    def hecke_operator(self, ell):
        """T_ell (U_ell when ell | N) on the quotient, rows = images of basis."""
        if self.modulus is not None:
            return self._hecke_modular(ell)
        cls = self.basis_classes
        cosets = np.array([int(self.class_gen[c][0]) for c in cls], dtype=np.int64)
        js = [int(self.class_gen[c][1]) for c in cls]
        imgs = self.hecke_images(ell, cosets, js)
        rows = []
        for c, img in zip(cls, imgs):
            coset, j = (int(x) for x in self.class_gen[c])
            f = int(self.gen_factor[coset, j])
            rows.append(self.dense(self.class_vector({k: f * v for k, v in img.items()})))
        return ExactMatrix(rows, self.dimension)

    def _hecke_modular(self, ell):
        q = self.modulus
        if self.w != 0:
            raise NotImplementedError("modular Hecke matrices are weight 2 only")
        cls = np.array(self.basis_classes, dtype=np.int64)
        cosets = self.class_gen[cls, 0]
        fac0 = self.gen_factor[cosets, 0]
        c, d = self.p1.reps()
        u, v = c[cosets], d[cosets]
        rows_, cols_, vals_ = [], [], []
        for (a, b, cc, dd) in self.heilbronn(ell):
            tgt = self.p1.index(u * a + v * cc, u * b + v * dd)
            ok = tgt >= 0
            t = np.where(ok, tgt, 0)
            tcl = np.where(ok, self.gen_class[t, 0], -1)
            live = tcl >= 0
            rows_.append(np.nonzero(live)[0])
            cols_.append(tcl[live])
            vals_.append((self.gen_factor[t, 0] * fac0)[live])
        C = scipy.sparse.csr_matrix(
            (np.concatenate(vals_), (np.concatenate(rows_), np.concatenate(cols_))),
            shape=(self.dimension, self.n_classes), dtype=np.int64)
        return np.asarray(C @ self.R) % q

    def star_involution(self):
        c, d = self.p1.reps()
        st = self.p1.index(-c, d)

        def image(coset, j):
            cl = self.generator_classes(int(st[coset]), j)
            s = 1 if j % 2 == 0 else -1
            return {k: s * v for k, v in cl.items()}
        return self._operator_on_basis(image)

    def fricke_image(self, coset, j):
        """Class coefficients of the Fricke image of m(z^j, coset)."""
        N, w = self.N, self.w
        poly, (b, d), (a, c) = self.generator_symbol(coset, j)
        # (P|W')(z) = sum_t P_t (-N)^(w-t) z^(w-t),  W' = [[0,1],[-N,0]]
        newp = [0] * (w + 1)
        for t, cf in enumerate(poly):
            newp[w - t] += cf * (-N) ** (w - t)
        # W x = -1/(N x)
        alpha = (-d, N * b)
        beta = (-c, N * a)
        return self.symbol_classes(newp, alpha, beta)

    def fricke_involution(self):
        return self._operator_on_basis(self.fricke_image)

    # -- boundary and cuspidal part

    def cusps(self):
        if self._cusp_data is None:
            self._cusp_data = []
        return self._cusp_data

    def _cusp_index(self, u, v):
        """Index of the Gamma_0(N)-class of the cusp u/v (reduced)."""
        N = self.N
        g = gcd(u, v)
        u, v = u // g, v // g
        if v < 0:
            u, v = -u, -v
        s = pow(u, -1, v) if v > 1 else (u if v == 0 else 0)
        reps = self.cusps()
        for i, (s2, v2) in enumerate(reps):
            m = gcd(v * v2, N)
            if (s * v2 - s2 * v) % m == 0:
                return i
        reps.append((s, v))
        return len(reps) - 1

    def boundary_map(self):
        """Boundary map on the quotient (sign 0 only) as a basis-by-cusp matrix."""
        if self.sign != 0 or self.modulus is not None:
            raise ValueError("boundary map is implemented for the exact full space")
        lifts = self.p1.lifts()
        rows = []
        for cl in self.basis_classes:
            coset, j = (int(x) for x in self.class_gen[cl])
            a, b, c, d = (int(x) for x in lifts[coset])
            f = int(self.gen_factor[coset, j])
            row = {}
            if j == self.w:
                i = self._cusp_index(a, c)
                row[i] = row.get(i, 0) + f
            if j == 0:
                i = self._cusp_index(b, d)
                row[i] = row.get(i, 0) - f
            rows.append(row)
        nc = max(len(self.cusps()), 1)
        return ExactMatrix([[r.get(i, 0) for i in range(nc)] for r in rows], nc)

    def cuspidal_basis(self):
        """Basis (coordinate vectors) of the kernel of the boundary map."""
        if self._cuspidal is None:
            if self.dimension == 0:
                self._cuspidal = []
            else:
                B = self.boundary_map()
                self._cuspidal = kernel_basis(B.transpose())
        return self._cuspidal


def _poly_under(a, b, c, d, j, w):
    """Coefficients of z^j | [[a,b],[c,d]] = (az+b)^j (cz+d)^(w-j)."""
    out = [1] + [0] * w
    for _ in range(j):
        new = [0] * (w + 1)
        for t in range(w + 1):
            if out[t]:
                if t + 1 <= w:
                    new[t + 1] += out[t] * a
                new[t] += out[t] * b
        out = new
    for _ in range(w - j):
        new = [0] * (w + 1)
        for t in range(w + 1):
            if out[t]:
                if t + 1 <= w:
                    new[t + 1] += out[t] * c
                new[t] += out[t] * d
        out = new
    return out


def build_space(N, k, sign=0):
    return ManinSpace(N, k, sign)


def hecke_operator(space, ell):
    return space.hecke_operator(ell)


def star_involution(space):
    return space.star_involution()


# ------------------------------------------------------------ eigensymbols

CONVENTION = "lambda=(nz-a)^j{oo,a/n};m(z^j,g)=Phi(z^j|g^-1{g0,goo})"


class EigensymbolError(ValueError):
    pass


class Eigensymbol:
    """A Hecke eigen-functional on a signed Manin quotient.

    class_values[c] is the value on the representative generator of class
    c; other generators differ by the sign recorded in the space.
    """

    def __init__(self, space, sign, eigen_data, class_values, field=None):
        self.space = space
        self.sign = sign
        self.eigen_data = tuple(eigen_data)
        self.class_values = list(class_values)
        self.field = field

    def value(self, coset, j):
        cl = int(self.space.gen_class[coset, j])
        if cl < 0:
            return self._zero()
        v = self.class_values[cl]
        return v if self.space.gen_factor[coset, j] == 1 else -v

    def values(self):
        """Values on all generators: coset -> list over monomials."""
        return {i: [self.value(i, j) for j in range(self.space.w + 1)] for i in range(self.space.M)}

    def _zero(self):
        return self.field.zero() if self.field is not None else Fraction(0)

    def on_classes(self, coeffs):
        acc = self._zero()
        for cl, a in coeffs.items():
            if a:
                acc = acc + self.class_values[cl] * a
        return acc

    def scaled(self, c):
        return Eigensymbol(self.space, self.sign, self.eigen_data,
                           [v * c for v in self.class_values], self.field)

    def is_zero(self):
        return all(is_zero(v) for v in self.class_values)


def cut_eigensymbol(space, eigen_data, sign=None):
    """Joint eigen-functional for (ell, a_ell) pairs, exact linear algebra."""
    if sign is None:
        sign = space.sign
    if sign != space.sign or sign == 0:
        raise EigensymbolError("the space must be built with the requested sign (+1 or -1)")
    if space.modulus is not None:
        raise EigensymbolError("exact cutting needs an exact space")
    d = space.dimension
    field = None
    for _, a in eigen_data:
        if isinstance(a, NumberFieldElement):
            field = a.field
    V = [[Fraction(int(i == j)) for j in range(d)] for i in range(d)]   # columns are vectors
    cur = d
    for ell, a in eigen_data:
        T = space.hecke_operator(ell)
        A = ExactMatrix([[T[i, j] - (a if i == j else 0) for j in range(d)] for i in range(d)], d)
        Vm = ExactMatrix(V, cur)
        ker = kernel_basis(A * Vm)
        if not ker:
            raise EigensymbolError("eigenvalue data inconsistent: joint eigenspace is 0 after ell = %d" % ell)
        V = [[sum((V[i][t] * x[t] for t in range(cur) if not is_zero(x[t])), Fraction(0))
              for x in ker] for i in range(d)]
        cur = len(ker)
        if cur == 1:
            break
    if cur != 1:
        raise EigensymbolError("eigenspace still has dimension %d; supply more eigenvalues" % cur)
    phi = [V[i][0] for i in range(d)]
    lead = next(x for x in phi if not is_zero(x))
    inv = 1 / lead if not isinstance(lead, NumberFieldElement) else lead.inverse()
    phi = [x * inv for x in phi]
    if field is not None:
        phi = [field(x) for x in phi]
    cvals = []
    zero = field.zero() if field is not None else Fraction(0)
    for c in range(space.n_classes):
        acc = zero
        for b, coef in space.class_expr[c].items():
            acc = acc + phi[b] * coef
        cvals.append(acc)
    if field is None:
        cvals = _primitive(cvals)
    return Eigensymbol(space, sign, eigen_data, cvals, field)


def _primitive(vals):
    """Scale rational values to coprime integers (first nonzero positive)."""
    den = 1
    for v in vals:
        den = den * v.denominator // gcd(den, v.denominator)
    ints = [int(v * den) for v in vals]
    g = 0
    for x in ints:
        g = gcd(g, x)
    lead = next(x for x in ints if x)
    if lead < 0:
        g = -g
    return [Fraction(x // g) for x in ints]


def _nmod_kernel_chain(mats, q, d):
    """Iterated kernel of integer matrices mod q; columns of the result span it."""
    import flint
    K = flint.nmod_mat(d, d, [int(i == j) for i in range(d) for j in range(d)], q)
    for A in mats:
        Am = flint.nmod_mat(A.tolist(), q)
        X, nul = (Am * K).nullspace()
        if nul == 0:
            return None
        sub = flint.nmod_mat(K.ncols(), nul, [int(X[i, j]) for i in range(K.ncols()) for j in range(nul)], q)
        K = K * sub
        if nul == 1:
            break
    return K


def cut_eigensymbol_multimodular(space, eigen_data, primes=None, check_ells=None):
    """Rational eigensymbol of a weight-2 space via several primes.

    Each prime gives the joint kernel modulo q; the class values are glued
    by CRT and rational reconstruction, then checked exactly against every
    3-term relation and the Hecke equations on all generators.
    """
    from .arith import random_prime_list, rational_reconstruct
    if space.w != 0:
        raise EigensymbolError("multimodular cutting is implemented for weight 2")
    primes = list(primes or random_prime_list(12))
    ells = sorted(set(l for l, _ in eigen_data) | set(check_ells or [])) 
    amap = dict(eigen_data)
    modulus, acc, c0 = 1, None, None
    last = None
    for q in primes:
        sq = space.with_modulus(q)
        mats = []
        for ell, a in eigen_data:
            T = sq.hecke_operator(ell)
            T[np.arange(sq.dimension), np.arange(sq.dimension)] -= int(a) % q
            mats.append(T % q)
        K = _nmod_kernel_chain(mats, q, sq.dimension)
        if K is None:
            raise EigensymbolError("eigenvalue data inconsistent modulo %d" % q)
        if K.ncols() != 1:
            raise EigensymbolError("eigenspace has dimension %d modulo %d" % (K.ncols(), q))
        v = np.array([int(K[i, 0]) for i in range(sq.dimension)], dtype=object)
        cv = (sq.R.astype(object).dot(v)) % q
        if c0 is None:
            c0 = int(np.nonzero(cv)[0][0])
        if cv[c0] == 0:
            continue
        cv = (cv * pow(int(cv[c0]), -1, q)) % q
        if acc is None:
            acc, modulus = cv, q
        else:
            t = ((cv - acc) * pow(modulus, -1, q)) % q
            acc = acc + modulus * t
            modulus *= q
        rec = [rational_reconstruct(int(x), modulus) for x in acc]
        if any(r is None for r in rec):
            continue
        if rec == last:
            cvals = _primitive(rec)
            sym = Eigensymbol(space, space.sign, eigen_data, cvals)
            verify_eigensymbol(sym, {l: amap.get(l) for l in ells})
            return sym
        last = rec
    raise EigensymbolError("rational reconstruction did not stabilize; add primes")


def verify_eigensymbol(sym, eigen_map):
    """Exact check of the relations and T_ell phi = a_ell phi on all classes.

    eigen_map: ell -> a_ell; ell with value None are skipped.
    """
    space = sym.space
    vals = sym.class_values
    for row in space.relations:
        if not is_zero(sum((vals[c] * a for c, a in row.items()), sym._zero())):
            raise EigensymbolError("a 3-term relation fails")
    cosets = space.class_gen[:, 0]
    js = space.class_gen[:, 1]
    fac = space.gen_factor[cosets, js]
    for ell, a in eigen_map.items():
        if a is None:
            continue
        imgs = hecke_images_fast(space, ell, cosets, js) if space.w == 0 else space.hecke_images(ell, cosets, js)
        for c, img in enumerate(imgs):
            lhs = sym.on_classes(img) * int(fac[c])
            if not is_zero(lhs - vals[c] * a):
                raise EigensymbolError("T_%d phi != a phi on class %d" % (ell, c))
    return True


def hecke_images_fast(space, ell, cosets, js):
    """Weight-2 Hecke images as class dicts, vectorized over Heilbronn matrices."""
    c, d = space.p1.reps()
    u, v = c[cosets], d[cosets]
    n = len(cosets)
    acc_cls, acc_f, acc_pos = [], [], []
    for (a, b, cc, dd) in space.heilbronn(ell):
        tgt = space.p1.index(u * a + v * cc, u * b + v * dd)
        ok = tgt >= 0
        t = np.where(ok, tgt, 0)
        cl = np.where(ok, space.gen_class[t, 0], -1)
        f = space.gen_factor[t, 0]
        live = cl >= 0
        acc_pos.append(np.nonzero(live)[0])
        acc_cls.append(cl[live])
        acc_f.append(f[live])
    pos = np.concatenate(acc_pos)
    cls = np.concatenate(acc_cls)
    fs = np.concatenate(acc_f)
    out = [dict() for _ in range(n)]
    order = np.lexsort((cls, pos))
    for p_, c_, f_ in zip(pos[order].tolist(), cls[order].tolist(), fs[order].tolist()):
        dd_ = out[p_]
        dd_[c_] = dd_.get(c_, 0) + f_
    return out


def fricke_eigenvalue(sym, sample=None):
    """The scalar c with phi o F = c phi, checked on generators."""
    space = sym.space
    c_found = None
    checked = 0
    for cl in range(space.n_classes):
        coset, j = (int(x) for x in space.class_gen[cl])
        lhs = sym.on_classes(space.fricke_image(coset, j))
        rhs = sym.class_values[cl]
        if is_zero(rhs):
            if not is_zero(lhs):
                raise EigensymbolError("symbol is not a Fricke eigenvector")
            continue
        c = lhs / rhs
        if c_found is None:
            c_found = c
        elif c != c_found:
            raise EigensymbolError("symbol is not a Fricke eigenvector")
        checked += 1
        if sample is not None and checked >= sample:
            break
    if c_found is None:
        raise EigensymbolError("zero symbol")
    return c_found


def atkin_lehner_sign(sym, sample=None):
    """Sign of the functional equation from the Fricke action."""
    N, k = sym.space.N, sym.space.k
    c = fricke_eigenvalue(sym, sample)
    eta = c / Fraction(N) ** (k // 2 - 1)
    if isinstance(eta, NumberFieldElement) and eta.is_rational():
        eta = eta.coeffs[0]
    if eta not in (1, -1):
        raise EigensymbolError("Fricke eigenvalue %s is not +-N^(k/2-1)" % (c,))
    return int((-1) ** (k // 2) * eta)


def evaluate_lambda(sym, j, a, n):
    """lambda(z^j; a, n) = phi((nz - a)^j {oo, a/n})."""
    if not 0 <= j <= sym.space.w:
        raise ValueError("monomial index out of range")
    if n < 1:
        raise ValueError("n must be positive")
    coeffs = sym.space.path_class_coeffs([a], [n], n, a, j)
    return sym.on_classes(coeffs)


# ------------------------------------------------- batched path evaluation

def generator_table(space, class_table):
    """Expand per-class rows (n_classes x dim) to a (M, w+1, dim) table."""
    class_table = np.asarray(class_table)
    dim = class_table.shape[1]
    gc = space.gen_class
    out = np.zeros(gc.shape + (dim,), dtype=class_table.dtype)
    live = gc >= 0
    out[live] = class_table[gc[live]] * space.gen_factor[live][:, None]
    return out


def path_values(space, table, num, den, E, F, j, mod):
    """sum over CF steps of table lookups: values of (E z - F)^j {oo, num/den}.

    table: (M, w+1, dim) integers mod ``mod``; returns (B, dim) mod ``mod``.
    Inputs are arrays of equal length; E, F may be scalars.
    """
    num = np.atleast_1d(np.asarray(num, dtype=np.int64))
    den = np.broadcast_to(np.asarray(den, dtype=np.int64), num.shape)
    E = np.broadcast_to(np.asarray(E, dtype=np.int64), num.shape)
    F = np.broadcast_to(np.asarray(F, dtype=np.int64), num.shape)
    w = space.w
    dim = table.shape[2]
    out = np.zeros((num.size, dim), dtype=np.int64)
    for idx, al, be, ga, de in _cf_steps(num, den):
        e_, f_ = E[idx] % mod, F[idx] % mod
        A = (e_ * (al % mod) - f_ * (ga % mod)) % mod
        B = (e_ * (be % mod) - f_ * (de % mod)) % mod
        coefs = _lin_power_product(A, B, ga % mod, de % mod, j, w, mod)
        cos = space.p1.index(ga, de)
        acc = np.zeros((idx.size, dim), dtype=np.int64)
        for t in range(w + 1):
            acc = (acc + coefs[t][:, None] * table[cos, t]) % mod
        out[idx] = (out[idx] + acc) % mod
    return out


# ------------------------------------------------------------- cache file

def _encode(x):
    if isinstance(x, NumberFieldElement):
        return [str(c) for c in x.coeffs]
    return str(Fraction(x))


def symbol_record(sym, extra=None):
    """Canonical JSON-ready record; all numbers are decimal strings."""
    space = sym.space
    rec = {
        "format": "kurinum-eigensymbol/1",
        "convention": CONVENTION,
        "level": str(space.N),
        "weight": str(space.k),
        "sign": str(sym.sign),
        "field": None if sym.field is None else [str(c) for c in sym.field.h],
        "eigen_data": [[str(l), _encode(a)] for l, a in sym.eigen_data],
        "class_values": [_encode(v) for v in sym.class_values],
    }
    if extra:
        rec.update(extra)
    body = json.dumps(rec, sort_keys=True, separators=(",", ":"))
    rec["checksum"] = hashlib.sha256(body.encode()).hexdigest()
    return rec


def dump_symbol(sym, path, extra=None):
    rec = symbol_record(sym, extra)
    with open(path, "w") as fh:
        json.dump(rec, fh, sort_keys=True, separators=(",", ":"))
        fh.write("\n")
    return rec


def load_symbol(path, space=None):
    """Load a cached eigensymbol; a checksum mismatch is a hard error."""
    from .arith import NumberField
    with open(path) as fh:
        rec = json.load(fh)
    chk = rec.pop("checksum", None)
    body = json.dumps(rec, sort_keys=True, separators=(",", ":"))
    if chk != hashlib.sha256(body.encode()).hexdigest():
        raise EigensymbolError("cache checksum mismatch in %s" % path)
    if rec.get("convention") != CONVENTION:
        raise EigensymbolError("cache written under a different convention")
    N, k, sign = int(rec["level"]), int(rec["weight"]), int(rec["sign"])
    if space is None:
        space = ManinSpace(N, k, sign)
    elif (space.N, space.k, space.sign) != (N, k, sign):
        raise EigensymbolError("cached symbol belongs to another space")
    field = None
    if rec["field"] is not None:
        field = NumberField([int(c) for c in rec["field"]])

    def dec(x):
        if isinstance(x, list):
            return field([Fraction(c) for c in x])
        return Fraction(x)
    eig = [(int(l), dec(a)) for l, a in rec["eigen_data"]]
    vals = [dec(v) for v in rec["class_values"]]
    if len(vals) != space.n_classes:
        raise EigensymbolError("cached class count does not match the space")
    return Eigensymbol(space, sign, eig, vals, field), rec


# -------------------------------------------------- rational newform search

def primes_upto(n):
    sieve = bytearray([1]) * (n + 1)
    sieve[:2] = b"\x00\x00"
    for i in range(2, int(n ** 0.5) + 1):
        if sieve[i]:
            sieve[i * i::i] = bytearray(len(sieve[i * i::i]))
    return [i for i in range(n + 1) if sieve[i]]


def rational_newforms(space, n_ells=12, n_report=25):
    """Rational weight-2 newforms of a modular signed space, by a tree search.

    Each good prime ell contributes every integer a with |a| <= 2 sqrt(ell)
    as a branch; branches with an empty joint kernel die, and a branch
    survives as a newform once its kernel is one-dimensional and stays
    consistent for all n_ells good primes (oldforms have multiplicity >= 2
    and never get there). Returns dicts with a_p for the first n_report
    primes (U_p eigenvalues at bad p), sorted lexicographically on them.
    """
    import flint
    if space.modulus is None or space.w != 0:
        raise ValueError("needs a weight-2 space reduced modulo a prime")
    q = space.modulus
    N = space.N
    good = [l for l in primes_upto(1000) if N % l][:n_ells]
    mats = {}

    def T(ell):
        if ell not in mats:
            mats[ell] = flint.nmod_mat(space.hecke_operator(ell).tolist(), q)
        return mats[ell]

    d = space.dimension
    ident = flint.nmod_mat(d, d, [int(i == j) for i in range(d) for j in range(d)], q)
    found = []

    def descend(K, depth, hist):
        if depth == len(good):
            if K.ncols() == 1:
                found.append((K, hist))
            return
        ell = good[depth]
        TK = T(ell) * K
        bound = int(2 * ell ** 0.5)
        for a in range(-bound, bound + 1):
            A = TK - K * (a % q)
            X, nul = A.nullspace()
            if nul == 0:
                continue
            sub = flint.nmod_mat(K.ncols(), nul, [int(X[i, j]) for i in range(K.ncols()) for j in range(nul)], q)
            descend(K * sub, depth + 1, hist + [(ell, a)])

    descend(ident, 0, [])
    out = []
    report = primes_upto(1000)[:n_report]
    for K, hist in found:
        v = [int(K[i, 0]) for i in range(d)]
        piv = next(i for i, x in enumerate(v) if x)
        ap = {}
        for p in report:
            Tv = T(p) * K
            a = int(Tv[piv, 0]) * pow(v[piv], -1, q) % q
            if a > q // 2:
                a -= q
            if any((int(Tv[i, 0]) - a * v[i]) % q for i in range(d)):
                raise EigensymbolError("vector is not a T_%d eigenvector" % p)
            ap[p] = a
        out.append({"ap": ap, "cut": hist})
    out.sort(key=lambda r: [r["ap"][p] for p in report])
    return out


def class_label(index):
    """0 -> a, 25 -> z, 26 -> ba, ... (base-26 letters)."""
    s = ""
    while True:
        s = chr(ord("a") + index % 26) + s
        index //= 26
        if index == 0:
            return s


def hecke_eigenvalue(sym, ell, checks=2):
    """a_ell read off from phi(T_ell x) = a_ell phi(x) on a few generators."""
    space = sym.space
    H = np.array(space.heilbronn(ell), dtype=np.int64)
    ha, hb, hc, hd = H[:, 0], H[:, 1], H[:, 2], H[:, 3]
    cu, cd = space.p1.reps()
    found = None
    done = 0
    for cl, val in enumerate(sym.class_values):
        if is_zero(val):
            continue
        coset, j = (int(x) for x in space.class_gen[cl])
        u, v = int(cu[coset]), int(cd[coset])
        tgt = space.p1.index(u * ha + v * hc, u * hb + v * hd)
        ok = tgt >= 0
        co = _lin_power_product(ha[ok].astype(object), hb[ok].astype(object),
                                hc[ok].astype(object), hd[ok].astype(object), j, space.w)
        acc = {}
        for t in range(space.w + 1):
            cls = space.gen_class[tgt[ok], t]
            f = space.gen_factor[tgt[ok], t]
            for c_, x in zip(cls.tolist(), (co[t] * f.astype(object)).tolist()):
                if c_ >= 0 and x:
                    acc[c_] = acc.get(c_, 0) + x
        a = sym.on_classes(acc) / val
        if found is None:
            found = a
        elif a != found:
            raise EigensymbolError("inconsistent T_%d eigenvalue" % ell)
        done += 1
        if done >= checks:
            break
    return found
