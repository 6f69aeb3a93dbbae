"""Minimal integral normalization of eigensymbols at a prime above p."""

from fractions import Fraction

import numpy as np

from .arith import NumberFieldElement, is_zero
from .localfield import (INFINITY, LocalValue, PrecisionError, integral_coords,
                         valuation)
from .msym import evaluate_lambda, generator_table, path_values


def _uniformizer_power(L, field, t):
    pi = L.global_uniformizer(field)
    if isinstance(pi, int):
        return Fraction(pi) ** t
    return pi ** t


class MinimalEigensymbol:
    """An eigensymbol rescaled so that its values are pi-integral with a unit.

    shift_m is the exponent with normalized = pi^shift_m * base, where pi is
    the global uniformizer of the prime (p itself when unramified).
    """

    def __init__(self, base, prime, shift_m, witness, per_r=None):
        self.base = base
        self.prime = prime
        self.shift_m = shift_m
        self.witness = witness
        self.per_r = per_r
        self.scale = _uniformizer_power(prime, base.field, shift_m)
        self.class_values = [v * self.scale for v in base.class_values]
        self._tables = {}

    @property
    def space(self):
        return self.base.space

    @property
    def sign(self):
        return self.base.sign

    def valuations(self):
        return [valuation(v, self.prime) for v in self.class_values]

    def table(self, digits):
        """(M, k-1, local degree) generator table mod p^digits."""
        if digits not in self._tables:
            L = self.prime
            q = L.p ** digits
            if q >= 1 << 30:
                raise PrecisionError("modulus p^%d too large for word arithmetic" % digits)
            rows = np.array([integral_coords(v, L, digits) for v in self.class_values],
                            dtype=np.int64).reshape(len(self.class_values), L.degree)
            self._tables[digits] = generator_table(self.space, rows) % q
        return self._tables[digits]

    def lambda_sums(self, j, num, den, E, F, weights, digits):
        """sum_b weights_b * lambda-path values, as coordinates mod p^digits."""
        q = self.prime.p ** digits
        vals = path_values(self.space, self.table(digits), num, den, E, F, j, q)
        w = np.asarray(weights, dtype=np.int64) % q
        return [int(x) for x in (vals * w[:, None] % q).sum(axis=0) % q]


def minimal_normalization(sym, L, per_r=None, scan_bound=40):
    """Rescale by the unique power of pi making the values minimal integral.

    By default the minimum runs over every generator and monomial. With
    per_r set, only the values lambda(z^(r-1); a, n) with n <= scan_bound
    enter; this finite scan is a cross-check, not a proof of minimality.
    """
    if sym.is_zero():
        raise ValueError("zero eigensymbol has no minimal normalization")
    best = None
    if per_r is None:
        for c, v in enumerate(sym.class_values):
            if is_zero(v):
                continue
            val = valuation(v, L)
            if best is None or val < best[0]:
                best = (val, ("class", c))
    else:
        j = per_r - 1
        for n in range(1, scan_bound + 1):
            for a in range(n):
                v = evaluate_lambda(sym, j, a, n)
                if is_zero(v):
                    continue
                val = valuation(v, L)
                if best is None or val < best[0]:
                    best = (val, ("lambda", j, a, n))
        if best is None:
            raise ValueError("all scanned lambda values vanish")
    return MinimalEigensymbol(sym, L, -best[0], best[1], per_r)


def normalized_lambda(phi, j, a, n):
    """lambda^min(z^j; a, n) as an exact local value."""
    v = evaluate_lambda(phi.base, j, a, n) * phi.scale
    if isinstance(v, NumberFieldElement) and v.is_rational():
        v = v.coeffs[0]
    val = valuation(v, phi.prime)
    if val is not INFINITY and val < 0:
        raise ArithmeticError("normalized value has negative valuation")
    return LocalValue(v)
