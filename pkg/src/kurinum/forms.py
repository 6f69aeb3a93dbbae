"""Newform descriptors: level, weight, Hecke field, eigenvalues, sign.

A descriptor is either read from JSON, assembled from an elliptic curve,
or obtained by twisting another descriptor by a quadratic character.
"""

import json
import os
from fractions import Fraction

from .arith import NumberField, NumberFieldElement, kronecker
from .ec import CurveDescriptor, ap_count

DATA_DIR = os.path.join(os.path.dirname(__file__), "data")


class DataGap(LookupError):
    pass


def _squarefree(m):
    i = 2
    while i * i <= m:
        if m % (i * i) == 0:
            return False
        i += 1
    return True


def is_fundamental(d):
    """d = 1, or squarefree d = 1 mod 4, or d = 4m with m = 2, 3 mod 4 squarefree."""
    if d == 1:
        return True
    if d % 4 == 1:
        return _squarefree(abs(d))
    if d % 4 == 0:
        m = d // 4
        return m % 4 in (2, 3) and _squarefree(abs(m))
    return False


class QuadraticCharacter:
    """u -> (d / u) for a fundamental discriminant d; conductor |d|."""

    def __init__(self, d):
        if not is_fundamental(d):
            raise ValueError("%d is not a fundamental discriminant" % d)
        self.d = d
        self.conductor = abs(d)

    def __call__(self, u):
        return kronecker(self.d, u)

    def parity(self):
        return 1 if self.d > 0 else -1

    def __repr__(self):
        return "QuadraticCharacter(%d)" % self.d


class NewformDescriptor:
    def __init__(self, label, level, weight, eigenvalues, field=None, w=None,
                 p=None, prime=None, twist=None, curve=None, extra=None):
        if weight < 2 or weight % 2:
            raise ValueError("weight must be even and >= 2")
        self.label = label
        self.level = level
        self.weight = weight
        self.eigenvalues = dict(eigenvalues)
        self.field = field
        self.w = w
        self.p = p
        self.prime = prime
        self.twist = twist          # (base descriptor, QuadraticCharacter)
        self.curve = curve
        self.extra = extra or {}

    def a(self, ell):
        """Hecke eigenvalue a_ell (U_ell at bad primes when supplied)."""
        if self.twist is not None:
            base, chi = self.twist
            return chi(ell) * base.a(ell)
        if ell in self.eigenvalues:
            return self.eigenvalues[ell]
        if self.curve is not None and self.level % ell:
            return ap_count(self.curve, ell)
        raise DataGap("a_%d is not available for %s" % (ell, self.label))

    def eigen_data(self, count):
        """The first ``count`` good (ell, a_ell) pairs."""
        out = []
        ell = 2
        while len(out) < count:
            if self.level % ell and _is_prime(ell):
                out.append((ell, self.a(ell)))
            ell += 1
        return out

    @property
    def hecke_poly(self):
        return list(self.field.h) if self.field is not None else [0, 1]

    # -- construction

    @classmethod
    def from_curve(cls, curve, p=None, bound=0):
        ev = {}
        for ell in range(2, bound + 1):
            if _is_prime(ell) and curve.conductor % ell:
                ev[ell] = ap_count(curve, ell)
        return cls(curve.label, curve.conductor, 2, ev, p=p, curve=curve)

    def twisted(self, d, label=None):
        chi = QuadraticCharacter(d)
        D = chi.conductor
        from math import gcd
        if gcd(D, self.level) != 1:
            raise ValueError("twist needs a character prime to the level")
        w = None
        if self.w is not None:
            w = self.w * chi(-self.level)
        return NewformDescriptor(label or "%s x chi_%d" % (self.label, d), self.level * D * D,
                                 self.weight, {}, self.field, w, self.p, self.prime,
                                 twist=(self, chi))

    @classmethod
    def from_dict(cls, d, base_dir=None):
        if "twist_of" in d:
            base = load_descriptor(d["twist_of"], base_dir)
            out = base.twisted(int(d["character"]), d.get("label"))
            if "p" in d:
                out.p = int(d["p"])
            if "prime" in d:
                out.prime = d["prime"]
            return out
        if "ainvs" in d:
            curve = CurveDescriptor(d["label"], tuple(int(x) for x in d["ainvs"]), int(d["conductor"]),
                                    {int(k): int(v) for k, v in (d.get("ap") or {}).items()})
            out = cls.from_curve(curve, d.get("p"))
            out.eigenvalues.update(curve.ap)
            if d.get("w") is not None:
                out.w = int(d["w"])
            out.prime = d.get("prime")
            return out
        for key in ("level", "weight", "eigenvalues"):
            if key not in d:
                raise ValueError("descriptor lacks %r" % key)
        if d.get("character") not in (None, 1, "1", "trivial"):
            raise ValueError("only trivial character is supported")
        poly = [int(c) for c in d.get("hecke_poly") or [0, 1]]
        field = NumberField(poly) if len(poly) > 2 else None
        ev = {}
        for k, v in d["eigenvalues"].items():
            if not isinstance(v, list):
                v = [v]
            if field is None:
                if len(v) != 1:
                    raise ValueError("rational form with a vector eigenvalue")
                ev[int(k)] = Fraction(v[0])
            else:
                ev[int(k)] = field([Fraction(c) for c in v])
        w = d.get("w")
        return cls(d.get("label", "?"), int(d["level"]), int(d["weight"]), ev, field,
                   None if w is None else int(w), d.get("p"), d.get("prime"),
                   extra={k: d[k] for k in d if k in ("cut", "notes")})

    def to_dict(self):
        if self.twist is not None:
            base, chi = self.twist
            return {"label": self.label, "twist_of": base.label, "character": chi.d}
        def enc(v):
            if isinstance(v, NumberFieldElement):
                return [str(c) for c in v.coeffs]
            return [str(v)]
        out = {"label": self.label, "level": self.level, "weight": self.weight,
               "hecke_poly": [str(c) for c in self.hecke_poly],
               "eigenvalues": {str(k): enc(v) for k, v in sorted(self.eigenvalues.items())},
               "w": self.w}
        if self.p is not None:
            out["p"] = self.p
        if self.prime is not None:
            out["prime"] = self.prime
        out.update(self.extra)
        return out


def _is_prime(n):
    if n < 2:
        return False
    i = 2
    while i * i <= n:
        if n % i == 0:
            return False
        i += 1
    return True


def load_descriptor(name, base_dir=None):
    """Load a descriptor by path, or by label from the bundled data."""
    cands = [name]
    if base_dir:
        cands.append(os.path.join(base_dir, name))
        cands.append(os.path.join(base_dir, name + ".json"))
    cands.append(os.path.join(DATA_DIR, name + ".json"))
    for path in cands:
        if os.path.isfile(path):
            with open(path) as fh:
                try:
                    d = json.load(fh)
                except json.JSONDecodeError as exc:
                    raise ValueError("%s: parse error at line %d column %d: %s"
                                     % (path, exc.lineno, exc.colno, exc.msg)) from None
            return NewformDescriptor.from_dict(d, os.path.dirname(path))
    raise FileNotFoundError("no descriptor named %r" % name)
