"""Elliptic curves over Q as eigenvalue sources for weight-2 runs."""

import json
from dataclasses import dataclass, field

import numpy as np


class BadReduction(ValueError):
    pass


def b_invariants(ainvs):
    a1, a2, a3, a4, a6 = ainvs
    b2 = a1 * a1 + 4 * a2
    b4 = 2 * a4 + a1 * a3
    b6 = a3 * a3 + 4 * a6
    b8 = a1 * a1 * a6 + 4 * a2 * a6 - a1 * a3 * a4 + a2 * a3 * a3 - a4 * a4
    return b2, b4, b6, b8


def discriminant(ainvs):
    b2, b4, b6, b8 = b_invariants(ainvs)
    return -b2 * b2 * b8 - 8 * b4 ** 3 - 27 * b6 * b6 + 9 * b2 * b4 * b6


@dataclass(frozen=True)
class CurveDescriptor:
    label: str
    ainvs: tuple
    conductor: int
    ap: dict = field(default_factory=dict)

    def __post_init__(self):
        if len(self.ainvs) != 5:
            raise ValueError("need five a-invariants")
        if discriminant(self.ainvs) == 0:
            raise ValueError("singular curve %s" % (self.ainvs,))

    @property
    def discriminant(self):
        return discriminant(self.ainvs)

    def a(self, ell):
        """a_ell: supplied value first, else point counting."""
        if ell in self.ap:
            return self.ap[ell]
        return ap_count(self, ell, allow_bad=self.conductor % ell == 0)

    @classmethod
    def from_json(cls, text):
        d = json.loads(text)
        ap = {int(k): int(v) for k, v in (d.get("ap") or {}).items()}
        return cls(d["label"], tuple(int(x) for x in d["ainvs"]), int(d["conductor"]), ap)


def _count_points(ainvs, ell):
    """Number of projective points of the reduction mod ell."""
    a1, a2, a3, a4, a6 = (int(x) % ell for x in ainvs)
    if ell == 2:
        n = 1
        for x in range(2):
            for y in range(2):
                if (y * y + a1 * x * y + a3 * y - x ** 3 - a2 * x * x - a4 * x - a6) % 2 == 0:
                    n += 1
        return n
    b2, b4, b6, _ = b_invariants((a1, a2, a3, a4, a6))
    x = np.arange(ell, dtype=np.int64)
    rhs = (((4 * x + b2) % ell * x % ell + 2 * b4) % ell * x + b6) % ell
    is_sq = np.zeros(ell, dtype=np.int64)
    y = np.arange(1, ell, dtype=np.int64)
    is_sq[(y * y) % ell] = 1
    chi = np.where(rhs == 0, 0, 2 * is_sq[rhs] - 1)
    return ell + 1 + int(chi.sum())


def ap_count(curve, ell, allow_bad=False):
    """a_ell = ell + 1 - #E(F_ell) by enumeration of x."""
    ainvs = curve.ainvs if isinstance(curve, CurveDescriptor) else tuple(curve)
    bad = discriminant(ainvs) % ell == 0
    if isinstance(curve, CurveDescriptor):
        bad = bad or curve.conductor % ell == 0
    if bad and not allow_bad:
        raise BadReduction("%d is a bad prime" % ell)
    a = ell + 1 - _count_points(ainvs, ell)
    if not bad and a * a > 4 * ell:
        raise ArithmeticError("Hasse bound violated at %d" % ell)
    return a


def reduction_type_at_p(level, p, a_p):
    """Reduction type from the conductor (or level) and a_p."""
    if level % (p * p) == 0:
        if a_p != 0:
            raise ValueError("additive reduction needs a_p = 0")
        return "additive"
    if level % p == 0:
        if a_p == 1:
            return "multiplicative-split"
        if a_p == -1:
            return "multiplicative-nonsplit"
        raise ValueError("multiplicative reduction needs a_p = +-1")
    return "supersingular" if a_p % p == 0 else "ordinary"


KNOWN_CURVES = {
    "11.a1": CurveDescriptor("11.a1", (0, -1, 1, -10, -20), 11),
    "11.a3": CurveDescriptor("11.a3", (0, -1, 1, 0, 0), 11),
    "14.a1": CurveDescriptor("14.a1", (1, 0, 1, 4, -6), 14),
    "37.a1": CurveDescriptor("37.a1", (0, 0, 1, -1, 0), 37),
    "43.a1": CurveDescriptor("43.a1", (0, 1, 1, 0, 0), 43),
    "389.a1": CurveDescriptor("389.a1", (0, 1, 1, -2, 0), 389),
}
