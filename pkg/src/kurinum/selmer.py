"""From scanned Kurihara numbers to the predicted Selmer structure.

Everything here is bookkeeping on valuations; the structure statement is
conditional on the hypotheses listed in ASSUMPTIONS, none of which is
checked by this package.
"""

from dataclasses import dataclass, field
from math import factorial

from .arith import valuation_int

ASSUMPTIONS = (
    "residual Galois representation has large image",
    "some Kurihara number is nonzero (the collection is not identically zero)",
    "the Iwasawa main conjecture input needed by the structure theorem holds",
    "scanned minima are upper bounds for the true invariants; d_infinity is read off the scan",
)


class IntegrityError(ArithmeticError):
    pass


class Inconclusive(ValueError):
    pass


@dataclass
class DerivedInvariants:
    ord: object
    partial_bounds: dict
    d_infinity_bound: object
    saturation: dict
    p: int
    e: int = 1
    rational: bool = True
    caveats: list = field(default_factory=list)

    @property
    def conclusive(self):
        return self.ord is not None


@dataclass
class SelmerReport:
    corank: int
    elementary_divisors: list
    structure: str
    length_over_div: int
    parity_ok: object
    conclusive: bool
    caveats: list
    assumptions: tuple = ASSUMPTIONS

    def to_dict(self):
        return {"corank": self.corank, "e": list(self.elementary_divisors),
                "structure": self.structure, "length": self.length_over_div,
                "parity_ok": self.parity_ok, "conclusive": self.conclusive,
                "caveats": list(self.caveats), "assumptions": list(self.assumptions)}


def derive_invariants(scan, extra=()):
    """Per-stratum minima of exact valuations, and the derived ord.

    extra: further KuriharaNumber objects (for instance from a finer
    modulus) merged into their strata.
    """
    records = scan.records() + [k.record() for k in extra]
    return derive_from_records(records, scan.p, scan.e, scan.r, scan.bound,
                               getattr(scan, "rational", True), len(scan.indeterminate))


def derive_from_records(records, p, e, r, bound, rational=True, n_indeterminate=0):
    """derive_invariants on JSON scan records."""
    if not records:
        raise Inconclusive("empty scan")
    minima = {}
    for rec in records:
        nu, v = int(rec["nu"]), rec["val"]
        if rec.get("predicted_zero") or not isinstance(v, int):
            continue
        if nu == 0:
            v -= e * valuation_int(factorial(r - 1), p)
        if nu not in minima or v < minima[nu]:
            minima[nu] = v
    caveats = []
    if n_indeterminate:
        caveats.append("%d moduli were indeterminate" % n_indeterminate)
    if not minima:
        return DerivedInvariants(None, {}, None, {}, p, e, rational,
                                 caveats + ["no nonzero value below %d" % bound])
    ord_ = min(minima)
    dinf = min(minima.values())
    sat = {nu: minima[nu] == 0 for nu in minima}
    return DerivedInvariants(ord_, dict(sorted(minima.items())), dinf, sat, p, e, rational, caveats)


def _render(corank, es, p, rational):
    parts = []
    if corank:
        parts.append(("(Q_%d/Z_%d)^%d" % (p, p, corank)) if rational else "(F/O)^%d" % corank)
    for e in es:
        if e:
            if rational:
                parts.append("(Z/%dZ)^2" % p ** e)
            else:
                parts.append("(O/pi)^2" if e == 1 else "(O/pi^%d)^2" % e)
    return " + ".join(parts) if parts else "0"


def structure_report(inv, w=None, confirm=None):
    """Corank, elementary divisors and length from derived invariants.

    confirm: invariants from a rerun at a larger bound; the report is
    conclusive only if the chain terminates and both runs agree.
    """
    if inv.ord is None:
        raise Inconclusive("no nonzero Kurihara number in the scan")
    o = inv.ord
    b = inv.partial_bounds
    seq = [b[o]]
    i = o + 2
    while i in b:
        seq.append(b[i])
        i += 2
    caveats = list(inv.caveats)
    es = []
    for x, y in zip(seq, seq[1:]):
        if y > x:
            caveats.append("stratum bound increases; chain cut at an unsaturated stratum")
            break
        if (x - y) % 2:
            raise IntegrityError("odd difference %d - %d between strata" % (x, y))
        es.append((x - y) // 2)
        if y == 0:
            break
    last = seq[len(es)]
    terminated = last == inv.d_infinity_bound
    if last:
        caveats.append("chain stops at %d, the scanned d_infinity bound is %s"
                       % (last, inv.d_infinity_bound))
    es = [e for e in es if e] or []
    length = seq[0] - last
    parity = None if w is None else ((-1) ** o == w)
    agree = False
    if confirm is not None:
        try:
            other = structure_report(confirm, w)
            agree = other.elementary_divisors == es and other.corank == o
        except (Inconclusive, IntegrityError):
            agree = False
    else:
        caveats.append("not re-checked at a doubled prime bound")
    return SelmerReport(o, es, _render(o, es, inv.p, inv.rational), length, parity,
                        terminated and agree, caveats)


def parity_check(inv, w):
    if w not in (1, -1):
        raise ValueError("w must be +1 or -1")
    return (-1) ** inv.ord == w


def corank_upper_bound(witness):
    if not witness.nonzero:
        raise ValueError("witness must be a nonzero Kurihara number")
    return witness.modulus.nu


def rank_zero_length(inv):
    if inv.ord != 0:
        raise ValueError("length formula needs ord = 0")
    return inv.partial_bounds[0] - inv.d_infinity_bound


def table_row(label, L, report, counts):
    cnt = "; ".join("nu=%d: %s" % (nu, c) for nu, c in sorted(counts.items()))
    return "%s | p=%d | %s | corank %d | %s" % (label, L.p, report.structure, report.corank, cnt)
