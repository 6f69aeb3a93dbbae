"""Descriptor -> minimal symbol -> scan -> report, with an on-disk cache."""

import hashlib
import json
import os
import time

from .kolyvagin import make_modulus
from .kurihara import TwistedMinimalSymbol, scan
from .localfield import split_prime
from .msym import (CONVENTION, EigensymbolError, ManinSpace, P1List, atkin_lehner_sign,
                   cut_eigensymbol, cut_eigensymbol_multimodular, dump_symbol,
                   load_symbol, primes_upto)
from .periods import minimal_normalization
from .selmer import derive_from_records, structure_report

# above this many generators the elimination is done modulo a prime
EXACT_LIMIT = 4000
MODULAR_PRIME = 1073741789


class StageError(RuntimeError):
    """An upstream failure, tagged with the pipeline stage that raised it."""

    def __init__(self, stage, exc):
        super().__init__("%s: %s: %s" % (stage, type(exc).__name__, exc))
        self.stage = stage
        self.cause = exc


class _stage:
    def __init__(self, name):
        self.name = name

    def __enter__(self):
        return self

    def __exit__(self, typ, exc, tb):
        if exc is not None and not isinstance(exc, (StageError, KeyboardInterrupt)):
            raise StageError(self.name, exc) from exc
        return False


def central_r(form):
    return form.weight // 2


def base_form(form):
    return form.twist[0] if form.twist is not None else form


def symbol_sign(form, r):
    """Sign of the base eigensymbol needed for lambda(z^(r-1); a, n)."""
    s = (-1) ** (r - 1)
    if form.twist is not None:
        s *= form.twist[1].parity()
    return s


def _eigen(form):
    if "cut" in form.extra:
        return [(int(l), _num(a, form)) for l, a in form.extra["cut"]]
    return form.eigen_data(6)


def _num(a, form):
    from fractions import Fraction
    if isinstance(a, list):
        if form.field is None:
            return Fraction(a[0])
        return form.field([Fraction(c) for c in a])
    return Fraction(a)


def cache_key(form, sign, p, selector):
    eig = json.dumps([[l, str(a)] for l, a in _eigen(form)])
    parts = [str(form.level), str(form.weight), hashlib.sha256(eig.encode()).hexdigest(),
             str(sign), str(p), json.dumps(selector, sort_keys=True), CONVENTION]
    return hashlib.sha256("|".join(parts).encode()).hexdigest()[:20]


def _space(form, sign):
    N, k = form.level, form.weight
    if P1List(N).size * (k - 1) <= EXACT_LIMIT or k != 2:
        return ManinSpace(N, k, sign)
    return ManinSpace(N, k, sign, modulus=MODULAR_PRIME)


def build_symbol(form, sign, cache_dir=None, p=None, selector=None, log=None):
    """The (unnormalized) eigensymbol of ``form`` with the given sign.

    Returns (symbol, info) where info records timing and whether the
    cache was hit.
    """
    log = log or (lambda *a: None)
    info = {}
    path = None
    if cache_dir:
        os.makedirs(cache_dir, exist_ok=True)
        key = cache_key(form, sign, p, selector)
        path = os.path.join(cache_dir, "%s-%s.json" % (form.label.replace(" ", "_"), key))
    t = time.time()
    with _stage("space"):
        space = _space(form, sign)
    info["space_seconds"] = round(time.time() - t, 2)
    info["dimension"] = space.dimension
    log("space N=%d k=%d sign=%+d: %d generators, dimension %d%s"
        % (space.N, space.k, sign, space.M * (space.k - 1), space.dimension,
           "" if space.modulus is None else " (mod %d)" % space.modulus))
    if path and os.path.exists(path):
        with _stage("cache"):
            sym, _ = load_symbol(path, space)
        info["cache"] = "hit"
        info["cache_path"] = path
        log("cache hit", path)
        return sym, info
    t = time.time()
    with _stage("cut"):
        eig = _eigen(form)
        if space.modulus is None:
            sym = cut_eigensymbol(space, eig)
        else:
            checks = [l for l in primes_upto(20) if form.level % l]
            sym = cut_eigensymbol_multimodular(space, eig, check_ells=checks)
    info["cut_seconds"] = round(time.time() - t, 2)
    if path:
        with _stage("cache"):
            dump_symbol(sym, path, {"label": form.label, "p": str(p),
                                    "selector": json.dumps(selector, sort_keys=True)})
        info["cache"] = "written"
        info["cache_path"] = path
    return sym, info


def local_prime(form, p=None):
    p = p or form.p
    if p is None:
        raise ValueError("no prime p given and the descriptor has none")
    with _stage("local prime"):
        return split_prime(int(p), base_form(form).hecke_poly, form.prime)


def resolve_w(form, sym):
    """Sign of the functional equation, computed and checked against the descriptor."""
    base = base_form(form)
    sample = None if sym.space.modulus is None else 40
    with _stage("atkin-lehner"):
        w0 = atkin_lehner_sign(sym, sample=sample)
    if base.w is not None and base.w != w0:
        raise StageError("atkin-lehner", ValueError(
            "descriptor says w = %d, the symbol gives %d" % (base.w, w0)))
    if form.twist is None:
        return w0
    return w0 * form.twist[1](-base.level)


def prepare(form, p=None, r=None, cache_dir=None, normalization="global", log=None):
    """Minimal symbol, prime, r and w for a descriptor."""
    r = r or central_r(form)
    if not 1 <= r <= form.weight - 1:
        raise ValueError("r must lie in 1..k-1")
    L = local_prime(form, p)
    base = base_form(form)
    sign = symbol_sign(form, r)
    sym, info = build_symbol(base, sign, cache_dir, L.p, form.prime, log)
    w = resolve_w(form, sym)
    with _stage("normalization"):
        per_r = r if normalization == "per-r" else None
        phi = minimal_normalization(sym, L, per_r=per_r)
        if form.twist is not None:
            phi = TwistedMinimalSymbol(phi, form.twist[1])
    info["shift_m"] = phi.shift_m
    return {"form": form, "phi": phi, "L": L, "r": r, "w": w, "info": info}


def needs_escalation(sc):
    """True if every value outside nu = 0 vanishes to the scan precision
    while delta~_1 is not already a unit."""
    for k in sc.strata.get(0, []):
        if k.val == 0:
            return False
    found = False
    for nu, ks in sc.strata.items():
        if nu == 0:
            continue
        for k in ks:
            if k.predicted_zero:
                continue
            found = True
            if k.nonzero:
                return False
    return found


def run_scan(prep, m, strata, bound, workers=1, seed=None, include_predicted_zero=False,
             only=None, extra_primes=(), escalate=True, esc_bound=None, esc_only=None,
             esc_extra=(), log=None):
    """Scan, and repeat with m + 1 if every mod-pi^m value vanishes.

    The esc_* arguments shape the repeated scan. Returns the list of scans.
    """
    log = log or (lambda *a: None)
    form, phi, L, r, w = prep["form"], prep["phi"], prep["L"], prep["r"], prep["w"]
    scans = []
    with _stage("scan"):
        sc = scan(phi, L, m, strata, bound, form, r, w, include_predicted_zero,
                  workers, seed, only, extra_primes)
    scans.append(sc)
    log("scan m=%d:" % m, sc.summary())
    if escalate and needs_escalation(sc):
        log("every value vanishes mod pi^%d; escalating to m=%d" % (m, m + 1))
        with _stage("scan"):
            sc2 = scan(phi, L, m + 1, [s for s in strata if s], esc_bound or bound, form, r, w,
                       include_predicted_zero, workers, seed, esc_only, esc_extra)
        scans.append(sc2)
        log("scan m=%d:" % (m + 1), sc2.summary())
    return scans


def scan_records(scans):
    out = []
    for sc in scans:
        for rec in sc.records():
            rec = dict(rec)
            rec["m"] = sc.m
            out.append(rec)
    return out


def scan_meta(prep, scans):
    L = prep["L"]
    sc = scans[0]
    return {"form": prep["form"].label, "p": L.p, "e": L.e, "rational": base_form(prep["form"]).field is None,
            "r": prep["r"], "w": prep["w"], "bound": sc.bound,
            "indeterminate": sum(len(s.indeterminate) for s in scans),
            "summary": {"m=%d" % s.m: {str(nu): v for nu, v in s.summary().items()} for s in scans}}


def report_from(records, meta, confirm=None):
    inv = derive_from_records(records, meta["p"], meta["e"], meta["r"], meta["bound"],
                              meta["rational"], meta["indeterminate"])
    cinv = None
    if confirm is not None:
        crec, cmeta = confirm
        cinv = derive_from_records(crec, cmeta["p"], cmeta["e"], cmeta["r"], cmeta["bound"],
                                   cmeta["rational"], cmeta["indeterminate"])
    return inv, structure_report(inv, meta["w"], cinv)


def witness_modulus(prep, ells, m=1, seed=None):
    """KolyvaginModulus for a given list of primes, checking admissibility."""
    from .kolyvagin import is_admissible
    qs = []
    for ell in ells:
        q = is_admissible(ell, m, prep["form"], prep["L"], seed)
        if not q:
            raise ValueError("%d is not admissible: %s" % (ell, q))
        qs.append(q)
    return make_modulus(qs)

