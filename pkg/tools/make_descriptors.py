"""Regenerate the bundled newform descriptors in src/kurinum/data.

Large levels: the rational newforms of the sign +1 space are found by a
tree search over Hasse-range eigenvalues modulo a word-size prime, sorted
lexicographically on (a_2, a_3, a_5, ...) and labelled a, b, ..., z, ba, ...
in that order. The chosen form is then cut out exactly (multimodular with
exact verification) and its a_ell, ell < 2000, are read off the symbol.

Usage: python3 tools/make_descriptors.py [label ...]
"""

import json
import os
import sys
import time

from kurinum.arith import NumberField, random_prime_list
from kurinum.ec import KNOWN_CURVES
from kurinum.msym import (ManinSpace, atkin_lehner_sign, class_label, cut_eigensymbol,
                          cut_eigensymbol_multimodular, hecke_eigenvalue, primes_upto,
                          rational_newforms)

OUT = os.path.join(os.path.dirname(__file__), "..", "src", "kurinum", "data")


def enc(v):
    if hasattr(v, "coeffs"):
        return [str(c) for c in v.coeffs]
    return [str(v)]


def write(name, d):
    with open(os.path.join(OUT, name + ".json"), "w") as fh:
        json.dump(d, fh, sort_keys=True)
        fh.write("\n")
    print("wrote", name)


def large(level, label, bound=2000):
    t = time.time()
    q = random_prime_list(1)[0]
    sp = ManinSpace(level, 2, 1, modulus=q)
    forms = rational_newforms(sp, n_report=25)
    idx = [class_label(i) for i in range(len(forms))].index(label.split(".")[1])
    form = forms[idx]
    print(level, "rational newforms:", len(forms), "chosen", label, form["ap"], round(time.time() - t, 1))
    cut = form["cut"]
    sym = cut_eigensymbol_multimodular(sp, cut, check_ells=[l for l in primes_upto(20) if level % l])
    w = atkin_lehner_sign(sym, sample=40)
    ev = {}
    for ell in primes_upto(bound):
        ev[ell] = hecke_eigenvalue(sym, ell)
        if level % ell == 0 or ell in form["ap"]:
            if ell in form["ap"] and ev[ell] != form["ap"][ell]:
                raise SystemExit("eigenvalue mismatch at %d" % ell)
    write(label, {
        "label": label, "level": level, "weight": 2, "hecke_poly": ["0", "1"],
        "eigenvalues": {str(k): enc(v) for k, v in sorted(ev.items())},
        "w": w, "p": 3, "prime": {"e": 1, "f": 1},
        "cut": [[l, a] for l, a in cut],
        "notes": "index %d among %d rational newforms of level %d in (a_2, a_3, a_5, ...) order"
                 % (idx, len(forms), level),
    })
    print("done", label, round(time.time() - t, 1), "s")


def small(level, weight, sign, label, data, field=None, bound=2000, extra=None):
    sp = ManinSpace(level, weight, sign)
    sym = cut_eigensymbol(sp, data)
    w = atkin_lehner_sign(sym)
    ev = {ell: hecke_eigenvalue(sym, ell) for ell in primes_upto(bound)}
    d = {"label": label, "level": level, "weight": weight,
         "hecke_poly": [str(c) for c in (field.h if field else (0, 1))],
         "eigenvalues": {str(k): enc(v) for k, v in sorted(ev.items())}, "w": w,
         "cut": [[l, enc(a)] for l, a in data]}
    d.update(extra or {})
    write(label, d)


def curves():
    for lab, p in (("11.a1", 5), ("14.a1", 3), ("37.a1", 3), ("43.a1", 3), ("389.a1", 3)):
        c = KNOWN_CURVES[lab]
        write(lab, {"label": lab, "ainvs": list(c.ainvs), "conductor": c.conductor, "p": p})


def main(argv):
    todo = set(argv) or {"curves", "5.4.a.a", "17.4.a.b", "15675.ba", "20787.e"}
    if "curves" in todo:
        curves()
    if "5.4.a.a" in todo:
        small(5, 4, -1, "5.4.a.a", [(2, -4)], bound=2000)
        write("5.4.a.a-chi61", {"label": "5.4.a.a x chi_61", "twist_of": "5.4.a.a",
                                "character": 61, "p": 3, "prime": {"e": 1, "f": 1}})
    if "17.4.a.b" in todo:
        K = NumberField([32, -24, -1, 1])
        small(17, 4, -1, "17.4.a.b", [(2, K.gen())], field=K, bound=1000,
              extra={"p": 3, "prime": {"e": 1, "f": 1}})
        write("17.4.a.b-chi13", {"label": "17.4.a.b x chi_13", "twist_of": "17.4.a.b",
                                 "character": 13, "p": 3, "prime": {"e": 1, "f": 1}})
    if "15675.ba" in todo:
        large(15675, "15675.ba")
    if "20787.e" in todo:
        large(20787, "20787.e")


if __name__ == "__main__":
    main(sys.argv[1:])
