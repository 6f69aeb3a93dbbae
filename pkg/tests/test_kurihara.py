from fractions import Fraction

import pytest

from kurinum.forms import load_descriptor
from kurinum.kolyvagin import admissible_primes, is_admissible, make_modulus
from kurinum.kurihara import (SignMismatch, TwistedMinimalSymbol, delta_one_valuation,
                              kurihara_number, scan, twist_lambda)
from kurinum.localfield import INFINITY, reduce_mod, split_prime, valuation
from kurinum.msym import ManinSpace, cut_eigensymbol, evaluate_lambda
from kurinum.periods import minimal_normalization, normalized_lambda
from oracles import brute_dlog

L3 = split_prime(3, [0, 1])


@pytest.fixture(scope="module")
def f43():
    f = load_descriptor("43.a1")
    sym = cut_eigensymbol(ManinSpace(43, 2, 1), f.eigen_data(4))
    return f, sym, minimal_normalization(sym, L3)


@pytest.fixture(scope="module")
def f389():
    f = load_descriptor("389.a1")
    sym = cut_eigensymbol(ManinSpace(389, 2, 1), f.eigen_data(6))
    return f, sym, minimal_normalization(sym, L3)


def test_minimal_normalization_is_integral_with_a_unit(f389):
    _, _, phi = f389
    vals = [v for v in phi.valuations() if v is not INFINITY]
    assert min(vals) == 0


def test_per_r_shift_is_not_larger(f43):
    _, sym, phi = f43
    alt = minimal_normalization(sym, L3, per_r=1, scan_bound=30)
    # the scanned lambda values are among all values, so their minimum is not smaller
    assert alt.shift_m <= phi.shift_m


def exact_delta(phi, mod, r):
    """delta~_n from exact lambda values and brute-force discrete logs."""
    n = mod.n
    acc = Fraction(0)
    for a in range(1, n):
        from math import gcd
        if gcd(a, n) != 1:
            continue
        w = 1
        for q in mod.primes:
            w *= brute_dlog(q.eta, a, q.ell)
        acc += normalized_lambda(phi, r - 1, a, n).representative * w
    return acc


def test_kurihara_number_two_routes(f43):
    f, _, phi = f43
    for q in admissible_primes(f, L3, 1, 120):
        mod = make_modulus([q])
        k = kurihara_number(phi, mod, 1)
        m = mod.In_exp
        assert k.value.residue == reduce_mod(exact_delta(phi, mod, 1), m, L3)


def test_kurihara_number_two_routes_nu2(f389):
    f, _, phi = f389
    mod = make_modulus(admissible_primes(f, L3, 1, 80)[:2])
    k = kurihara_number(phi, mod, 1)
    assert k.value.residue == reduce_mod(exact_delta(phi, mod, 1), mod.In_exp, L3)


def test_wrong_parity_vanishes(f43):
    f, _, phi = f43
    qs = admissible_primes(f, L3, 1, 150)
    assert kurihara_number(phi, make_modulus(()), 1).val is INFINITY
    for i in range(len(qs)):
        for j in range(i + 1, len(qs)):
            k = kurihara_number(phi, make_modulus([qs[i], qs[j]]), 1, w=-1)
            assert k.predicted_zero and not k.nonzero


def test_sign_mismatch(f43):
    _, _, phi = f43
    with pytest.raises(SignMismatch):
        kurihara_number(phi, make_modulus(()), 2)


@pytest.mark.parametrize("seed", [1, 2])
def test_primitive_root_choice(f43, seed):
    f, _, phi = f43
    for q0, q1 in zip(admissible_primes(f, L3, 1, 200), admissible_primes(f, L3, 1, 200, seed)):
        a = kurihara_number(phi, make_modulus([q0]), 1).val
        b = kurihara_number(phi, make_modulus([q1]), 1).val
        assert a == b


def test_scan_workers_agree(f43):
    f, _, phi = f43
    one = scan(phi, L3, 1, [1, 2], 150, f, 1, -1, include_predicted_zero=True)
    two = scan(phi, L3, 1, [1, 2], 150, f, 1, -1, include_predicted_zero=True, workers=2)
    assert one.jsonl() == two.jsonl()
    assert one.summary()[2].endswith("(< 150)")


def test_delta_one_for_11():
    f = load_descriptor("11.a1")
    sym = cut_eigensymbol(ManinSpace(11, 2, 1), f.eigen_data(3))
    L5 = split_prime(5, [0, 1])
    phi = minimal_normalization(sym, L5)
    assert delta_one_valuation(phi, 1) == valuation(evaluate_lambda(sym, 0, 0, 1), L5) + phi.shift_m
    # the symbol of X_0(11) takes the value 1/5 at {oo, 0} relative to its
    # integral values, so the minimal one has a unit there
    assert delta_one_valuation(phi, 1) == 0


def test_twisted_values_match_exact_twist():
    f0 = load_descriptor("11.a1")
    sym = cut_eigensymbol(ManinSpace(11, 2, 1), f0.eigen_data(3))
    L = split_prime(3, [0, 1])
    phi = minimal_normalization(sym, L)
    chi = load_descriptor("5.4.a.a-chi61").twist[1].__class__(5)
    tw = TwistedMinimalSymbol(phi, chi, digits=6)
    d = 4
    scale = Fraction(3) ** tw.shift_m
    for n in (1, 2, 3, 4, 7, 8):
        for a in range(n):
            got = tw.lambda_sums(0, [a], n, n, [a], [1], d)
            want = twist_lambda(phi, chi, 0, a, n) * scale
            assert tuple(got) == reduce_mod(want, d, L)
