from fractions import Fraction

import pytest
import flint
from hypothesis import assume, given, strategies as st

from kurinum.arith import NumberField
from kurinum.localfield import (INFINITY, AmbiguousSelector, AtLeast, LocalValue,
                                PrecisionError, _factor_local, integral_coords, reduce_mod,
                                split_prime, valuation, valuation_by_resultant)

CUBIC = [32, -24, -1, 1]          # x^3 - x^2 - 24x + 32, Hecke field of 17.4.a.b


def sympy_ef(h, p):
    """(e, f) pairs from the factorization mod p: a crude oracle, valid when
    the polynomial is p-maximal, which holds for the fields used here."""
    _, facs = flint.nmod_poly(h, p).factor()
    return sorted((e, g.degree()) for g, e in facs)


@pytest.mark.parametrize("h,p", [([-7, 0, 1], 3), ([1, 0, 1], 3), ([-3, 0, 1], 3),
                                 (CUBIC, 3), (CUBIC, 5), ([-2, 0, 0, 1], 7)])
def test_splitting_matches_factorization(h, p):
    ef = [(lf.e, lf.f) for lf in _factor_local(h, p, 20)]
    assert sorted(ef) == sympy_ef(h, p)


def test_cubic_has_two_primes_above_3():
    L = split_prime(3, CUBIC, {"e": 1, "f": 1})
    assert (L.e, L.f_res) == (1, 1)
    assert len(L.factors) == 2


def test_ambiguous_selector():
    with pytest.raises(AmbiguousSelector):
        split_prime(3, [-7, 0, 1])
    L = split_prime(3, [-7, 0, 1], {"root": 1})
    K = NumberField([-7, 0, 1])
    s = K([0, 1])
    # s = 1 mod the chosen prime, so s - 1 has positive valuation there
    assert valuation(s - 1, L) >= 1 and valuation(s + 1, L) == 0


def test_ramified_valuation():
    L = split_prime(3, [-3, 0, 1])
    K = NumberField([-3, 0, 1])
    s = K([0, 1])
    assert L.e == 2
    assert valuation(s, L) == 1
    assert valuation(K([3]), L) == 2
    assert valuation(s * 3 / 2, L) == 3


fields = st.sampled_from([([-3, 0, 1], 3, None), (CUBIC, 3, {"e": 1, "f": 1}),
                          ([1, 0, 1], 3, None), ([-7, 0, 1], 3, {"root": 1}),
                          ([-2, 0, 0, 1], 5, {"e": 1, "f": 1})])
coef = st.integers(-50, 50)


@given(fields, st.lists(coef, min_size=3, max_size=3), st.lists(coef, min_size=3, max_size=3))
def test_valuation_is_additive(fd, a, b):
    h, p, sel = fd
    L = split_prime(p, h, sel)
    K = NumberField(h)
    x, y = K(a[:K.degree]), K(b[:K.degree])
    assume(not x.is_zero() and not y.is_zero())
    assert valuation(x * y, L) == valuation(x, L) + valuation(y, L)


@given(fields, st.lists(coef, min_size=3, max_size=3))
def test_valuation_two_routes(fd, a):
    # Hensel-lifted local image versus the norm to the completion
    h, p, sel = fd
    L = split_prime(p, h, sel)
    K = NumberField(h)
    x = K(a[:K.degree])
    assume(not x.is_zero())
    v = valuation(x, L)
    assert v == valuation_by_resultant(x, L)


def test_rational_values():
    L = split_prime(3, [0, 1])
    assert valuation(Fraction(9, 2), L) == 2
    assert valuation(0, L) is INFINITY
    assert valuation(LocalValue(None, 3, (0,)), L) == AtLeast(3)
    assert valuation(LocalValue(None, 3, (18,)), L) == 2
    assert reduce_mod(Fraction(1, 2), 2, L) == (5,)


def test_integral_coords_errors():
    L = split_prime(3, [0, 1])
    with pytest.raises(ValueError):
        integral_coords(Fraction(1, 3), L, 2)
    with pytest.raises(PrecisionError):
        integral_coords(Fraction(7), L, 21)
    # integral elements are known to precision_M digits, whatever their valuation
    with pytest.raises(PrecisionError):
        integral_coords(Fraction(3 ** 5), L, 21)
    assert integral_coords(Fraction(3 ** 5), L, 20) == [3 ** 5]
    assert integral_coords(Fraction(7, 9) * 9, L, 20) == [7]
