from fractions import Fraction

import pytest
import sympy
from hypothesis import given, strategies as st

from kurinum.arith import (ExactMatrix, NumberField, crt_pair, kernel_basis, kronecker,
                           nullspace_mod, rational_reconstruct, resultant, rref,
                           solve_linear, valuation_int)

small = st.integers(-20, 20)
matrices = st.integers(1, 5).flatmap(
    lambda r: st.integers(1, 5).flatmap(
        lambda c: st.lists(st.lists(small, min_size=c, max_size=c), min_size=r, max_size=r)))


def test_rref_trivial():
    R, piv = rref(ExactMatrix([[1, 0], [0, 1]]))
    assert R == ExactMatrix.identity(2) and piv == [0, 1]
    R, piv = rref(ExactMatrix([[1, 2], [2, 4]]))
    assert R.tolist() == [[1, 2], [0, 0]] and piv == [0]


def test_empty_matrix_rejected():
    with pytest.raises(ValueError):
        ExactMatrix([], 0)


@given(matrices)
def test_rref_matches_sympy(rows):
    R, piv = rref(ExactMatrix(rows))
    S, spiv = sympy.Matrix(rows).rref()
    assert piv == list(spiv)
    assert [[Fraction(int(x.p), int(x.q)) for x in S.row(i)] for i in range(S.rows)] == R.tolist()


@given(matrices)
def test_kernel_vectors_are_killed(rows):
    M = ExactMatrix(rows)
    ker = kernel_basis(M)
    assert len(ker) == M.ncols - len(rref(M)[1])
    for v in ker:
        assert all(sum(Fraction(a) * x for a, x in zip(r, v)) == 0 for r in rows)


@given(matrices, st.lists(small, min_size=5, max_size=5))
def test_solve_linear(rows, x0):
    M = ExactMatrix(rows)
    b = [sum(a * x for a, x in zip(r, x0)) for r in rows]
    x = solve_linear(M, b)
    assert x is not None
    assert [sum(Fraction(a) * y for a, y in zip(r, x)) for r in rows] == b


def test_solve_inconsistent():
    assert solve_linear(ExactMatrix([[1, 1], [1, 1]]), [0, 1]) is None


def test_number_field_entries():
    # over Q(sqrt 2) the matrix [[s, 2], [1, s]] is singular since s^2 = 2
    K = NumberField([-2, 0, 1])
    s = K([0, 1])
    R, piv = rref(ExactMatrix([[s, 2], [1, s]]))
    assert piv == [0]
    (v,) = kernel_basis(ExactMatrix([[s, 2], [1, s]]))
    assert v[0] == -s and v[1] == 1
    _, piv = rref(ExactMatrix([[s, 1], [1, s]]))
    assert piv == [0, 1]


polys = st.lists(st.integers(-9, 9), min_size=2, max_size=6).filter(lambda a: a[-1] != 0)


def sylvester_det(a, b):
    # oracle: determinant of the Sylvester matrix (sympy's resultant() gets
    # Res(x + 1, x^3) wrong, so it is not used here)
    m, n = len(a) - 1, len(b) - 1
    ra, rb = a[::-1], b[::-1]
    rows = [[0] * i + ra + [0] * (n - 1 - i) for i in range(n)]
    rows += [[0] * i + rb + [0] * (m - 1 - i) for i in range(m)]
    return sympy.Matrix(rows).det(method="bareiss")


@given(polys, polys)
def test_resultant_matches_sylvester(a, b):
    assert resultant(a, b) == sylvester_det(a, b)


def test_resultant_small():
    assert resultant([1, 1], [0, 0, 0, 1]) == -1
    assert resultant([-2, 0, 1], [-3, 0, 1]) == 1


@given(st.integers(-10 ** 6, 10 ** 6).filter(bool), st.sampled_from([2, 3, 5, 7]))
def test_valuation_int(x, p):
    v = valuation_int(x, p)
    assert x % p ** v == 0 and (x // p ** v) % p


def test_valuation_of_fraction():
    assert valuation_int(Fraction(18, 5), 3) == 2
    assert valuation_int(Fraction(5, 27), 3) == -3


@given(st.integers(0, 10 ** 6), st.integers(0, 10 ** 6))
def test_crt(a, b):
    m1, m2 = 1000003, 999983
    r, m = crt_pair(a % m1, m1, b % m2, m2)
    assert m == m1 * m2 and r % m1 == a % m1 and r % m2 == b % m2


@given(st.integers(-1000, 1000), st.integers(1, 1000))
def test_rational_reconstruct(n, d):
    q = 2 ** 61 - 1
    f = Fraction(n, d)
    a = f.numerator * pow(f.denominator, -1, q) % q
    assert rational_reconstruct(a, q) == f


@given(st.integers(-200, 200), st.integers(1, 300))
def test_kronecker_matches_sympy_jacobi(d, n):
    if n % 2:
        assert kronecker(d, n) == sympy.jacobi_symbol(d % n, n)


def test_kronecker_at_two():
    # (d/2) = 0 for even d, +1 for d = +-1 mod 8, -1 for d = +-3 mod 8
    assert [kronecker(d, 2) for d in (1, 3, 5, 7, 8, -3)] == [1, -1, -1, 1, 0, -1]


def test_nullspace_mod():
    q = 101
    rows = [[1, 2, 3], [2, 4, 6]]
    ker = nullspace_mod(rows, q)
    assert len(ker) == 2
    for v in ker:
        assert all(sum(a * x for a, x in zip(r, v)) % q == 0 for r in rows)
