from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from fuchsian.errors import PreconditionError
from fuchsian.kernel import (Poly, crt, format_rational, mat_vec, modular_nullspace, parse_rational,
                             rational_nullspace, rational_reconstruct, word_primes)


def test_nullspace_rank_one():
    assert rational_nullspace([[1, 2], [2, 4]]) == [(2, -1)]


def test_nullspace_full_rank_is_empty():
    assert rational_nullspace([[1, 0, 0], [0, 1, 0], [0, 0, 1]]) == []


def test_nullspace_rejects_empty():
    with pytest.raises(PreconditionError):
        rational_nullspace([])


def test_nullspace_rank5_of_5x8():
    M = [[Fraction((3 * i + 5 * j) % 7 - 3, 1 + (i * j) % 4) for j in range(8)] for i in range(5)]
    M[4][4] += 1  # make sure the rank really is 5
    ker = rational_nullspace(M)
    assert len(ker) == 3
    for v in ker:
        assert all(x == 0 for x in mat_vec(M, v))


rationals = st.fractions(min_value=-50, max_value=50, max_denominator=30)


@given(st.lists(st.lists(rationals, min_size=4, max_size=4), min_size=1, max_size=4))
def test_nullspace_vectors_are_exact_and_canonical(M):
    ker = rational_nullspace(M)
    rank = 4 - len(ker)
    assert 0 <= rank <= len(M)
    for v in ker:
        assert all(x == 0 for x in mat_vec(M, v))
        assert all(isinstance(x, int) for x in v)
        assert next(x for x in v if x) > 0
        from math import gcd
        g = 0
        for x in v:
            g = gcd(g, x)
        assert g == 1


def test_reconstruct_examples():
    p = 10**9 + 7
    assert rational_reconstruct(pow(3, -1, p), p, 10**4) == Fraction(1, 3)
    assert rational_reconstruct(0, 101, 7) == 0
    # 5 = -2 mod 7, but -2 is out of reach with |p|, q <= 1
    assert rational_reconstruct(5, 7, 1) is None


def test_reconstruct_bound_precondition():
    # 2 * 2^2 > 7: uniqueness is not guaranteed, so the call is refused
    with pytest.raises(PreconditionError):
        rational_reconstruct(5, 7, 2)


@given(st.integers(-10**6, 10**6), st.integers(1, 10**6))
def test_reconstruct_roundtrip(num, den):
    q = Fraction(num, den)
    m = word_primes(1)[0] * word_primes(2)[1]
    bound = 10**6
    residue = q.numerator * pow(q.denominator, -1, m) % m
    assert rational_reconstruct(residue, m, bound) == q


@given(st.lists(st.integers(0, 10**12), min_size=1, max_size=3))
def test_crt(values):
    moduli = word_primes(len(values))
    x, m = crt([v % p for v, p in zip(values, moduli)], moduli)
    assert all(x % p == v % p for v, p in zip(values, moduli))
    assert 0 <= x < m


def test_modular_nullspace_matches_exact():
    M = [[1, 2, 3], [2, 4, 7]]
    p = word_primes(1)[0]
    pivots, basis = modular_nullspace(M, p)
    assert pivots == [0, 2]
    assert len(basis) == 1
    v = basis[0]
    assert all(sum(a * x for a, x in zip(row, v)) % p == 0 for row in M)


@given(rationals, rationals, rationals)
def test_rational_arithmetic_laws(a, b, c):
    assert (a + b) + c == a + (b + c)
    assert a * b == b * a
    assert a * (b + c) == a * b + a * c


@pytest.mark.parametrize("text,value", [("3", 3), ("-3/6", Fraction(-1, 2)), (" 7/2 ", Fraction(7, 2))])
def test_parse_rational(text, value):
    assert parse_rational(text) == value
    assert parse_rational(format_rational(value)) == value


@pytest.mark.parametrize("bad", ["1/0", "abc", "", "1.5/2"])
def test_parse_rational_rejects(bad):
    with pytest.raises(PreconditionError):
        parse_rational(bad)


def test_poly_basics():
    p = Poly.from_roots([1, 2])
    assert p.coeffs == (2, -3, 1)
    assert p(Fraction(1)) == 0
    assert p.shift(1).coeffs == (0, -1, 1)   # (w+1-1)(w+1-2)
    assert Poly((0, 0, 5)).valuation() == 2
