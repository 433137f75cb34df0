from __future__ import annotations

import math
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oddgkm.exactalg import (
    ExactAlgebraError,
    HomogeneousPoly,
    divisibility_constraints,
    format_rational,
    is_divisible,
    kernel,
    monomial_basis,
    mat_vec,
    poly_multiply,
    poly_space_dim,
    primitive_integer_vector,
    rank_and_nullspace,
    to_rational,
)
from oracles import divisible_subspace_dim, fraction_rank

small = st.integers(min_value=-4, max_value=4)
rationals = st.fractions(min_value=-5, max_value=5, max_denominator=6)


def nonzero_vector(r):
    return st.lists(small, min_size=r, max_size=r).filter(any)


def poly(r, d):
    return st.lists(rationals, min_size=poly_space_dim(r, d), max_size=poly_space_dim(r, d)).map(
        lambda cs: HomogeneousPoly(r, d, tuple(cs)))


# -- rationals -----------------------------------------------------------------

def test_rational_parsing_and_formatting():
    assert to_rational("2/4") == Fraction(1, 2)
    assert to_rational(3) == 3
    assert format_rational(Fraction(2, 4)) == "1/2"
    assert format_rational(Fraction(-6, 3)) == -2
    with pytest.raises(ExactAlgebraError):
        to_rational(True)


def test_primitive_vector_rejects_zero():
    assert primitive_integer_vector([Fraction(1, 2), Fraction(-1, 3)]) == (3, -2)
    with pytest.raises(ExactAlgebraError, match="zero weight"):
        primitive_integer_vector([0, 0])


# -- monomials -----------------------------------------------------------------

def test_monomial_basis_examples():
    assert monomial_basis(2, 0).monomials == ((0, 0),)
    assert monomial_basis(2, 2).monomials == ((2, 0), (1, 1), (0, 2))
    assert monomial_basis(4, 4).size == 35


@given(st.integers(1, 5), st.integers(0, 6))
def test_monomial_basis_size_and_order(r, d):
    b = monomial_basis(r, d)
    assert b.size == math.comb(d + r - 1, r - 1)
    assert list(b.monomials) == sorted(b.monomials, reverse=True)
    assert all(sum(m) == d for m in b.monomials)
    assert monomial_basis(r, d) == b


def test_monomial_basis_rejects_rank_zero():
    with pytest.raises(ExactAlgebraError):
        monomial_basis(0, 1)


# -- rank and nullspace --------------------------------------------------------

def test_rank_examples():
    assert rank_and_nullspace([[1, 0, 0], [0, 1, 0], [0, 0, 1]]) == (3, [])
    rk, basis = rank_and_nullspace([[1, -1]])
    assert rk == 1 and len(basis) == 1
    assert basis[0][0] == basis[0][1] != 0
    assert rank_and_nullspace([], 4)[0] == 0
    assert len(rank_and_nullspace([], 4)[1]) == 4


def test_random_matrix_matches_fraction_elimination():
    rng = random.Random(7)
    for _ in range(20):
        mat = [[Fraction(rng.randint(-3, 3), rng.randint(1, 4)) for _ in range(8)] for _ in range(5)]
        rk, basis = rank_and_nullspace(mat)
        assert rk + len(basis) == 8
        assert rk == fraction_rank(mat)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 6), st.integers(1, 7), st.data())
def test_kernel_is_exact(m, n, data):
    rows = data.draw(st.lists(st.lists(small, min_size=n, max_size=n), min_size=m, max_size=m))
    k = kernel(rows, n)
    assert k.rank == fraction_rank(rows)
    assert k.rank + k.nullity == n
    for v in k.basis:
        assert all(x == 0 for x in mat_vec(rows, v))
    assert fraction_rank(k.basis) == k.nullity if k.basis else True
    shuffled = rows[:]
    data.draw(st.randoms()).shuffle(shuffled)
    assert kernel(shuffled, n).rank == k.rank


def test_kernel_of_rank_deficient_integer_matrix():
    k = kernel([[2, 4, 1], [1, 2, 3]], 3)
    assert k.rank == 2
    assert k.basis == [[-2, 1, 0]]


# -- polynomials ---------------------------------------------------------------

def x(i, r=2):
    return HomogeneousPoly.linear_form([int(j == i) for j in range(r)])


def test_products():
    assert str(poly_multiply(x(0), x(1))) == str(HomogeneousPoly.from_terms(2, 2, {(1, 1): 1}))
    diff = poly_multiply(x(0) - x(1), x(0) + x(1))
    assert diff == HomogeneousPoly.from_terms(2, 2, {(2, 0): 1, (0, 2): -1})
    p = poly_multiply(HomogeneousPoly.linear_form([1, 2]), HomogeneousPoly.linear_form([3, -1]))
    assert p.coeffs == (3, 5, -2)


def test_rank_mismatch():
    with pytest.raises(ExactAlgebraError):
        poly_multiply(x(0, 2), x(0, 3))


@settings(max_examples=40, deadline=None)
@given(poly(3, 1), poly(3, 2), poly(3, 1))
def test_multiplication_commutative_associative(a, b, c):
    assert poly_multiply(a, b) == poly_multiply(b, a)
    assert poly_multiply(poly_multiply(a, b), c) == poly_multiply(a, poly_multiply(b, c))


# -- divisibility ----------------------------------------------------------------

def nullity(rows, n):
    return n - fraction_rank(rows) if rows else n


def test_divisibility_examples():
    assert nullity(divisibility_constraints(2, 1, (1, -1)), 2) == 1
    rows = divisibility_constraints(2, 2, (1, 0))
    assert nullity(rows, 3) == 2
    for mono in ((2, 0), (1, 1)):
        assert is_divisible(HomogeneousPoly.from_terms(2, 2, {mono: 1}), (1, 0))
    assert not is_divisible(HomogeneousPoly.from_terms(2, 2, {(0, 2): 1}), (1, 0))
    assert nullity(divisibility_constraints(3, 3, (1, 1, 1)), 10) == 6
    assert divisible_subspace_dim(3, 3, (1, 1, 1)) == 6


def test_zero_weight_rejected():
    with pytest.raises(ExactAlgebraError, match="zero weight"):
        divisibility_constraints(2, 2, (0, 0))


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 3), st.integers(0, 4), st.data())
def test_divisible_subspace_dimension(r, d, data):
    alpha = data.draw(nonzero_vector(r))
    n = poly_space_dim(r, d)
    dim = nullity(divisibility_constraints(r, d, alpha), n)
    assert dim == (poly_space_dim(r, d - 1) if d >= 1 else 0)
    # sign invariance: identical kernels, hence the stacked system has the same rank
    rows = divisibility_constraints(r, d, alpha)
    neg = divisibility_constraints(r, d, [-a for a in alpha])
    assert fraction_rank(rows + neg) == fraction_rank(rows) == fraction_rank(neg)


@settings(max_examples=25, deadline=None)
@given(st.integers(2, 3), st.integers(1, 3), st.data())
def test_restriction_agrees_with_division_oracle(r, d, data):
    alpha = data.draw(nonzero_vector(r))
    n = poly_space_dim(r, d)
    assert nullity(divisibility_constraints(r, d, alpha), n) == divisible_subspace_dim(r, d, alpha)


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 3), st.integers(0, 3), st.data())
def test_products_with_the_form_are_divisible(r, d, data):
    alpha = data.draw(nonzero_vector(r))
    q = data.draw(poly(r, d))
    assert is_divisible(poly_multiply(HomogeneousPoly.linear_form(alpha), q), alpha)
