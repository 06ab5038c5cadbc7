#!/usr/bin/env python3
"""Truncated F2 polynomials, relators from even subwords, ideal membership and Golod-Shafarevich."""
from fractions import Fraction
from itertools import product

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from src.algebra import (GENERATOR_EXPONENT, HomogeneousBasis, TruncatedPoly, binomial_inverse_check,
                         binomial_product, bound_shaped_counts, construction_alphabet,
                         construction_window_violations, corollary_bound_check, distinctness_witness,
                         expand_group_word, format_monomial, gs_positive_through, gs_series_coefficients,
                         ideal_membership, parse_monomial, poly_from_strings, relator_from_even_subword,
                         relators_for_sequence, row_reduce_gf2, standard_basis)
from src.errors import DimensionOverflow, LowDegreeResidue
from src.words import even_subword_search


def poly(terms, d=2, D=16):
    return poly_from_strings(terms, d, D)


# ==================== arithmetic ====================

def test_characteristic_two():
    f = poly(['1', 'x1'])
    assert (f + f).is_zero()
    assert f * f == poly(['1', 'x1^2'])


def test_non_commuting():
    x, y = TruncatedPoly.variable(0, 2, 4), TruncatedPoly.variable(1, 2, 4)
    assert x * y != y * x


def test_truncation():
    f = poly(['1', 'x1'], d=1, D=2)
    assert (f ** 3) == poly(['1', 'x1', 'x1^2'], d=1, D=2)
    assert poly(['x1^3'], d=1, D=2).is_zero()


def test_mixed_algebras_rejected():
    with pytest.raises(ValueError):
        poly(['x1'], d=1) + poly(['x1'], d=2)


def test_monomial_syntax():
    assert format_monomial((0, 0, 1)) == 'x1^2*x2'
    assert parse_monomial('x1^2*x2') == (0, 0, 1)
    assert parse_monomial('1') == ()
    with pytest.raises(ValueError):
        parse_monomial('y3')


# ==================== construction symbols ====================

def test_construction_alphabet():
    names = [s.name for s in construction_alphabet(2)]
    assert names == ['a', 'A', 'b', 'B']
    assert construction_alphabet(1)[1].exponent == 15


@pytest.mark.parametrize('d', [1, 2, 3])
def test_binomial_inverse(d):
    for i in range(1, d + 1):
        assert binomial_inverse_check(i, 16, d)


def test_binomial_product_values():
    assert binomial_product(1, 16) == poly(['1', 'x1^16'], d=1)
    assert binomial_product(1, 15) == TruncatedPoly.one(1, 15)


def test_expand_group_word():
    assert expand_group_word(['a'], 4) == poly(['1', 'x1'], d=1, D=4)
    assert expand_group_word(['a', 'b'], 2) == poly(['1', 'x1', 'x2', 'x1*x2'], D=2)
    with pytest.raises(ValueError):
        expand_group_word(['a', 'z'], 4, 2)


# ==================== relators ====================

def test_relator_from_square():
    assert relator_from_even_subword(['a', 'a'], 1, 4) == [poly(['x1^2'], d=1, D=4)]


def test_relator_residue():
    with pytest.raises(LowDegreeResidue) as info:
        relator_from_even_subword(['a'], 1, 4)
    assert info.value.degrees == (1,)


def test_relator_components_start_above_depth():
    parts = relator_from_even_subword(list('abab'), 1, 4)
    assert parts and min(p.max_degree() for p in parts) >= 2
    assert all(p.is_homogeneous() for p in parts)


def test_relator_expands_fifteenth_powers():
    # (1 + x1)^60 = (1 + x1^4)(1 + x1^8)... over F2
    assert relator_from_even_subword(list('AAAA'), 2, 5, 2) == [poly(['x1^4'], d=2, D=5)]


CONSTRUCTION_LETTERS = ['a', 'A', 'b', 'B']
construction_words = st.text(alphabet='aAbB', max_size=8)


@settings(max_examples=100, deadline=None)
@given(prefix=construction_words, block=st.text(alphabet='aAbB', min_size=1, max_size=4), suffix=construction_words)
def test_even_subwords_leave_no_residue(prefix, block, suffix):
    # a fourth power is even at depth 2, so every draw yields a relator
    s = prefix + block * 4 + suffix
    found = even_subword_search(s, 2, CONSTRUCTION_LETTERS)
    assert found is not None
    i, j = found
    parts = relator_from_even_subword(list(s[i:j + 1]), 2, 5, 2)
    assert all(p.max_degree() > 2 for p in parts)


def test_relators_for_sequence():
    interval, parts = relators_for_sequence(list('abab'), 2, 1, 4)
    assert interval == (0, 3)
    assert all(p.max_degree() >= 2 for p in parts)
    assert relators_for_sequence(list('ab'), 2, 1, 4) is None


# ==================== ideal membership ====================

def test_generator_is_member():
    basis = HomogeneousBasis((poly(['x1^16'], d=1),))
    assert ideal_membership(poly(['x1^16'], d=1), basis, 16)


def test_two_sided_multiple_is_member():
    basis = HomogeneousBasis((poly(['x1^16'], D=18),))
    assert ideal_membership(poly(['x1^17*x2'], D=18), basis, 18)


def test_low_degree_is_not_member():
    assert not ideal_membership(poly(['x1*x2']), standard_basis(2), 16)


def test_standard_basis_window():
    assert construction_window_violations(standard_basis(2), 2) == []
    low = HomogeneousBasis((poly(['x1^2'], D=4),))
    assert construction_window_violations(low, 2)


def test_dimension_cap():
    basis = HomogeneousBasis((poly(['x1^2'], D=4),))
    with pytest.raises(DimensionOverflow):
        ideal_membership(poly(['x1^4'], D=4), basis, 4, cap=10)


def test_row_reduce_gf2():
    A = np.array([[1, 1, 0], [1, 1, 0], [0, 1, 1]], dtype=np.uint8)
    echelon = row_reduce_gf2(A)
    assert echelon.shape == (2, 3)
    assert list(echelon[0]) == [1, 1, 0]
    assert list(echelon[1]) == [0, 1, 1]


def test_distinctness():
    basis = standard_basis(2)
    assert distinctness_witness(['a'], ['b'], basis, 16)
    assert not distinctness_witness(['a', 'b'], ['a', 'b'], basis, 16)
    assert not distinctness_witness(['a', 'A'], [], HomogeneousBasis((poly(['x1^16'], d=1),)), 16, d=1)


def monomials_of_degree(d, e):
    return list(product(range(d), repeat=e))


def brute_ideal_contains(f, basis, D):
    """Enumerate m1 * g * m2 for every basis element and XOR-eliminate over Python ints"""
    d = f.d
    for e, part in f.components().items():
        index = {m: k for k, m in enumerate(monomials_of_degree(d, e))}
        pivots = {}
        for g in basis.polys:
            k = g.max_degree()
            for left_len in range(e - k + 1):
                for left in monomials_of_degree(d, left_len):
                    for right in monomials_of_degree(d, e - k - left_len):
                        m1 = TruncatedPoly(frozenset({left}), d, D)
                        m2 = TruncatedPoly(frozenset({right}), d, D)
                        row = sum(1 << index[m] for m in (m1 * g * m2).monomials)
                        while row:
                            top = row.bit_length() - 1
                            if top not in pivots:
                                pivots[top] = row
                                break
                            row ^= pivots[top]
        target = sum(1 << index[m] for m in part.monomials)
        while target:
            top = target.bit_length() - 1
            if top not in pivots:
                return False
            target ^= pivots[top]
    return True


def homogeneous(d, degree):
    return st.sets(st.sampled_from(monomials_of_degree(d, degree)), min_size=1, max_size=3)


@st.composite
def toy_instances(draw):
    generators = []
    for _ in range(draw(st.integers(1, 2))):
        degree = draw(st.integers(2, 3))
        generators.append(TruncatedPoly(frozenset(draw(homogeneous(2, degree))), 2, 6))
    f_degree = draw(st.integers(2, 6))
    f = TruncatedPoly(frozenset(draw(homogeneous(2, f_degree))), 2, 6)
    if draw(st.booleans()):
        # force a member now and then
        g = generators[0]
        slack = f_degree - g.max_degree()
        if slack >= 0:
            left = draw(st.sampled_from(monomials_of_degree(2, slack)))
            f = TruncatedPoly(frozenset({left}), 2, 6) * g
    return HomogeneousBasis(tuple(generators)), f


@settings(max_examples=50, deadline=None)
@given(instance=toy_instances())
def test_membership_matches_brute_force(instance):
    basis, f = instance
    assert ideal_membership(f, basis, 6) == brute_ideal_contains(f, basis, 6)


# ==================== Golod-Shafarevich ====================

def test_gs_geometric():
    assert gs_series_coefficients(2, {}, 5) == [1, 2, 4, 8, 16, 32]


def test_gs_recurrence():
    assert gs_series_coefficients(1, {2: 1}, 4) == [1, 1, 0, -1, -1]
    assert gs_series_coefficients(2, {2: 1}, 4) == [1, 2, 3, 4, 5]


def test_gs_rejects_low_degrees():
    with pytest.raises(ValueError):
        gs_series_coefficients(2, {1: 1}, 3)


def test_gs_bound_shaped_counts_stay_positive():
    r = bound_shaped_counts(2, Fraction(1, 4), 11, 50)
    assert r[11] == 2
    assert corollary_bound_check(2, Fraction(1, 4), r)
    assert gs_positive_through(2, r, 50)


def test_corollary_instance():
    eps = Fraction(1, 4)
    assert corollary_bound_check(2, eps, {i: 2 for i in range(11, 60)})
    assert not corollary_bound_check(2, eps, {10: 2})
    assert not corollary_bound_check(2, eps, {5: 2})
    with pytest.raises(ValueError):
        corollary_bound_check(2, Fraction(1), {})


def test_gs_negative_coefficient():
    assert gs_positive_through(2, {2: 2}, 3)
    assert not gs_positive_through(2, {2: 2}, 4)


def test_generator_degree_is_sixteen():
    assert GENERATOR_EXPONENT == 16
    assert standard_basis(3).counts == {16: 3}
