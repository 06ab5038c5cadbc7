#!/usr/bin/env python3
"""Word-problem oracles, alphabet validation and group files."""
import json
from itertools import product

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import GROUPS
from src.errors import BudgetExhausted, FiniteGroup, InvalidAlphabet, UndecidableBackend
from src.groups import (GeneratorAlphabet, GroupKind, WordVerdict, ball, canonicalize, group_from_dict,
                        load_group, validate_tape_graph, words_equal)


def parse(graph, text):
    return graph.alphabet.parse_word(text)


# ==================== canonicalize ====================

def test_free_abelian_vector_sum(z2):
    assert canonicalize(z2, parse(z2, 'x+ y+ x-')) == (0, 1)


def test_free_group_reduction(f2):
    assert canonicalize(f2, parse(f2, 'xX')) == ()


def test_dihedral_rewriting(dihedral):
    assert canonicalize(dihedral, parse(dihedral, 'aab')) == (1,)


def test_malformed_word_rejected(z):
    with pytest.raises(ValueError):
        canonicalize(z, (0, 5))


# ==================== words_equal ====================

def test_inverse_cancellation(z):
    assert words_equal(z, parse(z, '+1 -1'), ()) is WordVerdict.EQUAL


def test_dihedral_alternating_words_differ(dihedral):
    assert words_equal(dihedral, parse(dihedral, 'abab'), parse(dihedral, 'baba')) is WordVerdict.NOT_EQUAL


def test_free_group_non_commuting(f2):
    assert words_equal(f2, parse(f2, 'xy'), parse(f2, 'yx')) is WordVerdict.NOT_EQUAL


def test_free_abelian_commuting(z2):
    assert words_equal(z2, parse(z2, 'x+ y+'), parse(z2, 'y+ x+')) is WordVerdict.EQUAL


@settings(max_examples=200, deadline=None)
@given(u=st.lists(st.integers(0, 3), max_size=8), v=st.lists(st.integers(0, 3), max_size=8))
def test_equality_agrees_with_canonical_forms(f2, z2, u, v):
    for graph in (f2, z2):
        same = canonicalize(graph, u) == canonicalize(graph, v)
        assert (words_equal(graph, u, v) is WordVerdict.EQUAL) == same


# ==================== validation ====================

def test_z_is_a_valid_tape(z):
    report = validate_tape_graph(z)
    assert report.ok
    assert report.kind == GroupKind.FREE_ABELIAN.value
    assert set(report.restrictions) == {1, 2, 3, 4, 5, 6}


def test_missing_inverse_rejected():
    with pytest.raises(InvalidAlphabet):
        group_from_dict({'kind': 'free_abelian', 'generators': ['+1'], 'inverses': {}})


def test_missing_inverse_fixture_rejected():
    with pytest.raises(InvalidAlphabet):
        load_group(GROUPS / 'z_noinverse.json')


def test_finite_group_rejected():
    with pytest.raises(FiniteGroup):
        load_group(GROUPS / 'z5.json')


def test_free_group_needs_inverse_pairs():
    with pytest.raises(InvalidAlphabet):
        group_from_dict({'kind': 'free_group', 'generators': ['x'], 'inverses': {'x': 'x'}})


def test_dihedral_needs_involutions():
    with pytest.raises(InvalidAlphabet):
        group_from_dict({'kind': 'infinite_dihedral', 'generators': ['a', 'b'], 'inverses': {'a': 'b'}})


def test_vectors_must_cancel():
    # both generators step +1, so p*q is not the identity
    data = {'kind': 'free_abelian', 'generators': ['p', 'q'], 'inverses': {'p': 'q'},
            'vectors': {'p': [1], 'q': [1]}}
    with pytest.raises(InvalidAlphabet):
        group_from_dict(data)


def test_unknown_kind_rejected():
    with pytest.raises(ValueError):
        group_from_dict({'kind': 'lattice', 'generators': ['a'], 'inverses': {'a': 'a'}})


def test_default_vectors():
    graph = group_from_dict({'kind': 'free_abelian', 'generators': ['u', 'U', 'v', 'V'],
                             'inverses': {'u': 'U', 'v': 'V'}})
    assert graph.backend.vectors == ((1, 0), (-1, 0), (0, 1), (0, -1))


# ==================== ball ====================

def test_ball_z(z):
    assert ball(z, 2) == frozenset({(-2,), (-1,), (0,), (1,), (2,)})


def test_ball_z2(z2):
    assert len(ball(z2, 1)) == 5


def test_ball_dihedral(dihedral):
    assert ball(dihedral, 2) == frozenset({(), (0,), (1,), (0, 1), (1, 0)})


def test_ball_rejects_presented(presented):
    with pytest.raises(UndecidableBackend):
        ball(presented, 1)


# ==================== finitely presented ====================

def test_presented_commutator_equal(presented):
    assert words_equal(presented, parse(presented, 'xy'), parse(presented, 'yx')) is WordVerdict.EQUAL


def test_presented_never_answers_not_equal(presented):
    assert words_equal(presented, parse(presented, 'x'), parse(presented, 'y')) is WordVerdict.UNKNOWN
    assert not validate_tape_graph(presented).decidable


def test_presented_budget_exhausted():
    with open(GROUPS / 'z2_presented.json', 'r', encoding='utf-8') as f:
        data = json.load(f)
    data['budget'] = 1
    graph = group_from_dict(data)
    with pytest.raises(BudgetExhausted):
        graph.backend.canonicalize(parse(graph, 'xyXY'))
    assert words_equal(graph, parse(graph, 'xy'), parse(graph, 'yx')) is WordVerdict.UNKNOWN


# ==================== word syntax ====================

def test_parse_and_format(z, f2):
    assert parse(z, '+1 +1,-1') == (1, 1, 0)
    assert parse(z, '+1-1') == (1, 0)
    assert parse(f2, 'ε') == ()
    assert f2.alphabet.format_word((0, 2)) == 'xy'
    assert z.alphabet.format_word((1, 0)) == '+1 -1'
    assert f2.alphabet.format_word(()) == 'ε'


def test_parse_unknown_generator(f2):
    with pytest.raises(ValueError):
        parse(f2, 'xq')


def test_alphabet_inverse_word():
    alphabet = GeneratorAlphabet.from_names(['x', 'X', 'y', 'Y'], {'x': 'X', 'y': 'Y'})
    assert alphabet.inverse_word((0, 2)) == (3, 1)
    assert alphabet.is_involution()


@pytest.mark.parametrize('name', ['z', 'z2', 'f2', 'dihedral'])
def test_generator_times_inverse_is_identity(name):
    graph = load_group(GROUPS / f'{name}.json')
    for g in range(graph.alphabet.size):
        assert canonicalize(graph, (g, graph.alphabet.inverse(g))) == graph.identity()


def test_canonical_forms_are_hashable(tape):
    forms = {canonicalize(tape, w) for w in product(range(tape.alphabet.size), repeat=2)}
    assert tape.identity() in forms


# ==================== exhaustive checks ====================

Z2_STEPS = {'x-': (-1, 0), 'x+': (1, 0), 'y-': (0, -1), 'y+': (0, 1)}
DIHEDRAL_MAPS = {'a': lambda n: -n, 'b': lambda n: 1 - n}


def reference_value(name, graph, word):
    """The element of `word` computed without the backends: sums, free reduction, affine maps of Z"""
    names = [graph.alphabet.symbols[g] for g in word]
    if name == 'z':
        return sum(1 if s == '+1' else -1 for s in names)
    if name == 'z2':
        return tuple(map(sum, zip((0, 0), *(Z2_STEPS[s] for s in names))))
    if name == 'f2':
        stack = []
        for g in word:
            if stack and stack[-1] == graph.alphabet.inverse(g):
                stack.pop()
            else:
                stack.append(g)
        return tuple(stack)
    points = (0, 1)
    for s in names:
        points = tuple(DIHEDRAL_MAPS[s](p) for p in points)
    return points


def words_by_length(size, longest):
    return {n: list(product(range(size), repeat=n)) for n in range(longest + 1)}


@pytest.mark.parametrize('name', ['z', 'z2', 'f2', 'dihedral'])
def test_equality_exhaustive_on_short_pairs(request, name):
    graph = request.getfixturevalue(name)
    words = words_by_length(graph.alphabet.size, 6)
    value = {w: reference_value(name, graph, w) for ws in words.values() for w in ws}
    for left in range(7):
        for right in range(7 - left):
            for u in words[left]:
                for v in words[right]:
                    expected = WordVerdict.EQUAL if value[u] == value[v] else WordVerdict.NOT_EQUAL
                    assert words_equal(graph, u, v) is expected


def test_cancelling_a_generator_pair(tape):
    inverse = tape.alphabet.inverse
    for ws in words_by_length(tape.alphabet.size, 4).values():
        for w in ws:
            for g in range(tape.alphabet.size):
                assert words_equal(tape, w + (g, inverse(g)), w) is WordVerdict.EQUAL


def test_balls_grow_strictly(tape):
    balls = [ball(tape, r) for r in range(8)]
    for smaller, larger in zip(balls, balls[1:]):
        assert smaller < larger


@pytest.mark.parametrize('name,size', [
    ('z', lambda r: 2 * r + 1),
    ('dihedral', lambda r: 2 * r + 1),
    ('z2', lambda r: 2 * r * r + 2 * r + 1),
    ('f2', lambda r: 2 * 3 ** r - 1),
])
def test_ball_sizes(request, name, size):
    graph = request.getfixturevalue(name)
    assert [len(ball(graph, r)) for r in range(7)] == [size(r) for r in range(7)]
