#!/usr/bin/env python3
"""Escape schedules from infinite-order elements."""
import pytest

from src.errors import ScheduleError, UndecidableBackend
from src.escape import (EventuallyPeriodic, InfiniteOrderWitness, compute_schedule, k_sequence, make_witness,
                        order_probe, self_intersection_scan, verify_escape, verify_prefix_lemma)


def schedule_for(graph, text, m_max=16, probe_bound=50):
    witness = make_witness(graph, graph.alphabet.parse_word(text), probe_bound)
    return witness, compute_schedule(graph, witness, m_max)


def test_z_generator(z):
    witness, schedule = schedule_for(z, '+1')
    assert witness.minimality_checked
    assert schedule.alpha[0] == frozenset({(0, 0)})
    assert schedule.gamma == {0: 0}
    assert schedule.escape_word == (1,)
    assert k_sequence(schedule, 5) == [-1, 0, 1, 2, 3, 4]
    assert verify_escape(z, schedule.escape_word, 2000)
    assert verify_prefix_lemma(z, schedule, witness, 200)


def test_dihedral_rotation(dihedral):
    witness, schedule = schedule_for(dihedral, 'ab')
    assert schedule.alpha[0] == frozenset()
    assert schedule.alpha[1] == frozenset({(0, 0)})
    assert schedule.gamma == {0: 1, 1: 0}
    assert schedule.period == (1, 2)
    assert schedule.escape_word == (0, 1)
    assert verify_escape(dihedral, schedule.escape(), 2000)
    assert verify_prefix_lemma(dihedral, schedule, witness, 200)


def test_dihedral_reflection_self_intersects(dihedral):
    assert self_intersection_scan(dihedral, EventuallyPeriodic((), (0,)), 10) == 2
    assert not verify_escape(dihedral, (0,), 10)


@pytest.mark.parametrize('name,element', [('z2', 'x+ y+'), ('f2', 'xy'), ('f2', 'xYxy'), ('z2', 'x+ x+ y-')])
def test_escapes_verify(request, name, element):
    graph = request.getfixturevalue(name)
    witness, schedule = schedule_for(graph, element)
    assert verify_escape(graph, schedule.escape(), 500)
    assert verify_prefix_lemma(graph, schedule, witness, 100)


# conjugates of y-words: the naive walk of a retraces its leading x
LOOPING = [
    ('xyX', {1: {(0, 1)}}, {0: 1, 1: 1, 2: 0}, (2, 2), 'y', 4),
    ('xyyX', {2: {(0, 1)}}, {0: 1, 1: 2, 2: 1, 3: 0}, (2, 3), 'yy', 5),
    ('xyXyyX', {4: {(0, 1)}}, {0: 1, 1: 2, 2: 3, 3: 4, 4: 1, 5: 0}, (2, 5), 'yXyy', 7),
]


@pytest.mark.parametrize('element,loops,gamma,period,escape,repeat', LOOPING)
def test_escape_skips_loops_of_naive_walk(f2, element, loops, gamma, period, escape, repeat):
    witness, schedule = schedule_for(f2, element)
    m = witness.m
    assert self_intersection_scan(f2, EventuallyPeriodic((), witness.word), 20) == repeat

    assert schedule.alpha[m - 1] == frozenset({(0, 0)})
    for r in range(m - 1):
        assert schedule.alpha[r] == frozenset(loops.get(r, set()))
    assert set(schedule.beta.values()) == {0}
    assert schedule.gamma == gamma
    assert schedule.period == period
    assert schedule.escape_word == f2.alphabet.parse_word(escape)

    assert verify_escape(f2, schedule.escape(), 2000)
    assert verify_prefix_lemma(f2, schedule, witness, 200)


def test_k_sequence_pauses_inside_loop(f2):
    _, schedule = schedule_for(f2, 'xyX')
    assert schedule.orbit == [2, 0, 1, 1]
    assert k_sequence(schedule, 4) == [-1, 0, 0, 1, 2]


def test_finite_order_rejected(dihedral):
    assert not order_probe(dihedral, (0,), 5)
    with pytest.raises(ValueError):
        make_witness(dihedral, (0,), 5)


def test_non_minimal_witness_flagged(z):
    witness = make_witness(z, (1, 1, 0), 20)
    assert not witness.minimality_checked
    assert witness.shorter_word == (1,)


def test_non_minimal_schedule_takes_latest_return(z):
    witness = make_witness(z, (1, 0, 1), 20)
    schedule = compute_schedule(z, witness, 4)
    assert schedule.alpha[0] == frozenset({(0, 0), (0, 2)})
    assert schedule.gamma == {0: 2, 1: 2, 2: 2}
    assert schedule.escape_word == (1,)
    assert verify_escape(z, schedule.escape(), 500)
    assert verify_prefix_lemma(z, schedule, witness, 50)


def test_finite_order_schedule_rejected(dihedral):
    with pytest.raises(ScheduleError):
        compute_schedule(dihedral, InfiniteOrderWitness((0,)), 4)


def test_schedule_table(dihedral):
    _, schedule = schedule_for(dihedral, 'ab')
    rows = schedule.table()
    assert [row['r'] for row in rows] == [0, 1]
    assert rows[1] == {'r': 1, 'alpha': [(0, 0)], 'beta': 0, 'gamma': 0}


def test_eventually_periodic():
    seq = EventuallyPeriodic((5,), (1, 2))
    assert seq.take(6) == (5, 1, 2, 1, 2, 1)
    assert seq[4] == 2
    with pytest.raises(ValueError):
        EventuallyPeriodic((), ())


def test_semi_decidable_rejected(presented):
    with pytest.raises(UndecidableBackend):
        make_witness(presented, (0,), 5)
    with pytest.raises(UndecidableBackend):
        self_intersection_scan(presented, EventuallyPeriodic((), (0,)), 5)


def test_verify_escape_counts_empty_prefix(dihedral):
    # e, a are distinct; e, a, aa are not
    assert verify_escape(dihedral, (0,), 1)
    assert not verify_escape(dihedral, (0,), 2)
    assert verify_escape(dihedral, (0,), 0)
