import pytest
from hypothesis import given, strategies as st

from refti.perception import (
    ContestRecord,
    MemoryStore,
    direct_assessment,
    observe,
    pair_assessment,
    sign_of,
)

A, B, C, D, E, F = range(6)


def rec(t, w, l):
    return ContestRecord(t, min(w, l), max(w, l), w)


def test_sign():
    assert (sign_of(2), sign_of(0), sign_of(-2)) == (1, 0, -1)


def test_record_validation():
    with pytest.raises(ValueError):
        ContestRecord(0, 1, 1, 1)
    with pytest.raises(ValueError):
        ContestRecord(0, 1, 2, 3)
    assert ContestRecord(0, 1, 2, 2).loser == 1
    assert ContestRecord(0, 1, 2).loser is None


def test_own_contest_always_visible():
    store = observe(MemoryStore(14), rec(0, A, B), A, frozenset())
    assert list(store) == [rec(0, A, B)]


def test_contest_of_reference_member_is_visible():
    store = observe(MemoryStore(14), rec(0, D, C), A, frozenset({D, E, F}))
    assert len(store) == 1


def test_unrelated_contest_is_not_visible():
    store = observe(MemoryStore(14), rec(0, B, C), A, frozenset({D, E, F}))
    assert len(store) == 0


def test_dove_dove_never_stored():
    store = observe(MemoryStore(14), ContestRecord(0, A, B), A, frozenset())
    assert len(store) == 0


def test_fifo_eviction():
    store = MemoryStore(14)
    for t in range(15):
        observe(store, rec(t, A, B), A)
    times = [r.time for r in store]
    assert len(store) == 14 and 0 not in times and 14 in times


def test_time_must_increase():
    store = MemoryStore(3, [rec(5, A, B)])
    with pytest.raises(ValueError):
        store.push(rec(5, A, C))


def test_split_budgets():
    store = MemoryStore(2, owner=A)
    for r in [rec(0, A, B), rec(1, C, D), rec(2, D, C), rec(3, B, A), rec(4, C, E)]:
        store.push(r)
    assert [r.time for r in store.own_records] == [0, 3]
    assert [r.time for r in store.observed_records] == [2, 4]
    assert [r.time for r in store] == [0, 2, 3, 4]


def test_direct_assessment_examples():
    store = MemoryStore(14, [rec(0, A, B)])
    assert direct_assessment(store, A, B) == -1
    store.push(rec(1, B, A))
    assert direct_assessment(store, A, B) == 0
    assert direct_assessment(MemoryStore(14), A, B) == 0


def test_only_sign_matters():
    store = MemoryStore(None, [rec(t, B, A) for t in range(5)] + [rec(5, A, B)])
    assert direct_assessment(store, A, B) == 1


def test_pair_assessment_examples():
    assert pair_assessment(MemoryStore(14, [rec(0, D, C)]), C, D) == -1
    assert pair_assessment(MemoryStore(14, [rec(0, D, C)]), D, D) == 0
    assert pair_assessment(MemoryStore(14, [rec(0, C, D), rec(1, D, C)]), C, D) == 0


histories = st.lists(
    st.tuples(st.integers(0, 5), st.integers(0, 5)).filter(lambda p: p[0] != p[1]), max_size=40
)


def build(history, capacity=None):
    store = MemoryStore(capacity)
    for t, (w, l) in enumerate(history):
        store.push(rec(t, w, l))
    return store


@given(histories, st.integers(1, 20))
def test_capacity_never_exceeded(history, cap):
    assert len(build(history, cap)) <= cap


@given(histories, st.integers(0, 5), st.integers(0, 5))
def test_direct_antisymmetry(history, a, b):
    store = build(history)
    assert direct_assessment(store, a, b) == -direct_assessment(store, b, a)


@given(histories)
def test_replay_is_identical(history):
    assert build(history, 7) == build(history, 7)
