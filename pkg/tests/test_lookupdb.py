"""Rule table: entries, counters, matching, probability updates."""

from __future__ import annotations

import random

import pytest
from hypothesis import given, strategies as st

from nextstep import (
    ContextSlot,
    LookupDB,
    Observation,
    ObservationWindow,
    condition_matches,
    record_contexts,
    update_probability,
)
from .reference import brute_match, closed_form_correct, closed_form_incorrect


def window_from(steps, universe=(1, 2, 3, 4), capacity=10):
    window = ObservationWindow(capacity, steps=universe, classifications=(0, 1))
    for step in steps:
        window.push(Observation(step))
    return window


# -- probability update ------------------------------------------------


def test_update_moves_toward_one_on_correct():
    assert update_probability(0.5, 0.8, True) == pytest.approx(0.6)


def test_update_decays_on_incorrect():
    assert update_probability(0.5, 0.8, False) == pytest.approx(0.4)


@given(st.floats(min_value=0.0, max_value=1.0),
       st.floats(min_value=0.01, max_value=0.99))
def test_update_stays_in_unit_interval(p, alpha):
    assert 0.0 <= update_probability(p, alpha, True) <= 1.0
    assert 0.0 <= update_probability(p, alpha, False) <= 1.0


@given(st.floats(min_value=0.0, max_value=1.0),
       st.floats(min_value=0.01, max_value=0.99),
       st.integers(min_value=1, max_value=30))
def test_update_iterates_to_the_closed_forms(p0, alpha, k):
    up = down = p0
    for _ in range(k):
        up = update_probability(up, alpha, True)
        down = update_probability(down, alpha, False)
    assert up == pytest.approx(closed_form_correct(p0, alpha, k), abs=1e-12)
    assert down == pytest.approx(closed_form_incorrect(p0, alpha, k), abs=1e-12)


# -- context slots ------------------------------------------------------


def test_slot_records_and_weighs():
    slot = ContextSlot()
    slot.record(5)
    slot.record(5)
    slot.record(7)
    assert slot.total == 3
    assert slot.weight(5) == pytest.approx(2 / 3)
    assert slot.weight(7) == pytest.approx(1 / 3)
    assert slot.weight(9) == 0.0


def test_fresh_slot_weight_is_zero():
    assert ContextSlot().weight(5) == 0.0


def test_slot_consistency():
    slot = ContextSlot()
    for ctx in (1, 1, 2, 3):
        slot.record(ctx)
    assert slot.consistent()
    slot.total = 5
    assert not slot.consistent()


# -- add / find ----------------------------------------------------------


def test_add_assigns_dense_ids():
    db = LookupDB()
    a = db.add((1,), 2, 0.2)
    b = db.add((1, 2), 3, 0.2)
    assert (a.entry_id, b.entry_id) == (0, 1)
    assert db.entry(1).condition == (1, 2)


def test_find_distinguishes_predictions():
    db = LookupDB()
    db.add((1,), 2, 0.2)
    db.add((1,), 3, 0.4)
    assert db.find((1,), 2).p == pytest.approx(0.2)
    assert db.find((1,), 3).p == pytest.approx(0.4)
    assert db.find((1,), 4) is None
    assert db.find((2,), 2) is None


def test_duplicate_add_rejected():
    db = LookupDB()
    db.add((1,), 2, 0.2)
    with pytest.raises(ValueError):
        db.add((1,), 2, 0.9)


def test_add_validates_inputs():
    db = LookupDB()
    with pytest.raises(ValueError):
        db.add((), 2, 0.2)
    with pytest.raises(ValueError):
        db.add((1,), 2, 1.5)


def test_condition_at_is_relative_to_newest():
    db = LookupDB()
    entry = db.add((5, 6, 7), 1, 0.5)
    assert entry.condition_at(0) == 7
    assert entry.condition_at(-1) == 6
    assert entry.condition_at(-2) == 5


# -- matching ------------------------------------------------------------


def test_match_at_offset_zero():
    db = LookupDB()
    entry = db.add((2, 3), 4, 0.5)
    assert condition_matches(entry, window_from([1, 2, 3]), 0)
    assert not condition_matches(entry, window_from([2, 3, 1]), 0)


def test_match_at_offset_one():
    db = LookupDB()
    entry = db.add((2, 3), 4, 0.5)
    assert condition_matches(entry, window_from([2, 3, 1]), 1)
    assert not condition_matches(entry, window_from([2, 3, 1]), 0)


def test_match_is_total_when_window_is_short():
    db = LookupDB()
    entry = db.add((1, 2, 3), 4, 0.5)
    assert not condition_matches(entry, window_from([2, 3]), 0)
    assert not condition_matches(entry, window_from([1, 2, 3]), 1)


def test_matching_entries_ids_are_sorted():
    db = LookupDB()
    db.add((3,), 1, 0.5)
    db.add((2, 3), 1, 0.5)
    db.add((3,), 2, 0.5)
    window = window_from([1, 2, 3])
    assert [e.entry_id for e in db.matching_entries(window, 0)] == [0, 1, 2]


def random_match_cases(count, seed):
    """Random (db, window, offset) cases shared with the acceptance gate."""
    rng = random.Random(seed)
    cases = []
    for _ in range(count):
        window_steps = [rng.randint(1, 4) for _ in range(rng.randint(0, 8))]
        condition = tuple(rng.randint(1, 4) for _ in range(rng.randint(1, 4)))
        offset = rng.randint(0, 3)
        cases.append((condition, window_steps, offset))
    return cases


def test_match_agrees_with_brute_force_slices():
    db = LookupDB()
    by_condition = {}
    window_cache = {}
    for condition, window_steps, offset in random_match_cases(10_000, seed=2024):
        if condition not in by_condition:
            by_condition[condition] = db.add(condition, 1, 0.5)
        key = tuple(window_steps)
        if key not in window_cache:
            window_cache[key] = window_from(list(reversed(window_steps)))
        got = condition_matches(by_condition[condition], window_cache[key], offset)
        want = brute_match(list(condition), window_steps, offset)
        assert got == want, (condition, window_steps, offset)


def test_matching_entries_equals_per_entry_matching():
    rng = random.Random(7)
    db = LookupDB()
    seen = set()
    for _ in range(120):
        condition = tuple(rng.randint(1, 4) for _ in range(rng.randint(1, 5)))
        prediction = rng.randint(1, 4)
        if (condition, prediction) not in seen:
            seen.add((condition, prediction))
            db.add(condition, prediction, 0.5)
    for _ in range(200):
        window = window_from([rng.randint(1, 4) for _ in range(rng.randint(0, 10))])
        for offset in range(0, 3):
            fast = [e.entry_id for e in db.matching_entries(window, offset)]
            slow = [e.entry_id for e in db if condition_matches(e, window, offset)]
            assert fast == sorted(slow) == slow


# -- context recording ----------------------------------------------------


def test_record_contexts_counts_at_condition_positions():
    db = LookupDB()
    entry = db.add((1, 2), 3, 0.5)
    window = ObservationWindow(5, steps=(1, 2, 3), classifications=(0, 1))
    window.push(Observation(1, {0: 10}))
    window.push(Observation(2, {0: 11, 1: 5}))
    window.push(Observation(3, {0: 12}))
    # condition sits one step back: slots keyed 0 and -1 read indices -1, -2
    record_contexts(entry, window, 1, (0, 1))
    assert entry.slots[(0, 0)].per_context == {11: 1}
    assert entry.slots[(1, 0)].per_context == {5: 1}
    assert entry.slots[(0, -1)].per_context == {10: 1}
    assert (1, -1) not in entry.slots


def test_record_contexts_skips_absent_classifications():
    db = LookupDB()
    entry = db.add((1,), 2, 0.5)
    window = ObservationWindow(5, steps=(1, 2), classifications=(0,))
    window.push(Observation(1))
    window.push(Observation(2))
    record_contexts(entry, window, 1, (0,))
    assert entry.slots == {}
