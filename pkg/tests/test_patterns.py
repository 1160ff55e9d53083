from __future__ import annotations

import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qwhittaker.patterns import (
    DominantWeight,
    GZPattern,
    count_patterns,
    dominant_weights,
    enumerate_patterns,
    fold_patterns,
    interlacing_count,
    interlacing_set,
    interlaces,
)

from oracles import brute_patterns, weyl_dimension


def test_interlacing_set_examples():
    assert list(interlacing_set((1, 0))) == [(0,), (1,)]
    assert list(interlacing_set((1, 1))) == [(1,)]
    assert list(interlacing_set((2, 0))) == [(0,), (1,), (2,)]
    assert list(interlacing_set((0, 1))) == []


def test_enumeration_examples():
    assert [p.rows for p in enumerate_patterns((0, 0, 0))] == [((0, 0, 0), (0, 0), (0,))]
    assert len(list(enumerate_patterns((1, 0)))) == 2
    assert len(list(enumerate_patterns((2, 1, 0)))) == 8
    assert count_patterns((2, 1, 0)) == 8
    assert count_patterns((2, 0, 0)) == 6
    assert all(count_patterns((n, 0)) == n + 1 for n in range(10))
    assert list(enumerate_patterns((0, 1))) == []
    assert count_patterns((0, 1)) == 0


@pytest.mark.parametrize("rank", [1, 2, 3, 4])
def test_count_matches_enumeration_exhaustively(rank):
    for top in dominant_weights(rank, 6):
        streamed = [p.rows for p in enumerate_patterns(top)]
        assert len(streamed) == count_patterns(top) == weyl_dimension(top)
        assert len(set(streamed)) == len(streamed)


@pytest.mark.parametrize("top", [(2, 1, 0), (3, 1, 0), (2, 2, 0), (1, 0, 0, 0), (2, 1, 1, 0), (1, -1, -2)])
def test_stream_equals_brute_force_set(top):
    assert sorted(p.rows for p in enumerate_patterns(top)) == sorted(brute_patterns(top))


tops = st.integers(1, 4).flatmap(
    lambda n: st.lists(st.integers(-3, 3), min_size=n, max_size=n).map(lambda v: tuple(sorted(v, reverse=True)))
)


@settings(max_examples=60, deadline=None)
@given(tops)
def test_streamed_patterns_interlace_and_partition_by_top_row(top):
    pats = list(enumerate_patterns(top))
    for p in pats:
        assert all(interlaces(a, b) for a, b in zip(p.rows, p.rows[1:]))
    if len(top) > 1:
        by_row = {}
        for p in pats:
            by_row.setdefault(p.rows[1], []).append(p.rows)
        assert sorted(by_row) == sorted(interlacing_set(top))
        assert sum(len(v) for v in by_row.values()) == len(pats)
        assert len(list(interlacing_set(top))) == interlacing_count(top)


def test_fold_is_independent_of_threads():
    top = (4, 2, 1, 0)

    def step(acc, rows):
        return acc + [rows]

    serial = fold_patterns(top, step, list, lambda a, b: a + b, threads=1)
    parallel = fold_patterns(top, step, list, lambda a, b: a + b, threads=6)
    assert serial == parallel == [p.rows for p in enumerate_patterns(top)]


def test_pattern_validation():
    GZPattern(((2, 0), (1,)))
    with pytest.raises(ValueError):
        GZPattern(((2, 0), (3,)))
    with pytest.raises(ValueError):
        GZPattern(((2, 0), (1, 0)))
    p = GZPattern(((2, 1, 0), (1, 0), (1,)))
    assert p.row(3) == (2, 1, 0) and p.row(1) == (1,) and p.top == (2, 1, 0)


def test_dominant_weight_type():
    w = DominantWeight((3, 1, 1))
    assert w.is_dominant and w.rank == 3
    assert not DominantWeight((0, 1)).is_dominant
    with pytest.raises(ValueError):
        DominantWeight(())


def test_dominant_weights_generator():
    got = set(dominant_weights(3, 2))
    want = {w for w in itertools.product(range(3), repeat=3) if w[0] >= w[1] >= w[2] == 0}
    assert got == want
