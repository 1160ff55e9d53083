"""Gelfand-Zetlin patterns: streaming enumeration and counting via interlacing sets.

A pattern with top row ``p_{n,1} >= ... >= p_{n,n}`` is a triangular integer
array whose consecutive rows interlace, ``p_{k+1,i} >= p_{k,i} >= p_{k+1,i+1}``.
Rows are stored top-to-bottom as tuples of lengths ``n, n-1, ..., 1``.
"""

from __future__ import annotations

import itertools
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Iterator, Sequence, TypeVar

T = TypeVar("T")


def is_weakly_decreasing(v: Sequence[int]) -> bool:
    return all(v[i] >= v[i + 1] for i in range(len(v) - 1))


@dataclass(frozen=True)
class DominantWeight:
    """Integer vector ``p_{l+1,1..l+1}``; non-dominant vectors are allowed."""

    entries: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "entries", tuple(int(v) for v in self.entries))
        if not self.entries:
            raise ValueError("a weight needs at least one entry")

    @property
    def rank(self) -> int:
        return len(self.entries)

    @property
    def is_dominant(self) -> bool:
        return is_weakly_decreasing(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def __len__(self):
        return len(self.entries)

    def __getitem__(self, i):
        return self.entries[i]


def as_weight(p) -> DominantWeight:
    return p if isinstance(p, DominantWeight) else DominantWeight(tuple(p))


def interlaces(upper: Sequence[int], lower: Sequence[int]) -> bool:
    if len(lower) != len(upper) - 1:
        return False
    return all(upper[i] >= lower[i] >= upper[i + 1] for i in range(len(lower)))


@dataclass(frozen=True)
class GZPattern:
    """A Gelfand-Zetlin pattern. ``rows[0]`` is the top row (length ``n``).

    Construction fails with ValueError unless every pair of consecutive
    rows interlaces.
    """

    rows: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        rows = tuple(tuple(int(v) for v in r) for r in self.rows)
        object.__setattr__(self, "rows", rows)
        n = len(rows)
        for j, r in enumerate(rows):
            if len(r) != n - j:
                raise ValueError(f"row {j} has length {len(r)}, expected {n - j}")
        for upper, lower in zip(rows, rows[1:]):
            if not interlaces(upper, lower):
                raise ValueError(f"rows {upper} and {lower} do not interlace")

    @property
    def rank(self) -> int:
        return len(self.rows)

    @property
    def top(self) -> tuple[int, ...]:
        return self.rows[0]

    def row(self, k: int) -> tuple[int, ...]:
        """Row ``p_{k,.}`` in the 1-based indexing where row ``n`` is the top."""
        return self.rows[self.rank - k]


def interlacing_set(p_upper: Sequence[int]) -> Iterator[tuple[int, ...]]:
    """All ``p_lower`` with ``p_upper[i] >= p_lower[i] >= p_upper[i+1]``, lexicographically.

    Yields nothing if ``p_upper`` is not weakly decreasing.

    >>> list(interlacing_set((2, 0)))
    [(0,), (1,), (2,)]
    """
    p_upper = tuple(p_upper)
    if not is_weakly_decreasing(p_upper):
        return iter(())
    ranges = [range(p_upper[i + 1], p_upper[i] + 1) for i in range(len(p_upper) - 1)]
    return itertools.product(*ranges)


def interlacing_count(p_upper: Sequence[int]) -> int:
    if not is_weakly_decreasing(p_upper):
        return 0
    out = 1
    for a, b in zip(p_upper, p_upper[1:]):
        out *= a - b + 1
    return out


def _iter_rows(top: tuple[int, ...]) -> Iterator[tuple[tuple[int, ...], ...]]:
    # depth-first, row l first; memory O(l^2)
    if len(top) == 1:
        yield (top,)
        return
    for lower in interlacing_set(top):
        for rest in _iter_rows(lower):
            yield (top,) + rest


def iter_pattern_rows(top) -> Iterator[tuple[tuple[int, ...], ...]]:
    """Like :func:`enumerate_patterns` but yields raw row tuples (no validation)."""
    top = tuple(as_weight(top).entries)
    if not is_weakly_decreasing(top):
        return iter(())
    return _iter_rows(top)


def enumerate_patterns(top) -> Iterator[GZPattern]:
    """Stream every GZ pattern with the given top row, each exactly once.

    Order is lexicographic in (row l, row l-1, ..., row 1).  A non-dominant
    top yields an empty stream.
    """
    for rows in iter_pattern_rows(top):
        yield GZPattern(rows)


def count_patterns(top) -> int:
    """Weyl dimension formula ``prod_{i<j} (p_i - p_j + j - i)/(j - i)``; 0 if non-dominant."""
    p = as_weight(top).entries
    if not is_weakly_decreasing(p):
        return 0
    acc = Fraction(1)
    n = len(p)
    for i in range(n):
        for j in range(i + 1, n):
            acc *= Fraction(p[i] - p[j] + j - i, j - i)
    assert acc.denominator == 1
    return int(acc)


def fold_patterns(
    top,
    step: Callable[[T, tuple[tuple[int, ...], ...]], T],
    initial: Callable[[], T],
    merge: Callable[[T, T], T],
    threads: int = 1,
) -> T:
    """Fold ``step`` over every pattern of ``top`` (patterns given as row tuples).

    The stream is split by the row just below the top; each sub-stream is
    folded from a fresh ``initial()`` and the partials are merged in the
    lexicographic order of that row.  The split does not depend on
    ``threads``, so neither does the result.
    """
    top = tuple(as_weight(top).entries)
    if not is_weakly_decreasing(top):
        return initial()
    if len(top) == 1:
        return step(initial(), (top,))

    def fold_branch(lower: tuple[int, ...]) -> T:
        acc = initial()
        for rest in _iter_rows(lower):
            acc = step(acc, (top,) + rest)
        return acc

    branches = list(interlacing_set(top))
    if threads > 1 and len(branches) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            partials = list(pool.map(fold_branch, branches))
    else:
        partials = [fold_branch(b) for b in branches]
    acc = initial()
    for part in partials:
        acc = merge(acc, part)
    return acc


def dominant_weights(rank: int, max_spread: int, lowest: int = 0) -> Iterable[tuple[int, ...]]:
    """All dominant weights with last entry ``lowest`` and spread at most ``max_spread``."""
    for p in itertools.product(range(lowest, lowest + max_spread + 1), repeat=rank - 1):
        w = tuple(sorted(p, reverse=True)) + (lowest,)
        if tuple(p) == w[:-1]:
            yield w
