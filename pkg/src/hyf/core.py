"""Core data model: observation series, label merges, and interval overlaps.

Two price series observed at irregular times are the fundamental input.
Interval ``i`` of a series spans ``(t[i-1], t[i]]`` (left-open,
right-closed) and is indexed from 1, so a series with ``n`` points carries
``n - 1`` intervals.  All overlap logic below uses strict comparisons on
interval endpoints, which is exact for this half-open convention even when
the two series share timestamps; operations that need a total merge order
(labelling) reject cross-series ties instead.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Literal

import numpy as np

from .errors import (
    CrossSeriesTie,
    IndexOutOfRange,
    LengthMismatch,
    NonMonotoneTimes,
    TooFewPoints,
    ValidationError,
)

Label = Literal["A", "B"]

_LABELS = ("A", "B")


def _frozen_array(data, dtype) -> np.ndarray:
    out = np.array(data, dtype=dtype, copy=True).reshape(-1)
    out.flags.writeable = False
    return out


@dataclass(frozen=True, eq=False)
class ObservationSeries:
    """Strictly increasing observation times with one value per time.

    ``label`` identifies which leg of a pair this series plays ("A" or
    "B").  Instances are immutable; the underlying arrays are marked
    read-only so they can be shared freely across threads.
    """

    times: np.ndarray
    values: np.ndarray
    label: Label

    def __post_init__(self) -> None:
        times = _frozen_array(self.times, float)
        values = _frozen_array(self.values, float)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)
        if self.label not in _LABELS:
            raise ValidationError(f"label must be 'A' or 'B', got {self.label!r}")
        if times.size < 2:
            raise TooFewPoints(
                f"leg {self.label}: need at least 2 observations, got {times.size}"
            )
        if values.size != times.size:
            raise LengthMismatch(
                f"leg {self.label}: {times.size} times vs {values.size} values"
            )
        if not np.all(np.isfinite(times)):
            raise ValidationError(f"leg {self.label}: non-finite observation time")
        gaps = np.diff(times)
        if not np.all(gaps > 0):
            k = int(np.argmax(gaps <= 0)) + 1
            raise NonMonotoneTimes(
                f"leg {self.label}: time {times[k]!r} at position {k} does not "
                f"increase past {times[k - 1]!r}"
            )

    @property
    def n_points(self) -> int:
        return int(self.times.size)

    @property
    def n_intervals(self) -> int:
        """Index of the last observation; intervals run 1..n_intervals."""
        return int(self.times.size) - 1

    @property
    def increments(self) -> np.ndarray:
        """Value change over each interval, ``values[i] - values[i-1]``."""
        return np.diff(self.values)

    def interval(self, i: int) -> tuple[float, float]:
        """Endpoints of interval ``i`` as ``(t[i-1], t[i]]``."""
        if not 1 <= i <= self.n_intervals:
            raise IndexOutOfRange(
                f"interval index {i} outside 1..{self.n_intervals}"
            )
        return float(self.times[i - 1]), float(self.times[i])

    def with_values(self, values) -> "ObservationSeries":
        """Same observation times, new values."""
        return ObservationSeries(self.times, values, self.label)


def validate_series(times, values, label: Label) -> ObservationSeries:
    """Validate raw arrays and build an :class:`ObservationSeries`.

    Raises :class:`NonMonotoneTimes`, :class:`LengthMismatch` or
    :class:`TooFewPoints` when the data cannot form a usable series.
    """
    return ObservationSeries(times, values, label)


@dataclass(frozen=True, eq=False)
class LabelSequence:
    """Time-ordered merge of two series' observation times, tagged A/B.

    ``source_index`` maps each entry back to its position within its own
    leg.  Construction requires a strict total order, so both legs must be
    tie-free against each other, and each must contribute at least two
    points.
    """

    times: np.ndarray
    labels: np.ndarray
    source_index: np.ndarray

    def __post_init__(self) -> None:
        times = _frozen_array(self.times, float)
        labels = _frozen_array(self.labels, "U1")
        source = _frozen_array(self.source_index, np.int64)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "source_index", source)
        if not (times.size == labels.size == source.size):
            raise LengthMismatch("times, labels and source_index differ in length")
        gaps = np.diff(times)
        if np.any(gaps == 0):
            k = int(np.argmax(gaps == 0))
            raise CrossSeriesTie(
                f"time {times[k]!r} appears in both series"
            )
        if np.any(gaps < 0):
            raise NonMonotoneTimes("merged entries are not sorted by time")
        for lab in _LABELS:
            mask = labels == lab
            count = int(mask.sum())
            if count < 2:
                raise TooFewPoints(
                    f"both legs must be present with >= 2 points; leg {lab} has {count}"
                )
            if not np.array_equal(source[mask], np.arange(count)):
                raise ValidationError(
                    f"leg {lab}: source indices are not 0..{count - 1} in time order"
                )
        unknown = ~np.isin(labels, _LABELS)
        if np.any(unknown):
            raise ValidationError(f"unknown label {labels[unknown][0]!r}")

    @classmethod
    def from_string(cls, pattern: str, times=None) -> "LabelSequence":
        """Build a sequence from a label string like ``"BAAB"``.

        Times default to 0, 1, 2, ...; they only need to be ordered, the
        label-based operations never look at the actual values.
        """
        labels = np.array(list(pattern), dtype="U1")
        if times is None:
            times = np.arange(len(pattern), dtype=float)
        source = np.empty(len(pattern), dtype=np.int64)
        for lab in _LABELS:
            mask = labels == lab
            source[mask] = np.arange(int(mask.sum()))
        return cls(np.asarray(times, dtype=float), labels, source)

    @property
    def n(self) -> int:
        return int(self.times.size)

    @property
    def as_string(self) -> str:
        return "".join(self.labels.tolist())

    def leg_count(self, label: Label) -> int:
        return int(np.count_nonzero(self.labels == label))

    @property
    def entries(self) -> Iterator[tuple[float, str, int]]:
        return zip(self.times.tolist(), self.labels.tolist(), self.source_index.tolist())


def merge_labels(s1: ObservationSeries, s2: ObservationSeries) -> LabelSequence:
    """Merge two series into one ascending, labelled sequence.

    Raises :class:`CrossSeriesTie` if any timestamp occurs in both legs;
    a labelled merge has no well-defined order for tied entries.
    """
    if s1.label == s2.label:
        raise ValidationError("series must carry distinct labels")
    n1, n2 = s1.n_points, s2.n_points
    times = np.concatenate([s1.times, s2.times])
    labels = np.concatenate(
        [np.full(n1, s1.label, dtype="U1"), np.full(n2, s2.label, dtype="U1")]
    )
    source = np.concatenate([np.arange(n1), np.arange(n2)])
    order = np.argsort(times, kind="stable")
    return LabelSequence(times[order], labels[order], source[order])


@dataclass(frozen=True, eq=False)
class OverlapSet:
    """All interval index pairs ``(i, j)`` whose intervals intersect.

    Pairs are 1-based and sorted lexicographically; for two partitions of
    the line they always form a monotone staircase, so sorting by ``i``
    and by ``j`` coincide.
    """

    pairs: np.ndarray

    def __post_init__(self) -> None:
        pairs = np.array(self.pairs, dtype=np.int64, copy=True).reshape(-1, 2)
        pairs.flags.writeable = False
        object.__setattr__(self, "pairs", pairs)

    @property
    def m(self) -> int:
        return int(self.pairs.shape[0])

    def __iter__(self) -> Iterator[tuple[int, int]]:
        return iter(map(tuple, self.pairs.tolist()))


def _check_no_cross_ties(s1: ObservationSeries, s2: ObservationSeries) -> None:
    t1, t2 = s1.times, s2.times
    idx = np.searchsorted(t1, t2)
    idx = np.minimum(idx, t1.size - 1)
    hits = t1[idx] == t2
    if np.any(hits):
        raise CrossSeriesTie(f"time {t2[hits][0]!r} appears in both series")


def enumerate_overlaps(s1: ObservationSeries, s2: ObservationSeries) -> OverlapSet:
    """Two-pointer sweep over both interval partitions.

    Emits every pair ``(i, j)`` with ``t1[i] > t2[j-1]`` and
    ``t1[i-1] < t2[j]``, the exact nonempty-intersection test for
    half-open ``(lo, hi]`` intervals.  Runs in O(|s1| + |s2| + m).
    """
    t1 = s1.times.tolist()
    t2 = s2.times.tolist()
    m1 = len(t1) - 1
    m2 = len(t2) - 1
    out: list[tuple[int, int]] = []
    i = j = 1
    while i <= m1 and j <= m2:
        if t1[i] > t2[j - 1] and t2[j] > t1[i - 1]:
            out.append((i, j))
        # advance whichever interval ends first; on a shared endpoint both
        # advances are safe, the strict tests above never double-count
        if t1[i] < t2[j]:
            i += 1
        else:
            j += 1
    return OverlapSet(np.array(out, dtype=np.int64).reshape(-1, 2))
