"""Cumulative covariance over overlapping observation intervals.

The estimator is the double sum of increment products over every pair of
overlapping intervals::

    sum over (i, j) of (P[i] - P[i-1]) * (Q[j] - Q[j-1])
    whenever (t1[i-1], t1[i]] and (t2[j-1], t2[j]] intersect

It is affine in every individual observation value, and grouping the sum
by a fixed anchor interval telescopes the opposite-leg increments into a
single endpoint difference.  Some observations drop out of the telescoped
form entirely; :mod:`hyf.nonextant` locates them.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal, NamedTuple

import numpy as np

from .core import Label, ObservationSeries, OverlapSet, enumerate_overlaps
from .errors import IndexOutOfRange

Anchoring = Literal["row", "alternative"]


class RawTerm(NamedTuple):
    """One product summand of the double sum."""

    i: int
    j: int
    delta_a: float
    delta_b: float

    @property
    def value(self) -> float:
        return self.delta_a * self.delta_b


@dataclass(frozen=True)
class GroupedTerm:
    """A telescoped run of raw terms sharing one anchor interval.

    ``multiplier`` is the anchor interval's increment and ``span`` holds
    the first and last opposite-leg point index of the run, so the term
    evaluates to ``multiplier * (opposite values[span[1]] - [span[0]])``.
    """

    anchor_leg: Label
    anchor_index: int
    multiplier: float
    span: tuple[int, int]
    endpoint_delta: float

    @property
    def value(self) -> float:
        return self.multiplier * self.endpoint_delta


@dataclass(frozen=True)
class TermList:
    """Raw summands plus one telescoped grouping of them."""

    raw_terms: tuple[RawTerm, ...]
    grouped_terms: tuple[GroupedTerm, ...]

    def raw_total(self) -> float:
        return float(sum(t.value for t in self.raw_terms))

    def grouped_total(self) -> float:
        return float(sum(g.value for g in self.grouped_terms))


def hy_covariance(s1: ObservationSeries, s2: ObservationSeries) -> float:
    """Evaluate the raw double sum, accumulated in ascending (i, j) order."""
    pairs = enumerate_overlaps(s1, s2).pairs
    if pairs.size == 0:
        return 0.0
    da = s1.increments
    db = s2.increments
    return float(np.sum(da[pairs[:, 0] - 1] * db[pairs[:, 1] - 1]))


def _runs(pairs: list[tuple[int, int]], k: int) -> tuple[int, int]:
    """Lengths of the same-j (row) and same-i (column) runs starting at k."""
    i0, j0 = pairs[k]
    r = k + 1
    while r < len(pairs) and pairs[r][1] == j0 and pairs[r][0] == pairs[r - 1][0] + 1:
        r += 1
    c = k + 1
    while c < len(pairs) and pairs[c][0] == i0 and pairs[c][1] == pairs[c - 1][1] + 1:
        c += 1
    return r - k, c - k


def _greedy_groups(pairs: list[tuple[int, int]]) -> list[tuple[str, int, int, int]]:
    """Partition staircase pairs into maximal telescoping runs.

    At each position take the longer of the row run (fixed j) and the
    column run (fixed i); ties go to the row.  Returns
    ``(axis, anchor, lo, hi)`` with lo..hi the swept indices.
    """
    groups: list[tuple[str, int, int, int]] = []
    k = 0
    while k < len(pairs):
        row_len, col_len = _runs(pairs, k)
        i0, j0 = pairs[k]
        if col_len > row_len:
            groups.append(("col", i0, j0, pairs[k + col_len - 1][1]))
            k += col_len
        else:
            groups.append(("row", j0, i0, pairs[k + row_len - 1][0]))
            k += row_len
    return groups


def _first_full_column(pairs: list[tuple[int, int]]) -> tuple[int, int] | None:
    """Slice bounds of the column at the first upward corner, if any."""
    for k in range(len(pairs) - 1):
        if pairs[k + 1][0] == pairs[k][0] and pairs[k + 1][1] == pairs[k][1] + 1:
            i0 = pairs[k][0]
            end = k + 1
            while end + 1 < len(pairs) and pairs[end + 1][0] == i0:
                end += 1
            return k, end + 1
    return None


def telescope_rows(
    s1: ObservationSeries,
    s2: ObservationSeries,
    anchoring: Anchoring = "row",
) -> TermList:
    """Group the double sum into telescoped anchor terms.

    ``"row"`` applies the longest-run greedy sweep (rows preferred on
    ties).  ``"alternative"`` first factors out the full column at the
    first upward corner of the staircase and then sweeps the remainder;
    it generally produces one more group than ``"row"`` and the same
    total value.  Neither grouping is claimed to be minimal.
    """
    if anchoring not in ("row", "alternative"):
        raise ValueError(f"unknown anchoring {anchoring!r}")
    overlaps: OverlapSet = enumerate_overlaps(s1, s2)
    da = s1.increments
    db = s2.increments
    pair_list: list[tuple[int, int]] = [tuple(p) for p in overlaps.pairs.tolist()]
    raw = tuple(
        RawTerm(i, j, float(da[i - 1]), float(db[j - 1])) for i, j in pair_list
    )

    extracted: list[tuple[str, int, int, int]] = []
    if anchoring == "alternative":
        bounds = _first_full_column(pair_list)
        if bounds is not None:
            a, b = bounds
            extracted.append(("col", pair_list[a][0], pair_list[a][1], pair_list[b - 1][1]))
            pair_list = pair_list[:a] + pair_list[b:]

    groups = _greedy_groups(pair_list) + extracted
    # present groups in sweep order of their first pair
    groups.sort(key=lambda g: (g[2], g[1]) if g[0] == "row" else (g[1], g[2]))

    grouped = []
    for axis, anchor, lo, hi in groups:
        if axis == "row":
            grouped.append(
                GroupedTerm(
                    anchor_leg=s2.label,
                    anchor_index=anchor,
                    multiplier=float(db[anchor - 1]),
                    span=(lo - 1, hi),
                    endpoint_delta=float(s1.values[hi] - s1.values[lo - 1]),
                )
            )
        else:
            grouped.append(
                GroupedTerm(
                    anchor_leg=s1.label,
                    anchor_index=anchor,
                    multiplier=float(da[anchor - 1]),
                    span=(lo - 1, hi),
                    endpoint_delta=float(s2.values[hi] - s2.values[lo - 1]),
                )
            )
    return TermList(raw_terms=raw, grouped_terms=tuple(grouped))


def _interval_bounds(t_self: np.ndarray, t_opp: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Opposite-interval index range overlapped by each own interval.

    For own interval ``i`` (1-based) the overlapping opposite intervals
    are ``lo[i-1] .. hi[i-1]``; the range is empty when lo > hi.  Strict
    endpoint comparisons make this exact in the presence of shared
    timestamps.
    """
    m_opp = t_opp.size - 1
    lo = np.maximum(1, np.searchsorted(t_opp, t_self[:-1], side="right"))
    hi = np.minimum(m_opp, np.searchsorted(t_opp, t_self[1:], side="left"))
    return lo, hi


def _interval_opposite_sums(series: ObservationSeries, opposite: ObservationSeries) -> np.ndarray:
    """Telescoped opposite-leg increment sum for each own interval."""
    lo, hi = _interval_bounds(series.times, opposite.times)
    v = opposite.values
    sums = np.where(lo <= hi, v[hi] - v[np.maximum(lo, 1) - 1], 0.0)
    return sums


def point_coefficients(series: ObservationSeries, opposite: ObservationSeries) -> np.ndarray:
    """Linear coefficient of every value of ``series`` in the double sum.

    The estimator is affine in each observation value; entry ``k`` is the
    exact derivative of :func:`hy_covariance` with respect to
    ``series.values[k]``.
    """
    sums = _interval_opposite_sums(series, opposite)
    padded = np.concatenate([[0.0], sums, [0.0]])
    return padded[:-1] - padded[1:]


def coefficient_of(
    s1: ObservationSeries,
    s2: ObservationSeries,
    leg: Label,
    point_index: int,
) -> float:
    """Coefficient of one observation value in the covariance output.

    Perturbing that value by ``d`` moves :func:`hy_covariance` by exactly
    ``coefficient * d`` (up to float roundoff in the re-evaluation).
    """
    if leg == s1.label:
        series, opposite = s1, s2
    elif leg == s2.label:
        series, opposite = s2, s1
    else:
        raise ValueError(f"leg {leg!r} matches neither series")
    if not 0 <= point_index < series.n_points:
        raise IndexOutOfRange(
            f"point index {point_index} outside 0..{series.n_points - 1}"
        )
    return float(point_coefficients(series, opposite)[point_index])
