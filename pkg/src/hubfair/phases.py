"""Pandemic-phase assignment.

The canonical path is an explicit date-range table (the default reproduces
the seven study phases). :func:`detect_phases` derives demarcations from a
national weekly case curve as a utility for new corpora.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from datetime import date, timedelta
from pathlib import Path

import numpy as np
from scipy.signal import find_peaks

from .errors import InputDataError, PhaseDetectionError


@dataclass(frozen=True)
class PhaseConfig:
    """Ordered, contiguous phase ranges: start inclusive, end exclusive."""

    ranges: tuple[tuple[int, date, date], ...]

    def __post_init__(self):
        if not self.ranges:
            raise InputDataError("phase config must contain at least one range")
        ids = [pid for pid, _, _ in self.ranges]
        if ids != list(range(len(self.ranges))):
            raise InputDataError(f"phase ids must be 0..{len(self.ranges) - 1} in order, got {ids}")
        for pid, start, end in self.ranges:
            if start >= end:
                raise InputDataError(f"phase {pid} has empty range {start}..{end}")
        for (_, _, prev_end), (nid, nstart, _) in zip(self.ranges, self.ranges[1:]):
            if nstart != prev_end:
                raise InputDataError(
                    f"phase {nid} starts at {nstart}, expected {prev_end} (ranges must be contiguous)"
                )

    @property
    def span(self):
        return self.ranges[0][1], self.ranges[-1][2]

    @property
    def phase_ids(self):
        return tuple(pid for pid, _, _ in self.ranges)

    def save(self, path):
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["phase", "start", "end"])
            for pid, start, end in self.ranges:
                writer.writerow([pid, start.isoformat(), end.isoformat()])

    @classmethod
    def load(cls, path):
        rows = []
        with open(path, newline="") as fh:
            for rec in csv.DictReader(fh):
                rows.append((int(rec["phase"]),
                             date.fromisoformat(rec["start"]),
                             date.fromisoformat(rec["end"])))
        rows.sort(key=lambda r: r[0])
        return cls(ranges=tuple(rows))


#: The seven study phases (start inclusive, end exclusive).
DEFAULT_PHASES = PhaseConfig(ranges=(
    (0, date(2020, 6, 3), date(2020, 9, 9)),
    (1, date(2020, 9, 9), date(2021, 3, 17)),
    (2, date(2021, 3, 17), date(2021, 6, 23)),
    (3, date(2021, 6, 23), date(2021, 11, 3)),
    (4, date(2021, 11, 3), date(2022, 3, 30)),
    (5, date(2022, 3, 30), date(2022, 6, 22)),
    (6, date(2022, 6, 22), date(2022, 10, 20)),
))


def assign_phase(week_end, config=DEFAULT_PHASES):
    """Map a week-ending date to its unique phase id.

    Raises
    ------
    InputDataError
        If the date falls outside the configured span.
    """
    for pid, start, end in config.ranges:
        if start <= week_end < end:
            return pid
    lo, hi = config.span
    raise InputDataError(
        f"date {week_end} outside configured phase span [{lo}, {hi})"
    )


def detect_phases(week_ends, cases, n_phases=7, smooth_window=5):
    """Derive a :class:`PhaseConfig` from a national weekly case curve.

    Boundaries are placed at local minima of a centered ``smooth_window``-week
    moving average, keeping the ``n_phases - 1`` valleys with the greatest
    prominence. Deterministic given the series; ties in prominence are broken
    toward the earlier week.

    Parameters
    ----------
    week_ends : sequence of date
        Week-ending dates, strictly increasing, one per series point.
    cases : sequence of float
        National weekly case counts.
    n_phases : int >= 2
        Number of phases to produce.

    Returns
    -------
    PhaseConfig
        Contiguous ranges covering ``[week_ends[0], week_ends[-1] + 7 days)``.
    """
    cases = np.asarray(cases, dtype=float)
    week_ends = list(week_ends)
    if n_phases < 2:
        raise InputDataError("n_phases must be at least 2")
    if cases.size != len(week_ends):
        raise InputDataError("week_ends and cases must have equal length")
    if cases.size < 2 * n_phases:
        raise InputDataError(
            f"series of length {cases.size} too short for {n_phases} phases"
        )

    half = smooth_window // 2
    smoothed = np.array([
        cases[max(0, i - half): i + half + 1].mean() for i in range(cases.size)
    ])
    valleys, props = find_peaks(-smoothed, prominence=0.0)
    if valleys.size < n_phases - 1:
        raise PhaseDetectionError(
            f"found {valleys.size} valleys in the smoothed series but need "
            f"{n_phases - 1}; supply an explicit phase table instead"
        )
    ranked = sorted(zip(-props["prominences"], valleys))
    chosen = sorted(idx for _, idx in ranked[: n_phases - 1])

    bounds = [week_ends[0]] + [week_ends[i] for i in chosen] + [week_ends[-1] + timedelta(days=7)]
    ranges = tuple((pid, bounds[pid], bounds[pid + 1]) for pid in range(n_phases))
    return PhaseConfig(ranges=ranges)


def load_phase_config(path_or_keyword):
    """Resolve a CLI/config phase setting: 'default', or a table file path."""
    if path_or_keyword in (None, "default"):
        return DEFAULT_PHASES
    path = Path(path_or_keyword)
    if not path.exists():
        raise InputDataError(f"phase config file not found: {path}")
    return PhaseConfig.load(path)
