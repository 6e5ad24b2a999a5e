"""Brute-force reference model over a dense busy matrix.

Deliberately naive: one bool cell per (PE, tick), every query answered
by scanning cells.  Capacity is capped so tests stay fast.  Scoring in
:func:`oracle_find` is written out longhand rather than reusing the
production policy keys, so the two routes stay independent.
"""

from __future__ import annotations

from typing import Optional, Sequence

import numpy as np

from .calendar import OPEN_END, AvailabilityCalendar
from .policies import Policy

MAX_PES = 64
MAX_HORIZON = 4096


class OracleError(ValueError):
    pass


class DenseTimeline:
    """Busy matrix indexed [pe, tick]; tick t covers [t, t+1)."""

    def __init__(self, n_pes: int, horizon: int) -> None:
        if not 1 <= n_pes <= MAX_PES:
            raise OracleError(f"n_pes must be in [1, {MAX_PES}], got {n_pes}")
        if not 1 <= horizon <= MAX_HORIZON:
            raise OracleError(f"horizon must be in [1, {MAX_HORIZON}], got {horizon}")
        self.n_pes = n_pes
        self.horizon = horizon
        self.busy = np.zeros((n_pes, horizon), dtype=bool)

    def _check_span(self, t_s: int, t_e: int, pes: Sequence[int]) -> list[int]:
        if not 0 <= t_s < t_e <= self.horizon:
            raise OracleError(f"span [{t_s}, {t_e}) outside [0, {self.horizon}]")
        ids = sorted(set(pes))
        if not ids:
            raise OracleError("empty PE set")
        if ids[0] < 0 or ids[-1] >= self.n_pes:
            raise OracleError(f"PE ids {ids} outside [0, {self.n_pes})")
        return ids

    def add(self, t_s: int, t_e: int, pes: Sequence[int]) -> None:
        ids = self._check_span(t_s, t_e, pes)
        block = self.busy[np.ix_(ids, range(t_s, t_e))]
        if block.any():
            p, t = np.argwhere(block)[0]
            raise OracleError(f"cell (pe={ids[p]}, t={t_s + t}) already busy")
        self.busy[np.ix_(ids, range(t_s, t_e))] = True

    def delete(self, t_s: int, t_e: int, pes: Sequence[int]) -> None:
        ids = self._check_span(t_s, t_e, pes)
        block = self.busy[np.ix_(ids, range(t_s, t_e))]
        if not block.all():
            p, t = np.argwhere(~block)[0]
            raise OracleError(f"cell (pe={ids[p]}, t={t_s + t}) not busy")
        self.busy[np.ix_(ids, range(t_s, t_e))] = False

    def free_set(self, t_s: int, t_e: int) -> frozenset[int]:
        """PEs idle through every tick of [t_s, t_e)."""
        if not 0 <= t_s < t_e <= self.horizon:
            raise OracleError(f"span [{t_s}, {t_e}) outside [0, {self.horizon}]")
        clean = ~self.busy[:, t_s:t_e].any(axis=1)
        return frozenset(int(p) for p in np.flatnonzero(clean))

    def rectangle(
        self, t_s: int, t_du: int
    ) -> tuple[int, int | float, frozenset[int]]:
        """(t_begin, t_end, free) of the maximal window around
        [t_s, t_s + t_du) keeping the same free set; t_end is OPEN_END
        when the set stays free through the horizon."""
        free = self.free_set(t_s, t_s + t_du)
        ids = sorted(free)
        t_begin = t_s
        while t_begin > 0 and not self.busy[ids, t_begin - 1].any():
            t_begin -= 1
        t = t_s + t_du
        while t < self.horizon and not self.busy[ids, t].any():
            t += 1
        t_end: int | float = OPEN_END if t >= self.horizon else t
        return t_begin, t_end, free


def oracle_find(
    timeline: DenseTimeline,
    t_r: int,
    t_du: int,
    t_dl: int,
    n_pe: int,
    policy: Policy,
    starts: Optional[Sequence[int]] = None,
) -> Optional[tuple[int, frozenset[int]]]:
    """Best (start, PE set) by exhaustive scan, or None.

    With ``starts`` omitted every integer start in [t_r, t_dl - t_du]
    is tried; passing the production candidate list instead makes this
    a like-for-like check of rectangle ranking alone.
    """
    if starts is None:
        starts = range(t_r, t_dl - t_du + 1)
    best_key: Optional[tuple[float, float]] = None
    best: Optional[tuple[int, frozenset[int]]] = None
    for t_s in starts:
        t_begin, t_end, free = timeline.rectangle(t_s, t_du)
        if len(free) < n_pe:
            continue
        duration = t_end - t_begin
        if policy is Policy.FF:
            score = 0.0
        elif policy is Policy.PE_B:
            score = len(free)
        elif policy is Policy.PE_W:
            score = -len(free)
        elif policy is Policy.DU_B:
            score = duration
        elif policy is Policy.DU_W:
            score = -duration
        elif policy is Policy.PEDU_B:
            score = len(free) * duration
        elif policy is Policy.PEDU_W:
            score = -(len(free) * duration)
        else:
            raise OracleError(f"unknown policy {policy!r}")
        key = (score, float(t_s))
        if best_key is None or key < best_key:
            best_key = key
            best = (t_s, frozenset(sorted(free)[:n_pe]))
    return best


def as_dense(
    calendar: AvailabilityCalendar, horizon: int
) -> DenseTimeline:
    """Rasterize a calendar; its last release must fall within the
    horizon so open-ended queries agree between the two models."""
    timeline = DenseTimeline(calendar.n_pes, horizon)
    records = calendar.records
    if records and records[-1].time > horizon:
        raise OracleError(
            f"calendar extends to {records[-1].time}, past horizon {horizon}"
        )
    for i, rec in enumerate(records):
        if not rec.busy:
            continue
        end = records[i + 1].time
        ids = rec.busy_ids()
        timeline.busy[np.ix_(ids, range(rec.time, end))] = True
    return timeline
