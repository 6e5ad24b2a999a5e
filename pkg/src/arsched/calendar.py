"""Reservation calendar for a homogeneous multiprocessor.

Cluster occupancy is kept as a time-sorted list of slot records, each a
``(time, busy)`` pair meaning "from this instant until the next record,
exactly these processing elements (PEs) are reserved".  An empty busy set
means every PE recorded busy in the previous slot has been released.  The
structure supports three operations: committing an allocation, releasing
it, and searching for a feasible placement of a new request within its
ready-time/deadline window.

Busy sets are stored as integer bitmasks (bit ``p`` set = PE ``p`` busy),
which keeps the union/intersection work on large clusters cheap.  Public
entry points accept and return plain sets of PE ids.
"""

from __future__ import annotations

import math
from bisect import bisect_left, bisect_right
from dataclasses import dataclass
from typing import Iterable, Iterator, Optional

from .policies import Policy, select

# Sentinel end time for a rectangle no future reservation bounds.  Orders
# after every finite time; duration/area arithmetic yields +inf.
OPEN_END = math.inf


class CalendarError(ValueError):
    """Base class for calendar misuse errors."""


class OverlapError(CalendarError):
    """An allocation would double-book a PE.  Signals a caller bug; the
    calendar is left unchanged."""


class AllocationNotPresentError(CalendarError):
    """A release names a PE that is not reserved over the interval.  The
    calendar is left unchanged."""


class EmptyWindowError(CalendarError):
    """The scheduling window [t_r, t_dl - t_du] is empty."""


def mask_of(pes: Iterable[int]) -> int:
    """Pack an iterable of PE ids into a bitmask."""
    mask = 0
    for p in pes:
        mask |= 1 << p
    return mask


def ids_of(mask: int) -> list[int]:
    """Unpack a bitmask into a sorted list of PE ids."""
    ids = []
    while mask:
        low = mask & -mask
        ids.append(low.bit_length() - 1)
        mask ^= low
    return ids


def lowest_ids(mask: int, count: int) -> frozenset[int]:
    """The ``count`` lowest PE ids present in ``mask``."""
    picked = []
    while mask and len(picked) < count:
        low = mask & -mask
        picked.append(low.bit_length() - 1)
        mask ^= low
    if len(picked) < count:
        raise ValueError(f"mask holds {len(picked)} PEs, need {count}")
    return frozenset(picked)


@dataclass(frozen=True)
class ClusterConfig:
    """Homogeneous cluster: ``n_pes`` identical processing elements."""

    n_pes: int = 1024

    def __post_init__(self) -> None:
        if self.n_pes < 1:
            raise ValueError(f"n_pes must be >= 1, got {self.n_pes}")


@dataclass(slots=True)
class SlotRecord:
    """One occupancy change point: from ``time`` on, ``busy`` PEs are
    reserved (bitmask)."""

    time: int
    busy: int

    def busy_ids(self) -> list[int]:
        return ids_of(self.busy)


@dataclass(frozen=True)
class AvailabilityRectangle:
    """A candidate start with its maximal surrounding free region.

    ``free_mask`` is the set of PEs free throughout the job interval
    ``[start, start + duration)``; ``t_begin``/``t_end`` bound the maximal
    interval over which that whole set stays free.  ``t_end`` is
    :data:`OPEN_END` when no future reservation touches the free set.
    """

    start: int
    t_begin: int
    t_end: int | float
    free_mask: int

    @property
    def free(self) -> frozenset[int]:
        return frozenset(ids_of(self.free_mask))

    @property
    def pe_count(self) -> int:
        return self.free_mask.bit_count()

    @property
    def duration(self) -> int | float:
        return self.t_end - self.t_begin


@dataclass(frozen=True)
class Allocation:
    """An admitted reservation: concrete PEs over [start, end)."""

    job_id: int
    start: int
    end: int
    pes: frozenset[int]

    def __post_init__(self) -> None:
        if self.start >= self.end:
            raise ValueError(f"need start < end, got [{self.start}, {self.end})")
        if not self.pes:
            raise ValueError("PE set must be non-empty")


class AvailabilityCalendar:
    """Time-sorted slot records plus a synchronized time index.

    Invariants (restored after every mutation):
      * record times strictly increase and equal the time index;
      * no two consecutive records carry the same busy set;
      * the head record has a non-empty busy set, the tail an empty one;
      * every busy set fits within ``[0, n_pes)``.
    """

    def __init__(self, n_pes: int):
        if n_pes < 1:
            raise ValueError(f"n_pes must be >= 1, got {n_pes}")
        self.n_pes = n_pes
        self._full = (1 << n_pes) - 1
        self._records: list[SlotRecord] = []
        self._times: list[int] = []

    # -- introspection -------------------------------------------------

    @property
    def records(self) -> list[SlotRecord]:
        """The live record list.  Treat as read-only."""
        return self._records

    @property
    def times(self) -> tuple[int, ...]:
        """All record times, ascending (the search index)."""
        return tuple(self._times)

    def is_empty(self) -> bool:
        return not self._records

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, AvailabilityCalendar):
            return NotImplemented
        return self.n_pes == other.n_pes and self._records == other._records

    def __repr__(self) -> str:
        return f"AvailabilityCalendar(n_pes={self.n_pes}, records={len(self._records)})"

    def copy(self) -> "AvailabilityCalendar":
        dup = AvailabilityCalendar(self.n_pes)
        dup._records = [SlotRecord(r.time, r.busy) for r in self._records]
        dup._times = list(self._times)
        return dup

    def dump(self) -> str:
        """Debug serialization: one ``time<TAB>sorted,pe,ids`` line per
        record, ascending; an empty busy set renders as ``-``."""
        lines = []
        for rec in self._records:
            ids = ",".join(map(str, rec.busy_ids())) if rec.busy else "-"
            lines.append(f"{rec.time}\t{ids}")
        return "\n".join(lines)

    # -- segment walking -----------------------------------------------

    def _segments(self, t_s: int, t_e: int) -> Iterator[tuple[int, int, int]]:
        """Yield ``(begin, end, busy_mask)`` pieces covering [t_s, t_e).

        Busy is 0 before the first record; past the tail it equals the
        tail's busy set (invariantly 0).
        """
        times, records = self._times, self._records
        n = len(records)
        i = bisect_right(times, t_s) - 1
        t = t_s
        while t < t_e:
            busy = records[i].busy if i >= 0 else 0
            nxt = times[i + 1] if i + 1 < n else t_e
            end = min(nxt, t_e)
            yield t, end, busy
            t = end
            i += 1

    def _busy_at(self, t: int) -> int:
        i = bisect_right(self._times, t) - 1
        return self._records[i].busy if i >= 0 else 0

    # -- mutations -------------------------------------------------------

    def add_allocation(self, t_s: int, t_e: int, pes: Iterable[int]) -> None:
        """Reserve ``pes`` over [t_s, t_e).

        The caller must have validated feasibility (via a search); any
        overlap with an existing reservation raises :class:`OverlapError`
        and leaves the calendar untouched.
        """
        mask = mask_of(pes)
        self._check_alloc_args(t_s, t_e, mask)
        for begin, end, busy in self._segments(t_s, t_e):
            conflict = busy & mask
            if conflict:
                raise OverlapError(
                    f"PEs {ids_of(conflict)} already reserved in [{begin}, {end})"
                )
        self._apply(t_s, t_e, mask, subtract=False)

    def delete_allocation(self, t_s: int, t_e: int, pes: Iterable[int]) -> None:
        """Release ``pes`` over [t_s, t_e).  Exact inverse of the add with
        the same arguments.

        Raises :class:`AllocationNotPresentError` (calendar unchanged) if
        any named PE is not reserved somewhere in the interval.
        """
        mask = mask_of(pes)
        self._check_alloc_args(t_s, t_e, mask)
        for begin, end, busy in self._segments(t_s, t_e):
            missing = mask & ~busy
            if missing:
                raise AllocationNotPresentError(
                    f"PEs {ids_of(missing)} not reserved in [{begin}, {end})"
                )
        self._apply(t_s, t_e, mask, subtract=True)

    def _check_alloc_args(self, t_s: int, t_e: int, mask: int) -> None:
        if t_s < 0:
            raise ValueError(f"start time must be non-negative, got {t_s}")
        if t_s >= t_e:
            raise ValueError(f"need start < end, got [{t_s}, {t_e})")
        if mask == 0:
            raise ValueError("PE set must be non-empty")
        if mask & ~self._full:
            raise ValueError(
                f"PE ids {ids_of(mask & ~self._full)} outside [0, {self.n_pes})"
            )

    def _apply(self, t_s: int, t_e: int, mask: int, subtract: bool) -> None:
        self._ensure_boundary(t_s)
        self._ensure_boundary(t_e)
        lo = bisect_left(self._times, t_s)
        hi = bisect_left(self._times, t_e)
        for i in range(lo, hi):
            if subtract:
                self._records[i].busy &= ~mask
            else:
                self._records[i].busy |= mask
        self._clean()

    def _ensure_boundary(self, t: int) -> None:
        i = bisect_left(self._times, t)
        if i < len(self._times) and self._times[i] == t:
            return
        prev_busy = self._records[i - 1].busy if i > 0 else 0
        self._records.insert(i, SlotRecord(t, prev_busy))
        self._times.insert(i, t)

    def _clean(self) -> None:
        """Drop redundant records: any record whose busy set equals its
        predecessor's (the head's virtual predecessor is the empty set)."""
        kept: list[SlotRecord] = []
        prev = 0
        for rec in self._records:
            if rec.busy != prev:
                kept.append(rec)
                prev = rec.busy
        self._records = kept
        self._times = [r.time for r in kept]

    # -- searching -------------------------------------------------------

    def candidate_start_times(self, t_r: int, t_du: int, t_dl: int) -> list[int]:
        """Feasible-start candidates within [t_r, t_dl - t_du], ascending.

        The window endpoints, every existing slot time inside the window,
        and every slot time shifted back by the job duration (so the job
        would end exactly on a slot) are candidates.  Feasibility of each
        (enough free PEs) is the caller's check.
        """
        latest = t_dl - t_du
        if latest < t_r:
            raise EmptyWindowError(
                f"window [{t_r}, {t_dl}] cannot fit duration {t_du}"
            )
        times = self._times
        cands = {t_r, latest}
        lo = bisect_left(times, t_r)
        hi = bisect_right(times, latest)
        cands.update(times[lo:hi])
        lo = bisect_left(times, t_r + t_du)
        hi = bisect_right(times, t_dl)
        cands.update(t - t_du for t in times[lo:hi])
        return sorted(cands)

    def free_mask(self, t_s: int, t_e: int) -> int:
        """Bitmask of PEs unreserved throughout [t_s, t_e)."""
        if t_s >= t_e:
            raise ValueError(f"need start < end, got [{t_s}, {t_e})")
        acc = 0
        for _, _, busy in self._segments(t_s, t_e):
            acc |= busy
        return self._full & ~acc

    def free_pes(self, t_s: int, t_e: int) -> frozenset[int]:
        """PEs unreserved throughout [t_s, t_e), as a set of ids."""
        return frozenset(ids_of(self.free_mask(t_s, t_e)))

    def max_rectangle(self, t_s: int, t_du: int) -> AvailabilityRectangle:
        """Maximal availability rectangle around [t_s, t_s + t_du).

        The free set is exactly the PEs free over the job interval;
        ``t_begin`` extends it as far back, and ``t_end`` as far forward,
        as that whole set stays unreserved.  With no earlier constraint
        ``t_begin`` is 0; with no later one ``t_end`` is :data:`OPEN_END`.
        """
        if t_du <= 0:
            raise ValueError(f"duration must be positive, got {t_du}")
        free = self.free_mask(t_s, t_s + t_du)
        times, records = self._times, self._records
        n = len(records)

        j = bisect_right(times, t_s) - 1
        while j >= 0 and not records[j].busy & free:
            j -= 1
        t_begin = times[j + 1] if j >= 0 else 0

        k = bisect_left(times, t_s + t_du)
        while k < n and not records[k].busy & free:
            k += 1
        t_end: int | float = times[k] if k < n else OPEN_END
        return AvailabilityRectangle(start=t_s, t_begin=t_begin, t_end=t_end, free_mask=free)

    def find_allocation(
        self,
        t_r: int,
        t_du: int,
        t_dl: int,
        n_pe: int,
        policy: Policy,
    ) -> Optional[tuple[int, frozenset[int]]]:
        """Choose a start time and concrete PEs for a request, or ``None``.

        On an empty calendar the job runs at its ready time on the lowest
        PE ids.  Otherwise rectangles are built for every candidate start
        with enough free PEs and the policy picks one; the job gets the
        lowest ids from the winner's free set.  Returning ``None`` is a
        rejection, not an error.  The calendar is not modified; commit
        with :meth:`add_allocation`.
        """
        if t_r < 0:
            raise ValueError(f"ready time must be non-negative, got {t_r}")
        if t_du <= 0:
            raise ValueError(f"duration must be positive, got {t_du}")
        if not 1 <= n_pe <= self.n_pes:
            raise ValueError(f"n_pe must be in [1, {self.n_pes}], got {n_pe}")
        if t_r + t_du > t_dl:
            raise EmptyWindowError(
                f"window [{t_r}, {t_dl}] cannot fit duration {t_du}"
            )
        if not self._records:
            return t_r, lowest_ids(self._full, n_pe)
        feasible = []
        for t_s in self.candidate_start_times(t_r, t_du, t_dl):
            rect = self.max_rectangle(t_s, t_du)
            if rect.pe_count >= n_pe:
                feasible.append(rect)
        if not feasible:
            return None
        winner = select(feasible, policy)
        return winner.start, lowest_ids(winner.free_mask, n_pe)

    # -- self checks -----------------------------------------------------

    def check_invariants(self) -> None:
        """Assert every structural invariant; raises AssertionError."""
        recs, times = self._records, self._times
        assert times == [r.time for r in recs], "time index out of sync"
        assert all(a < b for a, b in zip(times, times[1:])), "times not strictly ascending"
        prev = 0
        for rec in recs:
            assert rec.time >= 0, "negative record time"
            assert rec.busy != prev, "redundant record survived cleaning"
            assert rec.busy & ~self._full == 0, "busy set exceeds cluster"
            prev = rec.busy
        if recs:
            assert recs[0].busy != 0, "head record has empty busy set"
            assert recs[-1].busy == 0, "tail record has non-empty busy set"
