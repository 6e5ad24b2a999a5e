"""Differential checking of the calendar against the dense reference.

Drives both models through identical random operation sequences,
comparing state and query answers after every step.  Used by the test
suite and the ``validate`` CLI command.  Mismatch messages carry the
sequence/op coordinates so a failure can be replayed from the seed.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

import numpy as np

from .calendar import (
    AllocationNotPresentError,
    AvailabilityCalendar,
    OverlapError,
)
from .oracle import DenseTimeline, as_dense, oracle_find
from .policies import POLICY_ORDER

_MAX_MISMATCHES = 20


@dataclass
class ValidationReport:
    sequences: int = 0
    operations: int = 0
    queries: int = 0
    inverse_cases: int = 0
    error_cases: int = 0
    full_scan_extra_accepts: int = 0
    full_scan_start_diffs: int = 0
    mismatches: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.mismatches

    def merge(self, other: "ValidationReport") -> None:
        self.sequences += other.sequences
        self.operations += other.operations
        self.queries += other.queries
        self.inverse_cases += other.inverse_cases
        self.error_cases += other.error_cases
        self.full_scan_extra_accepts += other.full_scan_extra_accepts
        self.full_scan_start_diffs += other.full_scan_start_diffs
        self.mismatches.extend(other.mismatches)

    def lines(self) -> list[str]:
        out = [
            f"sequences checked:      {self.sequences}",
            f"operations checked:     {self.operations}",
            f"queries compared:       {self.queries}",
            f"inverse cases:          {self.inverse_cases}",
            f"error-path cases:       {self.error_cases}",
            f"full-scan accept gaps:  {self.full_scan_extra_accepts}",
            f"full-scan start diffs:  {self.full_scan_start_diffs}",
            f"mismatches:             {len(self.mismatches)}",
        ]
        out.extend(f"  {m}" for m in self.mismatches)
        return out


def _note(report: ValidationReport, message: str) -> None:
    if len(report.mismatches) < _MAX_MISMATCHES:
        report.mismatches.append(message)


def _random_add(
    rng: random.Random,
    calendar: AvailabilityCalendar,
    timeline: DenseTimeline,
    live: list[tuple[int, int, tuple[int, ...]]],
    horizon: int,
) -> bool:
    for _ in range(8):
        t_s = rng.randrange(0, horizon - 1)
        t_e = rng.randint(t_s + 1, min(horizon, t_s + max(2, horizon // 4)))
        free = timeline.free_set(t_s, t_e)
        if not free:
            continue
        k = rng.randint(1, len(free))
        pes = tuple(sorted(rng.sample(sorted(free), k)))
        calendar.add_allocation(t_s, t_e, pes)
        timeline.add(t_s, t_e, pes)
        live.append((t_s, t_e, pes))
        return True
    return False


def _random_delete(
    rng: random.Random,
    calendar: AvailabilityCalendar,
    timeline: DenseTimeline,
    live: list[tuple[int, int, tuple[int, ...]]],
) -> None:
    t_s, t_e, pes = live.pop(rng.randrange(len(live)))
    calendar.delete_allocation(t_s, t_e, pes)
    timeline.delete(t_s, t_e, pes)


def _step(
    rng: random.Random,
    calendar: AvailabilityCalendar,
    timeline: DenseTimeline,
    live: list[tuple[int, int, tuple[int, ...]]],
    horizon: int,
) -> None:
    if live and (len(live) > 12 or rng.random() < 0.35):
        _random_delete(rng, calendar, timeline, live)
    elif not _random_add(rng, calendar, timeline, live, horizon) and live:
        _random_delete(rng, calendar, timeline, live)


def _fresh_state(
    rng: random.Random, n_pes: int, horizon: int, n_ops: int
) -> tuple[AvailabilityCalendar, DenseTimeline, list]:
    calendar = AvailabilityCalendar(n_pes)
    timeline = DenseTimeline(n_pes, horizon)
    live: list[tuple[int, int, tuple[int, ...]]] = []
    for _ in range(n_ops):
        _step(rng, calendar, timeline, live, horizon)
    return calendar, timeline, live


def _compare_step(
    rng: random.Random,
    calendar: AvailabilityCalendar,
    timeline: DenseTimeline,
    horizon: int,
    where: str,
    report: ValidationReport,
) -> bool:
    calendar.check_invariants()
    rebuilt = as_dense(calendar, horizon)
    if not np.array_equal(rebuilt.busy, timeline.busy):
        _note(report, f"{where}: busy matrices differ")
        return False
    for _ in range(2):
        t_s = rng.randrange(0, horizon - 1)
        t_e = rng.randint(t_s + 1, horizon)
        report.queries += 1
        prod = calendar.free_pes(t_s, t_e)
        ref = timeline.free_set(t_s, t_e)
        if prod != ref:
            _note(
                report,
                f"{where}: free set over [{t_s}, {t_e}) is "
                f"{sorted(prod)} vs reference {sorted(ref)}",
            )
            return False
    t_du = rng.randint(1, max(1, horizon // 4))
    t_s = rng.randrange(0, horizon - t_du)
    report.queries += 1
    rect = calendar.max_rectangle(t_s, t_du)
    t_begin, t_end, free = timeline.rectangle(t_s, t_du)
    if (rect.t_begin, rect.t_end, rect.free) != (t_begin, t_end, free):
        _note(
            report,
            f"{where}: rectangle at (t_s={t_s}, t_du={t_du}) is "
            f"({rect.t_begin}, {rect.t_end}, {sorted(rect.free)}) vs "
            f"reference ({t_begin}, {t_end}, {sorted(free)})",
        )
        return False
    return True


def check_calendar_equivalence(
    n_sequences: int = 100,
    n_ops: int = 40,
    n_pes: int = 16,
    horizon: int = 256,
    seed: int = 0,
) -> ValidationReport:
    """Random add/delete sequences; after every op the calendar must
    rasterize to the reference matrix and answer queries identically."""
    rng = random.Random(seed)
    report = ValidationReport()
    for s in range(n_sequences):
        calendar = AvailabilityCalendar(n_pes)
        timeline = DenseTimeline(n_pes, horizon)
        live: list[tuple[int, int, tuple[int, ...]]] = []
        report.sequences += 1
        for op in range(n_ops):
            _step(rng, calendar, timeline, live, horizon)
            report.operations += 1
            if not _compare_step(
                rng, calendar, timeline, horizon, f"seed {seed} seq {s} op {op}", report
            ):
                break
    return report


def check_admission_equivalence(
    n_queries: int = 1000,
    n_pes: int = 16,
    horizon: int = 256,
    seed: int = 0,
    completeness: bool = False,
) -> ValidationReport:
    """Each query is answered by the calendar and by the exhaustive
    reference restricted to the calendar's candidate starts; both must
    return the identical (start, PE set) under all policies.

    With ``completeness`` on, an unrestricted scan also runs and the
    report tallies (never asserts) starts or accepts the candidate set
    missed.
    """
    rng = random.Random(seed)
    report = ValidationReport()
    calendar: AvailabilityCalendar | None = None
    timeline: DenseTimeline | None = None
    for q in range(n_queries):
        if q % 5 == 0:
            calendar, timeline, _ = _fresh_state(
                rng, n_pes, horizon, rng.randint(10, 30)
            )
            report.sequences += 1
        assert calendar is not None and timeline is not None
        t_du = rng.randint(1, horizon // 4)
        t_r = rng.randrange(0, horizon - t_du)
        t_dl = min(t_r + t_du + rng.randint(0, horizon // 4), horizon)
        n_pe = rng.randint(1, n_pes)
        candidates = calendar.candidate_start_times(t_r, t_du, t_dl)
        where = f"seed {seed} query {q} (t_r={t_r}, t_du={t_du}, t_dl={t_dl}, n_pe={n_pe})"
        for policy in POLICY_ORDER:
            report.queries += 1
            prod = calendar.find_allocation(t_r, t_du, t_dl, n_pe, policy)
            ref = oracle_find(
                timeline, t_r, t_du, t_dl, n_pe, policy, starts=candidates
            )
            if prod != ref:
                _note(report, f"{where} {policy.value}: {prod} vs reference {ref}")
                continue
            if completeness:
                full = oracle_find(timeline, t_r, t_du, t_dl, n_pe, policy)
                if (full is None) != (prod is None):
                    report.full_scan_extra_accepts += 1
                elif full is not None and prod is not None and full[0] != prod[0]:
                    report.full_scan_start_diffs += 1
    return report


def check_inverse_property(
    n_cases: int = 10_000,
    n_pes: int = 16,
    horizon: int = 256,
    seed: int = 0,
) -> ValidationReport:
    """add then delete of the same span must restore the record list
    field for field; rejected operations must leave it untouched."""
    rng = random.Random(seed)
    report = ValidationReport()
    calendar: AvailabilityCalendar | None = None
    timeline: DenseTimeline | None = None
    live: list[tuple[int, int, tuple[int, ...]]] = []
    for c in range(n_cases):
        if c % 25 == 0:
            calendar, timeline, live = _fresh_state(
                rng, n_pes, horizon, rng.randint(5, 40)
            )
            report.sequences += 1
        assert calendar is not None and timeline is not None
        where = f"seed {seed} case {c}"
        before = calendar.copy()
        if _random_add(rng, calendar, timeline, live, horizon):
            t_s, t_e, pes = live.pop()
            calendar.delete_allocation(t_s, t_e, pes)
            timeline.delete(t_s, t_e, pes)
            report.inverse_cases += 1
            if calendar != before:
                _note(report, f"{where}: add+delete of [{t_s}, {t_e}) x {pes} "
                              f"did not restore the calendar")
        if live and rng.random() < 0.5:
            t_s, t_e, pes = live[rng.randrange(len(live))]
            report.error_cases += 1
            try:
                calendar.add_allocation(t_s, t_e, (pes[0],))
            except OverlapError:
                pass
            else:
                _note(report, f"{where}: overlapping add of [{t_s}, {t_e}) "
                              f"x ({pes[0]},) was not rejected")
            if calendar != before:
                _note(report, f"{where}: rejected add mutated the calendar")
        else:
            t_s = rng.randrange(0, horizon - 1)
            t_e = rng.randint(t_s + 1, horizon)
            free = timeline.free_set(t_s, t_e)
            if free:
                report.error_cases += 1
                try:
                    calendar.delete_allocation(t_s, t_e, (min(free),))
                except AllocationNotPresentError:
                    pass
                else:
                    _note(report, f"{where}: delete of idle span [{t_s}, {t_e}) "
                                  f"x ({min(free)},) was not rejected")
                if calendar != before:
                    _note(report, f"{where}: rejected delete mutated the calendar")
    return report
