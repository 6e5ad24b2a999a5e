"""Deterministic event loop driving admission, commit, and release.

Each arrival is evaluated once against the calendar: accepted requests
are committed immediately and release their PEs at completion; declined
requests are final.  Completions at the same instant as an arrival are
processed first so capacity frees up before the new admission check.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable, Optional, Sequence

from .calendar import Allocation, AvailabilityCalendar, CalendarError, ClusterConfig
from .policies import Policy
from .workload import ARRequest

_COMPLETION = 0
_ARRIVAL = 1

OUTCOME_TSV_HEADER = "id\taccepted\tstart\twait\tslowdown"


class SimulationInternalError(RuntimeError):
    """The calendar rejected an engine-issued operation: an engine bug,
    never a valid admission rejection."""


@dataclass(frozen=True)
class JobOutcome:
    """Admission result for one request.

    Accepted outcomes carry the committed start and PEs; wait is measured
    from the ready time, and slowdown is (wait + runtime) / runtime.
    """

    request: ARRequest
    accepted: bool
    start: Optional[int] = None
    pes: Optional[frozenset[int]] = None

    @property
    def wait(self) -> Optional[int]:
        if not self.accepted:
            return None
        return self.start - self.request.t_r

    @property
    def slowdown(self) -> Optional[float]:
        if not self.accepted:
            return None
        return (self.wait + self.request.t_du) / self.request.t_du


def run(
    requests: Sequence[ARRequest],
    cluster: ClusterConfig,
    policy: Policy,
    on_last_arrival: Optional[Callable[[AvailabilityCalendar], None]] = None,
) -> list[JobOutcome]:
    """Simulate the request stream and return one outcome per request,
    in arrival order.

    ``requests`` must be sorted by arrival time.  ``on_last_arrival``,
    if given, is called with the calendar right after the final arrival
    is decided (the point of peak booked state; afterwards the calendar
    only drains).
    """
    for prev, cur in zip(requests, requests[1:]):
        if cur.t_a < prev.t_a:
            raise ValueError(
                f"requests not sorted by arrival: id {cur.id} at {cur.t_a} "
                f"after id {prev.id} at {prev.t_a}"
            )
    calendar = AvailabilityCalendar(cluster.n_pes)
    outcomes: list[Optional[JobOutcome]] = [None] * len(requests)
    heap: list[tuple[int, int, int, object]] = []
    seq = 0
    for idx, req in enumerate(requests):
        heap.append((req.t_a, _ARRIVAL, seq, idx))
        seq += 1
    heapq.heapify(heap)

    arrivals_left = len(requests)
    while heap:
        time, kind, _, payload = heapq.heappop(heap)
        if kind == _COMPLETION:
            alloc: Allocation = payload
            try:
                calendar.delete_allocation(alloc.start, alloc.end, alloc.pes)
            except CalendarError as exc:
                raise SimulationInternalError(
                    f"release of job {alloc.job_id} [{alloc.start}, {alloc.end}) "
                    f"failed: {exc}"
                ) from exc
        else:
            idx = payload
            req = requests[idx]
            # wider than the machine: infeasible regardless of the calendar
            if req.n_pe > cluster.n_pes:
                found = None
            else:
                found = calendar.find_allocation(req.t_r, req.t_du, req.t_dl, req.n_pe, policy)
            if found is None:
                outcomes[idx] = JobOutcome(request=req, accepted=False)
            else:
                start, pes = found
                end = start + req.t_du
                try:
                    calendar.add_allocation(start, end, pes)
                except CalendarError as exc:
                    raise SimulationInternalError(
                        f"commit of job {req.id} [{start}, {end}) failed: {exc}"
                    ) from exc
                alloc = Allocation(job_id=req.id, start=start, end=end, pes=pes)
                heapq.heappush(heap, (end, _COMPLETION, seq, alloc))
                seq += 1
                outcomes[idx] = JobOutcome(request=req, accepted=True, start=start, pes=pes)
            arrivals_left -= 1
            if arrivals_left == 0 and on_last_arrival is not None:
                on_last_arrival(calendar)
    if not calendar.is_empty():
        raise SimulationInternalError("calendar not drained after final completion")
    return outcomes


def write_outcomes_tsv(outcomes: Iterable[JobOutcome], path: str | Path) -> None:
    """Per-run outcome export; rejected jobs leave start/wait/slowdown blank."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(OUTCOME_TSV_HEADER + "\n")
        for out in outcomes:
            if out.accepted:
                fh.write(
                    f"{out.request.id}\t1\t{out.start}\t{out.wait}\t{out.slowdown}\n"
                )
            else:
                fh.write(f"{out.request.id}\t0\t\t\t\n")
