import pytest

from arsched.calendar import AvailabilityCalendar, ClusterConfig
from arsched.engine import (
    OUTCOME_TSV_HEADER,
    SimulationInternalError,
    run,
    write_outcomes_tsv,
)
from arsched.oracle import as_dense, oracle_find
from arsched.policies import POLICY_ORDER, Policy
from arsched.workload import ARRequest, WorkloadConfig, generate


def req(id, t_a, t_r, t_du, t_dl, n_pe):
    return ARRequest(id=id, t_a=t_a, t_r=t_r, t_du=t_du, t_dl=t_dl, n_pe=n_pe)


def shrunk_workload(job_count, seed, time_scale=100, pe_scale=64):
    """A generated workload compressed into small integer times and a
    small PE space, for oracle-backed replay."""
    out = []
    for r in generate(WorkloadConfig(job_count=job_count, seed=seed)):
        t_a = r.t_a // time_scale
        t_r = r.t_r // time_scale
        t_du = max(1, r.t_du // time_scale)
        out.append(
            ARRequest(
                id=r.id,
                t_a=t_a,
                t_r=t_r,
                t_du=t_du,
                t_dl=max(r.t_dl // time_scale, t_r + t_du) + 1,
                n_pe=max(1, r.n_pe // pe_scale),
            )
        )
    return out


def test_single_request_runs_at_ready_time():
    outcomes = run([req(0, 0, 5, 10, 30, 3)], ClusterConfig(n_pes=8), Policy.FF)
    (out,) = outcomes
    assert out.accepted
    assert out.start == 5
    assert out.pes == frozenset({0, 1, 2})
    assert out.wait == 0
    assert out.slowdown == 1.0


def test_worked_scenario_pe_worst_fit():
    """Three arrivals occupy the calendar, then the request
    (t_r=2, t_du=2, t_dl=9, n_pe=2) lands at start 3 under the
    worst-fit PE policy: the all-free rectangle over [3,8) beats the
    earlier but narrower one at 2."""
    requests = [
        req(1, 0, 0, 3, 3, 2),    # {0,1} over [0,3)
        req(2, 0, 0, 1, 1, 2),    # {2,3} over [0,1)
        req(3, 0, 8, 2, 10, 1),   # lowest free id over [8,10)
        req(4, 0, 2, 2, 9, 2),
    ]
    outcomes = run(requests, ClusterConfig(n_pes=8), Policy.PE_W)
    assert [o.accepted for o in outcomes] == [True] * 4
    assert outcomes[0].pes == frozenset({0, 1})
    assert outcomes[1].pes == frozenset({2, 3})
    assert outcomes[2].pes == frozenset({0})
    assert outcomes[3].start == 3
    assert outcomes[3].wait == 1
    assert outcomes[3].slowdown == 1.5


def test_capacity_rejection_is_final():
    """Two all-cluster requests with the same immediate window: the first
    is committed, the second has nowhere to go."""
    requests = [
        req(0, 0, 0, 10, 10, 4),
        req(1, 0, 0, 10, 10, 4),
    ]
    outcomes = run(requests, ClusterConfig(n_pes=4), Policy.FF)
    assert outcomes[0].accepted
    assert not outcomes[1].accepted
    assert outcomes[1].start is None
    assert outcomes[1].wait is None and outcomes[1].slowdown is None


def test_completion_frees_capacity_for_simultaneous_arrival():
    """A completion and an arrival at the same instant: the release is
    processed first, so the arrival can take the whole cluster."""
    requests = [
        req(0, 0, 0, 10, 10, 4),
        req(1, 10, 10, 5, 15, 4),
    ]
    outcomes = run(requests, ClusterConfig(n_pes=4), Policy.FF)
    assert [o.accepted for o in outcomes] == [True, True]
    assert outcomes[1].start == 10


def test_requests_must_be_sorted():
    requests = [req(0, 100, 100, 10, 200, 1), req(1, 50, 50, 10, 200, 1)]
    with pytest.raises(ValueError, match="sorted"):
        run(requests, ClusterConfig(n_pes=4), Policy.FF)


def test_outcomes_keep_arrival_order_and_are_deterministic():
    requests = generate(WorkloadConfig(job_count=300, seed=5))
    outcomes = run(requests, ClusterConfig(), Policy.PEDU_B)
    assert [o.request.id for o in outcomes] == [r.id for r in requests]
    assert run(requests, ClusterConfig(), Policy.PEDU_B) == outcomes


def test_accepted_outcomes_respect_deadlines_and_sizes():
    requests = generate(WorkloadConfig(job_count=300, seed=8))
    outcomes = run(requests, ClusterConfig(), Policy.PE_W)
    accepted = [o for o in outcomes if o.accepted]
    assert accepted
    for out in accepted:
        assert out.request.t_r <= out.start
        assert out.start + out.request.t_du <= out.request.t_dl
        assert len(out.pes) == out.request.n_pe


def test_replay_accepted_schedule_never_double_books():
    """Per-PE interval replay of every accepted outcome: no overlap."""
    outcomes = run(generate(WorkloadConfig(job_count=400, seed=3)), ClusterConfig(), Policy.DU_W)
    per_pe = {}
    for o in outcomes:
        if not o.accepted:
            continue
        for p in o.pes:
            per_pe.setdefault(p, []).append((o.start, o.start + o.request.t_du))
    assert per_pe
    for p, intervals in per_pe.items():
        intervals.sort()
        for (s1, e1), (s2, e2) in zip(intervals, intervals[1:]):
            assert e1 <= s2, f"PE {p}: [{s1},{e1}) overlaps [{s2},{e2})"


def test_ff_starts_are_minimal_feasible():
    """Replaying an FF run arrival by arrival against the dense reference:
    every accepted start is the earliest feasible candidate, and every
    rejection really had no feasible candidate."""
    requests = shrunk_workload(job_count=120, seed=14)
    outcomes = run(requests, ClusterConfig(n_pes=16), Policy.FF)
    cal = AvailabilityCalendar(16)
    live = []  # (end, start, pes)
    checked = 0
    for out in outcomes:
        r = out.request
        live.sort()
        while live and live[0][0] <= r.t_a:
            end, start, pes = live.pop(0)
            cal.delete_allocation(start, end, pes)
        horizon = max([r.t_dl] + [end for end, _, _ in live])
        if horizon <= 4096:
            want = oracle_find(
                as_dense(cal, horizon),
                r.t_r, r.t_du, r.t_dl, r.n_pe, Policy.FF,
                starts=cal.candidate_start_times(r.t_r, r.t_du, r.t_dl),
            )
            if out.accepted:
                assert want is not None and out.start == want[0]
            else:
                assert want is None
            checked += 1
        if out.accepted:
            cal.add_allocation(out.start, out.start + r.t_du, out.pes)
            live.append((out.start + r.t_du, out.start, out.pes))
    assert checked > 60


def test_internal_error_surfaces_calendar_bug(monkeypatch):
    """A placement that ignores existing bookings must abort the run as
    an engine bug, not pass as a rejection."""
    requests = [req(0, 0, 0, 10, 10, 2), req(1, 0, 0, 10, 20, 2)]

    def bad_find(self, t_r, t_du, t_dl, n_pe, policy):
        return (0, frozenset({0, 1}))

    monkeypatch.setattr(AvailabilityCalendar, "find_allocation", bad_find)
    with pytest.raises(SimulationInternalError, match="commit"):
        run(requests, ClusterConfig(n_pes=2), Policy.FF)


def test_write_outcomes_tsv(tmp_path):
    requests = [req(0, 0, 0, 10, 10, 2), req(1, 0, 0, 10, 10, 2)]
    outcomes = run(requests, ClusterConfig(n_pes=2), Policy.FF)
    path = tmp_path / "outcomes.tsv"
    write_outcomes_tsv(outcomes, path)
    lines = path.read_text().splitlines()
    assert lines[0] == OUTCOME_TSV_HEADER
    assert lines[1] == "0\t1\t0\t0\t1.0"
    assert lines[2] == "1\t0\t\t\t"


def test_on_last_arrival_snapshot():
    seen = {}
    run(
        [req(0, 0, 5, 10, 30, 2)],
        ClusterConfig(n_pes=4),
        Policy.FF,
        on_last_arrival=lambda cal: seen.setdefault("dump", cal.dump()),
    )
    assert seen["dump"] == "5\t0,1\n15\t-"


def test_policies_agree_on_uncontended_stream():
    """With no contention every policy accepts everything at the ready
    time, so outcomes coincide across policies."""
    requests = [req(i, i * 1000, i * 1000 + 10, 60, i * 1000 + 1000, 2) for i in range(20)]
    baseline = run(requests, ClusterConfig(n_pes=1024), POLICY_ORDER[0])
    for policy in POLICY_ORDER[1:]:
        assert run(requests, ClusterConfig(n_pes=1024), policy) == baseline
