import math
import random

import pytest

from arsched.calendar import ClusterConfig
from arsched.engine import JobOutcome, run
from arsched.metrics import (
    RUNS_CSV_HEADER,
    SWEEP_CSV_HEADER,
    RunRecord,
    RunSummary,
    aggregate_sweep,
    axis_sort_key,
    confidence_interval,
    config_fingerprint,
    summarize,
    write_runs_csv,
    write_sweep_csv,
)
from arsched.policies import POLICY_ORDER, Policy
from arsched.workload import ARRequest, WorkloadConfig


def outcome(id, t_r, t_du, t_dl, start):
    r = ARRequest(id=id, t_a=0, t_r=t_r, t_du=t_du, t_dl=t_dl, n_pe=1)
    if start is None:
        return JobOutcome(request=r, accepted=False, start=None, pes=None)
    return JobOutcome(request=r, accepted=True, start=start, pes=frozenset({0}))


def test_acceptance_rate_and_slowdown():
    outs = [
        outcome(0, 0, 60, 600, 0),     # wait 0, slowdown 1
        outcome(1, 0, 60, 600, 60),    # wait 60, slowdown 2
        outcome(2, 0, 300, 900, 0),    # wait 0, slowdown 1
        outcome(3, 0, 60, 120, None),
    ]
    s = summarize(outs)
    assert s.acceptance_rate == 0.75
    assert s.avg_slowdown == pytest.approx(4 / 3)
    assert s.n_jobs == 4 and s.n_accepted == 3


def test_slowdown_pair_example():
    outs = [outcome(0, 0, 60, 600, 60), outcome(1, 0, 300, 900, 0)]
    assert summarize(outs).avg_slowdown == 1.5


def test_summarize_no_accepted_jobs():
    s = summarize([outcome(0, 0, 60, 120, None)])
    assert s.acceptance_rate == 0.0
    assert s.avg_slowdown is None


def test_summarize_rejects_empty():
    with pytest.raises(ValueError, match="empty"):
        summarize([])


def test_summarize_order_invariant():
    outs = [outcome(i, 0, 60, 600, 60 * i) for i in range(5)]
    shuffled = list(outs)
    random.Random(1).shuffle(shuffled)
    assert summarize(shuffled) == summarize(outs)


def test_confidence_interval_pinned():
    mean, half = confidence_interval([1.0, 2.0, 3.0, 4.0, 5.0])
    assert mean == 3.0
    # t(0.975, 4) * sqrt(2.5 / 5)
    assert half == pytest.approx(1.9632, abs=1e-3)
    mean, half = confidence_interval([0.0, 1.0])
    assert mean == 0.5
    assert half == pytest.approx(6.3531, abs=1e-3)


def test_confidence_interval_zero_variance():
    mean, half = confidence_interval([2.0] * 6)
    assert (mean, half) == (2.0, 0.0)


def test_confidence_interval_needs_two_samples():
    with pytest.raises(ValueError, match="2 samples"):
        confidence_interval([1.0])


def test_confidence_interval_shrinks_with_samples():
    rng = random.Random(0)
    base = [rng.gauss(5.0, 1.0) for _ in range(20)]
    halves = [confidence_interval(base[:n])[1] for n in (5, 10, 20)]
    assert halves[0] > halves[1] > halves[2]


def record(axis, policy, seed, rate, slow):
    return RunRecord(
        axis=axis,
        policy=policy,
        seed=seed,
        summary=RunSummary(
            acceptance_rate=rate, avg_slowdown=slow, n_jobs=100,
            n_accepted=int(rate * 100), policy=policy,
        ),
    )


def grid(axes, seeds):
    records = []
    for i, axis in enumerate(axes):
        for policy in POLICY_ORDER:
            for seed in seeds:
                records.append(record(axis, policy, seed, 0.5 + 0.01 * i + 0.001 * seed, 2.0 + 0.1 * seed))
    return records


def test_aggregate_sweep_shape_and_order():
    axes = ["5", "6", "7", "8", "9"]
    points = aggregate_sweep(grid(axes, range(10)))
    # 5 axis values x 7 policies, two metrics each
    assert len(points) == 70
    assert [p.axis for p in points[:14]] == ["5"] * 14
    assert [p.policy for p in points[:4]] == [Policy.FF, Policy.FF, Policy.PE_B, Policy.PE_B]
    assert [p.metric for p in points[:2]] == ["acceptance_rate", "avg_slowdown"]
    for p in points:
        assert p.n_samples == 10 and p.n_absent == 0


def test_aggregate_sweep_rejects_missing_seed():
    records = grid(["5", "6"], range(3))
    dropped = records.pop(10)
    with pytest.raises(ValueError) as err:
        aggregate_sweep(records)
    assert dropped.axis in str(err.value)


def test_aggregate_sweep_rejects_duplicate_seed():
    records = grid(["5"], range(3))
    records.append(records[0])
    with pytest.raises(ValueError, match="duplicate"):
        aggregate_sweep(records)


def test_aggregate_sweep_needs_two_seeds():
    with pytest.raises(ValueError, match="2 seeds"):
        aggregate_sweep(grid(["5"], [0]))


def test_aggregate_sweep_absent_slowdowns():
    records = [record("5", Policy.FF, s, 0.0, None) for s in range(3)]
    points = aggregate_sweep(records)
    slow = [p for p in points if p.metric == "avg_slowdown"]
    (p,) = slow
    assert p.mean is None and p.ci95 is None and p.n_absent == 3


def test_axis_sort_key_numeric_then_label():
    labels = ["10", "2", "1,5", "1,2"]
    assert sorted(labels, key=axis_sort_key) == ["1,2", "1,5", "2", "10"]


def test_write_runs_csv(tmp_path):
    records = grid(["6", "5"], range(2))
    path = tmp_path / "runs.csv"
    write_runs_csv(records, path)
    lines = path.read_text().splitlines()
    assert lines[0] == RUNS_CSV_HEADER
    assert len(lines) == 1 + len(records)
    # sorted by axis value, then canonical policy order, then seed
    assert lines[1].startswith("5,ff,0,")
    assert lines[2].startswith("5,ff,1,")
    assert lines[3].startswith("5,pe_b,0,")
    assert lines[1 + 14].startswith("6,ff,0,")
    assert path.read_text() == path.read_text()


def test_write_sweep_csv(tmp_path):
    points = aggregate_sweep(grid(["5"], range(3)))
    path = tmp_path / "sweep.csv"
    write_sweep_csv(points, path)
    lines = path.read_text().splitlines()
    assert lines[0] == SWEEP_CSV_HEADER
    assert len(lines) == 1 + 14
    assert lines[1].split(",")[:3] == ["5", "ff", "acceptance_rate"]
    # float fields rendered via repr for byte-stable output
    rate = lines[1].split(",")[3]
    assert rate == repr(float(rate))


def test_config_fingerprint_ignores_seed():
    cluster = ClusterConfig(n_pes=64)
    a = config_fingerprint(cluster, WorkloadConfig(job_count=100, seed=0))
    b = config_fingerprint(cluster, WorkloadConfig(job_count=100, seed=9))
    c = config_fingerprint(cluster, WorkloadConfig(job_count=101, seed=0))
    assert a == b
    assert a != c
    assert len(a) == 64 and set(a) <= set("0123456789abcdef")


def test_summarize_matches_hand_count_on_run():
    cfg = WorkloadConfig(job_count=200, seed=2)
    outs = run(
        __import__("arsched.workload", fromlist=["generate"]).generate(cfg),
        ClusterConfig(),
        Policy.FF,
    )
    s = summarize(outs, policy=Policy.FF)
    accepted = [o for o in outs if o.accepted]
    assert s.n_accepted == len(accepted)
    assert s.acceptance_rate == len(accepted) / 200
    want = sum((o.start - o.request.t_r + o.request.t_du) / o.request.t_du for o in accepted)
    assert s.avg_slowdown == pytest.approx(want / len(accepted))
    assert s.policy is Policy.FF
