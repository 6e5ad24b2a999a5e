"""Run summaries, confidence intervals, and sweep aggregation.

Acceptance rate is the fraction of requests admitted; average slowdown
is taken over accepted jobs only, with wait measured from the ready time
(not submission).  A run that accepted nothing reports its slowdown as
absent rather than a sentinel.  Intervals are Student-t based since seed
counts are small.
"""

from __future__ import annotations

import csv
import hashlib
import json
import statistics
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Optional, Sequence

from scipy import stats

from .calendar import ClusterConfig
from .engine import JobOutcome
from .policies import POLICY_ORDER, Policy
from .workload import WorkloadConfig

RUNS_CSV_HEADER = "axis,policy,seed,acceptance_rate,avg_slowdown,n_jobs,n_accepted"
SWEEP_CSV_HEADER = "axis,policy,metric,mean,ci95"

METRIC_NAMES = ("acceptance_rate", "avg_slowdown")


@dataclass(frozen=True)
class RunSummary:
    acceptance_rate: float
    avg_slowdown: Optional[float]
    n_jobs: int
    n_accepted: int
    policy: Optional[str] = None
    config_fingerprint: Optional[str] = None


@dataclass(frozen=True)
class RunRecord:
    """One sweep cell: an axis label, a policy, a seed, and its summary."""

    axis: str
    policy: str
    seed: int
    summary: RunSummary


@dataclass(frozen=True)
class SweepPoint:
    """Mean and 95% CI half-width of one metric for one (axis, policy)
    group; ``n_absent`` counts runs whose metric was absent."""

    axis: str
    policy: str
    metric: str
    mean: Optional[float]
    ci95: Optional[float]
    n_samples: int
    n_absent: int


def summarize(
    outcomes: Sequence[JobOutcome],
    policy: Optional[str] = None,
    config_fingerprint: Optional[str] = None,
) -> RunSummary:
    """Acceptance rate and average slowdown of one run."""
    if not outcomes:
        raise ValueError("cannot summarize an empty outcome list")
    accepted = [o for o in outcomes if o.accepted]
    avg_slowdown = (
        statistics.fmean(o.slowdown for o in accepted) if accepted else None
    )
    return RunSummary(
        acceptance_rate=len(accepted) / len(outcomes),
        avg_slowdown=avg_slowdown,
        n_jobs=len(outcomes),
        n_accepted=len(accepted),
        policy=policy,
        config_fingerprint=config_fingerprint,
    )


def confidence_interval(
    samples: Sequence[float], level: float = 0.95
) -> tuple[float, float]:
    """Mean and t-based half-width at the given level (n-1 dof)."""
    if len(samples) < 2:
        raise ValueError(f"need >= 2 samples for an interval, got {len(samples)}")
    mean = statistics.fmean(samples)
    sd = statistics.stdev(samples)
    t = stats.t.ppf(0.5 + level / 2.0, len(samples) - 1)
    return mean, t * sd / len(samples) ** 0.5


def config_fingerprint(cluster: ClusterConfig, workload: WorkloadConfig) -> str:
    """Stable hash of the cluster+workload configuration, seed excluded
    (the fingerprint identifies a sweep cell across its seeds)."""
    payload = {"cluster": asdict(cluster), "workload": asdict(workload)}
    payload["workload"].pop("seed", None)
    blob = json.dumps(payload, sort_keys=True).encode("utf-8")
    return hashlib.sha256(blob).hexdigest()


def axis_sort_key(label: str) -> tuple[float, str]:
    """Numeric-first ordering of axis labels; pair labels like "3,3"
    order by their first component."""
    head = label.split(",")[0]
    try:
        return (float(head), label)
    except ValueError:
        return (float("inf"), label)


def _policy_rank(token: str) -> int:
    try:
        return POLICY_ORDER.index(Policy(token))
    except ValueError:
        return len(POLICY_ORDER)


def aggregate_sweep(records: Sequence[RunRecord]) -> list[SweepPoint]:
    """Per-(axis, policy) means and intervals for both metrics.

    Every group must hold the same number of seeds (>= 2); a ragged
    sweep is rejected naming the missing cell.  Output is ordered axis
    ascending, policy canonical, metric acceptance-then-slowdown.
    """
    if not records:
        raise ValueError("no run records to aggregate")
    groups: dict[tuple[str, str], dict[int, RunSummary]] = {}
    for rec in records:
        cell = groups.setdefault((rec.axis, rec.policy), {})
        if rec.seed in cell:
            raise ValueError(
                f"duplicate run for axis={rec.axis}, policy={rec.policy}, seed={rec.seed}"
            )
        cell[rec.seed] = rec.summary
    all_seeds = sorted({rec.seed for rec in records})
    if len(all_seeds) < 2:
        raise ValueError("confidence intervals need >= 2 seeds per cell")
    for (axis, policy), cell in groups.items():
        missing = [s for s in all_seeds if s not in cell]
        if missing:
            raise ValueError(
                f"ragged sweep: axis={axis}, policy={policy} missing seeds {missing}"
            )

    points = []
    axes = sorted({axis for axis, _ in groups}, key=axis_sort_key)
    policies = sorted({policy for _, policy in groups}, key=_policy_rank)
    for axis in axes:
        for policy in policies:
            cell = groups[(axis, policy)]
            summaries = [cell[s] for s in all_seeds]
            for metric in METRIC_NAMES:
                values = [getattr(s, metric) for s in summaries]
                present = [v for v in values if v is not None]
                n_absent = len(values) - len(present)
                if len(present) >= 2:
                    mean, hw = confidence_interval(present)
                else:
                    mean, hw = None, None
                points.append(
                    SweepPoint(
                        axis=axis,
                        policy=policy,
                        metric=metric,
                        mean=mean,
                        ci95=hw,
                        n_samples=len(present),
                        n_absent=n_absent,
                    )
                )
    return points


def _fmt(value: Optional[float]) -> str:
    return "" if value is None else repr(float(value))


def write_runs_csv(records: Sequence[RunRecord], path: str | Path) -> None:
    ordered = sorted(
        records, key=lambda r: (axis_sort_key(r.axis), _policy_rank(r.policy), r.seed)
    )
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(RUNS_CSV_HEADER.split(","))
        for rec in ordered:
            s = rec.summary
            writer.writerow(
                [
                    rec.axis,
                    rec.policy,
                    rec.seed,
                    _fmt(s.acceptance_rate),
                    _fmt(s.avg_slowdown),
                    s.n_jobs,
                    s.n_accepted,
                ]
            )


def write_sweep_csv(points: Sequence[SweepPoint], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(SWEEP_CSV_HEADER.split(","))
        for p in points:
            writer.writerow([p.axis, p.policy, p.metric, _fmt(p.mean), _fmt(p.ci95)])
