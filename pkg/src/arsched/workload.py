"""Synthetic advance-reservation workloads and SWF trace ingestion.

Job sizes follow a two-stage uniform distribution over log2 size (powers
of two between 32 and 1024); runtimes are drawn from a fixed six-value
menu; ready times and deadlines are derived from the arrival time via the
artime and deadline factors; the arrival factor rescales arrival times to
control load.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Sequence

SIZE_MIN = 32
SIZE_MAX = 1024

RUNTIME_VALUES = (60, 300, 900, 1800, 3600, 10800)

# Bucket probabilities for the runtime menu.  Not trace-fitted: chosen as
# a mid-weighted default; experiments depend on trends, not these values.
DEFAULT_RUNTIME_WEIGHTS = (0.15, 0.20, 0.20, 0.20, 0.15, 0.10)

# Mean exponential inter-arrival gap (seconds).  Calibrated so that the
# default cluster at arrival_factor=1 sits at mid-range contention
# (acceptance between 0.3 and 0.9 for every policy).
DEFAULT_MEAN_INTERARRIVAL = 450.0

REQUEST_TSV_HEADER = "id\tt_a\tt_r\tt_du\tt_dl\tn_pe"


class ConfigError(ValueError):
    """A configuration field is out of range or inconsistent."""


class SwfParseError(ValueError):
    """A trace line could not be parsed; carries the line number."""


@dataclass(frozen=True)
class ARRequest:
    """One advance-reservation request.

    ``t_a`` arrival, ``t_r`` ready (earliest start, >= t_a), ``t_du``
    duration, ``t_dl`` deadline (>= t_r + t_du), ``n_pe`` PEs required.
    All times are integer seconds.
    """

    id: int
    t_a: int
    t_r: int
    t_du: int
    t_dl: int
    n_pe: int

    def __post_init__(self) -> None:
        if self.t_a < 0:
            raise ValueError(f"request {self.id}: t_a must be >= 0, got {self.t_a}")
        if self.t_r < self.t_a:
            raise ValueError(f"request {self.id}: t_r {self.t_r} < t_a {self.t_a}")
        if self.t_du <= 0:
            raise ValueError(f"request {self.id}: t_du must be positive, got {self.t_du}")
        if self.t_dl < self.t_r + self.t_du:
            raise ValueError(
                f"request {self.id}: t_dl {self.t_dl} < t_r + t_du {self.t_r + self.t_du}"
            )
        if self.n_pe < 1:
            raise ValueError(f"request {self.id}: n_pe must be >= 1, got {self.n_pe}")

    @property
    def window(self) -> int:
        """Scheduling slack: latest start minus ready time."""
        return self.t_dl - self.t_du - self.t_r


@dataclass(frozen=True)
class WorkloadConfig:
    job_count: int = 10_000
    u_low: float = 4.5
    u_med: float = 7.0
    u_hi: float = 10.0
    u_prob: float = 0.82
    runtime_values: tuple[int, ...] = RUNTIME_VALUES
    runtime_weights: tuple[float, ...] = DEFAULT_RUNTIME_WEIGHTS
    size_runtime_coupling: bool = True
    artime_factor: float = 3.0
    deadline_factor: float = 3.0
    arrival_factor: float = 1.0
    mean_interarrival: float = DEFAULT_MEAN_INTERARRIVAL
    seed: int = 0

    def validate(self) -> None:
        if self.job_count < 0:
            raise ConfigError(f"job_count must be >= 0, got {self.job_count}")
        if not self.u_low < self.u_med < self.u_hi:
            raise ConfigError(
                f"need u_low < u_med < u_hi, got {self.u_low}, {self.u_med}, {self.u_hi}"
            )
        if not 0.0 <= self.u_prob <= 1.0:
            raise ConfigError(f"u_prob must be in [0, 1], got {self.u_prob}")
        if len(self.runtime_values) != len(self.runtime_weights):
            raise ConfigError(
                f"runtime_weights has {len(self.runtime_weights)} entries for "
                f"{len(self.runtime_values)} runtime_values"
            )
        if any(v <= 0 for v in self.runtime_values):
            raise ConfigError(f"runtime_values must be positive, got {self.runtime_values}")
        if any(w < 0 for w in self.runtime_weights):
            raise ConfigError(f"runtime_weights must be non-negative, got {self.runtime_weights}")
        if abs(sum(self.runtime_weights) - 1.0) > 1e-9:
            raise ConfigError(
                f"runtime_weights must sum to 1, got {sum(self.runtime_weights)}"
            )
        if self.artime_factor < 0:
            raise ConfigError(f"artime_factor must be >= 0, got {self.artime_factor}")
        if self.deadline_factor < 0:
            raise ConfigError(f"deadline_factor must be >= 0, got {self.deadline_factor}")
        if self.arrival_factor <= 0:
            raise ConfigError(f"arrival_factor must be > 0, got {self.arrival_factor}")
        if self.mean_interarrival <= 0:
            raise ConfigError(
                f"mean_interarrival must be > 0, got {self.mean_interarrival}"
            )


def sample_size(config: WorkloadConfig, rng: random.Random) -> int:
    """Draw a job size: two-stage uniform over log2 size, rounded to a
    power of two and clamped to [32, 1024].

    With probability ``u_prob`` the exponent is uniform on
    [u_low, u_med], otherwise on [u_med, u_hi].
    """
    if rng.random() < config.u_prob:
        x = rng.uniform(config.u_low, config.u_med)
    else:
        x = rng.uniform(config.u_med, config.u_hi)
    return min(max(2 ** round(x), SIZE_MIN), SIZE_MAX)


def _runtime_weights_for(config: WorkloadConfig, n_pe: int) -> tuple[float, ...]:
    """Weights for the runtime menu given the job size.

    Sizes at or above 2^u_med shift the whole weight vector one bucket
    toward longer runtimes (size/runtime coupling); disable with
    ``size_runtime_coupling=False``.
    """
    w = config.runtime_weights
    if not config.size_runtime_coupling or n_pe < 2 ** config.u_med:
        return w
    shifted = [0.0] + list(w[:-1])
    shifted[-1] += w[-1]
    return tuple(shifted)


def sample_runtime(config: WorkloadConfig, n_pe: int, rng: random.Random) -> int:
    """Draw a runtime from the fixed menu per the size-class weights."""
    weights = _runtime_weights_for(config, n_pe)
    return rng.choices(config.runtime_values, weights=weights)[0]


def derive_ar_fields(
    t_a: int,
    t_du: int,
    artime_factor: float,
    deadline_factor: float,
    rng: random.Random,
) -> tuple[int, int]:
    """Ready time and deadline for a job arriving at ``t_a``.

    The book-ahead period is ``artime_factor * U[0,1] * t_du`` and the
    deadline is ``t_r + (1 + deadline_factor * U[0,1]) * t_du``, rounded
    to whole seconds; a zero deadline factor gives an immediate deadline.
    """
    u1 = rng.random()
    u2 = rng.random()
    t_r = t_a + round(artime_factor * u1 * t_du)
    t_dl = t_r + round((1.0 + deadline_factor * u2) * t_du)
    return t_r, t_dl


def apply_arrival_factor(
    requests: Sequence[ARRequest], arrival_factor: float
) -> list[ARRequest]:
    """Rescale arrivals: each ``t_a`` becomes ``round(t_a / factor)``.

    Ready and deadline offsets relative to the arrival are preserved, so
    every request invariant still holds and arrival order is unchanged.
    """
    if arrival_factor <= 0:
        raise ConfigError(f"arrival_factor must be > 0, got {arrival_factor}")
    if arrival_factor == 1.0:
        return list(requests)
    out = []
    for req in requests:
        t_a = round(req.t_a / arrival_factor)
        out.append(
            replace(
                req,
                t_a=t_a,
                t_r=t_a + (req.t_r - req.t_a),
                t_dl=t_a + (req.t_dl - req.t_a),
            )
        )
    return out


def generate(config: WorkloadConfig) -> list[ARRequest]:
    """Generate the configured number of requests, sorted by arrival.

    Arrivals follow an exponential inter-arrival process with the
    configured mean, then the arrival factor rescales them.  Fully
    determined by ``config.seed``.
    """
    config.validate()
    rng = random.Random(config.seed)
    requests: list[ARRequest] = []
    clock = 0.0
    for i in range(config.job_count):
        clock += rng.expovariate(1.0 / config.mean_interarrival)
        t_a = round(clock)
        n_pe = sample_size(config, rng)
        t_du = sample_runtime(config, n_pe, rng)
        t_r, t_dl = derive_ar_fields(
            t_a, t_du, config.artime_factor, config.deadline_factor, rng
        )
        requests.append(
            ARRequest(id=i, t_a=t_a, t_r=t_r, t_du=t_du, t_dl=t_dl, n_pe=n_pe)
        )
    return apply_arrival_factor(requests, config.arrival_factor)


@dataclass(frozen=True)
class SwfWorkload:
    """Trace ingestion result: the requests plus a skipped-record tally."""

    requests: list[ARRequest] = field(default_factory=list)
    skipped: int = 0


def ingest_swf(
    path: str | Path,
    n_pes: int,
    artime_factor: float = 0.0,
    deadline_factor: float = 0.0,
    arrival_factor: float = 1.0,
    seed: int = 0,
) -> SwfWorkload:
    """Read a Standard Workload Format trace into AR requests.

    Maps submit time -> t_a, run time -> t_du and allocated processors ->
    n_pe; records with missing (-1) or non-positive runtime/processors,
    or more processors than the cluster has, are skipped and tallied.
    Ready times and deadlines are derived with the given factors and
    seed, then the arrival factor is applied.
    """
    rng = random.Random(seed)
    raw: list[tuple[int, int, int]] = []
    skipped = 0
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith(";"):
                continue
            fields = line.split()
            if len(fields) < 5:
                raise SwfParseError(f"{path}:{lineno}: expected >= 5 fields, got {len(fields)}")
            try:
                submit = int(float(fields[1]))
                run_time = int(float(fields[3]))
                procs = int(fields[4])
            except ValueError as exc:
                raise SwfParseError(f"{path}:{lineno}: {exc}") from None
            if run_time <= 0 or procs <= 0 or procs > n_pes:
                skipped += 1
                continue
            raw.append((max(submit, 0), run_time, procs))
    raw.sort(key=lambda rec: rec[0])
    requests = []
    for i, (t_a, t_du, n_pe) in enumerate(raw):
        t_r, t_dl = derive_ar_fields(t_a, t_du, artime_factor, deadline_factor, rng)
        requests.append(
            ARRequest(id=i, t_a=t_a, t_r=t_r, t_du=t_du, t_dl=t_dl, n_pe=n_pe)
        )
    return SwfWorkload(requests=apply_arrival_factor(requests, arrival_factor), skipped=skipped)


def write_requests_tsv(requests: Iterable[ARRequest], path: str | Path) -> None:
    """Write requests as a tab-separated file for inspection and replay."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(REQUEST_TSV_HEADER + "\n")
        for req in requests:
            fh.write(
                f"{req.id}\t{req.t_a}\t{req.t_r}\t{req.t_du}\t{req.t_dl}\t{req.n_pe}\n"
            )


def read_requests_tsv(path: str | Path) -> list[ARRequest]:
    """Read back a file written by :func:`write_requests_tsv`."""
    requests = []
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n")
        if header != REQUEST_TSV_HEADER:
            raise SwfParseError(f"{path}:1: unexpected header {header!r}")
        for lineno, line in enumerate(fh, start=2):
            if not line.strip():
                continue
            parts = line.split()
            if len(parts) != 6:
                raise SwfParseError(f"{path}:{lineno}: expected 6 fields, got {len(parts)}")
            try:
                vals = [int(p) for p in parts]
            except ValueError as exc:
                raise SwfParseError(f"{path}:{lineno}: {exc}") from None
            requests.append(ARRequest(*vals))
    return requests
