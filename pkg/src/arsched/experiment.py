"""Sweep runner: config parsing, cell execution, CSV/manifest output.

A sweep varies one axis (median job size exponent, arrival factor, or
the flexibility factor pair) over a value list, crossing it with the
selected policies and seeds.  Cells are independent; a worker pool may
execute them, but files are written only by the collector, so serial
and parallel runs produce identical bytes.
"""

from __future__ import annotations

import configparser
import dataclasses
import hashlib
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from datetime import datetime, timezone
from pathlib import Path

from . import engine, metrics
from .calendar import ClusterConfig
from .policies import Policy
from .workload import ConfigError, WorkloadConfig, generate

AXES = ("umed", "arrival_factor", "flexibility")

DEFAULT_SWEEP_VALUES = {
    "umed": (5, 6, 7, 8, 9),
    "arrival_factor": (0.5, 0.75, 1.0, 1.25, 1.5),
    "flexibility": ((1, 1), (2, 2), (3, 3), (4, 4), (5, 5)),
}
DEFAULT_SEEDS = tuple(range(10))

_SECTION_KEYS = {
    "cluster": {"n_pes"},
    "workload": {
        "job_count",
        "u_low",
        "u_med",
        "u_hi",
        "u_prob",
        "runtime_values",
        "runtime_weights",
        "size_runtime_coupling",
        "artime_factor",
        "deadline_factor",
        "arrival_factor",
        "mean_interarrival",
        "seed",
    },
    "sweep": {"axis", "values", "policies", "seeds", "workers", "ci", "plots"},
    "output": {"dir"},
}


@dataclass(frozen=True)
class ExperimentConfig:
    cluster: ClusterConfig
    workload: WorkloadConfig
    axis: str
    values: tuple
    policies: tuple[Policy, ...]
    seeds: tuple[int, ...]
    output_dir: Path
    workers: int = 1
    with_ci: bool = True
    with_plots: bool = True

    def validate(self) -> None:
        if self.axis not in AXES:
            raise ConfigError(f"sweep.axis must be one of {AXES}, got {self.axis!r}")
        if not self.values:
            raise ConfigError("sweep.values must be non-empty")
        if not self.policies:
            raise ConfigError("sweep.policies must be non-empty")
        if not self.seeds:
            raise ConfigError("sweep.seeds must be non-empty")
        if len(set(self.seeds)) != len(self.seeds):
            raise ConfigError(f"sweep.seeds has duplicates: {list(self.seeds)}")
        if self.with_ci and len(self.seeds) < 2:
            raise ConfigError("sweep.seeds needs >= 2 seeds for CI output (or disable ci)")
        if self.workers < 1:
            raise ConfigError(f"sweep.workers must be >= 1, got {self.workers}")
        if self.axis == "umed":
            bad = [v for v in self.values if v not in (5, 6, 7, 8, 9)]
            if bad:
                raise ConfigError(f"sweep.values for umed must be in 5..9, got {bad}")
        elif self.axis == "arrival_factor":
            bad = [v for v in self.values if not v > 0]
            if bad:
                raise ConfigError(f"sweep.values for arrival_factor must be > 0, got {bad}")
        else:
            bad = [v for v in self.values if not (v[0] >= 0 and v[1] >= 0)]
            if bad:
                raise ConfigError(f"sweep.values for flexibility must be >= 0 pairs, got {bad}")
        self.workload.validate()


def axis_label(axis: str, value) -> str:
    # 5.0 -> "5" but 0.75 -> "0.75"
    if axis == "flexibility":
        return f"{value[0]:g},{value[1]:g}"
    return format(value, "g")


def workload_for(base: WorkloadConfig, axis: str, value, seed: int) -> WorkloadConfig:
    """The base workload with one axis value and the seed applied."""
    if axis == "umed":
        return replace(base, u_med=float(value), seed=seed)
    if axis == "arrival_factor":
        return replace(base, arrival_factor=float(value), seed=seed)
    if axis == "flexibility":
        return replace(
            base, artime_factor=float(value[0]), deadline_factor=float(value[1]), seed=seed
        )
    raise ConfigError(f"unknown sweep axis {axis!r}")


def parse_values(axis: str, text: str) -> tuple:
    """Parse a comma-separated value list; flexibility pairs use colons
    ("1:1,2:2")."""
    items = [tok.strip() for tok in text.split(",") if tok.strip()]
    if not items:
        raise ConfigError(f"sweep.values is empty: {text!r}")
    try:
        if axis == "umed":
            return tuple(int(tok) for tok in items)
        if axis == "arrival_factor":
            return tuple(float(tok) for tok in items)
        if axis == "flexibility":
            pairs = []
            for tok in items:
                a, _, d = tok.partition(":")
                if not _:
                    raise ValueError(f"expected a:d pair, got {tok!r}")
                pairs.append((float(a), float(d)))
            return tuple(pairs)
    except ValueError as exc:
        raise ConfigError(f"sweep.values: {exc}") from exc
    raise ConfigError(f"sweep.axis must be one of {AXES}, got {axis!r}")


def parse_policies(text: str) -> tuple[Policy, ...]:
    items = [tok.strip() for tok in text.split(",") if tok.strip()]
    if not items:
        raise ConfigError(f"sweep.policies is empty: {text!r}")
    return tuple(Policy.from_token(tok) for tok in items)


def parse_seeds(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(tok.strip()) for tok in text.split(",") if tok.strip())
    except ValueError as exc:
        raise ConfigError(f"sweep.seeds: {exc}") from exc


def _parse_bool(section: str, key: str, text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"{section}.{key}: expected a boolean, got {text!r}")


def read_config_file(path: str | Path) -> dict[str, dict[str, str]]:
    """Raw string values from the INI-style config, with unknown
    sections or keys rejected by name."""
    parser = configparser.ConfigParser()
    try:
        with open(path, "r", encoding="utf-8") as fh:
            parser.read_file(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    except configparser.Error as exc:
        raise ConfigError(f"malformed config file {path}: {exc}") from exc
    out: dict[str, dict[str, str]] = {}
    for section in parser.sections():
        if section not in _SECTION_KEYS:
            raise ConfigError(f"unknown config section [{section}]")
        known = _SECTION_KEYS[section]
        out[section] = {}
        for key, value in parser.items(section):
            if key not in known:
                raise ConfigError(f"unknown config key {section}.{key}")
            out[section][key] = value
    return out


def _typed(section: str, key: str, text: str, kind):
    try:
        return kind(text)
    except ValueError as exc:
        raise ConfigError(f"{section}.{key}: {exc}") from exc


def make_cluster_config(section: dict[str, str]) -> ClusterConfig:
    kwargs = {}
    if "n_pes" in section:
        kwargs["n_pes"] = _typed("cluster", "n_pes", section["n_pes"], int)
    try:
        return ClusterConfig(**kwargs)
    except ValueError as exc:
        raise ConfigError(f"cluster.n_pes: {exc}") from exc


def make_workload_config(section: dict[str, str]) -> WorkloadConfig:
    kwargs = {}
    for key, kind in (
        ("job_count", int),
        ("u_low", float),
        ("u_med", float),
        ("u_hi", float),
        ("u_prob", float),
        ("artime_factor", float),
        ("deadline_factor", float),
        ("arrival_factor", float),
        ("mean_interarrival", float),
        ("seed", int),
    ):
        if key in section:
            kwargs[key] = _typed("workload", key, section[key], kind)
    if "runtime_values" in section:
        kwargs["runtime_values"] = tuple(
            _typed("workload", "runtime_values", tok.strip(), int)
            for tok in section["runtime_values"].split(",")
        )
    if "runtime_weights" in section:
        kwargs["runtime_weights"] = tuple(
            _typed("workload", "runtime_weights", tok.strip(), float)
            for tok in section["runtime_weights"].split(",")
        )
    if "size_runtime_coupling" in section:
        kwargs["size_runtime_coupling"] = _parse_bool(
            "workload", "size_runtime_coupling", section["size_runtime_coupling"]
        )
    config = WorkloadConfig(**kwargs)
    config.validate()
    return config


def _run_cell(
    task: tuple[ClusterConfig, WorkloadConfig, Policy, str, int]
) -> metrics.RunRecord:
    cluster, workload_cfg, policy, label, seed = task
    requests = generate(workload_cfg)
    outcomes = engine.run(requests, cluster, policy)
    summary = metrics.summarize(
        outcomes,
        policy=policy.value,
        config_fingerprint=metrics.config_fingerprint(cluster, workload_cfg),
    )
    return metrics.RunRecord(axis=label, policy=policy.value, seed=seed, summary=summary)


def _digest(path: Path) -> str:
    return "sha256:" + hashlib.sha256(path.read_bytes()).hexdigest()


def run_experiment(config: ExperimentConfig) -> dict[str, Path]:
    """Execute every (axis value, policy, seed) cell and write runs.csv,
    sweep.csv (unless CI is off), plots (unless off), and manifest.json.

    Returns the written files by name.  On failure every file written so
    far is removed.
    """
    config.validate()
    out_dir = config.output_dir
    out_dir.mkdir(parents=True, exist_ok=True)
    tasks = [
        (
            config.cluster,
            workload_for(config.workload, config.axis, value, seed),
            policy,
            axis_label(config.axis, value),
            seed,
        )
        for value in config.values
        for policy in config.policies
        for seed in config.seeds
    ]
    if config.workers > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            records = list(pool.map(_run_cell, tasks, chunksize=1))
    else:
        records = [_run_cell(task) for task in tasks]

    written: dict[str, Path] = {}
    try:
        runs_path = out_dir / "runs.csv"
        metrics.write_runs_csv(records, runs_path)
        written["runs.csv"] = runs_path
        if config.with_ci:
            points = metrics.aggregate_sweep(records)
            sweep_path = out_dir / "sweep.csv"
            metrics.write_sweep_csv(points, sweep_path)
            written["sweep.csv"] = sweep_path
            if config.with_plots:
                from .plotting import emit_plots

                for plot_path in emit_plots(sweep_path, out_dir, config.axis):
                    written[plot_path.name] = plot_path
        manifest = {
            "version": _version(),
            "created": datetime.now(timezone.utc).isoformat(),
            "cluster": dataclasses.asdict(config.cluster),
            "workload": dataclasses.asdict(config.workload),
            "sweep": {
                "axis": config.axis,
                "values": [axis_label(config.axis, v) for v in config.values],
                "policies": [p.value for p in config.policies],
                "seeds": list(config.seeds),
                "workers": config.workers,
                "ci": config.with_ci,
                "plots": config.with_plots,
            },
            "files": {name: _digest(path) for name, path in sorted(written.items())},
        }
        manifest_path = out_dir / "manifest.json"
        manifest_path.write_text(
            json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )
        written["manifest.json"] = manifest_path
    except BaseException:
        for path in written.values():
            path.unlink(missing_ok=True)
        raise
    return written


def _version() -> str:
    from . import __version__

    return __version__
