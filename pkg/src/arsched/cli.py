"""Command-line front end.

Four commands: ``simulate`` (one run, prints its summary), ``sweep``
(full experiment to an output directory), ``gen`` (emit a workload
file), and ``validate`` (differential and invariant suites on small
instances).  Exit codes: 0 success, 1 config error, 2 internal
invariant violation.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path
from typing import Optional

from . import engine, experiment, metrics, validation, workload
from .calendar import ClusterConfig
from .engine import SimulationInternalError
from .policies import POLICY_ORDER, Policy
from .workload import ConfigError, SwfParseError


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on bad usage; config errors must exit 1."""

    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _add_workload_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--jobs", type=int, help="number of requests to generate")
    parser.add_argument("--seed", type=int, help="generator seed")
    parser.add_argument("--umed", type=float, help="median size exponent (5..9)")
    parser.add_argument("--arrival-factor", type=float, help="load scaling factor")
    parser.add_argument("--artime-factor", type=float, help="book-ahead factor")
    parser.add_argument("--deadline-factor", type=float, help="deadline slack factor")
    parser.add_argument(
        "--mean-interarrival", type=float, help="mean inter-arrival time (s)"
    )


_WORKLOAD_FLAG_FIELDS = (
    ("jobs", "job_count"),
    ("seed", "seed"),
    ("umed", "u_med"),
    ("arrival_factor", "arrival_factor"),
    ("artime_factor", "artime_factor"),
    ("deadline_factor", "deadline_factor"),
    ("mean_interarrival", "mean_interarrival"),
)


def _build_configs(
    args: argparse.Namespace,
) -> tuple[ClusterConfig, workload.WorkloadConfig]:
    file_cfg = (
        experiment.read_config_file(args.config) if getattr(args, "config", None) else {}
    )
    cluster = experiment.make_cluster_config(file_cfg.get("cluster", {}))
    if getattr(args, "n_pes", None) is not None:
        try:
            cluster = ClusterConfig(n_pes=args.n_pes)
        except ValueError as exc:
            raise ConfigError(f"--n-pes: {exc}") from exc
    wl = experiment.make_workload_config(file_cfg.get("workload", {}))
    overrides = {
        field: getattr(args, flag)
        for flag, field in _WORKLOAD_FLAG_FIELDS
        if getattr(args, flag, None) is not None
    }
    if overrides:
        wl = replace(wl, **overrides)
        wl.validate()
    return cluster, wl


def _parse_policy(token: str) -> Policy:
    try:
        return Policy.from_token(token)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _load_requests(
    args: argparse.Namespace, cluster: ClusterConfig, wl: workload.WorkloadConfig
) -> list[workload.ARRequest]:
    if getattr(args, "swf", None):
        ingested = workload.ingest_swf(
            args.swf,
            cluster.n_pes,
            artime_factor=wl.artime_factor,
            deadline_factor=wl.deadline_factor,
            arrival_factor=wl.arrival_factor,
            seed=wl.seed,
        )
        if ingested.skipped:
            print(f"skipped {ingested.skipped} unusable trace records", file=sys.stderr)
        return ingested.requests
    if getattr(args, "workload_file", None):
        return workload.read_requests_tsv(args.workload_file)
    return workload.generate(wl)


def _cmd_simulate(args: argparse.Namespace) -> int:
    cluster, wl = _build_configs(args)
    policy = _parse_policy(args.policy)
    requests = _load_requests(args, cluster, wl)
    snapshot: dict[str, str] = {}
    hook = None
    if args.dump_calendar:
        hook = lambda cal: snapshot.__setitem__("dump", cal.dump())
    outcomes = engine.run(requests, cluster, policy, on_last_arrival=hook)
    if args.dump_calendar:
        text = snapshot.get("dump", "")
        Path(args.dump_calendar).write_text(
            text + "\n" if text else "", encoding="utf-8"
        )
    if args.outcomes:
        engine.write_outcomes_tsv(outcomes, args.outcomes)
    print(f"policy: {policy.value}")
    print(f"jobs: {len(outcomes)}")
    if outcomes:
        summary = metrics.summarize(outcomes, policy=policy.value)
        print(f"accepted: {summary.n_accepted}")
        print(f"acceptance_rate: {summary.acceptance_rate!r}")
        slowdown = "n/a" if summary.avg_slowdown is None else repr(summary.avg_slowdown)
        print(f"avg_slowdown: {slowdown}")
    else:
        print("accepted: 0")
        print("acceptance_rate: n/a")
        print("avg_slowdown: n/a")
    return 0


def _cmd_sweep(args: argparse.Namespace) -> int:
    cluster, wl = _build_configs(args)
    file_cfg = (
        experiment.read_config_file(args.config) if args.config else {}
    )
    sweep_cfg = file_cfg.get("sweep", {})
    out_cfg = file_cfg.get("output", {})

    axis = args.axis or sweep_cfg.get("axis", "umed")
    if axis not in experiment.AXES:
        raise ConfigError(f"sweep.axis must be one of {experiment.AXES}, got {axis!r}")
    if args.values:
        values = experiment.parse_values(axis, args.values)
    elif "values" in sweep_cfg:
        values = experiment.parse_values(axis, sweep_cfg["values"])
    else:
        values = experiment.DEFAULT_SWEEP_VALUES[axis]
    if args.policies:
        policies = experiment.parse_policies(args.policies)
    elif "policies" in sweep_cfg:
        policies = experiment.parse_policies(sweep_cfg["policies"])
    else:
        policies = POLICY_ORDER
    if args.seeds:
        seeds = experiment.parse_seeds(args.seeds)
    elif "seeds" in sweep_cfg:
        seeds = experiment.parse_seeds(sweep_cfg["seeds"])
    else:
        seeds = experiment.DEFAULT_SEEDS
    workers = args.workers
    if workers is None:
        workers = (
            experiment._typed("sweep", "workers", sweep_cfg["workers"], int)
            if "workers" in sweep_cfg
            else 1
        )
    with_ci = not args.no_ci and experiment._parse_bool(
        "sweep", "ci", sweep_cfg.get("ci", "true")
    )
    with_plots = not args.no_plots and experiment._parse_bool(
        "sweep", "plots", sweep_cfg.get("plots", "true")
    )
    output_dir = Path(args.output_dir or out_cfg.get("dir", "results"))

    config = experiment.ExperimentConfig(
        cluster=cluster,
        workload=wl,
        axis=axis,
        values=values,
        policies=policies,
        seeds=seeds,
        output_dir=output_dir,
        workers=workers,
        with_ci=with_ci,
        with_plots=with_plots and with_ci,
    )
    written = experiment.run_experiment(config)
    for name in sorted(written):
        print(f"wrote {written[name]}")
    return 0


def _cmd_gen(args: argparse.Namespace) -> int:
    cluster, wl = _build_configs(args)
    requests = _load_requests(args, cluster, wl)
    workload.write_requests_tsv(requests, args.out)
    print(f"wrote {len(requests)} requests to {args.out}")
    return 0


def _cmd_validate(args: argparse.Namespace) -> int:
    report = validation.ValidationReport()
    report.merge(
        validation.check_calendar_equivalence(
            n_sequences=args.sequences,
            n_ops=args.ops,
            n_pes=args.n_pes,
            horizon=args.horizon,
            seed=args.seed,
        )
    )
    report.merge(
        validation.check_admission_equivalence(
            n_queries=args.queries,
            n_pes=args.n_pes,
            horizon=args.horizon,
            seed=args.seed,
            completeness=args.completeness,
        )
    )
    report.merge(
        validation.check_inverse_property(
            n_cases=args.cases,
            n_pes=args.n_pes,
            horizon=args.horizon,
            seed=args.seed,
        )
    )
    for line in report.lines():
        print(line)
    if not report.ok:
        print("validation FAILED", file=sys.stderr)
        return 2
    print("validation passed")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="arsched", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p_sim = sub.add_parser("simulate", help="run one simulation and print its summary")
    p_sim.add_argument("--config", help="INI config file")
    p_sim.add_argument("--policy", default="ff", help="placement policy token")
    p_sim.add_argument("--n-pes", type=int, help="cluster size")
    _add_workload_flags(p_sim)
    p_sim.add_argument("--workload-file", help="replay a generated workload TSV")
    p_sim.add_argument("--swf", help="ingest a standard workload format trace")
    p_sim.add_argument("--outcomes", help="write per-job outcomes TSV here")
    p_sim.add_argument(
        "--dump-calendar",
        help="write the calendar state after the last arrival here",
    )
    p_sim.set_defaults(func=_cmd_simulate)

    p_sweep = sub.add_parser("sweep", help="run a full sweep experiment")
    p_sweep.add_argument("--config", help="INI config file")
    p_sweep.add_argument("--axis", choices=experiment.AXES, help="sweep axis")
    p_sweep.add_argument(
        "--values",
        help="axis values, comma-separated (flexibility pairs as a:d)",
    )
    p_sweep.add_argument("--policies", help="policy tokens, comma-separated")
    p_sweep.add_argument("--seeds", help="seeds, comma-separated")
    p_sweep.add_argument("--n-pes", type=int, help="cluster size")
    _add_workload_flags(p_sweep)
    p_sweep.add_argument("--output-dir", help="where to write results")
    p_sweep.add_argument("--workers", type=int, help="parallel worker count")
    p_sweep.add_argument("--no-ci", action="store_true", help="skip sweep.csv")
    p_sweep.add_argument("--no-plots", action="store_true", help="skip plot files")
    p_sweep.set_defaults(func=_cmd_sweep)

    p_gen = sub.add_parser("gen", help="generate a workload file")
    p_gen.add_argument("--config", help="INI config file")
    p_gen.add_argument("--n-pes", type=int, help="cluster size (trace filter bound)")
    _add_workload_flags(p_gen)
    p_gen.add_argument("--swf", help="convert a standard workload format trace")
    p_gen.add_argument("--out", required=True, help="output TSV path")
    p_gen.set_defaults(func=_cmd_gen)

    p_val = sub.add_parser("validate", help="run differential/invariant suites")
    p_val.add_argument("--sequences", type=int, default=100)
    p_val.add_argument("--ops", type=int, default=40)
    p_val.add_argument("--queries", type=int, default=200)
    p_val.add_argument("--cases", type=int, default=2000)
    p_val.add_argument("--n-pes", type=int, default=16)
    p_val.add_argument("--horizon", type=int, default=256)
    p_val.add_argument("--seed", type=int, default=0)
    p_val.add_argument(
        "--completeness",
        action="store_true",
        help="also tally full-scan vs candidate-restricted admission gaps",
    )
    p_val.set_defaults(func=_cmd_validate)
    return parser


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, SwfParseError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (SimulationInternalError, AssertionError) as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return 2


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
