"""Command-line front end: run scenarios, compare against the no-switching
baseline, analyze traces, and run profiler experiments.

Artifacts are plain CSV/JSON files with fixed column orders and no
timestamps, so identical invocations produce byte-identical outputs. Exit
codes: 0 success, 1 validation problem (messages name the offending key),
2 I/O problem (messages name the path).
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
from dataclasses import dataclass
from pathlib import Path

from . import analysis, profiler, synthetic
from .config import ScenarioError, load_scenario
from .policy import PolicyOptions, RecoveryOptions
from .simulator import ScenarioConfig, SimulationTrace, run_scenario

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_IO = 2

OUT_DIR_ENV = "VARIANTSIM_OUT"

EMIT_CHOICES = ("trace", "queue_series", "switches", "correlation", "violations", "plotdata")
DEFAULT_EMIT = ("trace", "queue_series", "switches", "violations")

SWITCH_COLUMNS = ("time_us", "service_id", "from_variant", "to_variant", "reason", "applied_after_us")
QUEUE_COLUMNS = ("time_us", "service_id", "event", "queue_length")

# Default column set correlated when a run emits a correlation matrix.
TRACE_CORRELATION_COLUMNS = ("variant_id", "service_us", "queue_len_at_arrival", "sojourn_us")


@dataclass(frozen=True)
class RunManifest:
    """Everything one invocation depends on; echoed next to the artifacts."""

    scenario_path: str
    out_dir: str
    overrides: dict
    emit: tuple[str, ...] = DEFAULT_EMIT


def _fail_validation(message: str) -> int:
    print(f"error: {message}", file=sys.stderr)
    return EXIT_VALIDATION


def _fail_io(message: str) -> int:
    print(f"error: {message}", file=sys.stderr)
    return EXIT_IO


def _apply_overrides(config: ScenarioConfig, overrides: dict) -> ScenarioConfig:
    policy_fields = {f.name for f in dataclasses.fields(PolicyOptions)}
    policy_kwargs = {}
    config_kwargs = {}
    for key, value in overrides.items():
        if key in policy_fields:
            policy_kwargs[key] = value
        elif key == "rate":
            config_kwargs["arrivals"] = dataclasses.replace(
                config.arrivals, rate=value, schedule=None
            )
        elif key in ("request_count", "seed", "constraint_us"):
            config_kwargs[key] = value
        else:
            raise ScenarioError([f"override {key}: unknown key"])
    if policy_kwargs:
        config_kwargs["policy"] = dataclasses.replace(config.policy, **policy_kwargs)
    return dataclasses.replace(config, **config_kwargs) if config_kwargs else config


def _write_json(path: Path, payload) -> None:
    try:
        path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc


def write_switches_csv(trace: SimulationTrace, destination) -> int:
    rows = (
        (s.time_us, s.service_id, s.from_variant, s.to_variant, s.reason.value, s.applied_after_us)
        for s in trace.switches
    )
    return analysis.write_text(destination, analysis.rows_to_csv(SWITCH_COLUMNS, rows))


def write_queue_csv(trace: SimulationTrace, destination) -> int:
    rows = (
        (q.time_us, q.service_id, q.event, q.queue_length) for q in trace.queue_samples
    )
    return analysis.write_text(destination, analysis.rows_to_csv(QUEUE_COLUMNS, rows))


def _summary(trace: SimulationTrace, constraint_us: int) -> dict:
    stats = analysis.violation_stats(trace, constraint_us)
    records = trace.records
    return {
        "requests": len(records),
        "violations": stats.count,
        "violation_fraction": stats.fraction,
        "first_violation_index": stats.first_violation_index,
        "post_switch_violation_fraction": stats.post_switch_fraction,
        "switch_count": len(trace.switches),
        "mean_sojourn_us": sum(r.sojourn_us for r in records) / len(records),
        "mean_qor": sum(r.qor for r in records) / len(records),
        "initial_variants": dict(trace.initial_variants),
        "final_queue_lengths": {
            s.service_id: s.queue_len_at_last_arrival for s in trace.service_stats
        },
        "time_avg_queue_lengths": {
            s.service_id: s.time_avg_queue_len for s in trace.service_stats
        },
    }


def _emit_artifacts(trace: SimulationTrace, out: Path, emit: tuple[str, ...], prefix: str = "") -> None:
    if "trace" in emit:
        analysis.export_csv(trace, out / f"{prefix}trace.csv")
    if "switches" in emit:
        write_switches_csv(trace, out / f"{prefix}switches.csv")
    if "queue_series" in emit:
        write_queue_csv(trace, out / f"{prefix}queue.csv")
    if "violations" in emit:
        stats = analysis.violation_stats(trace, trace.config_echo.constraint_us)
        _write_json(out / f"{prefix}violations.json", dataclasses.asdict(stats))
    if "correlation" in emit:
        table = _trace_to_table(trace)
        matrix = analysis.correlation_matrix(table)
        analysis.export_csv(matrix, out / f"{prefix}correlation.csv")
        analysis.export_long_format(matrix, out / f"{prefix}correlation_long.csv")
    if "plotdata" in emit:
        rows = (
            (i, r.sojourn_us, 1 if r.violated else 0, r.stages[0].queue_length_at_arrival)
            for i, r in enumerate(trace.records_by_arrival())
        )
        analysis.write_text(
            out / f"{prefix}plot_requests.csv",
            analysis.rows_to_csv(("request_index", "sojourn_us", "violated", "queue_len_at_arrival"), rows),
        )


def _trace_to_table(trace: SimulationTrace) -> analysis.ObservationTable:
    data = {name: [] for name in TRACE_CORRELATION_COLUMNS}
    for record in trace.records:
        for stage in record.stages:
            data["variant_id"].append(stage.variant_id)
            data["service_us"].append(stage.service_end_us - stage.service_start_us)
            data["queue_len_at_arrival"].append(stage.queue_length_at_arrival)
            data["sojourn_us"].append(record.sojourn_us)
    return analysis.ObservationTable.from_columns(data)


def _load_for_manifest(manifest: RunManifest) -> ScenarioConfig:
    path = Path(manifest.scenario_path)
    if not path.exists():
        raise OSError(f"scenario file not found: {path}")
    config = load_scenario(path)
    return _apply_overrides(config, manifest.overrides)


def cmd_run(manifest: RunManifest) -> int:
    """Run one scenario and write its artifacts."""
    try:
        config = _load_for_manifest(manifest)
        out = Path(manifest.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        trace = run_scenario(config)
        _emit_artifacts(trace, out, manifest.emit)
        _write_json(out / "summary.json", _summary(trace, config.constraint_us))
        _write_json(out / "manifest.json", dataclasses.asdict(manifest))
    except (ScenarioError, ValueError) as exc:
        return _fail_validation(str(exc))
    except OSError as exc:
        return _fail_io(str(exc))
    return EXIT_OK


def cmd_compare(manifest: RunManifest, baseline_seed: int | None = None) -> int:
    """Run switching vs no-switching on the same seed, side by side.

    A differing baseline seed must be an explicit override; the paired
    design is refused otherwise.
    """
    try:
        config = _load_for_manifest(manifest)
        if baseline_seed is not None and baseline_seed != config.seed:
            return _fail_validation(
                f"baseline seed {baseline_seed} differs from run seed {config.seed}; "
                "a paired comparison needs identical seeds"
            )
        out = Path(manifest.out_dir)
        out.mkdir(parents=True, exist_ok=True)

        switching_cfg = dataclasses.replace(
            config, policy=dataclasses.replace(config.policy, switching=True)
        )
        baseline_cfg = dataclasses.replace(
            config, policy=dataclasses.replace(config.policy, switching=False)
        )
        switching_trace = run_scenario(switching_cfg)
        baseline_trace = run_scenario(baseline_cfg)

        _emit_artifacts(switching_trace, out, manifest.emit, prefix="switching_")
        _emit_artifacts(baseline_trace, out, manifest.emit, prefix="baseline_")
        _write_json(
            out / "compare.json",
            {
                "switching": _summary(switching_trace, config.constraint_us),
                "baseline": _summary(baseline_trace, config.constraint_us),
            },
        )
        _write_json(out / "manifest.json", dataclasses.asdict(manifest))
    except (ScenarioError, ValueError) as exc:
        return _fail_validation(str(exc))
    except OSError as exc:
        return _fail_io(str(exc))
    return EXIT_OK


def cmd_analyze(trace_paths: list[str], columns: list[str] | None, out_dir: str) -> int:
    """Correlation matrix and violation stats for exported traces."""
    try:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        for trace_path in trace_paths:
            path = Path(trace_path)
            if not path.exists():
                raise OSError(f"trace file not found: {path}")
            try:
                table = analysis.read_trace_table(path, columns)
            except KeyError as exc:
                return _fail_validation(f"{path}: {exc.args[0]}")
            matrix = analysis.correlation_matrix(table)
            stem = path.stem
            analysis.export_csv(matrix, out / f"{stem}_correlation.csv")
            analysis.export_long_format(matrix, out / f"{stem}_correlation_long.csv")
            full = analysis.read_trace_table(path)
            if "sojourn_us" in full.names and "violated" in full.names:
                violated = full.column("violated")
                count = int(violated.sum())
                first = int(violated.argmax()) if count else None
                _write_json(
                    out / f"{stem}_violations.json",
                    {
                        "violations": count,
                        "violation_fraction": count / len(violated),
                        "first_violation_index": first,
                    },
                )
    except (ScenarioError, ValueError) as exc:
        return _fail_validation(str(exc))
    except OSError as exc:
        return _fail_io(str(exc))
    return EXIT_OK


def cmd_profile(
    dataset_path: str | None,
    generate_rows: int | None,
    out_dir: str,
    max_depth: int = 6,
    min_samples_leaf: int = 1,
    split_fraction: float = 0.7,
    seed: int = 0,
) -> int:
    """Fit the execution-time estimator and report scores and importances."""
    try:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        if generate_rows is not None:
            dataset = synthetic.profiler_benchmark(rows=generate_rows, seed=seed)
            profiler.write_dataset_csv(dataset, out / "dataset.csv")
        elif dataset_path is not None:
            path = Path(dataset_path)
            if not path.exists():
                raise OSError(f"dataset file not found: {path}")
            dataset = profiler.read_dataset_csv(path)
        else:
            return _fail_validation("profile needs --dataset or --generate")

        hyper = profiler.Hyperparams(max_depth=max_depth, min_samples_leaf=min_samples_leaf)
        result = profiler.train_test_evaluate(dataset, split_fraction, hyper, seed)
        _write_json(
            out / "profile_report.json",
            {
                "rows": dataset.n,
                "train_r2": result.train_r2,
                "test_r2": result.test_r2,
                "tree_depth": result.model.depth(),
                "importance": [
                    {"feature": name, "importance": value}
                    for name, value in result.importance
                ],
                "hyperparams": dataclasses.asdict(hyper),
                "split_fraction": split_fraction,
                "seed": seed,
            },
        )
    except (ScenarioError, ValueError) as exc:
        return _fail_validation(str(exc))
    except OSError as exc:
        return _fail_io(str(exc))
    return EXIT_OK


def _collect_overrides(args: argparse.Namespace) -> dict:
    overrides: dict = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.arrival_rate is not None:
        overrides["rate"] = args.arrival_rate
    if args.requests is not None:
        overrides["request_count"] = args.requests
    if args.alpha is not None:
        overrides["alpha"] = args.alpha
    if args.no_stability_check:
        overrides["stability_check"] = False
    if args.no_switching:
        overrides["switching"] = False
    if args.recovery is not None:
        window, _, margin = args.recovery.partition(":")
        try:
            overrides["recovery"] = RecoveryOptions(
                stable_window=int(window), margin=float(margin)
            )
        except ValueError:
            raise ScenarioError(
                [f"--recovery {args.recovery}: expected WINDOW:MARGIN, e.g. 50:0.5"]
            ) from None
    return overrides


def _add_scenario_args(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--scenario", required=True, help="scenario YAML file")
    sub.add_argument("--out", default=None, help=f"output directory (default ${OUT_DIR_ENV} or ./out)")
    sub.add_argument("--seed", type=int, default=None, help="override the scenario seed")
    sub.add_argument("--lambda", dest="arrival_rate", type=float, default=None,
                     help="override the arrival rate (drops any schedule)")
    sub.add_argument("--requests", type=int, default=None, help="override the request count")
    sub.add_argument("--alpha", type=float, default=None, help="override the dampening factor")
    sub.add_argument("--no-stability-check", action="store_true",
                     help="disable the queue stability filter in variant selection")
    sub.add_argument("--no-switching", action="store_true", help="disable runtime switching")
    sub.add_argument("--recovery", default=None, metavar="WINDOW:MARGIN",
                     help="enable switch-back after WINDOW quiet completions at margin MARGIN")
    sub.add_argument("--emit", default=",".join(DEFAULT_EMIT),
                     help=f"comma-separated artifact list from: {', '.join(EMIT_CHOICES)}")


def _resolve_out(arg_value: str | None) -> str:
    if arg_value:
        return arg_value
    return os.environ.get(OUT_DIR_ENV, "out")


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="variantsim",
        description="Simulate and analyze runtime-switchable service variants.",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)

    run_p = subparsers.add_parser("run", help="run one scenario")
    _add_scenario_args(run_p)

    cmp_p = subparsers.add_parser("compare", help="run switching vs baseline on one seed")
    _add_scenario_args(cmp_p)
    cmp_p.add_argument("--baseline-seed", type=int, default=None,
                       help="explicit baseline seed; refused unless equal to the run seed")

    ana_p = subparsers.add_parser("analyze", help="correlate exported traces")
    ana_p.add_argument("--trace", required=True, action="append", help="trace CSV (repeatable)")
    ana_p.add_argument("--columns", default=None, help="comma-separated column subset")
    ana_p.add_argument("--out", default=None)

    pro_p = subparsers.add_parser("profile", help="fit the execution-time estimator")
    group = pro_p.add_mutually_exclusive_group(required=True)
    group.add_argument("--dataset", default=None, help="dataset CSV with a name:kind header")
    group.add_argument("--generate", type=int, default=None, metavar="ROWS",
                       help="generate the synthetic benchmark dataset first")
    pro_p.add_argument("--max-depth", type=int, default=6)
    pro_p.add_argument("--min-samples-leaf", type=int, default=1)
    pro_p.add_argument("--split", type=float, default=0.7, help="training fraction")
    pro_p.add_argument("--seed", type=int, default=0)
    pro_p.add_argument("--out", default=None)

    args = parser.parse_args(argv)
    out_dir = _resolve_out(args.out)

    if args.command in ("run", "compare"):
        emit = tuple(e for e in args.emit.split(",") if e)
        unknown = [e for e in emit if e not in EMIT_CHOICES]
        if unknown:
            return _fail_validation(f"--emit: unknown artifacts {', '.join(unknown)}")
        try:
            overrides = _collect_overrides(args)
        except ScenarioError as exc:
            return _fail_validation(str(exc))
        manifest = RunManifest(
            scenario_path=args.scenario,
            out_dir=out_dir,
            overrides=overrides,
            emit=emit,
        )
        if args.command == "run":
            return cmd_run(manifest)
        return cmd_compare(manifest, baseline_seed=args.baseline_seed)

    if args.command == "analyze":
        columns = args.columns.split(",") if args.columns else None
        return cmd_analyze(args.trace, columns, out_dir)

    return cmd_profile(
        dataset_path=args.dataset,
        generate_rows=args.generate,
        out_dir=out_dir,
        max_depth=args.max_depth,
        min_samples_leaf=args.min_samples_leaf,
        split_fraction=args.split,
        seed=args.seed,
    )


if __name__ == "__main__":
    sys.exit(main())
