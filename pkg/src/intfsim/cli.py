"""Experiment runner CLI: simulate scenarios, run the feature-mode and
drift experiments, generate synthetic profiles, validate inputs."""

from __future__ import annotations

import argparse
from dataclasses import replace
import csv
import hashlib
import json
import os
import sys
from pathlib import Path

from . import __version__, colocation, experiments, metrics, predict, simcore
from .profiles import (
    DEFAULT_ARCHETYPES,
    ProfileError,
    gen_synthetic_profiles,
    load_profiles,
    write_profiles,
)
from .workload import (
    ARRIVAL_CSV_HEADER,
    ScenarioError,
    arrival_csv_rows,
    generate_arrivals,
    load_scenario,
)

DEFAULT_OUT_ENV = "INTFSIM_OUT"


def _write_csv(path: Path, header, rows) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(header)
        writer.writerows(rows)


def _write_manifest(out_dir: Path, config: dict, seeds: list[int]) -> None:
    blob = json.dumps(config, sort_keys=True).encode("utf-8")
    manifest = {
        "config_sha256": hashlib.sha256(blob).hexdigest(),
        "seeds": seeds,
        "tool_version": __version__,
    }
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "manifest.json").write_text(
        json.dumps(manifest, indent=2) + "\n", encoding="utf-8"
    )


def _out_dir(args) -> Path:
    if args.out:
        return Path(args.out)
    return Path(os.environ.get(DEFAULT_OUT_ENV, "out"))


def cmd_gen_profiles(args) -> int:
    table = gen_synthetic_profiles(DEFAULT_ARCHETYPES, seed=args.seed)
    write_profiles(table, args.profiles)
    print(f"wrote {len(table.entries)} profile entries to {args.profiles}")
    return 0


def cmd_validate(args) -> int:
    table = load_profiles(args.profiles)
    print(f"{args.profiles}: OK ({len(table.entries)} entries, "
          f"{len(table.models())} models)")
    for scenario_path in args.scenario:
        load_scenario(scenario_path, table)
        print(f"{scenario_path}: OK")
    return 0


def cmd_simulate(args) -> int:
    table = load_profiles(args.profiles)
    out_root = _out_dir(args)
    config = {
        "profiles": str(args.profiles),
        "scenarios": [str(s) for s in args.scenario],
        "seeds": args.seeds,
        "segments": args.segments,
    }
    _write_manifest(out_root, config, args.seeds)
    for scenario_path in args.scenario:
        spec = load_scenario(scenario_path, table)
        for seed in args.seeds:
            run_spec = replace(spec, seed=seed)
            result = simcore.run_scenario(run_spec, table)
            out = out_root / f"{spec.name}_seed{seed}"
            _write_csv(
                out / "arrivals.csv",
                ARRIVAL_CSV_HEADER,
                arrival_csv_rows(generate_arrivals(run_spec)),
            )
            _write_csv(
                out / "outcomes.csv",
                simcore.OUTCOME_CSV_HEADER,
                simcore.outcome_csv_rows(result.outcomes),
            )
            _write_csv(
                out / "requests.csv",
                metrics.REQUEST_CSV_HEADER,
                metrics.request_csv_rows(result.records),
            )
            _write_csv(
                out / "samples.csv",
                colocation.SAMPLE_CSV_HEADER,
                colocation.sample_csv_rows(result.samples, run_spec.colocation_mode),
            )
            if result.records:
                _write_csv(
                    out / "slo_report.csv",
                    metrics.REPORT_CSV_HEADER,
                    metrics.report_csv_rows(metrics.slo_report(result.records)),
                )
            if args.segments:
                _write_csv(
                    out / "segments.csv",
                    simcore.SEGMENT_CSV_HEADER,
                    simcore.segment_csv_rows(result.outcomes),
                )
            print(
                f"{spec.name} seed={seed}: {len(result.records)} requests, "
                f"{len(result.outcomes)} batches -> {out}"
            )
    return 0


def cmd_ewma_exp(args) -> int:
    table = load_profiles(args.profiles)
    out_root = _out_dir(args)
    config = {
        "profiles": str(args.profiles),
        "scenarios": [str(s) for s in args.scenario],
        "seeds": args.seeds,
        "alphas": args.alphas,
        "split": args.split,
        "split_mode": args.split_mode,
    }
    _write_manifest(out_root, config, args.seeds)
    rows = []
    for seed in args.seeds:
        if args.scenario:
            scenarios = []
            for path in args.scenario:
                spec = load_scenario(path, table)
                scenarios.append(replace(spec, seed=seed))
        else:
            scenarios = experiments.high_churn_suite(table, seed)
        for row in experiments.ewma_experiment(
            scenarios, table, tuple(args.alphas), args.split, args.split_mode
        ):
            r = row.report
            rows.append(
                [seed, row.mode.label(), repr(r.mse), repr(r.rel_p25), repr(r.rel_p50),
                 repr(r.rel_p75), repr(r.rel_p95), r.n_samples]
            )
    _write_csv(
        out_root / "ewma_report.csv",
        ["seed", "mode", "mse", "rel_p25", "rel_p50", "rel_p75", "rel_p95", "n_samples"],
        rows,
    )
    print(f"wrote {len(rows)} rows to {out_root / 'ewma_report.csv'}")
    return 0


def cmd_drift_exp(args) -> int:
    table = load_profiles(args.profiles)
    out_root = _out_dir(args)
    config = {
        "profiles": str(args.profiles),
        "seeds": args.seeds,
        "eta": args.eta,
        "lam": args.forgetting,
    }
    _write_manifest(out_root, config, args.seeds)
    per_seed_rows = []
    cell_lists = []
    for seed in args.seeds:
        base = experiments.default_drift_base(table, seed)
        cells = experiments.drift_experiment(
            base, table, eta=args.eta, lam=args.forgetting
        )
        cell_lists.append(cells)
        for c in cells:
            per_seed_rows.append([seed, c.dataset, c.method, repr(c.mse), c.n_samples])
    _write_csv(
        out_root / "drift_per_seed.csv",
        ["seed", "dataset", "method", "mse", "n_samples"],
        per_seed_rows,
    )
    means = experiments.mean_drift_table(cell_lists)
    mean_rows = []
    for dataset in ("TrainingSet", "TestSet1", "TestSet2", "TestSet3"):
        row = [dataset] + [repr(means[(dataset, m)]) for m in experiments.DRIFT_METHODS]
        mean_rows.append(row)
        print(f"{dataset:12s} " + "  ".join(f"{m}={means[(dataset, m)]:.4f}"
                                            for m in experiments.DRIFT_METHODS))
    _write_csv(
        out_root / "drift_mean.csv",
        ["dataset", "offline_mse", "sgd_mse", "rls_mse"],
        mean_rows,
    )
    return 0


def _seed_list(text: str) -> list[int]:
    return [int(s) for s in text.split(",") if s]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="intfsim",
        description="GPU inference-serving interference simulator and "
        "prediction experiments",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, scenarios=True):
        p.add_argument("--profiles", default="profiles/default.csv",
                       help="profile CSV path (default: %(default)s)")
        p.add_argument("--out", default=None,
                       help=f"output directory (default: ${DEFAULT_OUT_ENV} or ./out)")
        p.add_argument("--seeds", type=_seed_list, default=[0],
                       help="comma-separated seeds (default: 0)")
        if scenarios:
            p.add_argument("--scenario", nargs="*", default=[],
                           help="scenario JSON file(s)")

    p = sub.add_parser("gen-profiles", help="write the bundled synthetic profile table")
    p.add_argument("--profiles", default="profiles/default.csv")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_gen_profiles)

    p = sub.add_parser("validate", help="validate a profile table and scenario files")
    p.add_argument("--profiles", default="profiles/default.csv")
    p.add_argument("--scenario", nargs="*", default=[])
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("simulate", help="run scenarios and export CSV records")
    add_common(p)
    p.add_argument("--segments", action="store_true",
                   help="also export the per-segment co-location log")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("ewma-exp", help="static vs. EWMA feature comparison")
    add_common(p)
    p.add_argument("--alphas", type=lambda t: [float(a) for a in t.split(",")],
                   default=list(experiments.EWMA_ALPHAS),
                   help="EWMA smoothing factors (default: 1/3,1/2,2/3)")
    p.add_argument("--split", type=float, default=0.75,
                   help="training fraction (default: %(default)s)")
    p.add_argument("--split-mode", choices=["chrono", "random"], default="chrono",
                   help="chronological or shuffled train/test split")
    p.set_defaults(func=cmd_ewma_exp)

    p = sub.add_parser("drift-exp", help="offline vs. SGD vs. RLS under drift")
    add_common(p, scenarios=False)
    p.add_argument("--eta", type=float, default=0.01, help="SGD step size")
    p.add_argument("--forgetting", type=float, default=0.99,
                   help="RLS forgetting factor")
    p.set_defaults(func=cmd_drift_exp)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ProfileError, ScenarioError, predict.PredictError,
            simcore.SimulationError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
