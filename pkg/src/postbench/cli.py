"""Command-line surface.

Subcommands:

    validate-data <path>   recompute the expected dataset statistics, diff
    stats <path>           print raw summary statistics of the outputs
    train ...              fit one model on one target, dump the model
    reproduce ...          full model x target grid, emit report files
    dump-dataset <path>    canonical scaled dataset CSV for diffing

Exit codes: 0 success, 1 validation mismatch or runtime failure, 2 usage.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import bench
from .data import (
    TARGET_NAMES,
    SplitSpec,
    build_dataset,
    compare_reference_stats,
    load_raw,
    raw_target_columns,
    summary_stats,
)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="postbench",
        description="Benchmark ESN, epsilon-SVR and ANFIS regressors on "
                    "Facebook post-engagement data.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate-data",
                       help="check the raw file against the expected statistics")
    p.add_argument("path", type=Path)

    p = sub.add_parser("stats", help="print output-column summary statistics")
    p.add_argument("path", type=Path)

    p = sub.add_parser("train", help="train a single model on a single target")
    p.add_argument("--config", type=Path, default=None)
    p.add_argument("--data", type=Path, default=None,
                   help="raw CSV path (overrides the config)")
    p.add_argument("--model", required=True, choices=bench.MODEL_ORDER)
    p.add_argument("--target", required=True, choices=TARGET_NAMES)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--out", type=Path, default=None,
                   help="model dump path (default <output_dir>/<model>_<target>.json)")

    p = sub.add_parser("reproduce",
                       help="run the full grid over all seeds and emit reports")
    p.add_argument("--config", type=Path, default=None)
    p.add_argument("--data", type=Path, default=None)

    p = sub.add_parser("dump-dataset",
                       help="write the scaled dataset in canonical CSV form")
    p.add_argument("path", type=Path)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--n-train", type=int, default=400)
    p.add_argument("--no-shuffle", action="store_true")
    p.add_argument("--out", type=Path, default=Path("dataset_scaled.csv"))
    return parser


def _cmd_validate(args) -> int:
    raw = load_raw(args.path)
    rows = compare_reference_stats(raw)
    all_ok = True
    print(f"{'column':<10} {'statistic':<10} {'computed':>9} {'expected':>9}  result")
    for column, stat, got, want, ok in rows:
        all_ok &= ok
        print(f"{column:<10} {stat:<10} {got:>9} {want:>9}  "
              f"{'MATCH' if ok else 'MISMATCH'}")
    print(f"{'all 18 statistics match' if all_ok else 'validation FAILED'}")
    return 0 if all_ok else 1


def _cmd_stats(args) -> int:
    raw = load_raw(args.path)
    columns = raw_target_columns(raw)
    for name in TARGET_NAMES:
        s = summary_stats(columns[name])
        print(f"{name}: n={columns[name].size} mean={s.mean:.6g} "
              f"median={s.median:.6g} mode={s.mode:.6g} "
              f"std_dev={s.std_dev:.6g} max={s.max:.6g} min={s.min:.6g}")
    return 0


def _cmd_train(args) -> int:
    config = bench.load_config(args.config, data_override=args.data)
    spec = SplitSpec(n_train=config.n_train, seed=args.seed,
                     shuffle=config.shuffle)
    _, train, test = build_dataset(config.data_path, spec)
    model = bench._make_model(args.model, config, args.seed, args.target)
    model.fit(train.features, train.target_column(args.target))
    test_mse = bench.mse(model.predict(test.features),
                         test.target_column(args.target))
    out = args.out
    if out is None:
        out_dir = config.effective_output_dir()
        out_dir.mkdir(parents=True, exist_ok=True)
        out = out_dir / f"{args.model}_{args.target}.json"
    model.save(out)
    print(f"{args.model} on {args.target} (seed {args.seed}): "
          f"train MSE {model.train_mse_:.6g}, test MSE {test_mse:.6g}")
    print(f"model written to {out}")
    return 0


def _cmd_reproduce(args) -> int:
    config = bench.load_config(args.config, data_override=args.data)
    report = bench.run_experiment(config)
    out_dir = config.effective_output_dir()
    paths = [bench.emit_report(report, fmt, out_dir)
             for fmt in ("csv", "markdown", "json")]
    print(report.to_markdown_text())
    print(f"total model wall clock: {report.total_wall_clock():.1f}s")
    for p in paths:
        print(f"report written to {p}")
    failed = [c for c in report.cells.values() if not c.ok]
    if failed:
        for cell in failed:
            print(f"cell ({cell.model}, {cell.target}) failed: {cell.error}")
        return 1
    return 0


def _cmd_dump(args) -> int:
    spec = SplitSpec(n_train=args.n_train, seed=args.seed,
                     shuffle=not args.no_shuffle)
    full, _, _ = build_dataset(args.path, spec)
    full.to_csv(args.out)
    print(f"scaled dataset written to {args.out}")
    return 0


_COMMANDS = {
    "validate-data": _cmd_validate,
    "stats": _cmd_stats,
    "train": _cmd_train,
    "reproduce": _cmd_reproduce,
    "dump-dataset": _cmd_dump,
}


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
