"""Command line entry point: ``optbp run``, ``optbp summarize``, ``optbp bundle``."""

import argparse
import sys
from pathlib import Path

from . import experiment
from .exceptions import OptBPError


def _cmd_run(args):
    spec = experiment.parse_config(args.config)
    spec = experiment.apply_overrides(spec, seed=args.seed, steps=args.steps, output_path=args.out)
    status = experiment.run_experiment(spec, jobs=args.jobs, log=lambda msg: print(msg, file=sys.stderr))
    print(f"{spec.name}: wrote {len(spec.runs)} run(s) and summary.csv to {spec.output_path}")
    return status


def _cmd_summarize(args):
    rows = experiment.summarize(args.csv, warmup=args.warmup)
    if args.output:
        experiment.write_summary(args.output, rows)
    else:
        experiment.write_summary_rows(sys.stdout, rows)
    return 1 if any(r.diverged for r in rows) else 0


def _cmd_bundle(args):
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    unknown = sorted(set(args.names) - set(experiment.FIGURE_BUNDLES))
    if unknown:
        raise experiment.ConfigError(f"unknown bundle(s): {', '.join(unknown)}")
    for name in args.names or sorted(experiment.FIGURE_BUNDLES):
        spec = experiment.default_bundle(name, steps=args.steps, output_root=args.results)
        path = out / f"{name}.cfg"
        path.write_text(experiment.serialize_config(spec))
        print(path)
    return 0


def build_parser():
    parser = argparse.ArgumentParser(prog="optbp", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run every configured training run and write CSVs")
    run.add_argument("config", type=Path)
    run.add_argument("--seed", type=int, help="override the weight seed of every run")
    run.add_argument("--steps", type=int, help="override the number of samples of every run")
    run.add_argument("--out", type=Path, help="override the output directory")
    run.add_argument("--jobs", type=int, default=1, help="run configs in this many processes")
    run.set_defaults(func=_cmd_run)

    summ = sub.add_parser("summarize", help="rank run CSVs by final RMSE")
    summ.add_argument("csv", nargs="+", type=Path)
    summ.add_argument("--warmup", type=int, default=0, help="ignore eta before this step")
    summ.add_argument("--output", type=Path, help="write the summary here instead of stdout")
    summ.set_defaults(func=_cmd_summarize)

    bundle = sub.add_parser("bundle", help="write the default figure configs")
    bundle.add_argument("names", nargs="*", help=f"any of {', '.join(sorted(experiment.FIGURE_BUNDLES))}")
    bundle.add_argument("--out", type=Path, default=Path("configs"))
    bundle.add_argument("--results", default="results", help="output_path root written into the configs")
    bundle.add_argument("--steps", type=int, default=5000)
    bundle.set_defaults(func=_cmd_bundle)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    if getattr(args, "steps", None) is not None and args.steps < 1:
        print("optbp: error: --steps must be a positive integer", file=sys.stderr)
        return 2
    try:
        return args.func(args)
    except (OptBPError, OSError) as exc:
        print(f"optbp: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
