"""Command line: weightcurv run | suite | list-models | list-experiments."""

from __future__ import annotations

import argparse
import sys

from .config import EXPERIMENT_IDS, load_config
from .errors import ConfigError, ModelError
from .models import MODEL_IDS
from .report import STATUS_NA
from .runner import DEFAULT_MANIFEST, load_suite, run, suite, suite_exit_code


def _overrides(args):
    return {"dt": args.dt, "seed": args.seed}


def _print_report(rep):
    line = f"{rep.experiment:22s} {rep.model:32s} {rep.theorem:28s} {rep.status.upper():5s}"
    if rep.status == STATUS_NA or rep.message:
        line += f"  {rep.message}"
    print(line)
    for v in rep.verdicts[:3]:
        print(f"    bound={v.bound:.10g} measured={v.measured:.10g} slack={v.slack:.3g}")
    if len(rep.verdicts) > 3:
        print(f"    ... {len(rep.verdicts) - 3} more verdicts")


def _cmd_run(args) -> int:
    try:
        cfg = load_config(args.config).with_overrides(**_overrides(args))
    except ConfigError as exc:
        print(f"error [{exc.code}]: {exc}", file=sys.stderr)
        return 2
    rep = run(cfg, out_dir=args.out)
    _print_report(rep)
    return rep.exit_code


def _cmd_suite(args) -> int:
    try:
        configs = [c.with_overrides(**_overrides(args)) for c in load_suite(args.manifest)]
    except (ConfigError, ModelError) as exc:
        print(f"error [{exc.code}]: {exc}", file=sys.stderr)
        return 2
    reports, table = suite(configs, out_dir=args.out, workers=args.workers)
    for rep in reports:
        _print_report(rep)
    print()
    print(f"{'theorem':28s} {'status':6s} runs pass fail n/a")
    for tid, status, runs, passed, failed, na in table:
        print(f"{tid:28s} {status.upper():6s} {runs:4d} {passed:4d} {failed:4d} {na:3d}")
    return suite_exit_code(reports)


def build_parser():
    parser = argparse.ArgumentParser(prog="weightcurv", description="Weighted curvature experiments")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--out", default=None, help="directory for JSON reports and CSV data")
        p.add_argument("--dt", type=float, default=None, help="override the integration step")
        p.add_argument("--seed", type=int, default=None, help="override the random seed")
        p.add_argument("--workers", type=int, default=1, help="concurrent suite entries")

    p = sub.add_parser("run", help="run one experiment config")
    p.add_argument("config")
    common(p)
    p.set_defaults(func=_cmd_run)
    p = sub.add_parser("suite", help="run every config of a manifest")
    p.add_argument("manifest", nargs="?", default=str(DEFAULT_MANIFEST))
    common(p)
    p.set_defaults(func=_cmd_suite)
    p = sub.add_parser("list-models", help="model id patterns")
    p.set_defaults(func=lambda a: print("\n".join(MODEL_IDS)) or 0)
    p = sub.add_parser("list-experiments", help="experiment ids")
    p.set_defaults(func=lambda a: print("\n".join(EXPERIMENT_IDS)) or 0)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "dt", None) is not None and args.dt <= 0:
        print("error [config_error]: --dt must be positive", file=sys.stderr)
        return 2
    if getattr(args, "workers", 1) < 1:
        print("error [config_error]: --workers must be >= 1", file=sys.stderr)
        return 2
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
