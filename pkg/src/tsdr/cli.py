"""Command-line entry point: ``tsdr <subcommand> ...``.

Exit codes: 0 success, 1 pipeline error (message tagged with the stage),
2 usage error, 3 reproduction finished but some published value was missed
(only with ``--fail-on-mismatch``).
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import __version__
from .datamodel import DataError, builtin_schema_path, load_schema
from .experiment import (
    TABLE_IDS,
    ExperimentError,
    apply_overrides,
    data_dir,
    load_spec,
    reproduce_to_dir,
    run_to_dir,
    synth_config,
)
from .synth import AXES, FIG1_GRID, SynthError, sweep

DATASETS = ("adult", "communities", "compas", "german", "lsac")


def _on_off(v: str) -> bool:
    if v not in ("on", "off"):
        raise argparse.ArgumentTypeError("expected 'on' or 'off'")
    return v == "on"


def _add_pipeline_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=None, help="base seed (overrides the spec)")
    p.add_argument("--out", default=None, help="output directory")
    p.add_argument("--data-dir", default=None,
                   help="directory holding the dataset files (default: $TSDR_DATA_DIR or .)")
    p.add_argument("--tie-mode", choices=("strict", "half"), default=None,
                   help="AUC tie credit: strict counts only '>' pairs, half adds 0.5 per tie")
    p.add_argument("--first-stage-intercept", type=_on_off, default=None, metavar="{on|off}")
    p.add_argument("--variance-correction", type=_on_off, default=None, metavar="{on|off}")
    p.add_argument("--quantile-transform", action="store_true", default=None,
                   help="apply the within-group ordinal transform to non-binary attributes")
    p.add_argument("--drop-correlated", type=float, default=None, metavar="T",
                   help="drop attributes with |corr(x, y)| > T before splitting")
    p.add_argument("--resample-balance", action="store_true", default=None,
                   help="oversample the minority class in every training split")


def _overrides(args) -> dict:
    return {
        "seed": args.seed,
        "tie_mode": args.tie_mode,
        "first_stage_intercept": args.first_stage_intercept,
        "variance_correction": args.variance_correction,
        "quantile_transform": args.quantile_transform,
        "drop_correlated": args.drop_correlated,
        "resample_balance": args.resample_balance,
    }


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="tsdr", description="Two-stage discrimination remover experiments")
    ap.add_argument("--version", action="version", version=f"tsdr {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run one experiment spec file")
    p.add_argument("spec", help="YAML experiment spec")
    _add_pipeline_flags(p)

    p = sub.add_parser("reproduce", help="run a canned table reproduction")
    p.add_argument("table", choices=TABLE_IDS)
    p.add_argument("--runs", type=int, default=None, help="runs per sweep point (fig1 only)")
    p.add_argument("--fail-on-mismatch", action="store_true",
                   help="exit with status 3 when a published value is missed")
    _add_pipeline_flags(p)

    p = sub.add_parser("synth-sweep", help="sweep one synthetic-data parameter")
    p.add_argument("axis", choices=AXES)
    p.add_argument("values", nargs="*", type=float,
                   help="axis values (default: the standard grid for the axis)")
    p.add_argument("--runs", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n", type=int, default=None, help="base sample size")
    p.add_argument("--sigma-eps", type=float, default=None)
    p.add_argument("--out", default=None, help="CSV path (default: stdout)")

    p = sub.add_parser("fetch-instructions", help="where to get a dataset and how to check it")
    p.add_argument("dataset", choices=DATASETS + ("all",))
    return ap


def _cmd_run(args) -> int:
    spec = apply_overrides(load_spec(args.spec), **_overrides(args))
    out = Path(args.out or Path("out") / spec.name)
    result = run_to_dir(spec, out, data_dir(args.data_dir))
    for alg, ms in result.aggregate.items():
        shown = ", ".join(f"{k}={v['mean']:.4f}" for k, v in ms.items() if "/" not in k)
        print(f"{alg}: {shown}")
    print(f"wrote {out}")
    return 0


def _cmd_reproduce(args) -> int:
    out = Path(args.out or Path("out") / args.table)
    overrides = {k: v for k, v in _overrides(args).items() if v is not None}
    comp = reproduce_to_dir(args.table, out, data_dir(args.data_dir), overrides, args.runs)
    for line in comp.lines():
        print(line)
    print(f"wrote {out}")
    if args.fail_on_mismatch and not comp.passed:
        return 3
    return 0


def _cmd_sweep(args) -> int:
    base = {}
    if args.n is not None:
        base["n"] = args.n
    if args.sigma_eps is not None:
        base["sigma_eps"] = args.sigma_eps
    values = args.values or FIG1_GRID[args.axis]
    if args.axis in ("n", "d_x"):
        values = [int(v) for v in values]
    try:
        res = sweep(synth_config(base), args.axis, values, args.runs, args.seed)
    except SynthError as exc:
        raise ExperimentError("synth", str(exc)) from exc
    if args.out:
        Path(args.out).parent.mkdir(parents=True, exist_ok=True)
        res.write_csv(args.out)
        print(f"wrote {args.out}")
    else:
        res.write_csv(sys.stdout)
    return 0


def _cmd_fetch(args) -> int:
    names = DATASETS if args.dataset == "all" else (args.dataset,)
    for name in names:
        try:
            s = load_schema(builtin_schema_path(name))
        except DataError as exc:
            raise ExperimentError("spec", str(exc)) from exc
        print(f"{name}:")
        print(f"  source:   {s.source}")
        print(f"  files:    {', '.join(s.files)}")
        print(f"  expected: {s.expected_rows} rows, {s.expected_attributes} attributes "
              f"after preprocessing")
        print(f"  place the files in --data-dir or $TSDR_DATA_DIR")
    return 0


COMMANDS = {
    "run": _cmd_run,
    "reproduce": _cmd_reproduce,
    "synth-sweep": _cmd_sweep,
    "fetch-instructions": _cmd_fetch,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except ExperimentError as exc:
        print(f"tsdr: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
