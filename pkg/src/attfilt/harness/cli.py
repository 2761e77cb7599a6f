"""Command line front end.

    attfilt run <scenario> [--seed S] [--noise-free] [--csv DIR] [--plots DIR]
    attfilt validate <scenario>
    attfilt sweep <scenario> --param k_p --values 75 150 300 [--seeds 5]

``<scenario>`` is a path or the name of a bundled scenario (``paper_sec4``).
``ATTFILT_SEED`` overrides the scenario seed when ``--seed`` is not given.
Results go to stdout as JSON; failures print one JSON error line to stderr
and exit nonzero.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

from attfilt.harness.csvio import read_measurements_csv
from attfilt.harness.runner import SWEEP_PARAMS, run_scenario, sweep
from attfilt.harness.scenario import ScenarioError, load_scenario


def _seed_from_env():
    value = os.environ.get("ATTFILT_SEED")
    if value is None or value == "":
        return None
    try:
        return int(value, 0)
    except ValueError:
        raise ScenarioError(f"ATTFILT_SEED must be an integer, got {value!r}") from None


def _plain(x):
    # inf (never settled) and nan (no fit) become null
    if isinstance(x, dict):
        return {k: _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    if isinstance(x, float) and not math.isfinite(x):
        return None
    return x


def _dump(payload) -> None:
    print(json.dumps(_plain(payload), indent=2, default=str, allow_nan=False))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="attfilt", description="Multi-rate SO(3) attitude estimator harness")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run one scenario")
    p.add_argument("scenario")
    p.add_argument("--seed", type=lambda v: int(v, 0), help="override the scenario seed")
    p.add_argument("--noise-free", action="store_true", help="zero both noise bounds")
    p.add_argument("--csv", metavar="DIR", help="write truth/estimate/measurement CSVs here")
    p.add_argument("--rhat", action="store_true", help="add estimated attitude entries to estimate.csv")
    p.add_argument("--plots", metavar="DIR", help="write SVG figures here")
    p.add_argument("--measurements", metavar="CSV", help="replay a recorded measurement stream")

    p = sub.add_parser("validate", help="parse and check a scenario file")
    p.add_argument("scenario")

    p = sub.add_parser("sweep", help="seed-averaged metrics over one parameter")
    p.add_argument("scenario")
    p.add_argument("--param", required=True, choices=SWEEP_PARAMS)
    p.add_argument("--values", required=True, nargs="+", type=float)
    p.add_argument("--seeds", type=int, default=5, help="number of seeds, starting at the scenario seed")
    p.add_argument("--noise-free", action="store_true")
    p.add_argument("--jobs", type=int, default=1, help="worker processes")
    return parser


def _run(args) -> None:
    s = load_scenario(args.scenario)
    seed = args.seed if args.seed is not None else _seed_from_env()
    stream = read_measurements_csv(args.measurements) if args.measurements else None
    report = run_scenario(
        s, seed=seed, noise_free=args.noise_free, csv_dir=args.csv, include_rhat=args.rhat, stream=stream
    )
    if args.plots:
        from attfilt.harness.plots import emit_plots

        report.files.update(emit_plots(report, args.plots))
    _dump(report.summary())


def _validate(args) -> None:
    s = load_scenario(args.scenario)
    _dump({"scenario": s.name, "valid": True, "steps": s.steps, "h": s.gains.h, "n": s.gains.n})


def _sweep(args) -> None:
    s = load_scenario(args.scenario)
    base = args.seed if getattr(args, "seed", None) is not None else _seed_from_env()
    base = s.noise.seed if base is None else base
    rows = sweep(
        s,
        args.param,
        args.values,
        seeds=range(base, base + args.seeds),
        noise_free=args.noise_free,
        jobs=args.jobs,
    )
    for row in rows:
        row["seeds"] = list(row["seeds"])
    _dump({"scenario": s.name, "rows": rows})


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handler = {"run": _run, "validate": _validate, "sweep": _sweep}[args.command]
    try:
        handler(args)
    except ScenarioError as exc:
        print(json.dumps({"error": "ScenarioError", "field": exc.field, "message": str(exc)}), file=sys.stderr)
        return 2
    except (ValueError, OSError) as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}), file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
