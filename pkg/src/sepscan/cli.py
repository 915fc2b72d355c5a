"""Command-line front end.

    sepscan sample x-hs --samples 1000000 --seed 7
    sepscan exact
    sepscan fitcheck qubit-k3 --samples 1000000
    sepscan verify --fast
    sepscan curves x-hs --offset 1.0

Exit status is 0 on success, 1 when any verification fails and 2 on a
usage error.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from pathlib import Path

from . import __version__
from .exceptions import SepscanError
from .histogram import JointRadialHistogram

DEFAULT_OUT = "sepscan-out"


def _out_dir(args) -> Path:
    base = args.out_dir or os.environ.get("SEPSCAN_OUT_DIR") or DEFAULT_OUT
    return Path(base)


def _emit(rows, fmt: str, stream=None):
    stream = stream or sys.stdout
    if fmt == "json":
        json.dump(rows, stream, indent=2, default=_json_default)
        stream.write("\n")
        return
    rows = rows if isinstance(rows, list) else [rows]
    w = csv.DictWriter(stream, fieldnames=list(rows[0]), lineterminator="\n", extrasaction="ignore")
    w.writeheader()
    for r in rows:
        w.writerow({k: json.dumps(v, default=_json_default) if isinstance(v, (list, dict)) else v
                    for k, v in r.items()})


def _json_default(o):
    if hasattr(o, "item"):
        return o.item()
    raise TypeError(f"cannot serialize {type(o).__name__}")


def _workers(args) -> int:
    from .scenarios import default_workers

    return args.workers if args.workers is not None else default_workers()


def cmd_sample(args) -> int:
    from .scenarios import ScenarioSpec, run

    spec = ScenarioSpec(args.scenario, args.samples, args.seed, _workers(args), args.bins, args.offset)
    rep = run(spec)
    out = rep.write(_out_dir(args) / args.scenario)
    summary = rep.summary()
    summary["out_dir"] = str(out)
    _emit(summary, args.format)
    return 0


FORMULAS = {
    "x-hs": (("diagonal", "x_diag"), ("antidiagonal", "x_antidiag"), ("column_half", "x_half")),
    "x-k5": (("column_half", "xk5_half"),),
    "qubit-k3": (("diagonal", "k3_diag"), ("antidiagonal", "k3_antidiag")),
    "qubit-k4": (("diagonal", "k4_diag"), ("antidiagonal", "k4_antidiag")),
    "qubit-k5": (("diagonal", "k5_diag"),),
}


def _formula(name):
    from . import closedform, fits

    table = {
        "x_diag": closedform.X_DIAG, "x_antidiag": closedform.X_ANTIDIAG, "x_half": closedform.X_HALF,
        "xk5_half": closedform.XK5_HALF, "k3_diag": fits.K3_DIAG, "k3_antidiag": fits.K3_ANTIDIAG,
        "k4_diag": fits.K4_DIAG, "k4_antidiag": fits.K4_ANTIDIAG, "k5_diag": fits.K5_DIAG,
    }
    return table[name]


def _load_or_run(args):
    from .scenarios import ScenarioSpec, run, summarize

    spec = ScenarioSpec(args.scenario, args.samples, args.seed, _workers(args), args.bins, args.offset)
    if args.from_dir:
        h = JointRadialHistogram.from_csv(args.from_dir)
        spec = ScenarioSpec(args.scenario, max(h.n_total, 1), args.seed, spec.workers, h.nbins, args.offset)
        return summarize(spec, h)
    return run(spec)


def cmd_fitcheck(args) -> int:
    from .fits import chi_squared

    if args.scenario not in FORMULAS:
        print(f"no candidate formulas for scenario {args.scenario!r}; "
              f"choose from {sorted(FORMULAS)}", file=sys.stderr)
        return 2
    rep = _load_or_run(args)
    rows = []
    for key, fname in FORMULAS[args.scenario]:
        fr = chi_squared(_formula(fname), rep.curves[key], min_count=args.min_count,
                         name=fname, empirical=(fname == "k4_antidiag"))
        d = fr.to_dict()
        d["curve"] = key
        rows.append(d)
    _emit(rows, args.format)
    return 0


def cmd_exact(args) -> int:
    from .closedform import exact_constants

    _emit(exact_constants(args.tol), args.format)
    return 0


def cmd_verify(args) -> int:
    from .scenarios import FAST_TARGETS, FULL_TARGETS, verify

    targets = args.targets or (FULL_TARGETS if args.full else FAST_TARGETS)
    reports = verify(targets, seed=args.seed, workers=_workers(args))
    if args.format == "json":
        _emit([r.to_dict() for r in reports], "json")
    else:
        for r in reports:
            print(r.line() + (f" [{r.detail}]" if r.detail else ""))
    return 0 if all(r.passed for r in reports) else 1


def cmd_curves(args) -> int:
    from .scenarios import ScenarioSpec, scenario_curves

    src = Path(args.from_dir) if args.from_dir else _out_dir(args) / args.scenario
    h = JointRadialHistogram.from_csv(src)
    spec = ScenarioSpec(args.scenario, max(h.n_total, 1), nbins=h.nbins, offset=args.offset)
    dest = Path(args.out_dir) if args.out_dir else src
    dest.mkdir(parents=True, exist_ok=True)
    rows = []
    for name, c in scenario_curves(spec, h).items():
        path = dest / f"curve_{name}.csv"
        c.to_csv(path)
        rows.append({"curve": name, "path": str(path), "defined_points": int(c.defined.sum())})
    _emit(rows, args.format)
    return 0


def build_parser() -> argparse.ArgumentParser:
    from .scenarios import SCENARIOS

    p = argparse.ArgumentParser(prog="sepscan", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, scenario=True, sampling=True, formats=("json", "csv")):
        if scenario:
            sp.add_argument("scenario", choices=sorted(SCENARIOS))
        if sampling:
            sp.add_argument("--samples", type=int, default=10**6)
            sp.add_argument("--seed", type=int, default=0)
            sp.add_argument("--workers", type=int, default=None,
                            help="worker processes (default: available CPUs)")
            sp.add_argument("--bins", type=int, default=100)
            sp.add_argument("--offset", type=float, default=None,
                            help="antidiagonal offset c in rB = c - rA")
        sp.add_argument("--out-dir", default=None, help="default: $SEPSCAN_OUT_DIR or ./sepscan-out")
        sp.add_argument("--format", choices=formats, default=formats[0])

    sp = sub.add_parser("sample", help="run a scenario and write histogram, curves and report")
    common(sp)
    sp.set_defaults(func=cmd_sample)

    sp = sub.add_parser("exact", help="print closed-form constants")
    common(sp, scenario=False, sampling=False)
    sp.add_argument("--tol", type=float, default=1e-12, help="root bracket width")
    sp.set_defaults(func=cmd_exact)

    sp = sub.add_parser("fitcheck", help="chi-squared of candidate formulas against binned data")
    common(sp)
    sp.add_argument("--from-dir", default=None, help="directory with total.csv and separable.csv")
    sp.add_argument("--min-count", type=int, default=1)
    sp.set_defaults(func=cmd_fitcheck)

    sp = sub.add_parser("verify", help="run the verification suite")
    common(sp, scenario=False, sampling=False, formats=("text", "json"))
    mode = sp.add_mutually_exclusive_group()
    mode.add_argument("--fast", action="store_true", help="exact checks plus a 10^6-sample smoke run (default)")
    mode.add_argument("--full", action="store_true", help="Monte Carlo checks at acceptance sample counts")
    sp.add_argument("--targets", nargs="*", default=None, help="explicit check names")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--workers", type=int, default=None)
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("curves", help="re-extract curves from saved histogram CSVs")
    common(sp, sampling=False)
    sp.add_argument("--from-dir", default=None, help="default: <out-dir>/<scenario>")
    sp.add_argument("--offset", type=float, default=None)
    sp.set_defaults(func=cmd_curves)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (ValueError, FileNotFoundError) as exc:
        print(f"sepscan: error: {exc}", file=sys.stderr)
        return 2
    except SepscanError as exc:
        print(f"sepscan: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
