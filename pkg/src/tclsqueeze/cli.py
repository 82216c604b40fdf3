"""Command-line entry point: ``tclsqueeze {timeseries,sweep,verify,figures}``.

Exit codes: 0 success, 1 invalid input, 2 a verification gate failed,
3 I/O failure.
"""
import argparse
import json
import logging
import sys
from pathlib import Path

from . import runs
from .model import ParameterError

log = logging.getLogger("tclsqueeze")

EXIT_OK, EXIT_INVALID, EXIT_GATE, EXIT_IO = 0, 1, 2, 3

# flag dest -> config key
_FLAG_KEYS = {
    "lam": "lambda",
    "coupling": "coupling",
    "omega0": "omega0",
    "theta": "theta",
    "phi": "phi",
    "t_max": "t_max",
    "samples_per_fast_period": "samples_per_fast_period",
    "convention": "convention",
    "out": "output",
    "dissipation": "dissipation",
}


def _common(parser):
    g = parser.add_argument_group("run configuration")
    g.add_argument("--config", type=Path, help="key = value (or JSON) config file")
    g.add_argument("--lambda", dest="lam", type=float, help="bath spectral width")
    g.add_argument("--coupling", type=float, help="atom-cavity coupling")
    g.add_argument("--omega0", type=float, help="transition frequency")
    g.add_argument("--theta", type=float, help="initial amplitude angle")
    g.add_argument("--phi", type=float, help="initial phase angle")
    g.add_argument("--t-max", dest="t_max", type=float, help="final time (gamma0 t)")
    g.add_argument("--samples-per-fast-period", dest="samples_per_fast_period", type=int)
    g.add_argument("--convention", choices=("quarter", "unit"))
    g.add_argument("--no-dissipation", dest="dissipation", action="store_const", const=False,
                   help="zero both decay rates (pure Jaynes-Cummings dynamics)")
    g.add_argument("--out", help="output path ('-' for stdout)")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="tclsqueeze",
        description="Cavity-field squeezing in a dissipative Jaynes-Cummings model.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("timeseries", help="observables on a uniform time grid (CSV)")
    _common(p)

    p = sub.add_parser("sweep", help="scan one parameter (CSV)")
    _common(p)
    p.add_argument("--axis", required=True, choices=runs.SWEEP_AXES)
    grid = p.add_mutually_exclusive_group(required=True)
    grid.add_argument("--values", help="comma-separated axis values")
    grid.add_argument("--range", nargs=3, metavar=("START", "STOP", "COUNT"),
                      help="linear grid")
    p.add_argument("--reduction", choices=runs.REDUCTIONS, default="envelope_summary")
    p.add_argument("--workers", type=int, default=1)

    p = sub.add_parser("verify", help="check closed forms against the numerical oracles")
    _common(p)

    p = sub.add_parser("figures", help="datasets and gnuplot scripts for the figures")
    p.add_argument("fig_ids", nargs="+", metavar="FIG",
                   help=f"figure ids ({', '.join(runs.FIGURES)}) or 'all'")
    p.add_argument("--out-dir", type=Path, default=Path("figures"))
    p.add_argument("--samples-per-fast-period", dest="samples_per_fast_period",
                   type=int, default=64)
    p.add_argument("--workers", type=int, default=1)
    return parser


def load_config(args):
    mapping = {}
    if getattr(args, "config", None) is not None:
        mapping.update(runs.parse_config_mapping(args.config.read_text()))
    for dest, key in _FLAG_KEYS.items():
        value = getattr(args, dest, None)
        if value is not None:
            mapping[key] = value
    return runs.config_from_mapping(mapping)


def _sweep_spec(args):
    try:
        if args.values is not None:
            values = [float(v) for v in args.values.split(",") if v.strip()]
            return runs.SweepSpec(args.axis, tuple(values), args.reduction)
        start, stop, count = args.range
        return runs.SweepSpec.linear(args.axis, float(start), float(stop), int(count),
                                     args.reduction)
    except ValueError as exc:
        raise runs.ConfigError(f"bad sweep grid: {exc}") from exc


def _cmd_timeseries(args):
    cfg = load_config(args)
    runs.write_text(cfg.output or "timeseries.csv", runs.timeseries_csv(runs.run_timeseries(cfg)))
    return EXIT_OK


def _cmd_sweep(args):
    cfg = load_config(args)
    spec = _sweep_spec(args)
    results = runs.run_sweep(cfg, spec, workers=args.workers)
    runs.write_text(cfg.output or "sweep.csv", runs.sweep_csv(spec, results))
    return EXIT_OK


def _cmd_verify(args):
    cfg = load_config(args)
    report = runs.run_verify(cfg)
    runs.write_text(cfg.output or "verify.json", json.dumps(report, indent=2) + "\n")
    for name, ok in report["gates"].items():
        log.info("%-13s %-5s %.3e", name, "pass" if ok else "FAIL", report[name])
    for fig_id, entry in report["figure_peaks"].items():
        if entry["flagged"]:
            log.warning("%s peak %.4f vs quoted %.2f: %s", fig_id, entry["computed"],
                        entry["quoted"], entry["note"])
    return EXIT_OK if report["passed"] else EXIT_GATE


def _cmd_figures(args):
    ids = list(runs.FIGURES) if args.fig_ids == ["all"] else args.fig_ids
    if args.samples_per_fast_period < 40:
        raise runs.ConfigError("samples_per_fast_period must be an integer >= 40")
    for path in runs.run_figures(ids, args.out_dir, args.samples_per_fast_period,
                                 workers=args.workers):
        log.info("wrote %s", path)
    return EXIT_OK


COMMANDS = {
    "timeseries": _cmd_timeseries,
    "sweep": _cmd_sweep,
    "verify": _cmd_verify,
    "figures": _cmd_figures,
}


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (runs.ConfigError, ParameterError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
