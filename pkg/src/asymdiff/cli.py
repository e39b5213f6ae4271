"""
Command-line interface.

Exit status: 0 success, 1 configuration error, 2 runtime or I/O error,
3 partial result (at least one algorithm diverged in every trial).
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from .config import ConfigError, load_config
from .metrics import complexity_table, format_complexity_table, write_complexity_csv, write_msd_csv
from .plot import plot_csv
from .simulation import (SWEEP_PARAMETERS, bounds_report, build_topology, run_experiment, sweep,
                         write_sweep_summary)
from .topology import write_edge_list

OUTPUT_DIR_ENV = "ASYMDIFF_OUTPUT_DIR"

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME, EXIT_PARTIAL = 0, 1, 2, 3

log = logging.getLogger("asymdiff")


def _output_dir(args):
    path = Path(args.out_dir or os.environ.get(OUTPUT_DIR_ENV) or "results")
    path.mkdir(parents=True, exist_ok=True)
    return path


def _load(args):
    config = load_config(args.config)
    if getattr(args, "seed", None) is not None:
        config = config.with_seed(args.seed)
    return config


def _write_run(result, out_dir, stem, svg):
    curves = [result.curves[label] for label in result.labels if label in result.curves]
    csv_path = out_dir / f"{stem}.csv"
    with open(csv_path, "w", newline="", encoding="utf-8") as fh:
        write_msd_csv(curves, fh)
    with open(out_dir / f"{stem}.manifest.json", "w", encoding="utf-8") as fh:
        json.dump(result.manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    if svg and curves:
        (out_dir / f"{stem}.svg").write_text(plot_csv(csv_path), encoding="utf-8")
    for label in result.all_diverged:
        log.warning("%s diverged in every trial", label)
    return csv_path


def cmd_run(args):
    config = _load(args)
    out_dir = _output_dir(args)
    result = run_experiment(config)
    path = _write_run(result, out_dir, args.name, args.plot)
    print(path)
    return EXIT_PARTIAL if result.all_diverged else EXIT_OK


def _parse_values(text):
    values = [float(v) for v in text.replace(",", " ").split()]
    if not values:
        raise ValueError("empty value list")
    return values


def cmd_sweep(args):
    config = _load(args)
    values = _parse_values(args.values)
    out_dir = _output_dir(args)
    results = sweep(config, args.param, values)
    partial = False
    for value, result in results:
        _write_run(result, out_dir, f"sweep_{args.param}_{value:g}", args.plot)
        partial |= bool(result.all_diverged)
    summary = out_dir / f"sweep_{args.param}_summary.csv"
    with open(summary, "w", newline="", encoding="utf-8") as fh:
        write_sweep_summary(results, fh)
    print(summary)
    return EXIT_PARTIAL if partial else EXIT_OK


def cmd_bounds(args):
    sys.stdout.write(bounds_report(_load(args)))
    return EXIT_OK


def cmd_topology(args):
    topology = build_topology(_load(args))
    if args.out == "-":
        write_edge_list(topology, sys.stdout)
    else:
        with open(args.out, "w", encoding="utf-8") as fh:
            write_edge_list(topology, fh)
    return EXIT_OK


def cmd_plot(args):
    svg = plot_csv(args.csv, title=args.title)
    Path(args.out).write_text(svg, encoding="utf-8")
    return EXIT_OK


def cmd_complexity(args):
    rows = complexity_table(args.taps, args.nodes)
    sys.stdout.write(format_complexity_table(rows))
    if args.csv:
        with open(args.csv, "w", newline="", encoding="utf-8") as fh:
            write_complexity_csv(rows, fh)
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(prog="asymdiff", description=__doc__.splitlines()[1])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def with_config(p):
        p.add_argument("config", help="experiment configuration file")
        p.add_argument("--seed", type=int, help="override run.master_seed")
        return p

    def with_output(p):
        p.add_argument("--out-dir", help=f"output directory (default ${OUTPUT_DIR_ENV} or ./results)")
        p.add_argument("--plot", action="store_true", help="also write an SVG plot")
        return p

    p = with_output(with_config(sub.add_parser("run", help="Monte-Carlo run of all configured algorithms")))
    p.add_argument("--name", default="msd", help="output file stem")
    p.set_defaults(func=cmd_run)

    p = with_output(with_config(sub.add_parser("sweep", help="repeat a run over parameter values")))
    p.add_argument("--param", required=True, choices=SWEEP_PARAMETERS)
    p.add_argument("--values", required=True, help="comma-separated values")
    p.set_defaults(func=cmd_sweep)

    p = with_config(sub.add_parser("bounds", help="report mean-stability step-size limits"))
    p.set_defaults(func=cmd_bounds)

    p = with_config(sub.add_parser("topology", help="export the network as an edge list"))
    p.add_argument("--out", required=True, help="edge-list file, or - for stdout")
    p.set_defaults(func=cmd_topology)

    p = sub.add_parser("plot", help="render an MSD CSV as SVG")
    p.add_argument("csv")
    p.add_argument("--out", required=True)
    p.add_argument("--title", default="Network MSD")
    p.set_defaults(func=cmd_plot)

    p = sub.add_parser("complexity", help="per-iteration operation counts")
    p.add_argument("--taps", type=int, default=16)
    p.add_argument("--nodes", type=int, default=20)
    p.add_argument("--csv", help="also write the table as CSV")
    p.set_defaults(func=cmd_complexity)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (OSError, RuntimeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
