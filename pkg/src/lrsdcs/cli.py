"""Command-line entry point: ``lrsdcs {synth,measure,reconstruct,silhouette,score}``."""

from __future__ import annotations

import argparse
import logging
import sys

from . import pipeline
from .config import ConfigFileError, RunConfig, load_config
from .solver import NumericalFailure

EXIT_OK, EXIT_INVALID, EXIT_NUMERICAL = 0, 1, 2


def _add_run_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="key = value configuration file")
    p.add_argument("--mode", choices=("grayscale", "color"))
    p.add_argument("--rate", type=float, help="measurements as a fraction of N")
    p.add_argument("--seed", type=int)


def _add_solver_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--mu1", type=float)
    p.add_argument("--mu2", type=float)
    p.add_argument("--mu3", type=float)
    p.add_argument("--mu-ref-size", dest="mu_reference_size", type=int,
                   help="volume size the sparsity weights are calibrated for")
    p.add_argument("--beta", type=float, help="use this value for all four penalties")
    p.add_argument("--beta-scale", type=float, help="penalty = beta_scale / mean|y|")
    p.add_argument("--gamma", type=float)
    p.add_argument("--max-iter", type=int)
    p.add_argument("--tol-feas", type=float)
    p.add_argument("--tol-change", type=float)
    p.add_argument("--x-update", choices=("exact", "steepest"))


def _add_detect_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--delta", type=float, help="silhouette threshold (default: 5 noise scales)")
    p.add_argument("--window", type=int, help="median filter size (odd)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="lrsdcs", description=__doc__)
    ap.add_argument("-v", "--verbose", action="count", default=0)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="write a synthetic scene with ground truth")
    p.add_argument("out")
    p.add_argument("--width", type=int, default=64)
    p.add_argument("--height", type=int, default=64)
    p.add_argument("--frames", type=int, default=20)
    p.add_argument("--sprite", type=int, default=8)
    p.add_argument("--color", action="store_true")
    p.add_argument("--illum-low", type=float, help="illumination after the mid-sequence step")
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("measure", help="frames -> measurement file")
    p.add_argument("frames")
    p.add_argument("out")
    _add_run_flags(p)

    p = sub.add_parser("reconstruct", help="measurement file -> background/foreground frames")
    p.add_argument("measurements")
    p.add_argument("out")
    _add_run_flags(p)
    _add_solver_flags(p)

    p = sub.add_parser("silhouette", help="foreground frames -> binary masks")
    p.add_argument("foreground")
    p.add_argument("out")
    p.add_argument("--config")
    p.add_argument("--offset", type=float, default=pipeline.FOREGROUND_OFFSET)
    _add_detect_flags(p)

    p = sub.add_parser("score", help="compare two mask or frame directories")
    p.add_argument("a")
    p.add_argument("b")
    p.add_argument("--metric", choices=("auto", "iou", "psnr"), default="auto")
    return ap


def run_config(args) -> RunConfig:
    values = load_config(args.config) if getattr(args, "config", None) else {}
    for key in ("mode", "rate", "seed", "delta", "window", "mu1", "mu2", "mu3",
                "mu_reference_size", "beta", "beta_scale", "gamma", "max_iter",
                "tol_feas", "tol_change", "x_update"):
        v = getattr(args, key, None)
        if v is not None:
            values[key] = v
    return RunConfig().updated(values)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "synth":
            pipeline.cmd_synth(args.out, args.width, args.height, args.frames, args.sprite,
                               args.color, args.illum_low, args.seed)
        elif args.command == "measure":
            mf = pipeline.cmd_measure(args.frames, args.out, run_config(args))
            print(f"N={mf.signal_len}\tM={mf.m}\tseed={mf.seed}")
        elif args.command == "reconstruct":
            dec = pipeline.cmd_reconstruct(args.measurements, args.out, run_config(args))
            sys.stdout.write(pipeline.diagnostics_text(dec))
        elif args.command == "silhouette":
            cfg = run_config(args)
            _, delta = pipeline.cmd_silhouette(args.foreground, args.out, cfg.delta,
                                               cfg.window, args.offset)
            print(f"delta={delta:.6g}")
        elif args.command == "score":
            rows, metric = pipeline.cmd_score(args.a, args.b, args.metric)
            sys.stdout.write(pipeline.format_table(rows, metric))
    except NumericalFailure as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ValueError, OSError, ConfigFileError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INVALID
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
