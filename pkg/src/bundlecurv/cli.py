"""Command-line entry point.

Four operations over a configured chain and metric: fatness (measure the
commuting-pair deficit), certify (zero-curvature certificates along an eps
schedule), scan (randomized curvature floor), and sweep (collapse-family
floor and positive fraction along a t grid). Every run is deterministic
under a fixed seed; reports embed the resolved configuration.

Exit codes: 0 success, 1 validation error, 2 convergence failure, 3 refusal.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import report as rep
from . import tolerances as tol
from .bundle import fatness_deficit
from .config import RunConfig, load_config
from .errors import (
    ConvergenceError,
    IllConditionedError,
    NoWitnessError,
    ValidationError,
)
from .search import curvature_scan, variation_sweep, zero_curvature_schedule

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_CONVERGENCE = 2
EXIT_REFUSAL = 3

_DEFAULT_FORMAT = {"fatness": "json", "certify": "json", "scan": "csv", "sweep": "csv"}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bundlecurv",
        description="curvature reports for homogeneous bundle metrics on rotation groups",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("fatness", "measure the minimum fiber/base bracket norm and report a verdict"),
        ("certify", "build zero-curvature certificates along an eps schedule"),
        ("scan", "sample sectional values at random base points and planes"),
        ("sweep", "trace the collapse family's floor and positive fraction over t"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, help="path to the TOML run configuration")
        p.add_argument("--seed", type=int, default=None, help="override the config seed")
        p.add_argument("--out", default=None, help="write the report to this file")
        p.add_argument(
            "--format", choices=("json", "csv"), default=None, help="report format override"
        )
        p.add_argument(
            "--no-figures",
            action="store_true",
            help="skip figure rendering even when --out is given",
        )
    return parser


def _resolve(cfg: RunConfig, args) -> tuple:
    seed = args.seed if args.seed is not None else cfg.seed
    out = args.out if args.out is not None else cfg.out
    fmt = args.format if args.format is not None else cfg.format
    figures = cfg.figures and not args.no_figures and out is not None
    return seed, out, fmt, figures


def _check_format(command: str, fmt: str | None) -> str:
    natural = _DEFAULT_FORMAT[command]
    if fmt is None or fmt == natural:
        return natural
    raise ValidationError(f"{command} reports use {natural}; {fmt} is not supported")


def _emit(text: str, out, figure_fn=None) -> None:
    if out is None:
        sys.stdout.write(text)
        return
    path = rep.write_report(text, out)
    print(f"wrote {path}", file=sys.stderr)
    if figure_fn is not None:
        fig_path = figure_fn()
        print(f"wrote {fig_path}", file=sys.stderr)


def cmd_fatness(cfg: RunConfig, args) -> int:
    seed, out, fmt, _ = _resolve(cfg, args)
    _check_format("fatness", fmt)
    triple = cfg.triple.build()
    fat_seed = cfg.fatness.seed if cfg.fatness.seed is not None else seed
    result = fatness_deficit(triple, seed=fat_seed, restarts=cfg.fatness.restarts)
    verdict = "fat" if result.deficit >= tol.FATNESS_ZERO else "non-fat"
    _emit(rep.fatness_report(cfg.resolved(), fat_seed, result, verdict), out)
    return EXIT_OK


def cmd_certify(cfg: RunConfig, args) -> int:
    seed, out, fmt, figures = _resolve(cfg, args)
    _check_format("certify", fmt)
    triple = cfg.triple.build()
    metric = cfg.metric.build(triple, seed)
    try:
        certs = zero_curvature_schedule(
            triple, metric, cfg.certify.eps, seed=seed, n_starts=cfg.certify.n_starts
        )
    except NoWitnessError as exc:
        refusal = {
            "command": "certify",
            "config": cfg.resolved(),
            "seed": seed,
            "refusal": "the chain is fat: there is no commuting plane to certify",
            "deficit": float(exc.deficit),
        }
        sys.stdout.write(json.dumps(refusal, sort_keys=True, indent=2) + "\n")
        return EXIT_REFUSAL
    text = rep.certify_report(cfg.resolved(), seed, certs)
    figure_fn = (lambda: rep.certify_figure(certs, out)) if figures else None
    _emit(text, out, figure_fn)
    return EXIT_OK


def cmd_scan(cfg: RunConfig, args) -> int:
    seed, out, fmt, figures = _resolve(cfg, args)
    _check_format("scan", fmt)
    triple = cfg.triple.build()
    metric = cfg.metric.build(triple, seed)
    result = curvature_scan(
        triple,
        metric,
        n_samples=cfg.scan.n_samples,
        seed=seed,
        planes_per_point=cfg.scan.planes_per_point,
        include_witness_plane=cfg.scan.include_witness_plane,
    )
    text = rep.scan_report(cfg.resolved(), seed, result, cfg.scan.bins)
    figure_fn = (lambda: rep.scan_figure(result, cfg.scan.bins, out)) if figures else None
    _emit(text, out, figure_fn)
    return EXIT_OK


def cmd_sweep(cfg: RunConfig, args) -> int:
    seed, out, fmt, figures = _resolve(cfg, args)
    _check_format("sweep", fmt)
    triple = cfg.triple.build()
    rows = variation_sweep(
        triple,
        cfg.sweep.t_grid,
        n_samples=cfg.sweep.n_samples,
        seed=seed,
        planes_per_point=cfg.sweep.planes_per_point,
        include_witness_plane=cfg.sweep.include_witness_plane,
    )
    text = rep.sweep_report(cfg.resolved(), seed, rows)
    figure_fn = (lambda: rep.sweep_figure(rows, out)) if figures else None
    _emit(text, out, figure_fn)
    return EXIT_OK


_COMMANDS = {
    "fatness": cmd_fatness,
    "certify": cmd_certify,
    "scan": cmd_scan,
    "sweep": cmd_sweep,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        return _COMMANDS[args.command](cfg, args)
    except NoWitnessError as exc:
        # witness injection requested on a fat chain
        print(f"refusal: {exc}", file=sys.stderr)
        return EXIT_REFUSAL
    except ValidationError as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (ConvergenceError, IllConditionedError) as exc:
        print(f"convergence failure: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE


if __name__ == "__main__":
    sys.exit(main())
