"""Command-line entry point.

Subcommands:
  run            full pipeline: all methods, backtest, all report files
  backtest       like run but without the frequency / coupling-curve files
  sample         frequencies only, estimated on the training window
  select         sample plus the sector-balanced selection
  coupling-curve emit the (VIX, gamma) curve for the configured coupling
  validate       parse and validate the config, print the effective values

Exit codes: 0 success, 1 internal error, 2 invalid config or infeasible
problem, 3 data error.
"""

from __future__ import annotations

import argparse
import logging
import sys
import time

from .config import BASELINE_METHODS, apply_overrides, load_config
from .errors import ConfigError, DataError, IsingTrackError
from .pipeline import compute_bundle, coupling_curve_samples, train_frequency_record
from . import report

logger = logging.getLogger("isingtrack.cli")

_LOG_LEVELS = {
    "error": logging.ERROR,
    "warn": logging.WARNING,
    "info": logging.INFO,
    "debug": logging.DEBUG,
}

EXIT_OK = 0
EXIT_INTERNAL = 1
EXIT_CONFIG = 2
EXIT_DATA = 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="isingtrack",
        description="Cardinality-constrained index tracking via annealed "
        "Gibbs sampling on an Ising model.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(sp, with_methods=False):
        sp.add_argument("--config", required=True, help="path to the run config file")
        sp.add_argument("--out", default=None, help="output directory (overrides run.out)")
        sp.add_argument(
            "--seed", type=int, default=None, help="sampler seed (overrides sampler.seed)"
        )
        sp.add_argument(
            "--log-level",
            choices=tuple(_LOG_LEVELS),
            default="warn",
            help="logging verbosity",
        )
        if with_methods:
            sp.add_argument(
                "--methods",
                default=None,
                help="comma-separated methods to run (ising,greedy,robust_mvo,hrp)",
            )
            sp.add_argument(
                "--baselines",
                default=None,
                help="comma-separated baselines to run alongside ising "
                "(greedy,robust_mvo,hrp); ignored when --methods is given",
            )

    add_common(sub.add_parser("run", help="full pipeline with all reports"), True)
    add_common(sub.add_parser("backtest", help="backtest and metrics only"), True)
    add_common(sub.add_parser("sample", help="training-window selection frequencies"))
    add_common(sub.add_parser("select", help="training-window selection"))
    add_common(sub.add_parser("coupling-curve", help="emit the VIX-to-gamma curve"))

    val = sub.add_parser("validate", help="validate a config file")
    val.add_argument("--config", required=True)
    val.add_argument(
        "--log-level", choices=tuple(_LOG_LEVELS), default="warn"
    )
    return parser


def _resolve_methods(args) -> str | None:
    methods = getattr(args, "methods", None)
    baselines = getattr(args, "baselines", None)
    if methods is not None:
        return methods
    if baselines is not None:
        toks = [t.strip() for t in baselines.split(",") if t.strip()]
        bad = [t for t in toks if t not in BASELINE_METHODS]
        if bad:
            raise ConfigError(
                f"unknown baselines {bad}; choose from {', '.join(BASELINE_METHODS)}"
            )
        return ",".join(["ising"] + toks)
    return None


def _summarize(bundle) -> None:
    for m in bundle.methods:
        met = bundle.metrics[m]

        def show(v):
            return "n/a" if v is None else f"{v:.4f}"

        print(
            f"{m}: tracking_error={show(met.tracking_error)} "
            f"total_return={show(met.total_return)} sharpe={show(met.sharpe)} "
            f"information_ratio={show(met.information_ratio)}"
        )
    print(f"index: total_return={bundle.index_total_return:.4f}")


def _cmd_run(cfg, full: bool) -> int:
    timings: dict = {}
    t0 = time.perf_counter()
    bundle = compute_bundle(cfg)
    timings["pipeline"] = time.perf_counter() - t0

    files = {
        "metrics.json": report.render_metrics_json(bundle),
        "equity_curve.csv": report.render_equity_csv(bundle),
        "tracking_diff.csv": report.render_tracking_diff_csv(bundle),
        "dm_tests.json": report.render_dm_json(bundle, cfg.dm_nw_lags),
        "holdings.csv": report.render_holdings_csv(bundle),
    }
    if full:
        files["frequencies.csv"] = report.render_frequencies_csv(bundle.frequency_records)
        files["coupling_curve.csv"] = report.render_coupling_curve_csv(bundle.coupling_curve)
    files["run_manifest.json"] = report.render_manifest_json(cfg, timings)
    out = report.write_output_dir(files, cfg.run_out)
    _summarize(bundle)
    print(f"reports written to {out}")
    return EXIT_OK


def _cmd_sample(cfg, with_selection: bool) -> int:
    timings: dict = {}
    t0 = time.perf_counter()
    record, sectors = train_frequency_record(cfg)
    timings["sampling"] = time.perf_counter() - t0

    files = {
        "frequencies.csv": report.render_frequencies_csv([record]),
    }
    if with_selection:
        files["selection.csv"] = report.render_selection_csv(record, sectors)
    files["run_manifest.json"] = report.render_manifest_json(cfg, timings)
    out = report.write_output_dir(files, cfg.run_out)
    if with_selection:
        sel = record.selection
        print(f"selected {len(sel.tickers)} assets as of {record.date.date()}: "
              + ", ".join(sel.tickers))
        if sel.phase3_relaxed:
            print("note: sector cap was relaxed to fill the portfolio (phase 3)")
    print(f"reports written to {out}")
    return EXIT_OK


def _cmd_coupling_curve(cfg) -> int:
    t0 = time.perf_counter()
    curve = coupling_curve_samples(cfg)
    files = {
        "coupling_curve.csv": report.render_coupling_curve_csv(curve),
        "run_manifest.json": report.render_manifest_json(
            cfg, {"coupling_curve": time.perf_counter() - t0}
        ),
    }
    out = report.write_output_dir(files, cfg.run_out)
    print(f"coupling curve written to {out}")
    return EXIT_OK


def _cmd_validate(cfg) -> int:
    print("configuration OK")
    for key, value in report.config_echo(cfg).items():
        print(f"{key} = {value}")
    return EXIT_OK


def _dispatch(args) -> int:
    cfg = load_config(args.config)
    if args.command == "validate":
        return _cmd_validate(cfg)
    cfg = apply_overrides(
        cfg,
        seed=getattr(args, "seed", None),
        out=getattr(args, "out", None),
        methods=_resolve_methods(args),
    )
    if args.command == "run":
        return _cmd_run(cfg, full=True)
    if args.command == "backtest":
        return _cmd_run(cfg, full=False)
    if args.command == "sample":
        return _cmd_sample(cfg, with_selection=False)
    if args.command == "select":
        return _cmd_sample(cfg, with_selection=True)
    if args.command == "coupling-curve":
        return _cmd_coupling_curve(cfg)
    raise ValueError(f"unhandled command {args.command!r}")


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=_LOG_LEVELS[args.log_level],
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return _dispatch(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except IsingTrackError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except Exception as exc:  # noqa: BLE001 - last-resort CLI guard
        logger.debug("unhandled error", exc_info=True)
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
