"""Render report files from a ReportBundle.

All numbers are serialized with 10 significant digits so identical runs
produce byte-identical files.  The output directory is written atomically:
files land in a temporary sibling directory which then replaces the target,
so a failed run never leaves partial outputs behind.
"""

from __future__ import annotations

import csv
import io
import json
import os
import platform
import shutil
import tempfile
from pathlib import Path

import numpy as np
import pandas as pd
import scipy

from . import __version__
from .backtest import DMTestResult, MetricsReport
from .config import RunConfig, _SCHEMA
from .kernels import active_backend
from .pipeline import FrequencyRecord, ReportBundle


def fmt(x) -> str:
    """10-significant-digit decimal rendering used in every report file."""
    return f"{float(x):.10g}"


def _num(x):
    """Round a float through the 10-digit representation for JSON output."""
    if x is None:
        return None
    f = float(x)
    if not np.isfinite(f):
        return "inf" if f > 0 else "-inf"
    return float(fmt(f))


def _date(d) -> str:
    return pd.Timestamp(d).date().isoformat()


def _metrics_obj(m: MetricsReport) -> dict:
    return {
        "tracking_error": _num(m.tracking_error),
        "correlation": _num(m.correlation),
        "total_return": _num(m.total_return),
        "sharpe": _num(m.sharpe),
        "sortino": _num(m.sortino),
        "max_drawdown": _num(m.max_drawdown),
        "information_ratio": _num(m.information_ratio),
    }


def _dm_obj(r: DMTestResult, nw_lags: int, n_obs: int) -> dict:
    return {
        "statistic": _num(r.statistic),
        "p_value": _num(r.p_value),
        "loss_differential_mean": _num(r.loss_differential_mean),
        "n_obs": n_obs,
        "nw_lags": nw_lags,
    }


def render_metrics_json(bundle: ReportBundle) -> str:
    obj = {
        "methods": {
            m: {
                **_metrics_obj(bundle.metrics[m]),
                "sector_counts": bundle.sector_tables[m],
                "phase3_relaxed": bundle.phase3_flags[m],
            }
            for m in bundle.methods
        },
        "index": {"total_return": _num(bundle.index_total_return)},
    }
    return json.dumps(obj, indent=2) + "\n"


def render_dm_json(bundle: ReportBundle, nw_lags: int) -> str:
    n_obs = len(bundle.test_dates)
    obj = {k: _dm_obj(v, nw_lags, n_obs) for k, v in bundle.dm.items()}
    return json.dumps(obj, indent=2) + "\n"


def render_equity_csv(bundle: ReportBundle) -> str:
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["date"] + [f"{m}_cum_return" for m in bundle.methods] + ["index_cum_return"])
    cums = {
        m: np.cumprod(1.0 + bundle.equity[m].portfolio_returns) - 1.0
        for m in bundle.methods
    }
    first = bundle.methods[0]
    idx_cum = np.cumprod(1.0 + bundle.equity[first].index_returns) - 1.0
    for i, d in enumerate(bundle.test_dates):
        w.writerow(
            [_date(d)] + [fmt(cums[m][i]) for m in bundle.methods] + [fmt(idx_cum[i])]
        )
    return out.getvalue()


def render_tracking_diff_csv(bundle: ReportBundle) -> str:
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    header = ["date"]
    for m in bundle.methods:
        header += [f"{m}_daily_diff", f"{m}_cum_diff"]
    w.writerow(header)
    daily = {
        m: bundle.equity[m].portfolio_returns - bundle.equity[m].index_returns
        for m in bundle.methods
    }
    cum = {m: np.cumsum(daily[m]) for m in bundle.methods}
    for i, d in enumerate(bundle.test_dates):
        row = [_date(d)]
        for m in bundle.methods:
            row += [fmt(daily[m][i]), fmt(cum[m][i])]
        w.writerow(row)
    return out.getvalue()


def render_holdings_csv(bundle: ReportBundle) -> str:
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["method", "rebalance_date", "ticker", "weight", "sector"])
    for m in bundle.methods:
        for date, sel in bundle.equity[m].holdings_log:
            for t, wt in zip(sel.tickers, sel.weights):
                w.writerow([m, _date(date), t, fmt(wt), bundle.sectors.sector_of(t)])
    return out.getvalue()


def render_frequencies_csv(records) -> str:
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    if not records:
        w.writerow(["rebalance_date", "ticker", "freq"])
        return out.getvalue()
    betas = records[0].frequencies.betas
    header = ["rebalance_date", "ticker", "freq"] + [
        f"freq_at_beta_{fmt(b)}" for b in betas
    ]
    w.writerow(header)
    for rec in records:
        f = rec.frequencies
        for i, t in enumerate(rec.tickers):
            row = [_date(rec.date), t, fmt(f.freq[i])]
            row += [fmt(f.freq_per_beta[b, i]) for b in range(len(betas))]
            w.writerow(row)
    return out.getvalue()


def render_coupling_curve_csv(curve: np.ndarray) -> str:
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["vix", "gamma"])
    for vix, gamma in curve:
        w.writerow([fmt(vix), fmt(gamma)])
    return out.getvalue()


def render_selection_csv(record: FrequencyRecord, sectors) -> str:
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["ticker", "weight", "sector", "freq"])
    sel = record.selection
    pos = {t: i for i, t in enumerate(record.tickers)}
    for t, wt in zip(sel.tickers, sel.weights):
        w.writerow([t, fmt(wt), sectors.sector_of(t), fmt(record.frequencies.freq[pos[t]])])
    return out.getvalue()


def config_echo(cfg: RunConfig) -> dict:
    """The effective config as a flat key -> string mapping."""
    echo = {}
    for key, (attr, _) in _SCHEMA.items():
        v = getattr(cfg, attr)
        if v is None:
            continue
        if isinstance(v, tuple):
            echo[key] = ",".join(v)
        elif isinstance(v, float):
            echo[key] = fmt(v)
        else:
            echo[key] = str(v)
    return echo


def render_manifest_json(cfg: RunConfig, timings: dict, extra: dict | None = None) -> str:
    obj = {
        "config": config_echo(cfg),
        "seed": cfg.sampler_seed,
        "versions": {
            "isingtrack": __version__,
            "python": platform.python_version(),
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "pandas": pd.__version__,
            "kernel_backend": active_backend(),
        },
        "timings_seconds": {k: _num(v) for k, v in timings.items()},
    }
    if extra:
        obj.update(extra)
    return json.dumps(obj, indent=2) + "\n"


def write_output_dir(files: dict, out_dir) -> Path:
    """Atomically (re)place ``out_dir`` with exactly the given files.

    ``files`` maps file name -> text content.  Contents are staged in a
    temporary sibling directory which is then swapped in, so interrupted
    runs cannot leave a partial report directory.
    """
    out = Path(out_dir)
    out.parent.mkdir(parents=True, exist_ok=True)
    staging = Path(tempfile.mkdtemp(prefix=out.name + ".partial.", dir=out.parent))
    try:
        for name, text in files.items():
            (staging / name).write_text(text)
        if out.exists():
            shutil.rmtree(out)
        os.replace(staging, out)
    except Exception:
        shutil.rmtree(staging, ignore_errors=True)
        raise
    return out
