"""Generate the committed synthetic fixture under fixtures/synthetic/.

Ten assets in two sectors over 600 weekdays, driven by one market factor
plus sector factors so that some correlations clear the default coupling
threshold.  The index is a fixed-weight average of the asset returns and
the VIX series is a mean-reverting AR(1) around 16.

The fixture is committed; rerunning this script reproduces it byte for byte
with the pinned seed (numpy RNG stream stability permitting).
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
import pandas as pd

OUT = Path(__file__).resolve().parents[1] / "fixtures" / "synthetic"

TICKERS = {
    "APEX": "Technology",
    "BYTE": "Technology",
    "CORE": "Technology",
    "DIGI": "Technology",
    "FLUX": "Technology",
    "GENE": "Healthcare",
    "HELX": "Healthcare",
    "MEDI": "Healthcare",
    "NOVA": "Healthcare",
    "PULS": "Healthcare",
}

N_DAYS = 600
START = "2021-01-04"
SEED = 974513


def main() -> None:
    rng = np.random.default_rng(SEED)
    tickers = list(TICKERS)
    sectors = np.array([TICKERS[t] for t in tickers])
    n = len(tickers)
    dates = pd.bdate_range(START, periods=N_DAYS)

    market = rng.normal(0.0004, 0.009, N_DAYS)
    sector_names = sorted(set(sectors))
    sector_factors = {s: rng.normal(0.0, 0.006, N_DAYS) for s in sector_names}
    beta = rng.uniform(0.6, 1.4, n)
    sload = rng.uniform(0.6, 1.2, n)
    idio = rng.uniform(0.006, 0.010, n)

    rets = np.empty((N_DAYS, n))
    for i, t in enumerate(tickers):
        rets[:, i] = (
            beta[i] * market
            + sload[i] * sector_factors[sectors[i]]
            + rng.normal(0.0, idio[i], N_DAYS)
        )

    start_prices = rng.uniform(25.0, 280.0, n)
    prices = start_prices * np.cumprod(1.0 + rets, axis=0)

    cap = rng.lognormal(0.0, 0.5, n)
    w_index = cap / cap.sum()
    index_returns = rets @ w_index
    index_prices = 4000.0 * np.cumprod(1.0 + index_returns)

    vix = np.empty(N_DAYS)
    level = 17.0
    for t in range(N_DAYS):
        level = 16.0 + 0.97 * (level - 16.0) + rng.normal(0.0, 0.8)
        vix[t] = max(level, 9.0)

    base_volume = rng.uniform(2e5, 5e6, n)
    volumes = (base_volume * rng.lognormal(0.0, 0.35, (N_DAYS, n))).round()

    price_cells = [[f"{prices[r, c]:.6f}" for c in range(n)] for r in range(N_DAYS)]
    volume_cells = [[f"{volumes[r, c]:.0f}" for c in range(n)] for r in range(N_DAYS)]

    # a late listing: PULS has no prices for the first two days, which
    # exercises the leading-row drop in the loader
    late = tickers.index("PULS")
    for r in (0, 1):
        price_cells[r][late] = ""
        volume_cells[r][late] = ""
    # interior gaps exercising forward-fill
    for r, c in ((120, 2), (121, 2), (333, 7)):
        price_cells[r][c] = ""
    volume_cells[200][4] = ""

    OUT.mkdir(parents=True, exist_ok=True)
    date_strs = [d.date().isoformat() for d in dates]

    def write_wide(name, cells):
        with open(OUT / name, "w") as fh:
            fh.write("date," + ",".join(tickers) + "\n")
            for r in range(N_DAYS):
                fh.write(date_strs[r] + "," + ",".join(cells[r]) + "\n")

    write_wide("prices.csv", price_cells)
    write_wide("volumes.csv", volume_cells)

    with open(OUT / "index.csv", "w") as fh:
        fh.write("date,value\n")
        for r in range(N_DAYS):
            fh.write(f"{date_strs[r]},{index_prices[r]:.6f}\n")

    with open(OUT / "vix.csv", "w") as fh:
        fh.write("date,value\n")
        for r in range(N_DAYS):
            fh.write(f"{date_strs[r]},{vix[r]:.4f}\n")

    with open(OUT / "sectors.csv", "w") as fh:
        fh.write("ticker,sector\n")
        for t in tickers:
            fh.write(f"{t},{TICKERS[t]}\n")

    print(f"fixture written to {OUT}")
    print(f"dates {date_strs[0]} .. {date_strs[-1]}")
    same = sectors[:, None] == sectors[None, :]
    corr = np.corrcoef(rets.T)
    off = ~np.eye(n, dtype=bool)
    print(f"mean |rho| same-sector {np.abs(corr[same & off]).mean():.3f}, "
          f"cross {np.abs(corr[~same]).mean():.3f}, vix mean {vix.mean():.2f}")


if __name__ == "__main__":
    main()
