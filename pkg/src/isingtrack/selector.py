"""Three-phase sector-balanced selection from sampled frequencies.

Phase 1 seeds sector coverage: sectors are visited in descending order of
their best asset's frequency and each contributes its top asset until
min(min_sectors, sectors present) are represented.  Phase 2 fills the
remaining slots by global frequency rank, skipping assets whose sector has
reached the cap ceil(max_per_sector_frac * K).  Phase 3 only runs when the
cap left slots unfilled; it relaxes the cap (never removing earlier picks)
and is flagged on the result.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, InfeasibleError
from .marketdata import SectorMap
from .sampler import SelectionFrequencies


@dataclass(frozen=True)
class SectorConstraints:
    max_per_sector_frac: float = 0.25
    min_sectors: int = 6

    def __post_init__(self):
        if not 0 < self.max_per_sector_frac <= 1:
            raise ConfigError(
                f"max_per_sector_frac must lie in (0, 1], got {self.max_per_sector_frac}"
            )
        if not (isinstance(self.min_sectors, (int, np.integer)) and self.min_sectors >= 1):
            raise ConfigError(f"min_sectors must be a positive integer, got {self.min_sectors}")

    def sector_cap(self, k: int) -> int:
        """ceil(frac * K), guarded against float fuzz in frac * K."""
        return int(math.ceil(self.max_per_sector_frac * k - 1e-9))


@dataclass(frozen=True)
class Selection:
    """A K-asset portfolio with positive weights summing to one."""

    tickers: tuple
    weights: np.ndarray
    phase3_relaxed: bool = False

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=np.float64)
        if len(self.tickers) == 0 or len(self.tickers) != w.size:
            raise ValueError("tickers and weights must be equally long and non-empty")
        if len(set(self.tickers)) != len(self.tickers):
            raise ValueError("duplicate tickers in selection")
        if np.any(w <= 0):
            raise ValueError("weights must all be positive")
        if abs(float(w.sum()) - 1.0) > 1e-12:
            raise ValueError("weights must sum to 1 within 1e-12")
        object.__setattr__(self, "tickers", tuple(self.tickers))
        object.__setattr__(self, "weights", w)

    @property
    def k(self) -> int:
        return len(self.tickers)

    def weight_of(self, ticker: str) -> float:
        try:
            return float(self.weights[self.tickers.index(ticker)])
        except ValueError:
            return 0.0


def equal_weights(k: int) -> np.ndarray:
    return np.full(k, 1.0 / k)


def _freq_array(freq) -> np.ndarray:
    if isinstance(freq, SelectionFrequencies):
        return np.asarray(freq.freq, dtype=np.float64)
    return np.asarray(freq, dtype=np.float64)


def rank_by_frequency(tickers, freq) -> list[str]:
    """Tickers in descending frequency order, ties by ascending ticker."""
    f = _freq_array(freq)
    tickers = list(tickers)
    if len(tickers) != f.size or f.size == 0:
        raise ValueError("tickers and frequencies must be equally long and non-empty")
    order = sorted(range(f.size), key=lambda i: (-f[i], tickers[i]))
    return [tickers[i] for i in order]


def sector_balanced_select(
    tickers,
    freq,
    sectors: SectorMap,
    k: int,
    constraints: SectorConstraints,
    weighting: str = "equal",
) -> Selection:
    """Pick exactly K tickers under the three-phase sector rules.

    ``weighting`` is ``equal`` (1/K each) or ``frequency`` (proportional to
    the selected assets' frequencies; falls back to equal with a warning if
    any selected frequency is non-positive).
    """
    tickers = list(tickers)
    f = _freq_array(freq)
    n = len(tickers)
    if n != f.size:
        raise ValueError("tickers and frequencies must be equally long")
    if not (isinstance(k, (int, np.integer)) and k >= 1):
        raise ConfigError(f"K must be a positive integer, got {k!r}")
    if k > n:
        raise InfeasibleError(f"cannot select K={k} assets from a universe of {n}")
    if weighting not in ("equal", "frequency"):
        raise ConfigError(f"weighting must be 'equal' or 'frequency', got {weighting!r}")
    sectors.require_coverage(tickers)

    ranked = rank_by_frequency(tickers, f)
    sector_of = {t: sectors.sector_of(t) for t in tickers}
    present = {sector_of[t] for t in tickers}
    if len(present) < constraints.min_sectors:
        warnings.warn(
            f"universe has {len(present)} sectors, fewer than min_sectors="
            f"{constraints.min_sectors}; proceeding with all available",
            UserWarning,
            stacklevel=2,
        )
    seed_target = min(constraints.min_sectors, len(present), k)

    picked: list[str] = []
    picked_set: set = set()
    count_per_sector: dict = {}

    # Phase 1: first appearance of each sector in the ranked list equals
    # "descending best frequency" sector order
    seen_sectors: set = set()
    for t in ranked:
        if len(seen_sectors) >= seed_target or len(picked) >= k:
            break
        s = sector_of[t]
        if s in seen_sectors:
            continue
        seen_sectors.add(s)
        picked.append(t)
        picked_set.add(t)
        count_per_sector[s] = count_per_sector.get(s, 0) + 1

    # Phase 2: global rank fill under the per-sector cap
    cap = constraints.sector_cap(k)
    for t in ranked:
        if len(picked) >= k:
            break
        if t in picked_set:
            continue
        s = sector_of[t]
        if count_per_sector.get(s, 0) >= cap:
            continue
        picked.append(t)
        picked_set.add(t)
        count_per_sector[s] = count_per_sector.get(s, 0) + 1

    # Phase 3: cap relaxed, never removing earlier picks
    phase3 = False
    if len(picked) < k:
        phase3 = True
        for t in ranked:
            if len(picked) >= k:
                break
            if t in picked_set:
                continue
            picked.append(t)
            picked_set.add(t)
            count_per_sector[sector_of[t]] = count_per_sector.get(sector_of[t], 0) + 1

    if weighting == "frequency":
        fsel = np.array([f[tickers.index(t)] for t in picked])
        if np.any(fsel <= 0):
            warnings.warn(
                "frequency weighting needs strictly positive frequencies; "
                "falling back to equal weights",
                UserWarning,
                stacklevel=2,
            )
            w = equal_weights(k)
        else:
            w = fsel / fsel.sum()
    else:
        w = equal_weights(k)
    return Selection(tickers=tuple(picked), weights=w, phase3_relaxed=phase3)


def sector_counts(selection: Selection, sectors: SectorMap) -> dict:
    """Number of selected assets per sector, sorted by sector name."""
    counts: dict = {}
    for t in selection.tickers:
        s = sectors.sector_of(t)
        counts[s] = counts.get(s, 0) + 1
    return dict(sorted(counts.items()))
