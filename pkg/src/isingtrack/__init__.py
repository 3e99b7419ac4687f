"""Cardinality-constrained index tracking by Gibbs sampling an Ising model.

Asset desirability enters as per-spin biases, pairwise correlation enters as
antiferromagnetic couplings, and annealed block Gibbs sampling turns the
resulting Boltzmann distribution into selection frequencies from which a
sector-balanced portfolio is drawn.  Baseline selectors and a walk-forward
backtester with Diebold-Mariano comparisons round out the pipeline.
"""

__version__ = "0.1.0"

from .errors import (
    ConfigError,
    CoverageError,
    DataError,
    DegenerateDataError,
    InfeasibleError,
    InsufficientDataError,
    IsingTrackError,
    LookAheadError,
    ParseError,
    SchemaError,
)

__all__ = [
    "__version__",
    "IsingTrackError",
    "ConfigError",
    "InfeasibleError",
    "DataError",
    "ParseError",
    "SchemaError",
    "CoverageError",
    "InsufficientDataError",
    "DegenerateDataError",
    "LookAheadError",
]
