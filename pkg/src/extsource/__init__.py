"""Limiting spectra and Monte Carlo checks for Wigner matrices with a two-valued external source."""

from .eigen import SpectralSample, eigen_full, eigenvalues, tridiagonalize
from .errors import ConfigError, ConvergenceError, DomainError, ExtSourceError, RegimeError
from .freeconv import (
    StieltjesQuery,
    cubic_variable,
    density_from_stieltjes,
    limiting_stieltjes,
    resolvent,
    semicircle_stieltjes,
)
from .model import AtomDistribution, AtomKind, ModelConfig, assemble, sample_wigner, truncate_entries
from .pastur import (
    CubicRoots,
    Regime,
    RootClass,
    SourceParameter,
    SupportEdges,
    density,
    interval_mass,
    solve_cubic,
    support_edges,
)
from .rng import stream
from .stats import (
    DeviationRecord,
    IntervalCount,
    count_in_interval,
    empirical_stieltjes,
    mass_from_stieltjes,
    perturbation_derivative_check,
)

__version__ = "0.1.0"
