"""Wigner matrices with a two-valued diagonal external source.

``W = X / sqrt(n) + A`` where ``X`` is Hermitian with iid upper-triangular
entries ``zeta = xi + i*tau`` (``Var xi = Var tau = 1/2``), iid real diagonal
entries of variance 1, and ``A = diag(a, ..., a, -a, ..., -a)``.

Matrices are plain complex ``numpy`` arrays that are Hermitian bit for bit:
the lower triangle is written as the conjugate of the upper one.
"""

from __future__ import annotations

import csv
import enum
import functools
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DomainError
from .pastur import SourceParameter, as_source
from .rng import MAX_SEED, stream

__all__ = [
    "AtomKind",
    "AtomDistribution",
    "ModelConfig",
    "sample_wigner",
    "truncate_entries",
    "truncation_threshold",
    "source_diagonal",
    "assemble",
    "dump_upper_triangle",
]

_SQRT_HALF = math.sqrt(0.5)


class AtomKind(enum.Enum):
    GAUSSIAN = "gaussian"
    RADEMACHER = "rademacher"
    UNIFORM = "uniform"
    ZERO = "zero"  # test hook: X == 0, so W == A


@dataclass(frozen=True)
class AtomDistribution:
    """Entry law of the Wigner matrix.

    Off-diagonal real and imaginary parts have mean 0 and variance 1/2;
    diagonal entries have mean 0 and variance 1. Only ``GAUSSIAN`` is known
    to satisfy both the Poincare and log-Sobolev inequalities; for the other
    kinds those properties are assumed, never checked.
    """

    kind: AtomKind = AtomKind.GAUSSIAN

    @classmethod
    def parse(cls, name: str) -> "AtomDistribution":
        try:
            return cls(AtomKind(name.strip().lower()))
        except ValueError:
            choices = ", ".join(k.value for k in AtomKind)
            raise DomainError(f"unknown atom distribution {name!r} (choose from {choices})") from None

    @property
    def bound(self) -> float:
        """Almost-sure bound ``K`` on ``|zeta_ij|`` (``inf`` for Gaussian)."""
        return {
            AtomKind.GAUSSIAN: math.inf,
            AtomKind.RADEMACHER: 1.0,
            AtomKind.UNIFORM: math.sqrt(3.0),
            AtomKind.ZERO: 0.0,
        }[self.kind]

    def real_parts(self, rng: np.random.Generator, size: int) -> np.ndarray:
        """``size`` iid draws with mean 0 and variance 1/2."""
        kind = self.kind
        if kind is AtomKind.GAUSSIAN:
            return _SQRT_HALF * rng.standard_normal(size)
        if kind is AtomKind.RADEMACHER:
            return _SQRT_HALF * (2.0 * rng.integers(0, 2, size) - 1.0)
        if kind is AtomKind.UNIFORM:
            return rng.uniform(-math.sqrt(1.5), math.sqrt(1.5), size)
        return np.zeros(size)

    def diagonal(self, rng: np.random.Generator, size: int) -> np.ndarray:
        """``size`` iid draws with mean 0 and variance 1."""
        return math.sqrt(2.0) * self.real_parts(rng, size)


@dataclass(frozen=True)
class ModelConfig:
    """Size, source strength, entry law and seed of one model.

    ``truncation_exponent`` sets the entry cutoff ``log(n) ** exponent``;
    ``None`` disables truncation. The cutoff is skipped for ``n <= 2``, where
    ``log(n) < 1`` would make it shrink with the exponent.
    """

    n: int
    a: SourceParameter
    atoms: AtomDistribution = field(default_factory=AtomDistribution)
    seed: int = 0
    truncation_exponent: float | None = 5.0

    def __post_init__(self):
        if isinstance(self.n, bool) or int(self.n) != self.n:
            raise DomainError(f"n must be an integer, got {self.n!r}")
        if self.n < 2 or self.n % 2:
            raise DomainError(f"n must be even and >= 2 (equal +a/-a multiplicities), got {self.n}")
        object.__setattr__(self, "a", as_source(self.a))
        if not 0 <= self.seed <= MAX_SEED:
            raise DomainError(f"seed must be an unsigned 64-bit integer, got {self.seed}")


@functools.lru_cache(maxsize=8)
def _upper_indices(n: int):
    return np.triu_indices(n, 1)


def sample_wigner(n: int, atoms: AtomDistribution, rng: np.random.Generator) -> np.ndarray:
    """Draw an ``n x n`` Wigner matrix.

    Draw order is fixed (upper real parts, upper imaginary parts, diagonal)
    so the result is a pure function of the generator state.
    """
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    iu = _upper_indices(n)
    m = iu[0].size
    upper = atoms.real_parts(rng, m) + 1j * atoms.real_parts(rng, m)
    X = np.zeros((n, n), dtype=np.complex128)
    X[iu] = upper
    X += X.conj().T
    X[np.diag_indices(n)] = atoms.diagonal(rng, n)
    return X


def truncation_threshold(n: int, exponent: float = 5.0) -> float:
    """Entry cutoff ``log(n) ** exponent``."""
    return math.log(n) ** exponent


def truncate_entries(X: np.ndarray, threshold: float) -> tuple[np.ndarray, int]:
    """Zero every entry with modulus above ``threshold``.

    Returns the truncated matrix and the number of distinct (upper triangle,
    diagonal included) entries that were zeroed.
    """
    if not threshold > 0:
        raise DomainError(f"threshold must be positive, got {threshold!r}")
    mask = np.abs(X) > threshold
    count = int(np.count_nonzero(np.triu(mask)))
    if count == 0:
        return X.copy(), 0
    return np.where(mask, 0.0, X), count


def source_diagonal(n: int, a) -> np.ndarray:
    """Diagonal of ``A``: first ``n/2`` entries ``+a``, the rest ``-a``."""
    if n % 2:
        raise DomainError(f"n must be even, got {n}")
    a = as_source(a).a
    return np.concatenate([np.full(n // 2, a), np.full(n // 2, -a)])


def assemble(config: ModelConfig, rng: np.random.Generator | None = None) -> np.ndarray:
    """Sample ``W = X / sqrt(n) + A`` for ``config``.

    Without an explicit generator, stream 0 of ``config.seed`` is used.
    """
    n = config.n
    if rng is None:
        rng = stream(config.seed, 0)
    X = sample_wigner(n, config.atoms, rng)
    if config.truncation_exponent is not None and n > 2:
        X, _ = truncate_entries(X, truncation_threshold(n, config.truncation_exponent))
    W = X / math.sqrt(n)
    W[np.diag_indices(n)] += source_diagonal(n, config.a)
    return W


def dump_upper_triangle(H: np.ndarray, path) -> None:
    """Write the upper triangle (diagonal included) as ``i,j,re,im`` rows."""
    n = H.shape[0]
    with Path(path).open("w", newline="") as fh:
        out = csv.writer(fh, lineterminator="\n")
        out.writerow(["i", "j", "re", "im"])
        for i in range(n):
            for j in range(i, n):
                out.writerow([i, j, repr(float(H[i, j].real)), repr(float(H[i, j].imag))])
