"""Empirical spectral statistics of a sampled matrix."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .eigen import SpectralSample, eigen_full, eigenvalues
from .errors import DomainError
from .freeconv import StieltjesQuery
from .pastur import interval_mass

__all__ = [
    "IntervalCount",
    "DeviationRecord",
    "count_in_interval",
    "deviation_record",
    "empirical_stieltjes",
    "mass_from_stieltjes",
    "perturbation_derivatives",
    "perturbation_derivative_check",
]


@dataclass(frozen=True)
class IntervalCount:
    """Number of eigenvalues in the closed interval ``[lo, hi]``."""

    lo: float
    hi: float
    count: int

    @property
    def width(self) -> float:
        return self.hi - self.lo


@dataclass(frozen=True)
class DeviationRecord:
    """Observed count against ``n`` times the limiting mass of the interval.

    ``deviation_ratio = |count - expected| / (n * width)``.
    """

    interval: IntervalCount
    expected: float
    deviation_ratio: float


def _values(sample) -> np.ndarray:
    if isinstance(sample, SpectralSample):
        return sample.eigenvalues
    return np.asarray(sample, dtype=float)


def _check_interval(lo: float, hi: float):
    if not (math.isfinite(lo) and math.isfinite(hi)):
        raise DomainError(f"interval endpoints must be finite, got [{lo}, {hi}]")
    if hi < lo:
        raise DomainError(f"inverted interval [{lo}, {hi}]")


def count_in_interval(sample, lo: float, hi: float) -> IntervalCount:
    """Exact eigenvalue count in ``[lo, hi]`` (both ends inclusive).

    ``sample`` must be sorted ascending.
    """
    _check_interval(lo, hi)
    lam = _values(sample)
    count = int(np.searchsorted(lam, hi, side="right") - np.searchsorted(lam, lo, side="left"))
    return IntervalCount(float(lo), float(hi), count)


def deviation_record(sample, lo: float, hi: float, a, expected_mass: float | None = None) -> DeviationRecord:
    """Compare the count in ``[lo, hi]`` with the limiting prediction.

    ``expected_mass`` may be passed to reuse a precomputed
    :func:`~extsource.pastur.interval_mass`.
    """
    lam = _values(sample)
    n = lam.shape[0]
    ic = count_in_interval(lam, lo, hi)
    if ic.width <= 0:
        raise DomainError("deviation ratio needs an interval of positive width")
    mass = interval_mass(lo, hi, a) if expected_mass is None else expected_mass
    expected = n * mass
    return DeviationRecord(ic, expected, abs(ic.count - expected) / (n * ic.width))


def empirical_stieltjes(sample, z) -> complex:
    """``s_n(z) = mean(1 / (lambda_k - z))``."""
    q = StieltjesQuery.of(z)
    lam = _values(sample)
    return complex(np.mean(1.0 / (lam - q.z)))


_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(8)


def mass_from_stieltjes(sample, lo: float, hi: float, eta: float | None = None) -> float:
    """Smoothed count ``(1/pi) * integral_I Im s_n(x + i*eta) dx``.

    Equals the fraction of eigenvalues in ``I`` up to a Cauchy smoothing error
    of order ``eta / |I|`` (times a log). ``eta`` defaults to ``|I| / 20``.
    The integral is computed by composite 8-point Gauss-Legendre on panels
    no wider than ``eta / 2``.
    """
    _check_interval(lo, hi)
    width = hi - lo
    if eta is None:
        eta = width / 20.0
    if not eta > 0:
        raise DomainError(f"eta must be positive, got {eta!r}")
    if width < 2.0 * eta:
        raise DomainError(f"need |I| >= 2*eta, got |I|={width}, eta={eta}")
    lam = _values(sample)
    panels = int(math.ceil(width / (0.5 * eta)))
    edges = np.linspace(lo, hi, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[:-1] + edges[1:])
    xs = (mid[:, None] + half[:, None] * _GL_NODES[None, :]).ravel()
    ws = (half[:, None] * _GL_WEIGHTS[None, :]).ravel()
    total = 0.0
    chunk = max(1, 2_000_000 // max(lam.shape[0], 1))
    for start in range(0, xs.shape[0], chunk):
        x = xs[start:start + chunk]
        # Im 1/(lam - x - i eta) = eta / ((lam - x)^2 + eta^2)
        dens = eta / ((lam[None, :] - x[:, None]) ** 2 + eta * eta)
        total += float(ws[start:start + chunk] @ dens.mean(axis=1))
    return total / math.pi


def _entry_direction(n: int, i: int, j: int, part: str) -> np.ndarray:
    """Change of ``W`` per unit change of ``Re/Im zeta_ij`` (the ``1/sqrt(n)`` included)."""
    E = np.zeros((n, n), dtype=np.complex128)
    scale = 1.0 / math.sqrt(n)
    if i == j:
        if part != "re":
            raise DomainError("diagonal entries are real; only part='re' applies")
        E[i, i] = scale
    elif part == "re":
        E[i, j] = E[j, i] = scale
    elif part == "im":
        E[i, j] = 1j * scale
        E[j, i] = -1j * scale
    else:
        raise DomainError(f"part must be 're' or 'im', got {part!r}")
    return E


def perturbation_derivatives(W, i: int, j: int, h: float = 1e-5, part: str = "re"):
    """First-order eigenvalue derivatives along one entry of ``X``.

    Returns ``(analytic, numeric)``, arrays over all ``k``: ``analytic`` from
    the eigenvectors of ``W`` (``2 Re(conj(u_k(i)) u_k(j)) / sqrt(n)``,
    ``2 Im(conj(u_k(j)) u_k(i)) / sqrt(n)`` or ``|u_k(i)|^2 / sqrt(n)``),
    ``numeric`` as a central difference with step ``h`` in ``zeta_ij``.

    Raises
    ------
    DomainError
        If ``i > j``, or if two eigenvalues of ``W`` are closer than ``10*h``.
    """
    W = np.asarray(W, dtype=np.complex128)
    n = W.shape[0]
    if not (0 <= i <= j < n):
        raise DomainError(f"need 0 <= i <= j < n, got i={i}, j={j}, n={n}")
    if not h > 0:
        raise DomainError(f"step must be positive, got {h!r}")
    sample = eigen_full(W)
    gaps = np.diff(sample.eigenvalues)
    if gaps.size and gaps.min() <= 10.0 * h:
        raise DomainError(f"spectrum not simple at step {h}: minimum gap {gaps.min():.3e}")
    U = sample.eigenvectors
    root_n = math.sqrt(n)
    if i == j:
        analytic = np.abs(U[i]) ** 2 / root_n
    elif part == "re":
        analytic = 2.0 * (U[i].conj() * U[j]).real / root_n
    else:
        analytic = 2.0 * (U[j].conj() * U[i]).imag / root_n
    E = _entry_direction(n, i, j, part)
    plus = eigenvalues(W + h * E).eigenvalues
    minus = eigenvalues(W - h * E).eigenvalues
    return analytic, (plus - minus) / (2.0 * h)


def perturbation_derivative_check(W, k: int, i: int, j: int, h: float = 1e-5, part: str = "re"):
    """Analytic and finite-difference derivative of ``lambda_k`` along ``zeta_ij``."""
    analytic, numeric = perturbation_derivatives(W, i, j, h, part)
    return float(analytic[k]), float(numeric[k])
