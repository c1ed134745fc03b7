"""Stieltjes transform of the free convolution semicircle + (delta_a + delta_-a)/2.

Convention: ``s(z) = integral dmu(x) / (x - z)``, so ``Im s > 0`` on the upper
half-plane. The solver works with the resolvent ``g = -s``, which satisfies

    g = (1/(z - g - a) + 1/(z - g + a)) / 2,   Im g < 0.

Substituting ``u = z - g`` turns this into ``u^3 - z u^2 - (a^2 - 1) u + z a^2 = 0``,
the cubic of :mod:`extsource.pastur` at complex argument; on the real axis
``Im u = Im s`` so both routes give the same density.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Sequence

from .errors import ConvergenceError, DomainError
from .pastur import as_source

__all__ = [
    "ETA_FLOOR",
    "StieltjesQuery",
    "limiting_stieltjes",
    "resolvent",
    "cubic_variable",
    "density_from_stieltjes",
    "semicircle_stieltjes",
]

ETA_FLOOR = 1e-12
MAX_ITERATIONS = 10_000
DAMPING = 0.5
CONTINUATION_START = 10.0


@dataclass(frozen=True)
class StieltjesQuery:
    """A point ``z = x + i*eta`` of the open upper half-plane."""

    x: float
    eta: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.eta)):
            raise DomainError(f"non-finite query ({self.x}, {self.eta})")
        if self.eta < ETA_FLOOR:
            raise DomainError(f"eta must be >= {ETA_FLOOR:g}, got {self.eta!r}")

    @property
    def z(self) -> complex:
        return complex(self.x, self.eta)

    @classmethod
    def of(cls, z) -> "StieltjesQuery":
        if isinstance(z, cls):
            return z
        z = complex(z)
        return cls(z.real, z.imag)


def _fixed_point_map(g: complex, z: complex, a: float) -> complex:
    u = z - g
    return 0.5 * (1.0 / (u - a) + 1.0 / (u + a))


def _newton_step(g: complex, z: complex, a: float) -> complex:
    u = z - g
    f = g - 0.5 * (1.0 / (u - a) + 1.0 / (u + a))
    df = 1.0 - 0.5 * (1.0 / (u - a) ** 2 + 1.0 / (u + a) ** 2)
    return g - f / df


class _Budget:
    def __init__(self, limit: int):
        self.left = limit

    def spend(self) -> bool:
        self.left -= 1
        return self.left >= 0


def _solve_level(g: complex, z: complex, a: float, budget: _Budget,
                 fp_steps: int = 200, newton_steps: int = 50) -> complex:
    for _ in range(fp_steps):
        if not budget.spend():
            return g
        new = (1.0 - DAMPING) * g + DAMPING * _fixed_point_map(g, z, a)
        step = abs(new - g)
        g = new
        if step <= 1e-13 * (1.0 + abs(g)):
            break
    res = abs(g - _fixed_point_map(g, z, a))
    for _ in range(newton_steps):
        if res <= 1e-14 or not budget.spend():
            break
        cand = _newton_step(g, z, a)
        cand_res = abs(cand - _fixed_point_map(cand, z, a)) if cand.imag < 0 else math.inf
        if cand_res < res:
            g, res = cand, cand_res
        else:
            # Newton left the lower half-plane or stalled; fall back to a damped step
            g = (1.0 - DAMPING) * g + DAMPING * _fixed_point_map(g, z, a)
            res = abs(g - _fixed_point_map(g, z, a))
    return g


def resolvent(z, a) -> complex:
    """Resolvent ``g(z) = integral dmu(x) / (z - x)`` of the limiting measure.

    Raises
    ------
    ConvergenceError
        If the iteration budget is exhausted before the residual reaches 1e-12.
    """
    q = StieltjesQuery.of(z)
    a = as_source(a).a
    etas = []
    eta = max(CONTINUATION_START, q.eta)
    while eta > q.eta:
        etas.append(eta)
        eta *= 0.5
    etas.append(q.eta)

    budget = _Budget(MAX_ITERATIONS)
    g = 1.0 / complex(q.x, etas[0])
    for eta in etas:
        g = _solve_level(g, complex(q.x, eta), a, budget)
    residual = abs(g - _fixed_point_map(g, q.z, a))
    if residual > 1e-12 or not g.imag < 0:
        raise ConvergenceError(f"free convolution solver failed at z={q.z}", residual)
    return g


def limiting_stieltjes(z, a) -> complex:
    """Stieltjes transform ``s(z) = -g(z)`` of the limiting spectral measure."""
    return -resolvent(z, a)


def cubic_variable(z, a) -> complex:
    """``u = z - g(z)``, the root of the complex cubic selected by the fixed point."""
    q = StieltjesQuery.of(z)
    return q.z - resolvent(q.z, a)


def density_from_stieltjes(x: float, a, eta_sequence: Sequence[float] = (1e-6, 1e-7, 1e-8),
                           tol: float = 1e-6) -> float:
    """Density at ``x`` from the boundary value ``Im s(x + i*eta) / pi``.

    Parameters
    ----------
    x : float
        Real abscissa.
    a : float or SourceParameter
        External source strength.
    eta_sequence : sequence of float
        Strictly decreasing heights; the last one must be at least 1e-9.
    tol : float
        Largest admissible change between the last two heights.

    Raises
    ------
    ConvergenceError
        If the last two heights disagree by more than ``tol``, which
        typically means ``x`` sits close to a support edge.
    """
    etas = [float(e) for e in eta_sequence]
    if len(etas) < 2:
        raise DomainError("need at least two heights to check convergence")
    if any(e2 >= e1 for e1, e2 in zip(etas, etas[1:])):
        raise DomainError(f"eta_sequence must be strictly decreasing: {etas}")
    if etas[-1] < 1e-9:
        raise DomainError(f"last height must be >= 1e-9, got {etas[-1]!r}")
    values = [limiting_stieltjes(complex(x, e), a).imag / math.pi for e in etas]
    change = abs(values[-1] - values[-2])
    if change >= tol:
        raise ConvergenceError(
            f"boundary value at x={x} did not settle (near a support edge?)", change)
    return values[-1]


def semicircle_stieltjes(z) -> complex:
    """Closed-form Stieltjes transform of the standard semicircle on [-2, 2]."""
    z = complex(z)
    # product of principal roots selects the branch decaying like -1/z
    return (-z + cmath.sqrt(z - 2.0) * cmath.sqrt(z + 2.0)) / 2.0
