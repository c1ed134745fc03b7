"""Limiting spectral density of the two-point external source model.

The density of ``X/sqrt(n) + diag(+a, ..., -a)`` in the large-n limit is read
off the cubic

    s**3 - x*s**2 - (a**2 - 1)*s + x*a**2 = 0,

as ``rho(x) = |Im s(x)| / pi`` where ``s`` is a member of the complex
conjugate pair of roots (``rho = 0`` where all three roots are real).
"""

from __future__ import annotations

import enum
import functools
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, RegimeError

__all__ = [
    "Regime",
    "SourceParameter",
    "RootClass",
    "CubicRoots",
    "SupportEdges",
    "as_source",
    "cubic_coefficients",
    "solve_cubic",
    "discriminant",
    "density",
    "density_grid",
    "support_edges",
    "band_midpoint",
    "interval_mass",
]


class Regime(enum.Enum):
    SUPERCRITICAL = "supercritical"  # a > 1, two bands
    DEGENERATE = "degenerate"  # a == 0, semicircle
    OTHER = "other"  # 0 < a <= 1, outside the two-band hypotheses


@dataclass(frozen=True)
class SourceParameter:
    """External source strength ``a >= 0``."""

    a: float

    def __post_init__(self):
        if not math.isfinite(self.a) or self.a < 0:
            raise DomainError(f"source strength must be finite and >= 0, got {self.a!r}")

    @property
    def regime(self) -> Regime:
        if self.a == 0.0:
            return Regime.DEGENERATE
        if self.a > 1.0:
            return Regime.SUPERCRITICAL
        return Regime.OTHER


def as_source(a) -> SourceParameter:
    if isinstance(a, SourceParameter):
        return a
    return SourceParameter(float(a))


class RootClass(enum.Enum):
    THREE_REAL = "three_real"
    ONE_REAL_ONE_PAIR = "one_real_one_pair"


@dataclass(frozen=True)
class CubicRoots:
    """All three roots of the cubic at one abscissa.

    For ``ONE_REAL_ONE_PAIR`` the order is (real, upper, lower) with
    ``roots[2] == roots[1].conjugate()`` exactly; for ``THREE_REAL`` the roots
    are ascending.
    """

    roots: tuple[complex, complex, complex]
    residuals: tuple[float, float, float]
    classification: RootClass

    @property
    def pair(self) -> complex | None:
        """Root of the conjugate pair with positive imaginary part."""
        if self.classification is RootClass.ONE_REAL_ONE_PAIR:
            return self.roots[1]
        return None


@dataclass(frozen=True)
class SupportEdges:
    """Positive band edges; the support is ``(-z1, -z2) U (z2, z1)``."""

    z2: float
    z1: float

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.z2 + self.z1)


def _check_finite(x: float) -> float:
    x = float(x)
    if not math.isfinite(x):
        raise DomainError(f"abscissa must be finite, got {x!r}")
    return x


def cubic_coefficients(x: complex, a: float) -> tuple[complex, complex, complex]:
    """Return ``(b, c, d)`` of the monic cubic ``s^3 + b s^2 + c s + d``."""
    return -x, 1.0 - a * a, x * a * a


def _poly(s, b, c, d):
    return ((s + b) * s + c) * s + d


def _dpoly(s, b, c):
    return (3.0 * s + 2.0 * b) * s + c


def _polish(s, b, c, d):
    """One Newton step, kept only when it lowers the residual."""
    ds = _dpoly(s, b, c)
    if ds == 0:
        return s
    t = s - _poly(s, b, c, d) / ds
    if abs(_poly(t, b, c, d)) < abs(_poly(s, b, c, d)):
        return t
    return s


def solve_cubic(x: float, a) -> CubicRoots:
    """Roots of ``s^3 - x s^2 - (a^2 - 1) s + x a^2`` at real ``x``.

    Closed form on the depressed cubic (trigonometric branch when all roots
    are real, Cardano otherwise) followed by one Newton polish per root.
    """
    x = _check_finite(x)
    a = as_source(a).a
    b, c, d = cubic_coefficients(x, a)
    shift = -b / 3.0
    p = c - b * b / 3.0
    q = 2.0 * b ** 3 / 27.0 - b * c / 3.0 + d
    disc4 = -_discriminant_poly(x, a)  # = 4p^3 + 27q^2; > 0: one real root and a pair

    if disc4 > 0.0:
        sq = math.sqrt(disc4 / 108.0)
        w = -0.5 * q - sq if q >= 0.0 else -0.5 * q + sq
        u = float(np.cbrt(w))
        v = -p / (3.0 * u) if u != 0.0 else 0.0
        real = _polish(u + v + shift, b, c, d)
        upper = complex(-0.5 * (u + v) + shift, 0.5 * math.sqrt(3.0) * abs(u - v))
        upper = _polish(upper, b, c, d)
        if upper.imag < 0:
            upper = upper.conjugate()
        roots = (complex(real), upper, upper.conjugate())
        cls = RootClass.ONE_REAL_ONE_PAIR
    else:
        if p == 0.0:
            ts = [0.0, 0.0, 0.0]
        else:
            r = 2.0 * math.sqrt(-p / 3.0)
            arg = 1.5 * q / p * math.sqrt(-3.0 / p)
            theta = math.acos(min(1.0, max(-1.0, arg)))
            ts = [r * math.cos(theta / 3.0 - 2.0 * math.pi * k / 3.0) for k in range(3)]
        reals = sorted(_polish(t + shift, b, c, d) for t in ts)
        roots = tuple(complex(s) for s in reals)
        cls = RootClass.THREE_REAL

    residuals = tuple(abs(_poly(s, b, c, d)) for s in roots)
    return CubicRoots(roots=roots, residuals=residuals, classification=cls)


def _discriminant_poly(x: float, a: float) -> float:
    # -(4p^3 + 27q^2) expanded in x; a quadratic in x^2 with exact zeros at the
    # semicircle edges, unlike the cancellation-prone form in p and q
    a2 = a * a
    t = x * x
    return (4.0 * a2 * t + (1.0 - 20.0 * a2 - 8.0 * a2 * a2)) * t - 4.0 * (1.0 - a2) ** 3


def discriminant(x: float, a) -> float:
    """Cubic discriminant at ``x``; positive iff all three roots are real."""
    return _discriminant_poly(_check_finite(x), as_source(a).a)


def density(x: float, a) -> float:
    """Limiting density ``|Im s| / pi`` at ``x`` (zero off the support)."""
    roots = solve_cubic(x, a)
    if roots.classification is RootClass.THREE_REAL:
        return 0.0
    return abs(roots.pair.imag) / math.pi


def density_grid(xs, a) -> np.ndarray:
    a = as_source(a)
    return np.array([density(x, a) for x in np.asarray(xs, dtype=float).ravel()])


@functools.lru_cache(maxsize=64)
def _discriminant_roots(a: float, scan_points: int = 4000) -> tuple[float, ...]:
    """Sign changes of the discriminant on ``(0, a + 3)``, bisected to machine precision."""
    xs = np.linspace(0.0, a + 3.0, scan_points + 1)[1:]
    signs = [discriminant(x, a) > 0.0 for x in xs]
    edges = []
    for k in range(len(xs) - 1):
        if signs[k] == signs[k + 1]:
            continue
        lo, hi = float(xs[k]), float(xs[k + 1])
        lo_sign = signs[k]
        while True:
            mid = 0.5 * (lo + hi)
            if mid in (lo, hi):
                break
            if (discriminant(mid, a) > 0.0) == lo_sign:
                lo = mid
            else:
                hi = mid
        edges.append(0.5 * (lo + hi))
    return tuple(edges)


def support_edges(a) -> SupportEdges:
    """Locate the band edges ``0 < z2 < z1`` for ``a > 1``.

    ``a == 0`` returns the semicircle band ``(0, 2)``.

    Raises
    ------
    RegimeError
        If ``0 < a <= 1``.
    """
    src = as_source(a)
    if src.regime is Regime.OTHER:
        raise RegimeError(
            f"two-band support is only established for a > 1 (got a={src.a}); "
            "density() still works but no edges are reported"
        )
    if src.regime is Regime.DEGENERATE:
        return SupportEdges(0.0, 2.0)
    edges = _discriminant_roots(src.a)
    if len(edges) != 2:
        raise RuntimeError(f"expected two band edges for a={src.a}, found {edges}")
    return SupportEdges(z2=edges[0], z1=edges[1])


def band_midpoint(a) -> float:
    """Midpoint of the right band (or 0 for the semicircle)."""
    src = as_source(a)
    if src.regime is Regime.DEGENERATE:
        return 0.0
    return support_edges(src).midpoint


def _adaptive_simpson(f, lo, hi, tol, max_depth=40):
    def simpson(fa, fm, fb, h):
        return h / 6.0 * (fa + 4.0 * fm + fb)

    def recurse(a, b, fa, fm, fb, whole, tol, depth):
        m = 0.5 * (a + b)
        lm, rm = 0.5 * (a + m), 0.5 * (m + b)
        flm, frm = f(lm), f(rm)
        left = simpson(fa, flm, fm, m - a)
        right = simpson(fm, frm, fb, b - m)
        err = left + right - whole
        if depth >= max_depth or abs(err) <= 15.0 * tol:
            return left + right + err / 15.0
        return (recurse(a, m, fa, flm, fm, left, 0.5 * tol, depth + 1)
                + recurse(m, b, fm, frm, fb, right, 0.5 * tol, depth + 1))

    fa, fb, fm = f(lo), f(hi), f(0.5 * (lo + hi))
    return recurse(lo, hi, fa, fm, fb, simpson(fa, fm, fb, hi - lo), tol, 0)


def interval_mass(lo: float, hi: float, a, tol: float = 1e-8) -> float:
    """Limiting mass of the closed interval ``[lo, hi]``.

    Adaptive Simpson with the density's square-root edges forced as panel
    boundaries.
    """
    lo, hi = _check_finite(lo), _check_finite(hi)
    if hi < lo:
        raise DomainError(f"inverted interval [{lo}, {hi}]")
    if hi == lo:
        return 0.0
    src = as_source(a)
    edges = _discriminant_roots(src.a)
    cuts = sorted({lo, hi, *(e for r in edges for e in (r, -r) if lo < e < hi)})
    panels = list(zip(cuts[:-1], cuts[1:]))
    f = lambda t: density(t, src)  # noqa: E731
    # each panel lies wholly inside or outside the support
    total = sum(_adaptive_simpson(f, p, q, tol / len(panels))
                for p, q in panels if f(0.5 * (p + q)) > 0.0)
    return min(1.0, max(0.0, total))
