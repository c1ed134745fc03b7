import math

import mpmath
import numpy as np
import pytest

from extsource.eigen import SpectralSample, eigenvalues
from extsource.errors import DomainError
from extsource.model import ModelConfig, assemble
from extsource.pastur import interval_mass
from extsource.rng import stream
from extsource.stats import (
    count_in_interval,
    deviation_record,
    empirical_stieltjes,
    mass_from_stieltjes,
    perturbation_derivative_check,
    perturbation_derivatives,
)


def test_count_examples():
    lam = SpectralSample(np.array([1.0, 2.0, 3.0]))
    assert count_in_interval(lam, 1.5, 3.0).count == 2
    assert count_in_interval(lam, 1.0, 3.0).count == 3
    assert count_in_interval(lam, 3.5, 4.0).count == 0
    assert count_in_interval(lam, 2.0, 2.0).count == 1
    with pytest.raises(DomainError):
        count_in_interval(lam, 2.0, 1.0)


def test_count_against_linear_scan():
    rng = np.random.default_rng(0)
    lam = np.sort(np.round(rng.normal(size=300), 2))  # rounding creates ties with endpoints
    for _ in range(10_000):
        lo, hi = np.sort(np.round(rng.uniform(-3, 3, 2), 2))
        expected = sum(1 for v in lam if lo <= v <= hi)
        assert count_in_interval(lam, lo, hi).count == expected


def test_deviation_record():
    lam = np.array([-2.5, -2.0, 2.0, 2.4])
    rec = deviation_record(lam, 1.9, 2.5, 2.0)
    assert rec.interval.count == 2
    assert rec.expected == pytest.approx(4 * interval_mass(1.9, 2.5, 2.0))
    assert rec.deviation_ratio == pytest.approx(abs(2 - rec.expected) / (4 * 0.6))
    rec2 = deviation_record(lam, 1.9, 2.5, 2.0, expected_mass=0.5)
    assert rec2.expected == 2.0 and rec2.deviation_ratio == 0.0


def test_stieltjes_examples():
    assert empirical_stieltjes(np.array([-1.0, 1.0]), 1j) == pytest.approx(0.5j, abs=1e-16)
    assert empirical_stieltjes(np.array([0.0]), 0.25j) == pytest.approx(4j, abs=1e-15)


def test_stieltjes_high_precision_oracle():
    lam = np.random.default_rng(4).normal(size=4)
    z = 0.3 + 0.7j
    with mpmath.workdps(50):
        ref = mpmath.fsum(1 / (mpmath.mpf(float(v)) - mpmath.mpc(z.real, z.imag)) for v in lam) / 4
    got = empirical_stieltjes(lam, z)
    assert abs(got - complex(ref)) <= 1e-14


def test_stieltjes_rejects_real_axis():
    with pytest.raises(DomainError):
        empirical_stieltjes(np.array([0.0]), 1.0)


def test_mass_single_atom_closed_form():
    eta = 1e-3
    exact = 2 / math.pi * math.atan(1 / eta)
    assert mass_from_stieltjes(np.array([0.0]), -1.0, 1.0, eta) == pytest.approx(exact, abs=1e-10)
    assert exact == pytest.approx(0.9994, abs=1e-4)


def test_mass_far_interval_is_small():
    eta = 0.05
    got = mass_from_stieltjes(np.array([0.0]), 10.0, 11.0, eta)
    assert 0 <= got <= eta
    exact = (math.atan(11 / eta) - math.atan(10 / eta)) / math.pi
    assert got == pytest.approx(exact, rel=1e-8)


def test_mass_tracks_count_in_bulk():
    W = assemble(ModelConfig(n=500, a=2.0, seed=5))
    lam = eigenvalues(W)
    lo, hi = 1.8, 2.4
    frac = count_in_interval(lam, lo, hi).count / 500
    assert abs(mass_from_stieltjes(lam, lo, hi) - frac) <= 0.02


def test_mass_preconditions():
    with pytest.raises(DomainError):
        mass_from_stieltjes(np.array([0.0]), 0.0, 0.1, eta=0.1)
    with pytest.raises(DomainError):
        mass_from_stieltjes(np.array([0.0]), 0.0, 1.0, eta=0.0)


def test_two_by_two_closed_form():
    t, c = 1.3, 0.4
    W = np.array([[t, c], [c, 0.0]], dtype=complex)
    # dlambda/dzeta = (dlambda/dc) / sqrt(2) along the real part of entry (0, 1)
    root = math.sqrt(t * t / 4 + c * c)
    exact = np.array([-c / root, c / root]) / math.sqrt(2)
    analytic, numeric = perturbation_derivatives(W, 0, 1, h=1e-5, part="re")
    np.testing.assert_allclose(analytic, exact, atol=1e-12)
    np.testing.assert_allclose(numeric, exact, atol=1e-6)


def test_diagonal_direction_on_diagonal_matrix():
    W = np.diag([-1.0, 0.5, 2.0, 3.0]).astype(complex)
    for i in range(4):
        analytic, numeric = perturbation_derivatives(W, i, i)
        expected = np.zeros(4)
        expected[i] = 0.5  # 1/sqrt(n)
        np.testing.assert_array_equal(analytic, expected)
        np.testing.assert_allclose(numeric, expected, atol=1e-9)


def test_random_n8_all_directions():
    W = assemble(ModelConfig(n=8, a=2.0, seed=1), stream(1, 0))
    worst = 0.0
    for i in range(8):
        for j in range(i, 8):
            for part in ("re",) if i == j else ("re", "im"):
                for k in range(8):
                    a, n = perturbation_derivative_check(W, k, i, j, 1e-5, part)
                    worst = max(worst, abs(a - n) / max(abs(a), 1e-4 / math.sqrt(8)))
    assert worst <= 1e-4


def test_perturbation_preconditions():
    with pytest.raises(DomainError):
        perturbation_derivatives(np.eye(3, dtype=complex), 0, 1)
    W = np.diag([1.0, 2.0]).astype(complex)
    with pytest.raises(DomainError):
        perturbation_derivatives(W, 1, 0)
    with pytest.raises(DomainError):
        perturbation_derivatives(W, 0, 0, part="im")
    with pytest.raises(DomainError):
        perturbation_derivatives(W, 0, 1, part="abs")


def test_partition_counts_sum_to_n():
    lam = eigenvalues(assemble(ModelConfig(n=60, a=2.0, seed=2))).eigenvalues
    cuts = np.linspace(lam[0], lam[-1], 13)
    # adjacent closed intervals share endpoints; nudge interior cuts off the spectrum
    cuts[1:-1] += 1e-9
    total = count_in_interval(lam, cuts[0], cuts[1]).count
    total += sum(count_in_interval(lam, np.nextafter(lo, np.inf), hi).count
                 for lo, hi in zip(cuts[1:-1], cuts[2:]))
    assert total == 60


def test_stieltjes_sum_rule():
    # s_n(i*eta) * (-i*eta) = 1 - i*mean(lambda)/eta + O(eta^-2): the 1e-9 level at
    # eta = 1e6 needs a traceless spectrum, otherwise the first-order term dominates
    lam = eigenvalues(assemble(ModelConfig(n=40, a=2.0, seed=2))).eigenvalues
    z = 1e6j
    centred = lam - lam.mean()
    assert abs(empirical_stieltjes(centred, z) * (-z) - 1) <= 1e-9
    first_order = abs(lam.mean()) / z.imag + np.mean(lam ** 2) / z.imag ** 2
    assert abs(empirical_stieltjes(lam, z) * (-z) - 1) <= 1.01 * first_order


def test_mass_converges_to_count_as_eta_shrinks():
    lam = eigenvalues(assemble(ModelConfig(n=200, a=2.0, seed=6))).eigenvalues
    lo, hi = 1.5, 2.5
    # keep the endpoints away from eigenvalues
    assert np.min(np.abs(lam - lo)) > 1e-3 and np.min(np.abs(lam - hi)) > 1e-3
    frac = count_in_interval(lam, lo, hi).count / 200
    errors = [abs(mass_from_stieltjes(lam, lo, hi, eta) - frac) for eta in (0.1, 0.01, 0.001)]
    assert errors[0] > errors[1] > errors[2]
