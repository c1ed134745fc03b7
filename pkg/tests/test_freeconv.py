import math

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings, strategies as st

from extsource import freeconv
from extsource.errors import ConvergenceError, DomainError
from extsource.freeconv import (
    StieltjesQuery,
    cubic_variable,
    density_from_stieltjes,
    limiting_stieltjes,
    resolvent,
    semicircle_stieltjes,
)
from extsource.pastur import band_midpoint, density, support_edges

from oracles import stieltjes_quad


def cubic_residual(u, z, a):
    return abs(u ** 3 - z * u ** 2 - (a * a - 1) * u + z * a * a)


def test_substitution_reproduces_cubic():
    # g = (1/(u-a) + 1/(u+a))/2 with u = z - g, cleared of denominators, is the cubic in u
    u, z, a = sp.symbols("u z a")
    g = z - u
    fixed_point = sp.together(g - (1 / (u - a) + 1 / (u + a)) / 2)
    numerator = sp.expand(sp.numer(fixed_point))
    cubic = u ** 3 - z * u ** 2 - (a ** 2 - 1) * u + z * a ** 2
    assert sp.simplify(numerator + cubic) == 0 or sp.simplify(numerator - cubic) == 0


@pytest.mark.parametrize("a", [0.0, 0.5, 2.0, 3.0])
def test_large_z_asymptotics(a):
    z = 1e6j
    assert abs(limiting_stieltjes(z, a) - (-1 / z)) <= 1e-9 * abs(1 / z)


def test_semicircle_value():
    s = limiting_stieltjes(2j, 0.0)
    assert s == pytest.approx(1j * (math.sqrt(2) - 1), abs=1e-12)
    assert semicircle_stieltjes(2j) == pytest.approx(1j * (math.sqrt(2) - 1), abs=1e-15)


@settings(max_examples=60, deadline=None)
@given(st.floats(-4, 4), st.floats(0.01, 3))
def test_semicircle_closed_form_agrees(x, eta):
    z = complex(x, eta)
    assert limiting_stieltjes(z, 0.0) == pytest.approx(semicircle_stieltjes(z), abs=1e-10)


def test_cubic_residual_near_gap():
    z = 0.1 + 0.01j
    u = cubic_variable(z, 2.0)
    assert cubic_residual(u, z, 2.0) <= 1e-8


@pytest.mark.parametrize("z", [2.1 + 0.5j, -1.0 + 0.2j, 0.3 + 1.0j, 3.0 + 0.05j])
def test_matches_quadrature_oracle(z):
    assert limiting_stieltjes(z, 2.0) == pytest.approx(stieltjes_quad(z, 2.0), abs=1e-8)


@settings(max_examples=100, deadline=None)
@given(st.floats(-6, 6), st.floats(1e-3, 5), st.sampled_from([1.5, 2.0, 3.0]))
def test_herglotz_properties(x, eta, a):
    s = limiting_stieltjes(complex(x, eta), a)
    assert s.imag > 0
    assert abs(s) <= 1 / eta + 1e-12
    # the reflection x -> -x conjugates and negates s
    s_ref = limiting_stieltjes(complex(-x, eta), a)
    assert s_ref == pytest.approx(-s.conjugate(), abs=1e-10)


def test_resolvent_sign_convention():
    g = resolvent(1.0 + 1.0j, 2.0)
    assert g.imag < 0
    assert limiting_stieltjes(1.0 + 1.0j, 2.0) == -g


def test_boundary_density_in_gap_and_semicircle():
    assert abs(density_from_stieltjes(0.0, 2.0)) <= 1e-6
    assert density_from_stieltjes(0.0, 0.0) == pytest.approx(1 / math.pi, abs=1e-6)


@pytest.mark.parametrize("a", [1.5, 2.0, 3.0])
def test_boundary_density_at_midpoint(a):
    x = band_midpoint(a)
    assert density_from_stieltjes(x, a) == pytest.approx(density(x, a), abs=1e-6)


def test_boundary_density_reports_edge():
    z1 = support_edges(2.0).z1
    with pytest.raises(ConvergenceError) as info:
        density_from_stieltjes(z1, 2.0, eta_sequence=(1e-4, 1e-6), tol=1e-6)
    assert info.value.residual >= 1e-6


def test_bad_eta_sequences():
    with pytest.raises(DomainError):
        density_from_stieltjes(1.0, 2.0, eta_sequence=(1e-6,))
    with pytest.raises(DomainError):
        density_from_stieltjes(1.0, 2.0, eta_sequence=(1e-7, 1e-6))
    with pytest.raises(DomainError):
        density_from_stieltjes(1.0, 2.0, eta_sequence=(1e-8, 1e-10))


def test_query_validation():
    with pytest.raises(DomainError):
        StieltjesQuery(0.0, 0.0)
    with pytest.raises(DomainError):
        StieltjesQuery(math.nan, 1.0)
    assert StieltjesQuery.of(1 + 2j).z == 1 + 2j


def test_budget_exhaustion_is_reported(monkeypatch):
    monkeypatch.setattr(freeconv, "MAX_ITERATIONS", 3)
    with pytest.raises(ConvergenceError) as info:
        resolvent(2.0 + 1e-3j, 2.0)
    assert np.isfinite(info.value.residual)
    assert info.value.residual > 1e-12


@pytest.mark.parametrize("Y", [100.0, 1e3, 1e5])
@pytest.mark.parametrize("a", [0.0, 2.0, 3.0])
def test_tail_second_moment_bound(Y, a):
    assert abs(limiting_stieltjes(1j * Y, a) - 1j / Y) <= 2 / Y ** 2
