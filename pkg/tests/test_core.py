import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ksbump.core import Field, ModelParams, critical_chi, make_grid, project
from ksbump.errors import ConfigurationError, DomainError

lengths = st.floats(0.1, 50.0)


@pytest.mark.parametrize("k, want", [(1, 2.0), (2, 5.0), (3, 10.0), (4, 17.0)])
def test_critical_chi_on_pi(k, want):
    assert abs(critical_chi(k, math.pi) - want) <= 1e-12


def test_critical_chi_independent_arithmetic():
    # exact rational 25/36 times pi^2, evaluated in a different order
    oracle = 1.0 + 25.0 * (math.pi * math.pi) / 36.0
    assert critical_chi(5, 6.0) == pytest.approx(oracle, rel=1e-15)


def test_critical_chi_tends_to_one_from_above():
    values = [critical_chi(1, L) for L in (1.0, 10.0, 100.0, 1e4)]
    assert all(v > 1.0 for v in values)
    assert all(b < a for a, b in zip(values, values[1:]))
    assert values[-1] - 1.0 < 1e-7


@pytest.mark.parametrize("k, L", [(0, 1.0), (-1, 1.0), (1, 0.0), (1, -2.0)])
def test_critical_chi_domain(k, L):
    with pytest.raises(DomainError):
        critical_chi(k, L)


@given(st.integers(1, 50), lengths)
def test_critical_chi_increasing_in_k(k, L):
    assert critical_chi(k + 1, L) > critical_chi(k, L)


def test_model_params_derived():
    p = ModelParams(4.0, math.pi, 2.0)
    assert p.omega == pytest.approx(math.sqrt(3.0))
    assert p.ubar == p.vbar == pytest.approx(2.0 / math.pi)
    with pytest.raises(DomainError):
        ModelParams(1.0, 1.0).omega
    for bad in [(0.0, 1.0, 1.0), (1.0, 0.0, 1.0), (1.0, 1.0, -1.0)]:
        with pytest.raises(DomainError):
            ModelParams(*bad)


def test_make_grid_examples():
    g = make_grid(math.pi, 100)
    assert g.dx == pytest.approx(math.pi / 100, rel=1e-15)
    j = np.arange(1, 101)
    np.testing.assert_allclose(g.centers, (j - 0.5) * math.pi / 100, rtol=1e-14)
    assert make_grid(10.0, 400).dx == pytest.approx(0.025, rel=1e-15)
    g = make_grid(5.0, 250)
    assert g.interfaces.size == 251
    assert g.interfaces[0] == 0.0 and g.interfaces[-1] == pytest.approx(5.0, rel=1e-15)
    with pytest.raises(ConfigurationError):
        make_grid(1.0, 3)


@given(lengths, st.integers(4, 5000))
def test_grid_spacing_closes(L, N):
    g = make_grid(L, N)
    assert abs(g.N * g.dx - L) <= 2 * np.spacing(L)


def test_field_contract():
    g = make_grid(1.0, 8)
    f = Field(np.arange(8.0), g)
    with pytest.raises(ValueError):
        f.values[0] = 3.0
    with pytest.raises(ConfigurationError):
        Field(np.ones(7), g)


def test_project_constant_exact():
    g = make_grid(math.pi, 200)
    ubar = 1.0 / math.pi
    assert np.all(project(lambda x: np.full_like(x, ubar), g).values == ubar)


def test_project_parabolic_bump_mass():
    g = make_grid(math.pi, 200)
    c = math.pi / 2

    def f(x):
        return np.maximum(0.0, 0.75 * (1.0 - (x - c) ** 2))

    # analytic integral 0.75 * 4/3 = 1; the kinks at c -/+ 1 are passed in
    assert abs(project(f, g, breakpoints=(c - 1, c + 1)).mass - 1.0) <= 1e-10


# 1e-12 needs roughly 30+ cells per wavelength for the 3-point rule
@pytest.mark.parametrize("k", [1, 2, 3])
def test_project_cosine_matches_antiderivative(k):
    L, N = math.pi, 100
    g = make_grid(L, N)
    w = k * math.pi / L
    exact = (np.sin(w * g.interfaces[1:]) - np.sin(w * g.interfaces[:-1])) / (w * g.dx)
    got = project(lambda x: np.cos(w * x), g).values
    np.testing.assert_allclose(got, exact, rtol=0, atol=1e-12)


coeffs = st.lists(st.floats(-10, 10), min_size=2, max_size=2)


@given(coeffs, st.integers(4, 60))
def test_project_linear(ab, N):
    a, b = ab
    g = make_grid(2.0, N)

    def f(x):
        return np.sin(3 * x)

    def h(x):
        return np.exp(-x)

    combo = project(lambda x: a * f(x) + b * h(x), g).values
    np.testing.assert_allclose(combo, a * project(f, g).values + b * project(h, g).values, atol=1e-12)


@given(st.lists(st.floats(-5, 5), min_size=6, max_size=6), st.integers(4, 40))
def test_project_mass_exact_for_quintics(c, N):
    # the 3-point rule integrates polynomials of degree <= 5 exactly
    L = 3.0
    g = make_grid(L, N)
    poly = np.polynomial.Polynomial(c)
    exact = poly.integ()(L) - poly.integ()(0.0)
    assert project(poly, g).mass == pytest.approx(exact, rel=1e-11, abs=1e-10)
