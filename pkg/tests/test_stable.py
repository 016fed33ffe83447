import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.integrate import quad

from freemult.identities import (check_cor61, check_prop63, check_thm16, check_thm17,
                                 run_identity)
from freemult.measures import (BooleanStable, CauchyDist, FreeStable, MeasureError, PointMass,
                               Semicircle)
from freemult.powers import dilation, free_additive_power
from freemult.stable import (StableParams, boolean_stable_density, free_stable_cauchy,
                             free_stable_density, in_A0, levy_density, mixture_eta,
                             reproducing_gamma, s_boolean_stable, s_free_stable, series_radius)
from freemult.stable import _free_density_values, _series_coefficients

from conftest import upper_points


def _integral(f, lo, hi):
    return quad(lambda x: f(np.array([x]))[0], lo, hi, limit=200)[0]


admissible = st.tuples(st.floats(0.2, 1.9), st.floats(0.0, 1.0)).map(
    lambda p: (p[0], min(max(p[1], max(0.0, 1 - 1 / p[0])), min(1.0, 1 / p[0]))))


# --- Boolean stable density -----------------------------------------------------------

def test_boolean_density_value():
    assert boolean_stable_density(0.5, 1.0, np.array([1.0]))[0] == pytest.approx(
        1 / (2 * math.pi), rel=1e-14)


def test_boolean_density_reflection_at_rho_zero():
    x = np.array([0.5, 1.0, 4.0])
    assert np.all(boolean_stable_density(0.5, 0.0, x) == 0)
    assert np.allclose(boolean_stable_density(0.5, 0.0, -x), boolean_stable_density(0.5, 1.0, x))


@pytest.mark.parametrize("rho", [0.2, 0.5, 0.9])
def test_boolean_alpha_one_is_cauchy(rho):
    x = np.linspace(-5, 5, 40)
    law = CauchyDist(-math.cos(rho * math.pi), math.sin(rho * math.pi))
    assert np.allclose(boolean_stable_density(1.0, rho, x), law.density(x), rtol=1e-12)


@pytest.mark.parametrize("alpha,rho", [(0.5, 0.3), (0.7, 1.0), (0.9, 0.5), (0.3, 0.0)])
def test_boolean_density_mass_split(alpha, rho):
    f = lambda x: boolean_stable_density(alpha, rho, x)
    pos = _integral(f, 0, np.inf)
    neg = _integral(f, -np.inf, 0)
    assert pos == pytest.approx(rho, abs=1e-6)
    assert pos + neg == pytest.approx(1.0, abs=1e-6)


def test_boolean_density_rejects_bad_parameters():
    with pytest.raises(MeasureError):
        boolean_stable_density(1.5, 0.5, np.array([1.0]))
    with pytest.raises(MeasureError):
        boolean_stable_density(0.5, 1.5, np.array([1.0]))


@given(st.floats(0.1, 1.0), st.floats(0.0, 1.0))
def test_boolean_density_matches_eta(alpha, rho):
    # -Im G(x + iε)/π approaches the density away from 0
    x = np.array([-2.0, -0.7, 0.6, 1.5])
    g = BooleanStable(alpha, rho).cauchy(x + 1e-7j)
    assert np.allclose(-g.imag / math.pi, boolean_stable_density(alpha, rho, x), atol=1e-5)


# --- free stable Cauchy transform -----------------------------------------------------

def test_free_stable_alpha_two_is_semicircle():
    g = free_stable_cauchy(2.0, 0.5, np.array([-2j]))[0]
    assert abs(g - 1j * (math.sqrt(2) - 1)) < 1e-14


@pytest.mark.parametrize("rho", [0.3, 0.5, 0.7])
def test_free_stable_alpha_one_is_cauchy(rho):
    w = np.array([-1j, 2 - 0.5j, -3 - 2j])
    expect = np.conj(CauchyDist(-math.cos(rho * math.pi), math.sin(rho * math.pi))
                     .cauchy(np.conj(w)))
    assert np.allclose(free_stable_cauchy(1.0, rho, w), expect, atol=1e-14)


def test_series_first_coefficient():
    for alpha in (0.3, 0.8, 1.5):
        assert _series_coefficients(alpha)[0] == 1.0
    # one term of the series is 1/w
    w = np.array([50 - 80j])
    g = free_stable_cauchy(0.5, 0.3, w, method="series")
    assert abs(g[0] * w[0] - 1) < 0.2


@pytest.mark.parametrize("alpha,rho", [(0.5, 0.3), (0.8, 0.5), (1.5, 0.6), (1.2, 0.2)])
def test_series_and_fixed_point_agree_on_annulus(alpha, rho):
    r = series_radius(alpha) * np.array([1.05, 1.3, 2.0])
    th = np.linspace(0.05, np.pi - 0.05, 7)
    w = (r[:, None] * np.exp(-1j * th)[None, :]).ravel()
    a = free_stable_cauchy(alpha, rho, w, method="series")
    b = free_stable_cauchy(alpha, rho, w, method="fixed_point")
    assert np.max(np.abs(a - b)) < 1e-10


@given(admissible)
def test_free_stable_cauchy_solves_implicit_equation(params):
    alpha, rho = params
    w = np.conj(upper_points(12, seed=3, rmin=0.3, rmax=6.0))
    g = free_stable_cauchy(alpha, rho, w)
    # wG - 1 = -(e^{-iρπ} G)^α with arg G in [0, π]
    lhs = w * g - 1
    rhs = -np.abs(g) ** alpha * np.exp(1j * alpha * (np.angle(g) - rho * math.pi))
    assert np.all(g.imag >= 0)
    assert np.max(np.abs(lhs - rhs)) < 1e-9


@pytest.mark.parametrize("alpha,rho", [(0.6, 0.4), (1.5, 0.5), (1.8, 0.5)])
def test_free_stable_is_boxplus_stable(alpha, rho):
    mu = FreeStable(alpha, rho)
    z = np.conj(upper_points(10, seed=5, rmin=0.5, rmax=4.0))
    lhs = free_additive_power(mu, 2.0).cauchy(z)
    rhs = dilation(mu, 2 ** (1 / alpha)).cauchy(z)
    assert np.max(np.abs(lhs - rhs)) < 1e-8


# --- free stable density --------------------------------------------------------------

def test_free_density_alpha_two_is_semicircle():
    x = np.linspace(-2.5, 2.5, 51)
    tab = free_stable_density(2.0, 0.5, x)
    assert np.allclose(tab.outputs, Semicircle().density(x), atol=1e-12)


def test_free_density_alpha_one_is_standard_cauchy():
    x = np.linspace(-4, 4, 33)
    tab = free_stable_density(1.0, 0.5, x)
    assert np.allclose(tab.outputs, 1 / (math.pi * (1 + x * x)), atol=1e-14)


@pytest.mark.parametrize("alpha,rho", [(0.5, 0.3), (1.5, 0.6), (0.8, 0.5)])
def test_free_density_mass_and_split(alpha, rho):
    f = lambda x: _free_density_values(alpha, rho, x)
    pos = _integral(f, 0, np.inf)
    neg = _integral(f, -np.inf, 0)
    assert pos + neg == pytest.approx(1.0, abs=2e-3)
    assert pos == pytest.approx(rho, abs=2e-3)


def test_free_density_reflection():
    x = np.linspace(0.1, 3, 12)
    a = free_stable_density(0.7, 0.2, x).outputs
    b = free_stable_density(0.7, 0.8, -x[::-1]).outputs[::-1]
    assert np.allclose(a, b, atol=1e-12)


# --- Lévy measure density -------------------------------------------------------------

def test_levy_density_is_even_when_symmetric():
    x = np.linspace(0.05, 5, 30)
    assert np.allclose(levy_density(0.5, 0.5, x), levy_density(0.5, 0.5, -x), rtol=1e-12)


def test_levy_density_positive_branch_at_half():
    x = np.linspace(0.1, 4, 10)
    assert np.allclose(levy_density(0.5, 0.5, x), _free_density_values(0.5, 0.5, x), rtol=1e-14)


@pytest.mark.parametrize("alpha,rho", [(0.5, 0.5), (0.4, 0.3), (0.6, 0.6)])
def test_levy_density_integrates_to_one(alpha, rho):
    f = lambda x: levy_density(alpha, rho, x)
    assert _integral(f, 0, np.inf) + _integral(f, -np.inf, 0) == pytest.approx(1.0, abs=5e-3)


def test_divisible_range():
    assert in_A0(0.5, 0.5) and in_A0(0.6, 1 / 0.6 - 1)
    assert not in_A0(0.8, 0.5)
    assert not in_A0(0.5, 1.01)
    with pytest.raises(MeasureError):
        levy_density(0.8, 0.5, np.array([1.0]))


# --- mixtures and identities ----------------------------------------------------------

def test_mixture_with_delta_one_is_the_law():
    z = upper_points(20, seed=1)
    assert np.allclose(mixture_eta(0.5, 0.3, PointMass(1.0), z),
                       BooleanStable(0.5, 0.3).eta(z), atol=1e-14)


def test_mixture_with_point_mass_scales():
    # b ⊛ δ_c^{1/α} is the dilation of b by c^{1/α}
    z = upper_points(20, seed=2)
    c, alpha = 2.0, 0.5
    lhs = mixture_eta(alpha, 0.3, PointMass(c), z)
    rhs = dilation(BooleanStable(alpha, 0.3), c ** (1 / alpha)).eta(z)
    assert np.allclose(lhs, rhs, atol=1e-12)


def test_mixture_needs_positive_measure():
    with pytest.raises(MeasureError):
        mixture_eta(0.5, 0.3, PointMass(-1.0), np.array([1j]))


def test_reproducing_index():
    u = np.linspace(-0.9, -0.1, 20)
    a, b = 0.6, 0.5
    g = reproducing_gamma(a, b)
    assert np.allclose(s_boolean_stable(b, 1.0, u) ** (1 / a), s_boolean_stable(g, 1.0, u))
    assert np.allclose(s_free_stable(b, 1.0, u) ** (1 / a), s_free_stable(g, 1.0, u))


def test_stable_params():
    assert isinstance(StableParams(0.5, 0.3, "boolean").law(), BooleanStable)
    with pytest.raises(MeasureError):
        StableParams(1.5, 0.9)
    with pytest.raises(ValueError):
        StableParams(0.5, 0.3, "classical")


@pytest.mark.parametrize("family", ["boolean", "free"])
def test_product_of_stable_laws(family):
    reps = check_thm16(0.5, 0.5, 0.3, family)
    assert all(r.passed for r in reps), [r.line() for r in reps]


def test_boolean_law_from_free_law_and_free_poisson_power():
    reps = check_prop63(0.5, 0.3)
    assert all(r.passed for r in reps), [r.line() for r in reps]


@pytest.mark.parametrize("nu", [PointMass(2.0), BooleanStable(0.5, 1.0)])
def test_mixture_equals_product(nu):
    rep = check_thm17(0.5, 0.3, nu)
    assert rep.passed, rep.line()


def test_cauchy_mixture_equals_product():
    from freemult.measures import MarchenkoPastur
    assert check_cor61(0.3, 1.2, MarchenkoPastur()).passed


def test_unknown_identity():
    with pytest.raises(KeyError):
        run_identity("nope")
