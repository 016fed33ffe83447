import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import trapezoid

from freemult.measures import Atomic
from freemult.subordination import FreeMultiplicativeConvolution, subordinate_batch
from freemult.twopoint import (FIGURE1, FIGURE2, TwoPointPair, closed_form_cauchy,
                               closed_form_density, closed_form_subordination,
                               omega_from_reciprocal, p_polynomial, quadratic_coefficients,
                               reciprocal_from_omega)

from conftest import upper_points


def _upper_root(num, root, den):
    cands = np.stack([(num + root) / den, (num - root) / den])
    return cands[np.argmax(cands.imag, axis=0), np.arange(cands.shape[1])]


pairs = st.builds(TwoPointPair,
                  st.floats(0.05, 0.95), st.floats(-4, 4).filter(lambda a: abs(a - 1) > 0.05),
                  st.floats(0.05, 0.95), st.floats(0.0, 4).filter(lambda a: abs(a - 1) > 0.05))


def test_discriminant_factorization_first_example():
    p = p_polynomial(FIGURE1)
    expect = np.poly1d([1.0, -1]) * np.poly1d([1.0, -3]) * np.poly1d([1.0, 3]) * np.poly1d([1.0, 9])
    assert np.allclose(p.coeffs, expect.coeffs, atol=1e-12)
    assert np.allclose(np.sort(np.roots(p)), [-9, -3, 1, 3], atol=1e-12)


def test_discriminant_factorization_second_example():
    p = p_polynomial(FIGURE2)
    expect = np.poly1d([1.0, 0, 0]) * np.poly1d([4.0, 4, -7]) / 4
    assert np.allclose(p.coeffs, expect.coeffs, atol=1e-12)


def test_first_example_printed_omega():
    z = np.array([1 + 1j])
    printed = _upper_root(z ** 2 + 9, np.sqrt((z - 1) * (z - 3) * (z + 3) * (z + 9)), 4 * z + 6)
    om1, _ = closed_form_subordination(FIGURE1, z)
    assert abs(om1[0] - printed[0]) < 1e-12
    assert om1[0].imag > 0


def test_second_example_printed_omega():
    z = upper_points(50, seed=4)
    printed = _upper_root(2 * z + 1, np.sqrt(4 * z * z + 4 * z - 7), 2.0)
    om1, _ = closed_form_subordination(FIGURE2, z)
    assert np.max(np.abs(om1 - printed)) < 1e-12


@pytest.mark.parametrize("pair", [FIGURE1, FIGURE2], ids=["fig1", "fig2"])
def test_closed_form_matches_numeric_subordination(pair):
    rng = np.random.default_rng(11)
    zeta = rng.uniform(-10, 10, 1000) + 1j * 10 ** rng.uniform(-3, 1, 1000)
    om1, om2 = closed_form_subordination(pair, zeta)
    o1, o2, _, _ = subordinate_batch(pair.mu, pair.nu, 1 / np.conj(zeta))
    n1 = reciprocal_from_omega(o1, None)
    n2 = reciprocal_from_omega(o2, None)
    assert np.max(np.abs(n1 - om1)) < 1e-8
    assert np.max(np.abs(n2 - om2)) < 1e-8
    g = FreeMultiplicativeConvolution(pair.mu, pair.nu).cauchy(zeta)
    assert np.max(np.abs(g - closed_form_cauchy(pair, zeta))) < 1e-8


def test_cauchy_at_ten_i():
    z = np.array([10j])
    g = FreeMultiplicativeConvolution(FIGURE1.mu, FIGURE1.nu).cauchy(z)
    assert abs(g[0] - closed_form_cauchy(FIGURE1, z)[0]) < 1e-9


@settings(max_examples=15)
@given(pairs)
def test_omega_root_is_unique_in_upper_half_plane(pair):
    z = upper_points(30, seed=8, rmin=0.1, rmax=20)
    A, B, C = quadratic_coefficients(pair)
    a, b, c = A(z), B(z), C(z)
    s = np.sqrt(b * b + 4 * a * c)
    roots = np.stack([(b + s) / (2 * a), (b - s) / (2 * a)])
    assert np.all(np.sum(roots.imag > 1e-12, axis=0) <= 1)
    om1, _ = closed_form_subordination(pair, z)
    assert np.all(om1.imag > 0)


@settings(max_examples=10)
@given(pairs)
def test_closed_form_cauchy_matches_numeric_for_random_pairs(pair):
    z = upper_points(20, seed=9, rmin=0.3, rmax=10)
    g = FreeMultiplicativeConvolution(pair.mu, pair.nu).cauchy(z)
    assert np.max(np.abs(g - closed_form_cauchy(pair, z))) < 1e-8


def test_point_mass_product():
    pair = TwoPointPair(0.5, 1.0, 0.5, 1.0)
    z = upper_points(20, seed=6)
    assert np.allclose(closed_form_cauchy(pair, z), 1 / (z - 1), atol=1e-12)


def test_unit_factor_is_identity():
    pair = TwoPointPair(0.5, 1.0, 0.3, 2.0)
    z = upper_points(20, seed=6)
    assert np.allclose(closed_form_cauchy(pair, z), pair.nu.cauchy(z), atol=1e-12)


def test_second_example_density_and_atoms():
    (p0, m0), (p1, m1) = FIGURE2.atoms()
    assert (p0, p1) == (-2.0, 0.0)
    assert m0 == pytest.approx(1 / 6, abs=1e-14) and m1 == 0.5
    x = np.linspace(-6, 2, 80001)
    d = closed_form_density(FIGURE2, x)
    assert np.all(d >= -1e-12)
    mass = trapezoid(d, x)
    assert mass + 1 / 6 + 0.5 == pytest.approx(1.0, abs=2e-3)
    # a density of the smoothed curve is finite everywhere
    assert np.all(np.isfinite(closed_form_density(FIGURE2, x[::100], eps=1e-6)))


def test_first_example_has_no_atoms():
    assert FIGURE1.atoms() == []
    x = np.linspace(-2.9, 0.9, 50)
    assert np.allclose(closed_form_density(FIGURE1, x), 0, atol=1e-10)


def test_reciprocal_conversions_are_inverse():
    w = upper_points(10, seed=2)
    assert np.allclose(omega_from_reciprocal(reciprocal_from_omega(w, None)), w)


def test_pair_validation():
    with pytest.raises(ValueError):
        TwoPointPair(0.0, 2.0, 0.5, 1.0)
    with pytest.raises(ValueError):
        TwoPointPair(0.5, 2.0, 0.5, -1.0)
    assert isinstance(FIGURE1.mu, Atomic)
