import numpy as np
import pytest
from hypothesis import given

from freemult.measures import (Atomic, MarchenkoPastur, MeasureError, PointMass, Semicircle,
                               arg0)
from freemult.subordination import (ConvolveOptions, b_map, build_maps, convolve,
                                    free_mult_convolution, predicted_atoms, subordinate,
                                    subordinate_batch)
from freemult.twopoint import FIGURE1, closed_form_subordination, reciprocal_from_omega

from conftest import atomic_strategy, upper_points


def test_maps_send_upper_half_plane_into_itself():
    f, g = build_maps(Atomic([-3.0, 1.0], [0.5, 0.5]), MarchenkoPastur(), 0.4 + 0.9j)
    w = upper_points(200, seed=4)
    assert np.all(f(w).imag > 0) and np.all(g(w).imag > 0)


def test_point_mass_g_map_is_constant():
    _, g = build_maps(PointMass(2.0), MarchenkoPastur(), 1 + 1j)
    assert np.allclose(g(upper_points(10)), 2.0)


def test_maps_compose_h_transforms():
    mu, nu = Atomic([-3.0, 1.0], [0.5, 0.5]), Atomic([1.0, 3.0], [0.5, 0.5])
    z, w = 0.3 + 0.8j, -0.2 + 0.5j
    f, _ = build_maps(mu, nu, z)

    def h(m, x):
        g = sum(p / (1 / x - a) for a, p in zip(m.positions, m.masses))
        return (1 - x / g) / x

    assert abs(complex(f(np.array([w]))[0]) - z * h(nu, z * h(mu, w))) < 1e-13


def test_delta_zero_rejected():
    with pytest.raises(MeasureError):
        build_maps(PointMass(0.0), MarchenkoPastur(), 1j)


def test_point_mass_subordination():
    nu = MarchenkoPastur()
    r = subordinate(PointMass(2.0), nu, 0.5 + 1j)
    assert r.omega2 == 2 * (0.5 + 1j)
    assert abs(r.eta_conv - nu.eta(2 * (0.5 + 1j))) < 1e-15


def test_two_atom_subordination_matches_closed_form():
    zeta = 1 + 1j
    z = 1 / np.conj(zeta)
    r = subordinate(FIGURE1.mu, FIGURE1.nu, z)
    om1, om2 = closed_form_subordination(FIGURE1, zeta)
    assert abs(reciprocal_from_omega(r.omega1, z) - om1) < 1e-10
    assert abs(reciprocal_from_omega(r.omega2, z) - om2) < 1e-10


def test_subordination_functions_vanish_at_origin():
    r = subordinate(FIGURE1.mu, FIGURE1.nu, 1e-6j)
    assert abs(r.omega1) < 1e-3 and abs(r.omega2) < 1e-3


@given(atomic_strategy(max_atoms=3), atomic_strategy(max_atoms=3, positive=True))
def test_subordination_identities(mu, nu):
    if mu.point_mass == 0 or mu.mass_at_zero > 0:
        mu = Atomic(mu.positions + 0.01 * (mu.positions == 0), mu.masses)
    z = upper_points(30, seed=12)
    o1, o2, eta, res = subordinate_batch(mu, nu, z, tol=1e-13)
    ok = res.converged
    assert ok.mean() > 0.9
    scale = 1 + np.abs(z * eta)
    assert np.all(np.abs(z * eta - o1 * o2)[ok] <= 1e-8 * scale[ok])
    assert np.all(np.abs(mu.eta(o1) - nu.eta(o2))[ok] <= 1e-9 * scale[ok])
    a2, az = arg0(o2), arg0(z)
    assert np.all(a2[ok] >= az[ok] - 1e-9) and np.all(a2[ok] <= az[ok] + np.pi + 1e-9)


def test_identity_residuals_of_single_result():
    mu, nu = Semicircle(0.5, 1.0), MarchenkoPastur()
    r = subordinate(mu, nu, 0.3 + 0.6j)
    assert max(r.identity_residuals(mu, nu)) < 1e-12
    assert r.report1.converged and r.report2.converged


# --- convolution measure --------------------------------------------------------

def test_atom_from_overlapping_masses():
    mu, nu = Atomic([1.0, 2.0], [0.7, 0.3]), Atomic([1.0, 3.0], [0.6, 0.4])
    assert predicted_atoms(mu, nu) == [(1.0, pytest.approx(0.3)), (3.0, pytest.approx(0.1))]
    res = convolve(mu, nu, np.linspace(0.1, 7, 300))
    atoms = dict(res.atoms)
    assert atoms[1.0] == pytest.approx(0.3, abs=1e-6)
    assert atoms[3.0] == pytest.approx(0.1, abs=1e-6)
    assert len(atoms) == 2


def test_atom_at_zero_is_the_larger_zero_mass():
    mu = Atomic([0.0, 1.0, -2.0], [0.2, 0.5, 0.3])
    nu = Atomic([0.0, 2.0], [0.5, 0.5])
    res = convolve(mu, nu, np.linspace(-6, 4, 300))
    assert res.atom_at_zero == 0.5
    assert dict(res.atoms)[0.0] == 0.5


def test_figure1_total_mass():
    res = convolve(FIGURE1.mu, FIGURE1.nu, np.linspace(-10, 10, 1000))
    assert abs(res.total_mass() - 1) < 2e-3
    assert res.diagnostics["not_converged_fraction"] == 0


def test_positive_pair_is_commutative():
    mu, nu = Atomic([0.5, 2.0], [0.4, 0.6]), MarchenkoPastur()
    x = np.linspace(0.01, 8, 400)
    a = convolve(mu, nu, x, ConvolveOptions(refine_edges=False)).density(x)
    b = convolve(nu, mu, x, ConvolveOptions(refine_edges=False)).density(x)
    assert np.trapezoid(np.abs(a - b), x) < 1e-3


def test_discretized_factor_converges():
    mu = Atomic([-1.0, 2.0], [0.5, 0.5])
    x = np.linspace(-9, 9, 400)
    exact = convolve(mu, MarchenkoPastur(), x, ConvolveOptions(refine_edges=False)).density(x)
    dists = []
    for n in (8, 16, 32, 64):
        q = (np.arange(n) + 0.5) / n
        # quantile discretization of the free Poisson law by inverting its cdf numerically
        grid = np.linspace(0, 4, 20001)
        cdf = np.cumsum(MarchenkoPastur().density(grid)) * (grid[1] - grid[0])
        nodes = np.interp(q, cdf / cdf[-1], grid)
        nu = Atomic(nodes, np.full(n, 1 / n), normalize=True)
        d = convolve(mu, nu, x, ConvolveOptions(refine_edges=False)).density(x)
        dists.append(np.trapezoid(np.abs(d - exact), x))
    assert all(b < a for a, b in zip(dists, dists[1:]))


def test_density_is_nonnegative_and_cdf_monotone():
    res = convolve(FIGURE1.mu, FIGURE1.nu, np.linspace(-10, 10, 300),
                   ConvolveOptions(refine_edges=False))
    assert np.all(res.density_table.outputs >= 0)
    F = res.cdf(np.linspace(-10, 10, 25))
    assert np.all(np.diff(F) >= -1e-6)
    assert F[0] == pytest.approx(0, abs=1e-6) and F[-1] == pytest.approx(1, abs=1e-4)


def test_lazy_product_of_point_masses_is_exact():
    assert free_mult_convolution(PointMass(-3.0), PointMass(2.0)).point_mass == -6.0


# --- the map B_nu ----------------------------------------------------------------

def test_b_map_fixes_point_masses():
    assert b_map(MarchenkoPastur(), PointMass(1.5)).point_mass == 1.5


def test_b_map_eta_is_second_subordination_function():
    mu, nu = Atomic([-3.0, 1.0], [0.5, 0.5]), Atomic([1.0, 3.0], [0.5, 0.5])
    z = upper_points(20, seed=8)
    _, o2, _, _ = subordinate_batch(mu, nu, z)
    assert np.allclose(b_map(nu, mu).eta(z), o2, atol=1e-12)


def test_b_map_of_point_mass_is_boolean_power():
    from freemult.identities import check_eq_B, check_eq_free_conv
    mu = Atomic([-3.0, 1.0], [0.5, 0.5])
    assert check_eq_B(mu, 2.0).passed
    assert check_eq_free_conv(mu, 2.0).passed


def test_b_map_is_multiplicative():
    from freemult.identities import check_thm14
    reps = check_thm14(Atomic([-3.0, 1.0], [0.5, 0.5]), Atomic([1.0, 3.0], [0.5, 0.5]),
                       Atomic([0.5, 2.0], [0.4, 0.6]), Atomic([1.0, 4.0], [0.7, 0.3]))
    assert all(r.passed for r in reps), [r.line() for r in reps]
