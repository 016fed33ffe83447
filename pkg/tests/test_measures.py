import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from freemult.measures import (Atomic, BooleanStable, CauchyDist, ComplexPoint, Domain,
                               DomainError, FreeStable, GridDensity, MarchenkoPastur,
                               MeasureError, PointMass, Semicircle, arg0, atom_mass,
                               atom_mass_estimate, cauchy_transform, derived_transforms,
                               format_measure, parse_measure, stieltjes_invert_density)

from conftest import atomic_strategy, upper_points

LAWS = [Semicircle(0.3, 1.5), MarchenkoPastur(), MarchenkoPastur(2.0), CauchyDist(0.4, 1.1),
        BooleanStable(0.6, 0.3), FreeStable(1.4, 0.5), FreeStable(0.7, 0.8),
        Atomic([-1.0, 0.5, 2.0], [0.2, 0.5, 0.3])]


# --- Cauchy transform values ------------------------------------------------

def test_point_mass_cauchy():
    assert cauchy_transform(PointMass(1.0), 2j) == pytest.approx((-1 - 2j) / 5, abs=1e-15)


def test_two_atom_cauchy():
    mu = Atomic([-3.0, 1.0], [0.5, 0.5])
    assert cauchy_transform(mu, 1j) == pytest.approx(-0.1 - 0.3j, abs=1e-15)


def test_semicircle_cauchy_lower_half_plane():
    assert cauchy_transform(Semicircle(0, 1), -2j) == pytest.approx(1j * (np.sqrt(2) - 1),
                                                                    abs=1e-14)


def test_real_point_rejected():
    with pytest.raises(DomainError):
        cauchy_transform(Semicircle(), 0.5)


def test_boundary_point_accepted():
    g = cauchy_transform(Semicircle(), ComplexPoint(3.0, Domain.UPPER, boundary=True))
    assert g == pytest.approx((3 - np.sqrt(5)) / 2, abs=1e-14)


def test_mp_cauchy_matches_density_quadrature():
    from scipy.integrate import quad
    mu = MarchenkoPastur(1.0)
    z = 1.3 + 0.7j
    re = quad(lambda x: (1 / (z - x)).real * mu.density(x), 0, 4, limit=200)[0]
    im = quad(lambda x: (1 / (z - x)).imag * mu.density(x), 0, 4, limit=200)[0]
    assert abs(mu.cauchy(z) - (re + 1j * im)) < 1e-8


# --- derived transforms -------------------------------------------------------

def test_eta_of_point_mass_is_linear():
    z = upper_points(20)
    assert np.allclose(derived_transforms(PointMass(2.5), z, "eta"), 2.5 * z, atol=1e-14)


def test_psi_tends_to_minus_one_at_infinity():
    assert abs(derived_transforms(Semicircle(0.5, 1), 1e6j, "psi") + 1) < 1e-4


def test_psi_at_infinity_sees_mass_at_zero():
    mu = Atomic([0.0, 1.0], [0.3, 0.7])
    assert abs(derived_transforms(mu, 1e6j, "psi") - (0.3 - 1)) < 1e-4


def test_eta_on_negative_axis_for_positive_measure():
    mu = MarchenkoPastur()
    x = -np.array([0.1, 1.0, 5.0])
    val = derived_transforms(mu, x, "eta")
    assert np.all(np.abs(val.imag) < 1e-12) and np.all(val.real < 0)


def test_eta_on_real_axis_rejected_for_signed_measure():
    with pytest.raises(DomainError):
        derived_transforms(Semicircle(), -1.0, "eta")


@pytest.mark.parametrize("mu", LAWS, ids=lambda m: m.descriptor)
def test_transform_identities(mu):
    z = upper_points(30, seed=3)
    g = mu.cauchy(1 / z)
    eta = derived_transforms(mu, z, "eta")
    assert np.allclose(eta, 1 - z / g, rtol=1e-10, atol=1e-12)
    assert np.allclose(derived_transforms(mu, z, "h"), eta / z, rtol=1e-10)
    assert np.allclose(derived_transforms(mu, z, "psi"), eta / (1 - eta), rtol=1e-9)
    assert np.allclose(derived_transforms(mu, 1 / z, "M"), 1 / eta, rtol=1e-10)


@pytest.mark.parametrize("mu", LAWS, ids=lambda m: m.descriptor)
def test_imaginary_part_of_F_dominates(mu):
    z = upper_points(200, seed=5)
    F = derived_transforms(mu, z, "F")
    assert np.all(F.imag >= z.imag * (1 - 1e-10))


@pytest.mark.parametrize("mu", LAWS, ids=lambda m: m.descriptor)
def test_argument_of_eta_between_z_and_z_plus_pi(mu):
    z = upper_points(200, seed=6)
    a = arg0(derived_transforms(mu, z, "eta"))
    az = arg0(z)
    assert np.all(a >= az - 1e-9) and np.all(a <= az + np.pi + 1e-9)


def test_F_equals_z_only_for_point_masses():
    z = upper_points(10)
    assert np.allclose(PointMass(1.0).reciprocal_cauchy(z).imag, z.imag)
    assert np.all(Semicircle().reciprocal_cauchy(z).imag > z.imag)


@given(atomic_strategy())
def test_atomic_G_is_the_finite_sum(mu):
    z = upper_points(10, seed=9)
    direct = sum(m / (z - x) for x, m in zip(mu.positions, mu.masses))
    assert np.allclose(mu.cauchy(z), direct, rtol=1e-12, atol=1e-14)


@given(atomic_strategy())
def test_atomic_eta_argument_bounds(mu):
    if mu.point_mass is not None:
        return
    z = upper_points(50, seed=11)
    a = arg0(mu.eta(z))
    assert np.all(a >= arg0(z) - 1e-9) and np.all(a <= arg0(z) + np.pi + 1e-9)


# --- Stieltjes inversion and atoms ------------------------------------------

def test_inversion_of_cauchy_law_at_zero():
    t = stieltjes_invert_density(CauchyDist(0, 1).cauchy, np.array([0.0, 1.0]))
    assert t.outputs[0] == pytest.approx(1 / np.pi, abs=1e-8)
    assert t.outputs[1] == pytest.approx(1 / (2 * np.pi), abs=1e-8)


def test_inversion_of_point_mass_off_atom():
    t = stieltjes_invert_density(PointMass(1.0).cauchy, np.array([0.5]))
    assert abs(t.outputs[0]) < 1e-8


def test_inversion_of_semicircle():
    x = np.linspace(-2.5, 2.5, 101)
    t = stieltjes_invert_density(Semicircle().cauchy, x)
    assert t.outputs[50] == pytest.approx(1 / np.pi, abs=1e-8)
    assert np.max(np.abs(t.outputs - Semicircle().density(x))) < 2e-3
    assert np.all(t.outputs >= 0)


def test_inversion_recovers_grid_density_in_L1():
    x = np.linspace(-3, 3, 2000)
    f = np.exp(-x ** 2 / 2) / np.sqrt(2 * np.pi)
    mu = GridDensity(x, f, normalize=True)
    t = stieltjes_invert_density(mu.cauchy, x)
    assert np.trapezoid(np.abs(t.outputs - mu.density), x) < 2e-3


def test_inversion_flags_atom_as_singular():
    t = stieltjes_invert_density(PointMass(0.0).cauchy, np.array([-0.5, 0.0, 0.5]))
    assert t.metadata["singular"][1]


def test_atom_masses_recovered():
    mu = Atomic([2.0, 5.0], [0.3, 0.7])
    assert atom_mass(mu.cauchy, 2.0) == pytest.approx(0.3, abs=1e-6)
    assert atom_mass(mu.cauchy, 5.0) == pytest.approx(0.7, abs=1e-6)
    assert atom_mass(Semicircle().cauchy, 0.0) == 0.0


@given(atomic_strategy(max_atoms=5))
def test_atom_mass_recovers_every_atom(mu):
    for x, m in zip(mu.positions, mu.masses):
        est = atom_mass_estimate(mu.cauchy, x)
        assert abs(est.mass - m) < 1e-6


def test_discretizations_converge_weakly():
    z = upper_points(20, seed=2, rmin=0.5)
    target = Semicircle().cauchy(z)
    errs = []
    for n in (50, 100, 200, 400):
        x = np.linspace(-2, 2, n + 1)
        mid = 0.5 * (x[1:] + x[:-1])
        w = Semicircle().density(mid)
        errs.append(np.max(np.abs(Atomic(mid, w, normalize=True).cauchy(z) - target)))
    assert all(b < a for a, b in zip(errs, errs[1:]))


# --- construction and text format ---------------------------------------------

def test_atomic_validation():
    with pytest.raises(MeasureError):
        Atomic([0.0, 0.0], [0.5, 0.5])
    with pytest.raises(MeasureError):
        Atomic([0.0, 1.0], [0.5, 0.6])
    with pytest.raises(MeasureError):
        Atomic([0.0], [-1.0])


def test_grid_density_validation():
    with pytest.raises(MeasureError):
        GridDensity([0, 1, 1], [1, 1, 1])
    with pytest.raises(MeasureError):
        GridDensity([0, 1], [-1, 1])


def test_stable_parameters_must_be_admissible():
    with pytest.raises(MeasureError):
        FreeStable(1.5, 0.0)
    with pytest.raises(MeasureError):
        BooleanStable(2.5, 0.5)


def test_parse_laws():
    assert isinstance(parse_measure("law:semicircle a=1 v=1"), Semicircle)
    mu = parse_measure("atomic:(1,.5)(-3,.5)")
    assert np.array_equal(mu.positions, [-3.0, 1.0])
    with pytest.raises(MeasureError):
        parse_measure("law:nonsense")
    with pytest.raises(MeasureError):
        parse_measure("atomic:(1,.5)junk")


@given(atomic_strategy(max_atoms=6))
def test_atomic_text_round_trip(mu):
    assert parse_measure(format_measure(mu)) == mu


@given(st.sampled_from(["semicircle a=0.25 v=2", "mp rate=1.5", "cauchy a=-1 b=0.5",
                        "freestable alpha=0.5 rho=0.25", "booleanstable alpha=0.75 rho=1"]))
def test_law_text_round_trip(body):
    mu = parse_measure("law:" + body)
    again = parse_measure(format_measure(mu))
    z = upper_points(5)
    assert type(again) is type(mu)
    assert np.array_equal(again.cauchy(z), mu.cauchy(z))


def test_density_file_round_trip(tmp_path):
    x = np.linspace(-1, 1, 201)
    mu = GridDensity(x, 0.75 * (1 - x ** 2), atom_at_zero=0.0, normalize=True)
    text = format_measure(mu, str(tmp_path / "d.csv"))
    again = parse_measure(text)
    assert np.array_equal(again.grid, mu.grid)
    assert np.array_equal(again.density, mu.density)
