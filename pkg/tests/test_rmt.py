import numpy as np
import pytest
from hypothesis import given, strategies as st

from freemult.measures import Atomic
from freemult.rmt import (atom_counts, haar_unitary, jacobi_eigvalsh, ks_distance, ks_distances,
                          model_pair, run_seeds, sample_spectrum)
from freemult.subordination import convolve


class PointLaw:
    """Predicted law δ_p, enough of the interface for the KS routines."""

    def __init__(self, p, mass=1.0):
        self.p = p
        self.atoms = [(p, mass)]
        self._mass = mass

    def total_mass(self):
        return self._mass

    def cdf(self, x):
        return np.where(np.asarray(x) >= self.p, self._mass, 0.0)


@pytest.fixture(scope="module")
def fig1_law():
    mu, nu = model_pair("fig1")
    return convolve(mu, nu, np.linspace(-10, 10, 2000))


def test_haar_scalar_case():
    for seed in range(5):
        u = haar_unitary(1, seed)
        assert u.shape == (1, 1) and abs(abs(u[0, 0]) - 1) < 1e-15


def test_haar_unitarity():
    u = haar_unitary(64, seed=3)
    assert np.linalg.norm(u.conj().T @ u - np.eye(64)) < 1e-12
    assert np.allclose(np.linalg.norm(u, axis=0), 1, atol=1e-13)


def test_haar_is_deterministic():
    a, b = haar_unitary(16, 42), haar_unitary(16, 42)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, haar_unitary(16, 43))
    assert not np.array_equal(a, haar_unitary(16, 42, draw=1))


def test_haar_phases_are_uniform():
    # the (0, 0) entry of a Haar unitary has a uniform phase
    ph = np.array([np.angle(haar_unitary(4, s)[0, 0]) for s in range(400)])
    assert abs(np.mean(np.cos(ph))) < 0.15 and abs(np.mean(np.sin(ph))) < 0.15


@given(st.lists(st.floats(0.01, 1.0), min_size=1, max_size=5), st.integers(1, 300))
def test_atom_counts_sum_to_size(w, n):
    m = np.array(w) / np.sum(w)
    c = atom_counts(m, n)
    assert c.sum() == n and np.all(c >= 0)
    assert np.all(np.abs(c - m * n) < 1 + 1e-9)


def test_point_masses_give_constant_spectrum():
    s = sample_spectrum(Atomic([-2.0], [1.0]), Atomic([3.0], [1.0]), 20, seed=1)
    assert s.eigenvalues.size == 20
    assert np.allclose(s.eigenvalues, -6.0, atol=1e-12)
    assert ks_distance(s, PointLaw(-6.0)) <= 1 / 20


def test_trace_mean():
    mu, nu = model_pair("fig1")
    means = [sample_spectrum(mu, nu, 128, seed=k).eigenvalues.mean() for k in range(10)]
    assert np.mean(means) == pytest.approx(-2.0, abs=0.05)


def test_jacobi_matches_lapack():
    mu, nu = model_pair("fig1")
    a = sample_spectrum(mu, nu, 24, seed=5, method="lapack").eigenvalues
    b = sample_spectrum(mu, nu, 24, seed=5, method="jacobi").eigenvalues
    assert np.max(np.abs(a - b)) < 1e-10


def test_jacobi_on_random_hermitian():
    rng = np.random.default_rng(0)
    h = rng.standard_normal((12, 12)) + 1j * rng.standard_normal((12, 12))
    h = h + h.conj().T
    assert np.allclose(jacobi_eigvalsh(h), np.linalg.eigvalsh(h), atol=1e-10)


def test_unknown_solver_and_bad_second_factor():
    mu, nu = model_pair("fig1")
    with pytest.raises(ValueError):
        sample_spectrum(mu, nu, 8, 0, method="qr")
    with pytest.raises(ValueError):
        sample_spectrum(nu, mu, 8, 0)
    with pytest.raises(ValueError):
        model_pair("fig3")


def test_small_size_warns():
    with pytest.warns(UserWarning):
        sample_spectrum(Atomic([1.0, 2.0], [0.3, 0.7]), Atomic([1.0], [1.0]), 5, 0)


def test_threads_do_not_change_results():
    mu, nu = model_pair("fig2")
    a = run_seeds(mu, nu, 48, range(4), threads=1)
    b = run_seeds(mu, nu, 48, range(4), threads=2)
    assert [s.seed for s in b] == [0, 1, 2, 3]
    assert all(np.array_equal(x.eigenvalues, y.eigenvalues) for x, y in zip(a, b))


def test_ks_rejects_unnormalized_prediction():
    s = sample_spectrum(Atomic([1.0], [1.0]), Atomic([1.0], [1.0]), 4, 0)
    with pytest.raises(ValueError):
        ks_distance(s, PointLaw(1.0, mass=0.9))


def test_ks_of_tied_sample():
    # half the sample on the atom, half above it
    from freemult.rmt import SpectrumSample

    s = SpectrumSample(4, 0, np.array([0.0, 0.0, 1.0, 1.0]), "")
    assert ks_distance(s, PointLaw(0.0)) == pytest.approx(0.5)
    s = SpectrumSample(4, 0, np.array([0.0, 0.0, 0.0, 0.0]), "")
    assert ks_distance(s, PointLaw(0.0)) == 0.0


def test_monte_carlo_is_close_to_prediction(fig1_law):
    mu, nu = model_pair("fig1")
    ks = ks_distances(run_seeds(mu, nu, 256, range(5)), fig1_law)
    assert np.mean(ks) < 0.03


def test_negative_control(fig1_law):
    mu, nu = model_pair("fig1")
    wrong = convolve(Atomic([-1.0, 3.0], [0.5, 0.5]), nu, np.linspace(-10, 10, 500))
    samples = run_seeds(mu, nu, 256, range(3))
    assert np.min(ks_distances(samples, wrong)) > 0.1
    assert np.max(ks_distances(samples, fig1_law)) < 0.1
