"""
Random-matrix check of free multiplicative convolutions.

If A and B are deterministic diagonal matrices with spectral
distributions μ and ν (ν on [0, ∞)) and U is Haar distributed, the
eigenvalue distribution of ``√B U* A U √B`` approaches μ⊠ν as the size
grows. This module samples that model reproducibly and scores the
spectra against a computed law with the Kolmogorov-Smirnov distance.
"""

from __future__ import annotations

import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .measures import Atomic

__all__ = ["haar_unitary", "SpectrumSample", "atom_counts", "sample_spectrum",
           "jacobi_eigvalsh", "ks_distance", "ks_distances", "model_pair", "run_seeds",
           "thread_count"]

THREADS_ENV = "FREEMULT_THREADS"


def thread_count() -> int:
    """Worker threads for seed-parallel runs, from ``FREEMULT_THREADS``."""
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


def _generator(seed: int, draw: int = 0) -> np.random.Generator:
    # counter-based stream keyed by (seed, draw index)
    return np.random.Generator(np.random.Philox(key=[seed % 2 ** 64, draw % 2 ** 64]))


def haar_unitary(n: int, seed: int, draw: int = 0) -> np.ndarray:
    """Haar-distributed n×n unitary matrix.

    QR factorization of a complex Ginibre matrix, with the columns of Q
    rotated so that R has a positive diagonal.

    Examples
    --------
    >>> u = haar_unitary(4, seed=1)
    >>> bool(np.allclose(u.conj().T @ u, np.eye(4)))
    True
    """
    if n < 1:
        raise ValueError("matrix size must be at least 1")
    rng = _generator(seed, draw)
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    return q * (d / np.abs(d))[None, :]


@dataclass(frozen=True)
class SpectrumSample:
    """Sorted eigenvalues of one draw of the product model."""

    matrix_size: int
    seed: int
    eigenvalues: np.ndarray
    model_descriptor: str


def atom_counts(masses, n: int) -> np.ndarray:
    """Integer multiplicities summing to n, by largest remainder."""
    m = np.asarray(masses, dtype=float)
    raw = m * n
    base = np.floor(raw).astype(int)
    short = n - base.sum()
    order = np.argsort(-(raw - base), kind="stable")
    base[order[:short]] += 1
    return base


def _diag_entries(mu: Atomic, n: int) -> np.ndarray:
    counts = atom_counts(mu.masses, n)
    if np.max(np.abs(counts / n - mu.masses)) > 0.01:
        warnings.warn(f"n={n} cannot represent the masses of {mu.descriptor} within 1%",
                      stacklevel=3)
    return np.repeat(mu.positions, counts)


def jacobi_eigvalsh(h: np.ndarray, tol: float = 1e-12, max_sweeps: int = 50) -> np.ndarray:
    """Eigenvalues of a Hermitian matrix by cyclic Jacobi rotations.

    Each (p, q) rotation first removes the phase of ``h[p, q]`` and then
    applies the real symmetric 2×2 Schur rotation. Intended for small
    matrices and cross-checks.
    """
    a = np.array(h, dtype=complex)
    n = a.shape[0]
    norm = np.linalg.norm(a)
    for _ in range(max_sweeps):
        off = np.linalg.norm(a - np.diag(np.diagonal(a)))
        if off <= tol * max(norm, 1e-300):
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) <= 1e-300:
                    continue
                phase = apq / abs(apq)
                tau = (a[q, q].real - a[p, p].real) / (2 * abs(apq))
                t = (1.0 if tau >= 0 else -1.0) / (abs(tau) + np.sqrt(1 + tau * tau))
                c = 1 / np.sqrt(1 + t * t)
                s = t * c
                u = np.array([[c, s], [-s * np.conj(phase), c * np.conj(phase)]])
                idx = [p, q]
                a[:, idx] = a[:, idx] @ u
                a[idx, :] = u.conj().T @ a[idx, :]
    return np.sort(np.diagonal(a).real)


def sample_spectrum(mu: Atomic, nu: Atomic, n: int, seed: int, draw: int = 0,
                    method: str = "lapack") -> SpectrumSample:
    """Eigenvalues of ``√B U* A U √B`` for one Haar draw.

    Parameters
    ----------
    mu : Atomic
        Spectral distribution of A (any real atoms).
    nu : Atomic
        Spectral distribution of B, atoms in [0, ∞).
    n : int
        Matrix size; masses are rounded to integer multiplicities.
    seed, draw : int
        Key of the random stream.
    method : {"lapack", "jacobi"}
    """
    if np.any(nu.positions < 0):
        raise ValueError("the second measure must live on [0, inf)")
    a = _diag_entries(mu, n)
    b = np.sqrt(_diag_entries(nu, n))
    u = haar_unitary(n, seed, draw)
    v = u * b[None, :]
    m = v.conj().T @ (a[:, None] * v)
    m = (m + m.conj().T) / 2
    if method == "jacobi":
        ev = jacobi_eigvalsh(m)
    elif method == "lapack":
        ev = np.linalg.eigvalsh(m)
    else:
        raise ValueError(f"unknown eigensolver {method!r}")
    return SpectrumSample(n, seed, np.sort(ev), f"({mu.descriptor}) [x] ({nu.descriptor})")


def _snap(ev, atoms, scale):
    ev = ev.copy()
    for p, _ in atoms:
        ev[np.abs(ev - p) <= 1e-8 * scale] = p
    return ev


def _ks_from_cdf(ev, F, F_left):
    # compare at distinct values so tied eigenvalues on an atom form one jump
    n = ev.size
    last = np.r_[ev[1:] != ev[:-1], True]
    first = np.r_[True, ev[1:] != ev[:-1]]
    upper = np.abs(F[last] - np.flatnonzero(last) / n - 1 / n)
    lower = np.abs(F_left[first] - np.flatnonzero(first) / n)
    return float(max(upper.max(), lower.max()))


def ks_distances(samples: list[SpectrumSample], predicted, check_mass: bool = True) -> np.ndarray:
    """KS distances of several samples to one predicted law.

    Parameters
    ----------
    samples : list of SpectrumSample
    predicted : ConvolutionMeasure
        Needs ``cdf``, ``atoms`` and ``total_mass``.
    check_mass : bool
        Reject predictions whose total mass is off by more than 1e-2.

    Notes
    -----
    Eigenvalues within 1e-8 (relative) of a predicted atom are placed on
    the atom, so rounding noise does not split the jump.
    """
    if check_mass:
        mass = predicted.total_mass()
        if abs(mass - 1) > 1e-2:
            raise ValueError(f"predicted law has mass {mass:.4f}, not 1")
    atoms = [(p, m) for p, m in predicted.atoms if m > 0]
    scale = max(1.0, max((abs(p) for p, _ in atoms), default=1.0))
    evs = [_snap(s.eigenvalues, atoms, scale) for s in samples]
    pts = np.unique(np.concatenate(evs))
    F = predicted.cdf(pts)
    jump = np.zeros_like(pts)
    for p, m in atoms:
        jump[pts == p] += m
    F_left = F - jump
    out = []
    for ev in evs:
        k = np.searchsorted(pts, ev)
        out.append(_ks_from_cdf(ev, F[k], F_left[k]))
    return np.array(out)


def ks_distance(sample: SpectrumSample, predicted, check_mass: bool = True) -> float:
    """Kolmogorov-Smirnov distance between a spectrum and a predicted law."""
    return float(ks_distances([sample], predicted, check_mass)[0])


def model_pair(name: str) -> tuple[Atomic, Atomic]:
    """The (μ, ν) pair of a named model: ``fig1`` or ``fig2``."""
    if name == "fig1":
        return Atomic([1.0, -3.0], [0.5, 0.5]), Atomic([1.0, 3.0], [0.5, 0.5])
    if name == "fig2":
        return Atomic([1.0, -2.0], [1 / 3, 2 / 3]), Atomic([1.0, 0.0], [0.5, 0.5])
    raise ValueError(f"unknown model {name!r}")


def run_seeds(mu: Atomic, nu: Atomic, n: int, seeds, threads: int | None = None
              ) -> list[SpectrumSample]:
    """Sample one spectrum per seed, in parallel threads; output order follows `seeds`."""
    seeds = list(seeds)
    threads = thread_count() if threads is None else threads
    if threads <= 1:
        return [sample_spectrum(mu, nu, n, s) for s in seeds]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(lambda s: sample_spectrum(mu, nu, n, s), seeds))
