"""
Probability measures on the real line and their analytic transforms.

A measure is anything that can evaluate its Cauchy transform

    G(z) = ∫ dμ(x) / (z - x),    z off the real line,

or, equivalently, its eta transform η(z) = 1 - z / G(1/z). The remaining
companions are derived from these two:

    F(z) = 1 / G(z),        ψ(z) = G(1/z) / z - 1,
    h(z) = η(z) / z,        M(z) = 1 / η(1/z),       H(z) = M(z) / z.

All transform methods are vectorized over numpy arrays. Measures are
immutable, so they can be shared freely between threads.

Recovering a measure from its Cauchy transform (Stieltjes inversion) is
done by `stieltjes_invert_density` and `atom_mass`, which evaluate
``G(x + iε)`` along a geometric ε schedule and extrapolate to ε = 0.
"""

from __future__ import annotations

import enum
import math
import re
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .tables import TransformTable, format_real

__all__ = [
    "Domain", "ComplexPoint", "arg0", "MeasureError", "TransformError", "DomainError",
    "Measure", "Atomic", "PointMass", "GridDensity", "Semicircle", "MarchenkoPastur",
    "CauchyDist", "BooleanStable", "FreeStable", "Dilation", "EtaMeasure",
    "is_admissible", "cauchy_transform", "derived_transforms",
    "DEFAULT_EPSILONS", "stieltjes_invert_density", "atom_mass", "atom_mass_estimate",
    "AtomEstimate", "parse_measure", "format_measure",
]

DEFAULT_EPSILONS = 1e-2 * 2.0 ** -np.arange(13)
ATOM_THRESHOLD = 1e-6
TINY_G = 1e-300


class MeasureError(ValueError):
    """Invalid or unnormalized measure data."""


class DomainError(ValueError):
    """A transform was requested outside its domain."""


class TransformError(ArithmeticError):
    """A transform hit a zero of the Cauchy transform."""


class Domain(enum.Enum):
    UPPER = "upper"
    LOWER = "lower"
    SLIT = "slit"


def arg0(z):
    """Argument of `z` in [0, 2π), zero on the positive real axis."""
    return np.mod(np.angle(z), 2 * np.pi)


@dataclass(frozen=True)
class ComplexPoint:
    """A complex number tagged with the domain it is meant to live in.

    Parameters
    ----------
    value : complex
    domain : Domain
    boundary : bool
        Marks a boundary-limit evaluation point (a real value whose
        transform is read as a limit from the tagged side).
    """

    value: complex
    domain: Domain
    boundary: bool = False

    def __post_init__(self):
        v = complex(self.value)
        object.__setattr__(self, "value", v)
        if self.boundary:
            return
        ok = {
            Domain.UPPER: v.imag > 0,
            Domain.LOWER: v.imag < 0,
            Domain.SLIT: not (v.imag == 0 and v.real >= 0),
        }[self.domain]
        if not ok:
            raise DomainError(f"{v} is not inside the {self.domain.value} domain")

    @property
    def arg(self) -> float:
        return float(arg0(self.value))

    def __complex__(self):
        return self.value


def _as_complex(z):
    if isinstance(z, ComplexPoint):
        return np.asarray(z.value, dtype=complex)
    return np.asarray(z, dtype=complex)


def is_admissible(alpha: float, rho: float) -> bool:
    """Whether (α, ρ) is an admissible stable parameter pair.

    The admissible set is ``(0,1] x [0,1]`` together with
    ``{1 < α <= 2, 1 - 1/α <= ρ <= 1/α}``.
    """
    tol = 1e-14
    if 0 < alpha <= 1:
        return -tol <= rho <= 1 + tol
    if 1 < alpha <= 2:
        return 1 - 1 / alpha - tol <= rho <= 1 / alpha + tol
    return False


# ---------------------------------------------------------------------------
# Base class
# ---------------------------------------------------------------------------

class Measure:
    """Base class for probability measures on the real line.

    Subclasses override `cauchy` or `eta` (or both); each default is
    written in terms of the other.

    Attributes
    ----------
    is_positive : bool
        True when the support lies in [0, ∞). This unlocks evaluation of
        η on the slit plane ℂ∖[0, ∞).
    mass_at_zero : float
    point_mass : float or None
        The position ``a`` if the measure is ``δ_a``.
    scale : float
        Typical size of the support, used for default grids.
    """

    is_positive: bool = False
    mass_at_zero: float = 0.0
    point_mass: float | None = None
    scale: float = 1.0
    descriptor: str = "measure"

    def cauchy(self, z):
        z = _as_complex(z)
        return (1 / z) / (1 - self.eta(1 / z))

    def eta(self, z):
        z = _as_complex(z)
        g = self.cauchy(1 / z)
        if np.any(np.abs(g) < TINY_G):
            raise TransformError(f"{self.descriptor}: Cauchy transform vanishes at 1/z")
        return 1 - z / g

    def reciprocal_cauchy(self, z):
        z = _as_complex(z)
        return 1 / self.cauchy(z)

    def psi(self, z):
        z = _as_complex(z)
        e = self.eta(z)
        return e / (1 - e)

    def h(self, z):
        z = _as_complex(z)
        return self.eta(z) / z

    def M(self, z):
        z = _as_complex(z)
        return 1 / self.eta(1 / z)

    def H(self, z):
        z = _as_complex(z)
        return self.M(z) / z

    def atoms(self) -> list[tuple[float, float]]:
        """Known atoms ``(position, mass)``; empty when none are known."""
        return [(0.0, self.mass_at_zero)] if self.mass_at_zero > 0 else []

    def __repr__(self):
        return self.descriptor


# ---------------------------------------------------------------------------
# Atomic measures
# ---------------------------------------------------------------------------

_CHUNK = 1 << 20


def _chunked(fn, z, width):
    """Apply `fn` to a flat array in chunks so that z x atoms stays small."""
    flat = z.reshape(-1)
    step = max(1, _CHUNK // max(width, 1))
    if flat.size <= step:
        return fn(flat).reshape(z.shape)
    out = np.empty(flat.shape, dtype=complex)
    for s in range(0, flat.size, step):
        out[s:s + step] = fn(flat[s:s + step])
    return out.reshape(z.shape)


class Atomic(Measure):
    """Finite sum of point masses.

    Parameters
    ----------
    positions, masses : sequences of float
        Distinct positions and positive masses summing to one.
    normalize : bool
        Rescale masses to sum to one instead of rejecting them.
    """

    def __init__(self, positions: Sequence[float], masses: Sequence[float],
                 normalize: bool = False):
        x = np.asarray(positions, dtype=float).reshape(-1)
        m = np.asarray(masses, dtype=float).reshape(-1)
        if x.size == 0 or x.shape != m.shape:
            raise MeasureError("positions and masses must be nonempty and of equal length")
        if np.any(m <= 0) or not np.all(np.isfinite(x)):
            raise MeasureError("masses must be positive and positions finite")
        if np.unique(x).size != x.size:
            raise MeasureError("atom positions must be distinct")
        total = m.sum()
        if normalize:
            m = m / total
        elif abs(total - 1) > 1e-12:
            raise MeasureError(f"atom masses sum to {float(total):.17g}, not 1")
        order = np.argsort(x)
        self.positions = x[order]
        self.masses = m[order]
        self.positions.setflags(write=False)
        self.masses.setflags(write=False)
        self.is_positive = bool(np.all(self.positions >= 0))
        self.mass_at_zero = float(self.masses[self.positions == 0].sum())
        self.point_mass = float(self.positions[0]) if x.size == 1 else None
        self.scale = float(max(np.max(np.abs(self.positions)), 1e-300))
        self.descriptor = "atomic:" + "".join(
            f"({format_real(a)},{format_real(b)})" for a, b in zip(self.positions, self.masses))

    def cauchy(self, z):
        z = _as_complex(z)
        x, m = self.positions, self.masses
        return _chunked(lambda v: (m / (v[:, None] - x)).sum(axis=1), z, x.size)

    def _weighted(self, z):
        # Σ m x / (1 - x z): free of the cancellation in 1 - z/G(1/z) near 0
        x, m = self.positions, self.masses
        return _chunked(lambda v: (m * x / (1 - v[:, None] * x)).sum(axis=1), z, x.size)

    def psi(self, z):
        z = _as_complex(z)
        return z * self._weighted(z)

    def eta(self, z):
        p = self.psi(z)
        return p / (1 + p)

    def h(self, z):
        z = _as_complex(z)
        s = self._weighted(z)
        return s / (1 + z * s)

    def atoms(self):
        return list(zip(self.positions.tolist(), self.masses.tolist()))

    def __eq__(self, other):
        return (isinstance(other, Atomic) and np.array_equal(self.positions, other.positions)
                and np.array_equal(self.masses, other.masses))

    __hash__ = None


class PointMass(Atomic):
    """The Dirac measure δ_a."""

    def __init__(self, a: float):
        super().__init__([a], [1.0])
        self.a = float(a)
        self.descriptor = f"law:point a={format_real(a)}"

    def cauchy(self, z):
        return 1 / (_as_complex(z) - self.a)

    def eta(self, z):
        return self.a * _as_complex(z)

    def h(self, z):
        return np.full(np.shape(z), self.a, dtype=complex)


# ---------------------------------------------------------------------------
# Densities on a grid
# ---------------------------------------------------------------------------

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(8)


class GridDensity(Measure):
    """Piecewise-linear density on a grid plus an optional atom at zero.

    Parameters
    ----------
    grid : array_like
        Strictly increasing nodes.
    density : array_like
        Nonnegative values at the nodes; the density is interpolated
        linearly and vanishes outside the grid.
    atom_at_zero : float
        Mass of an atom at the origin, in [0, 1).
    normalize : bool
        Rescale the density so that the total mass is one. Without it a
        total mass off by more than 1e-6 is rejected; smaller deviations
        are absorbed by rescaling.
    """

    def __init__(self, grid, density, atom_at_zero: float = 0.0, normalize: bool = False):
        x = np.asarray(grid, dtype=float).reshape(-1)
        f = np.asarray(density, dtype=float).reshape(-1)
        if x.size < 2 or x.shape != f.shape:
            raise MeasureError("grid and density must have equal length >= 2")
        if np.any(np.diff(x) <= 0):
            raise MeasureError("grid must be strictly increasing")
        if np.any(f < 0) or not np.all(np.isfinite(f)):
            raise MeasureError("density must be finite and nonnegative")
        if not 0 <= atom_at_zero < 1:
            raise MeasureError("atom_at_zero must lie in [0, 1)")
        mass = float(np.trapezoid(f, x))
        target = 1 - atom_at_zero
        if mass <= 0:
            raise MeasureError("density has zero mass")
        if not normalize and abs(mass - target) > 1e-6:
            raise MeasureError(f"total mass {mass + atom_at_zero!r} differs from 1")
        if abs(mass - target) > 1e-14:
            f = f * (target / mass)
        self.grid, self.density = x, f
        self.grid.setflags(write=False)
        self.density.setflags(write=False)
        self.atom_at_zero = float(atom_at_zero)
        self.mass_at_zero = self.atom_at_zero
        self.is_positive = bool(x[0] >= 0 or np.all(f[x < 0] == 0))
        self.scale = float(max(abs(x[0]), abs(x[-1])))
        self.descriptor = f"density:<{x.size} nodes on [{x[0]:.6g},{x[-1]:.6g}]>"
        self._h = np.diff(x)
        self._slope = np.diff(f) / self._h
        mid = 0.5 * (x[:-1] + x[1:])
        self._nodes = (mid[:, None] + 0.5 * self._h[:, None] * _GL_NODES).reshape(-1)
        vals = np.interp(self._nodes, x, f)
        self._wts = (0.5 * self._h[:, None] * _GL_WEIGHTS).reshape(-1) * vals

    def _cauchy_point(self, z: complex) -> complex:
        x, f, h = self.grid, self.density, self._h
        lo, hi = x[:-1], x[1:]
        dist = np.maximum(np.maximum(lo - z.real, z.real - hi), 0.0)
        dist = np.hypot(dist, z.imag)
        near = dist < 8 * h
        far_w = np.repeat(~near, _GL_NODES.size)
        total = np.sum(self._wts[far_w] / (z - self._nodes[far_w]))
        if np.any(near):
            i = np.flatnonzero(near)
            # exact integral of the linear interpolant against 1/(z - x)
            a = f[i] + self._slope[i] * (z - lo[i])
            log_ratio = np.log(z - lo[i]) - np.log(z - hi[i])
            total += np.sum(a * log_ratio - self._slope[i] * h[i])
        if self.atom_at_zero:
            total += self.atom_at_zero / z
        return total

    def cauchy(self, z):
        z = _as_complex(z)
        out = np.array([self._cauchy_point(complex(v)) for v in z.reshape(-1)], dtype=complex)
        return out.reshape(z.shape)

    def atoms(self):
        return [(0.0, self.atom_at_zero)] if self.atom_at_zero > 0 else []


# ---------------------------------------------------------------------------
# Parametric laws
# ---------------------------------------------------------------------------

def _sqrt_pair(z, a, b):
    """√(z-a)√(z-b): analytic off [a, b] and ~ z at infinity."""
    return np.sqrt(z - a) * np.sqrt(z - b)


class Semicircle(Measure):
    """Semicircle law with mean `a` and variance `v`."""

    def __init__(self, a: float = 0.0, v: float = 1.0):
        if v <= 0:
            raise MeasureError("semicircle variance must be positive")
        self.a, self.v = float(a), float(v)
        self.scale = abs(self.a) + 2 * math.sqrt(self.v)
        self.is_positive = self.a - 2 * math.sqrt(self.v) >= 0
        self.descriptor = f"law:semicircle a={format_real(a)} v={format_real(v)}"

    def cauchy(self, z):
        # F = (z - a + s)/2 never vanishes and has no cancellation at large |z|
        return 1 / self.reciprocal_cauchy(z)

    def reciprocal_cauchy(self, z):
        z = _as_complex(z)
        r = 2 * math.sqrt(self.v)
        return (z - self.a + _sqrt_pair(z, self.a - r, self.a + r)) / 2

    def eta(self, z):
        # from F(z) = z - a - v G(z); avoids the cancellation in 1 - z F(1/z) near 0
        z = _as_complex(z)
        return z * (self.a + self.v * self.cauchy(1 / z))

    def density(self, x):
        x = np.asarray(x, dtype=float)
        r2 = 4 * self.v - (x - self.a) ** 2
        return np.sqrt(np.maximum(r2, 0)) / (2 * np.pi * self.v)


class MarchenkoPastur(Measure):
    """Free Poisson law with rate `rate` and jump size 1.

    For rate 1 this is the Marchenko-Pastur law with density
    ``sqrt((4 - x) / x) / (2π)`` on (0, 4). For rate < 1 it carries an
    atom of mass ``1 - rate`` at the origin.
    """

    is_positive = True

    def __init__(self, rate: float = 1.0):
        if rate <= 0:
            raise MeasureError("rate must be positive")
        self.rate = float(rate)
        self.lo = (1 - math.sqrt(self.rate)) ** 2
        self.hi = (1 + math.sqrt(self.rate)) ** 2
        self.mass_at_zero = max(0.0, 1 - self.rate)
        self.scale = self.hi
        self.descriptor = "law:mp" + ("" if rate == 1 else f" rate={format_real(rate)}")

    def cauchy(self, z):
        z = _as_complex(z)
        s = _sqrt_pair(z, self.lo, self.hi)
        n1, n2 = z + 1 - self.rate - s, z + 1 - self.rate + s
        # n1 n2 = 4z: use whichever of the two forms has no cancellation
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(np.abs(n2) >= np.abs(n1), 2 / n2, n1 / (2 * z))

    def eta(self, z):
        # from F(z) = z - rate/(1 - G(z)), the free Poisson R-transform
        z = _as_complex(z)
        return self.rate * z / (1 - self.cauchy(1 / z))

    def density(self, x):
        x = np.asarray(x, dtype=float)
        inside = (x > self.lo) & (x < self.hi)
        out = np.zeros_like(x)
        xi = x[inside]
        out[inside] = np.sqrt((self.hi - xi) * (xi - self.lo)) / (2 * np.pi * xi)
        return out


class CauchyDist(Measure):
    """Cauchy law with location `a` and scale `b` > 0."""

    def __init__(self, a: float = 0.0, b: float = 1.0):
        if b <= 0:
            raise MeasureError("Cauchy scale must be positive")
        self.a, self.b = float(a), float(b)
        self.scale = abs(self.a) + self.b
        self.descriptor = f"law:cauchy a={format_real(a)} b={format_real(b)}"

    def cauchy(self, z):
        z = _as_complex(z)
        if np.any(z.imag == 0):
            raise DomainError("the Cauchy law has no transform on the real line")
        shift = np.where(z.imag > 0, self.a - 1j * self.b, self.a + 1j * self.b)
        return 1 / (z - shift)

    def eta(self, z):
        z = _as_complex(z)
        return np.where(z.imag >= 0, self.a + 1j * self.b, self.a - 1j * self.b) * z

    def density(self, x):
        x = np.asarray(x, dtype=float)
        return self.b / np.pi / ((x - self.a) ** 2 + self.b ** 2)


class BooleanStable(Measure):
    """Boolean stable law with ``η(z) = -(e^{-iρπ} z)^α`` on ℍ⁺."""

    def __init__(self, alpha: float, rho: float):
        if not is_admissible(alpha, rho):
            raise MeasureError(f"(alpha, rho) = ({alpha}, {rho}) is not admissible")
        self.alpha, self.rho = float(alpha), float(rho)
        self.is_positive = self.rho == 1 and self.alpha <= 1
        self.descriptor = (f"law:booleanstable alpha={format_real(alpha)} "
                           f"rho={format_real(rho)}")
        if self.alpha == 1 and self.rho in (0.0, 1.0):
            self.point_mass = -1.0 if self.rho == 0 else 1.0

    def eta(self, z):
        z = _as_complex(z)
        upper = (z.imag > 0) | ((z.imag == 0) & (z.real < 0))
        w = np.where(upper, z, np.conj(z))
        val = -(np.exp(-1j * np.pi * self.rho) * w) ** self.alpha
        return np.where(upper, val, np.conj(val))

    def cauchy(self, z):
        z = _as_complex(z)
        return (1 / z) / (1 - self.eta(1 / z))


class FreeStable(Measure):
    """Free stable law with Voiculescu-type transform ``C(z) = -(e^{-iρπ} z)^α``.

    The Cauchy transform is evaluated by `freemult.stable.free_stable_cauchy`.
    """

    def __init__(self, alpha: float, rho: float):
        if not is_admissible(alpha, rho):
            raise MeasureError(f"(alpha, rho) = ({alpha}, {rho}) is not admissible")
        self.alpha, self.rho = float(alpha), float(rho)
        self.is_positive = self.rho == 1 and self.alpha <= 1
        self.descriptor = (f"law:freestable alpha={format_real(alpha)} "
                           f"rho={format_real(rho)}")
        if self.alpha == 1 and self.rho in (0.0, 1.0):
            self.point_mass = -1.0 if self.rho == 0 else 1.0

    def cauchy(self, z):
        from .stable import free_stable_cauchy
        z = _as_complex(z)
        lower = (z.imag < 0) | ((z.imag == 0) & (z.real < 0))
        w = np.where(lower, z, np.conj(z))
        g = free_stable_cauchy(self.alpha, self.rho, w)
        return np.where(lower, g, np.conj(g))


class Dilation(Measure):
    """Push-forward ``D_c(μ)`` of `base` under ``x ↦ c x``, c ≠ 0."""

    def __init__(self, base: Measure, c: float):
        if c == 0:
            raise MeasureError("dilation factor must be nonzero")
        self.base, self.c = base, float(c)
        self.is_positive = base.is_positive if c > 0 else False
        self.mass_at_zero = base.mass_at_zero
        self.scale = base.scale * abs(c)
        if base.point_mass is not None:
            self.point_mass = base.point_mass * c
        self.descriptor = f"D_{format_real(c)}({base.descriptor})"

    def cauchy(self, z):
        z = _as_complex(z)
        return self.base.cauchy(z / self.c) / self.c

    def eta(self, z):
        return self.base.eta(self.c * _as_complex(z))

    def atoms(self):
        return [(self.c * p, m) for p, m in self.base.atoms()]


class EtaMeasure(Measure):
    """Measure given only through a vectorized η evaluator on ℍ⁺.

    Values on ℂ⁻ follow by reflection ``η(z̄) = conj η(z)``. When the
    measure is declared positive, negative real arguments are passed to
    the evaluator unchanged.
    """

    def __init__(self, eta_upper: Callable[[np.ndarray], np.ndarray], descriptor: str,
                 is_positive: bool = False, mass_at_zero: float = 0.0, scale: float = 1.0,
                 atoms: Sequence[tuple[float, float]] = ()):
        self._eta_upper = eta_upper
        self.descriptor = descriptor
        self.is_positive = is_positive
        self.mass_at_zero = mass_at_zero
        self.scale = scale
        self._atoms = list(atoms)

    def eta(self, z):
        z = _as_complex(z)
        upper = (z.imag > 0) | ((z.imag == 0) & (z.real < 0))
        w = np.where(upper, z, np.conj(z))
        val = np.asarray(self._eta_upper(w.reshape(-1)), dtype=complex).reshape(z.shape)
        return np.where(upper, val, np.conj(val))

    def atoms(self):
        return list(self._atoms) or super().atoms()


# ---------------------------------------------------------------------------
# Public transform functions
# ---------------------------------------------------------------------------

def cauchy_transform(mu: Measure, z) -> np.ndarray:
    """Cauchy transform ``G_μ(z) = ∫ dμ(x)/(z - x)``.

    Parameters
    ----------
    mu : Measure
    z : complex, array_like or ComplexPoint
        Points strictly off the real line. A `ComplexPoint` flagged as a
        boundary point is accepted on the real line.

    Returns
    -------
    ndarray or complex

    Raises
    ------
    DomainError
        If a point lies on the real line.
    """
    boundary = isinstance(z, ComplexPoint) and z.boundary
    zz = _as_complex(z)
    if not boundary and np.any(zz.imag == 0):
        raise DomainError("the Cauchy transform needs points off the real line")
    out = mu.cauchy(zz)
    return out if np.ndim(out) else complex(out)


def derived_transforms(mu: Measure, z, kind: str):
    """Evaluate one of F, psi, eta, h, H, M at `z`.

    η (and with it ψ, h) is evaluated on ℍ⁺ and by reflection on ℂ⁻; for
    positive measures the slit plane ℂ∖[0, ∞) is allowed.

    Raises
    ------
    DomainError
        For real points where the transform is not defined.
    TransformError
        When the evaluation divides by a vanishing Cauchy transform.
    """
    zz = _as_complex(z)
    real = zz.imag == 0
    if kind == "F":
        if np.any(real):
            raise DomainError("F needs points off the real line")
        g = mu.cauchy(zz)
        if np.any(np.abs(g) < TINY_G):
            raise TransformError("G vanishes at the requested point")
        out = 1 / g
    elif kind in ("psi", "eta", "h", "H", "M"):
        w = 1 / zz if kind in ("H", "M") else zz
        bad = real & ~((w.real < 0) & mu.is_positive)
        if np.any(bad):
            raise DomainError(f"{kind} is not defined at real points for {mu.descriptor}")
        out = {"psi": mu.psi, "eta": mu.eta, "h": mu.h, "H": mu.H, "M": mu.M}[kind](zz)
        if not np.all(np.isfinite(out)):
            raise TransformError(f"{kind} is infinite at a requested point")
    else:
        raise ValueError(f"unknown transform kind {kind!r}")
    return out if np.ndim(out) else complex(out)


# ---------------------------------------------------------------------------
# Stieltjes inversion
# ---------------------------------------------------------------------------

def _richardson(values, eps):
    """Two-point Richardson extrapolation along the first axis."""
    e0, e1 = eps[:-1], eps[1:]
    shape = (-1,) + (1,) * (values.ndim - 1)
    e0, e1 = e0.reshape(shape), e1.reshape(shape)
    return (e0 * values[1:] - e1 * values[:-1]) / (e0 - e1)


def _sweep(G, x, eps):
    rows = []
    for e in eps:
        rows.append(np.asarray(G(x + 1j * e), dtype=complex))
    return np.array(rows)


def stieltjes_invert_density(G: Callable, x_grid, epsilon_schedule=None, tol: float = 1e-8,
                             conv_tol: float = 1e-4, descriptor: str = "") -> TransformTable:
    """Density of the absolutely continuous part from boundary values of G.

    Evaluates ``-Im G(x + iε)/π`` for every ε in the schedule (largest
    first) and extrapolates to ε = 0 with two-point Richardson steps.

    Parameters
    ----------
    G : callable
        Vectorized Cauchy transform, called once per ε level with the
        array ``x_grid + iε``.
    x_grid : array_like
        Strictly increasing real points.
    epsilon_schedule : array_like, optional
        Decreasing positive heights; defaults to ``1e-2 * 2**-k``,
        ``k = 0..12``.
    tol : float
        Values in (-tol, 0) are clipped to zero.
    conv_tol : float
        A point is flagged singular when the last two extrapolated values
        differ by more than ``conv_tol * (1 + |value|)``.

    Returns
    -------
    TransformTable
        Kind ``density``; ``metadata['singular']`` holds the flags and
        ``metadata['raw']`` the value at the smallest ε.
    """
    x = np.asarray(x_grid, dtype=float)
    eps = np.asarray(DEFAULT_EPSILONS if epsilon_schedule is None else epsilon_schedule,
                     dtype=float)
    if eps.size < 2 or np.any(np.diff(eps) >= 0) or np.any(eps <= 0):
        raise ValueError("epsilon schedule must be positive and decreasing, length >= 2")
    d = -_sweep(G, x, eps).imag / np.pi
    r = _richardson(d, eps)
    est = r[-1]
    singular = ~np.isfinite(est)
    if r.shape[0] >= 2:
        singular |= np.abs(r[-1] - r[-2]) > conv_tol * (1 + np.abs(r[-1]))
    singular |= est < -tol
    est = np.where(np.isfinite(est), est, 0.0)
    est = np.where(est < 0, 0.0, est)
    return TransformTable("density", x, est, descriptor,
                          {"singular": singular, "raw": d[-1], "epsilons": eps})


@dataclass(frozen=True)
class AtomEstimate:
    """Extrapolated atom mass with a reliability flag."""

    position: float
    mass: float
    reliable: bool
    estimates: np.ndarray

    def __float__(self):
        return self.mass


def atom_mass_estimate(G: Callable, a: float, epsilon_schedule=None) -> AtomEstimate:
    """Mass at `a` from ``Re[iε G(a + iε)]`` extrapolated to ε = 0.

    Masses below 1e-6 are reported as zero. The estimate is marked
    unreliable when the extrapolated sequence oscillates.
    """
    eps = np.asarray(DEFAULT_EPSILONS if epsilon_schedule is None else epsilon_schedule,
                     dtype=float)
    vals = np.array([(1j * e * complex(np.asarray(G(np.array([a + 1j * e])))[0])).real
                     for e in eps])
    r = _richardson(vals, eps)
    mass = float(r[-1])
    steps = np.diff(r[-4:])
    reliable = bool(np.all(np.isfinite(r)))
    if steps.size >= 2:
        tiny = 1e-9 * (1 + abs(mass))
        signs = np.sign(steps[np.abs(steps) > tiny])
        reliable &= bool(np.all(signs == signs[0])) if signs.size else True
        reliable &= abs(r[-1] - r[-2]) < 1e-3
    if abs(mass) < ATOM_THRESHOLD:
        mass = 0.0
    return AtomEstimate(float(a), mass, reliable, r)


def atom_mass(G: Callable, a: float, epsilon_schedule=None) -> float:
    """Mass of the atom at `a` recovered from the Cauchy transform `G`."""
    return atom_mass_estimate(G, a, epsilon_schedule).mass


# ---------------------------------------------------------------------------
# Text format
# ---------------------------------------------------------------------------

_LAWS = {
    "freestable": (FreeStable, ("alpha", "rho")),
    "booleanstable": (BooleanStable, ("alpha", "rho")),
    "semicircle": (Semicircle, ("a", "v")),
    "mp": (MarchenkoPastur, ("rate",)),
    "cauchy": (CauchyDist, ("a", "b")),
    "point": (PointMass, ("a",)),
}
_NUM = r"[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?"


def parse_measure(text: str) -> Measure:
    """Parse a measure literal.

    Formats
    -------
    ``atomic: (x1,m1) (x2,m2) ...``
    ``density: path.csv [atom0=m]`` with two columns ``x,f``
    ``law: name key=value ...`` with name one of freestable,
    booleanstable, semicircle, mp, cauchy, point.
    """
    head, _, body = text.strip().partition(":")
    head, body = head.strip().lower(), body.strip()
    if head == "atomic":
        pairs = re.findall(rf"\(\s*({_NUM})\s*,\s*({_NUM})\s*\)", body)
        leftover = re.sub(rf"\(\s*{_NUM}\s*,\s*{_NUM}\s*\)", "", body).strip()
        if not pairs or leftover:
            raise MeasureError(f"cannot parse atomic literal {text!r}")
        return Atomic([float(p) for p, _ in pairs], [float(m) for _, m in pairs])
    if head == "density":
        parts = body.split()
        if not parts:
            raise MeasureError("density literal needs a file path")
        atom0 = 0.0
        for p in parts[1:]:
            k, _, v = p.partition("=")
            if k != "atom0":
                raise MeasureError(f"unknown density option {p!r}")
            atom0 = float(v)
        data = _read_two_columns(parts[0])
        return GridDensity(data[:, 0], data[:, 1], atom_at_zero=atom0)
    if head == "law":
        parts = body.split()
        if not parts or parts[0].lower() not in _LAWS:
            raise MeasureError(f"unknown law in {text!r}")
        cls, keys = _LAWS[parts[0].lower()]
        kwargs = {}
        for p in parts[1:]:
            k, _, v = p.partition("=")
            if k not in keys or not v:
                raise MeasureError(f"bad parameter {p!r} for law {parts[0]}")
            kwargs[k] = float(v)
        return cls(**kwargs)
    raise MeasureError(f"unknown measure literal {text!r}")


def _read_two_columns(path):
    with open(path) as fh:
        rows = [ln.strip() for ln in fh if ln.strip()]
    if rows and not re.match(_NUM, rows[0].split(",")[0].strip()):
        rows = rows[1:]
    try:
        data = np.array([[float(c) for c in r.split(",")[:2]] for r in rows])
    except ValueError as exc:
        raise MeasureError(f"{path}: {exc}") from exc
    if data.ndim != 2 or data.shape[1] != 2:
        raise MeasureError(f"{path}: expected two columns x,f")
    return data


def format_measure(mu: Measure, density_path: str | None = None) -> str:
    """Serialize a measure to the text format read by `parse_measure`.

    Grid densities are written to `density_path` as ``x,f`` CSV.
    """
    if isinstance(mu, (PointMass,)) or type(mu) in (FreeStable, BooleanStable, Semicircle,
                                                     MarchenkoPastur, CauchyDist):
        return mu.descriptor
    if isinstance(mu, Atomic):
        return "atomic: " + " ".join(f"({format_real(x)},{format_real(m)})"
                                     for x, m in zip(mu.positions, mu.masses))
    if isinstance(mu, GridDensity):
        if density_path is None:
            raise ValueError("a density path is needed to serialize a grid density")
        from .tables import write_atomic
        text = "x,f\n" + "".join(f"{format_real(a)},{format_real(b)}\n"
                                 for a, b in zip(mu.grid, mu.density))
        write_atomic(density_path, text)
        suffix = f" atom0={format_real(mu.atom_at_zero)}" if mu.atom_at_zero else ""
        return f"density: {density_path}{suffix}"
    raise ValueError(f"{mu.descriptor} has no text representation")
