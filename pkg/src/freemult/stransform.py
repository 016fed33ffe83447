"""
T- and S-transforms of probability measures on the real line.

For 0 < s < 1 the T-transform is read off the free additive power
μ^{⊞1/s} at the origin,

    T_μ(-s) = -s F_{μ^{⊞1/s}}(0) = s σ_{μ,1/s}(0) / (s - 1),

and S = 1/T wherever T ≠ 0. T is continuous on (-1, 0) with values in
ℍ⁺ ∪ ℝ, vanishes exactly on (-1, μ({0}) - 1], and is multiplicative
under ⊠ when one factor lives on [0, ∞).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .dwsolver import ConvergenceReport
from .measures import (DEFAULT_EPSILONS, BooleanStable, CauchyDist, Dilation, FreeStable,
                       MarchenkoPastur, Measure, MeasureError, Semicircle, _richardson)
from .powers import FreePoissonPower, sigma_at_zero
from .stable import s_boolean_stable, s_free_stable
from .subordination import FreeMultiplicativeConvolution
from .tables import TransformTable

__all__ = ["TSample", "default_u_grid", "t_values", "t_transform", "s_transform",
           "samples_to_table", "closed_form_s", "semicircle_s", "verify_inversion",
           "MultiplicativityReport", "verify_multiplicativity", "ClassKind",
           "Classification", "classify"]

ZERO_THRESHOLD = 1e-6


@dataclass(frozen=True)
class TSample:
    """One sample of T and S.

    ``S`` is NaN where T vanishes; `status` is one of ``ok``,
    ``boundary`` (σ on the real axis), ``zero`` (T ≡ 0 region) or
    ``not_converged``.
    """

    u: float
    T: complex
    S: complex
    report: ConvergenceReport
    status: str


def default_u_grid(n: int = 200, margin: float = 1e-3) -> np.ndarray:
    """Chebyshev-spaced points on ``(-1 + margin, -margin)``, increasing."""
    k = np.arange(n)
    x = np.cos(np.pi * (2 * k + 1) / (2 * n))[::-1]
    lo, hi = -1 + margin, -margin
    return lo + (hi - lo) * (x + 1) / 2


def _check_grid(u):
    u = np.asarray(u, dtype=float).reshape(-1)
    if u.size == 0 or np.any(u <= -1) or np.any(u >= 0):
        raise ValueError("u-grid must lie strictly inside (-1, 0)")
    return u


def t_values(mu: Measure, u, tol: float = 1e-13):
    """T_μ on a grid, returned as ``(T, BatchResult)``."""
    u = _check_grid(u)
    s = -u
    sig, res = sigma_at_zero(mu, 1 / s, tol)
    return s * sig / (s - 1), res


def t_transform(mu: Measure, u_grid, tol: float = 1e-13) -> list[TSample]:
    """T- and S-samples of `mu` on a grid in (-1, 0).

    Values with |T| below 1e-6 for ``u <= μ({0}) - 1`` are set to zero,
    as T vanishes identically there.
    """
    u = _check_grid(u_grid)
    T, res = t_values(mu, u, tol)
    zero_edge = mu.mass_at_zero - 1
    out = []
    for i, ui in enumerate(u):
        rep = res.report(i)
        ti = complex(T[i])
        status = "ok"
        if ui <= zero_edge + 1e-12 and abs(ti) <= ZERO_THRESHOLD:
            ti = 0j
            status = "zero"
        elif not rep.converged:
            status = "not_converged"
        elif rep.boundary_flag:
            status = "boundary"
        si = complex(np.nan, np.nan) if ti == 0 else 1 / ti
        out.append(TSample(float(ui), ti, si, rep, status))
    return out


def s_transform(mu: Measure, u_grid, tol: float = 1e-13) -> list[TSample]:
    """S-samples on a grid inside ``(μ({0}) - 1, 0)``."""
    if mu.point_mass == 0:
        raise MeasureError("δ₀ has no S-transform")
    u = _check_grid(u_grid)
    if np.any(u <= mu.mass_at_zero - 1):
        raise ValueError(f"S is undefined for u <= {mu.mass_at_zero - 1}")
    return t_transform(mu, u, tol)


def samples_to_table(samples: list[TSample], descriptor: str = "") -> tuple[TransformTable, dict]:
    """A T table plus the extra S and status columns for CSV output."""
    u = np.array([s.u for s in samples])
    T = np.array([s.T for s in samples])
    S = np.array([s.S for s in samples])
    status = np.array([s.status for s in samples], dtype=object)
    return TransformTable("T", u, T, descriptor), {"S": S, "status": status}


# ---------------------------------------------------------------------------
# Closed forms
# ---------------------------------------------------------------------------

def semicircle_s(a: float, u, v: float = 1.0):
    """Piecewise closed-form S-transform of the semicircle law (mean a, variance v).

    For unit variance and a >= 0,

    * ``(-a + sqrt(a² + 4u)) / (2u)`` for ``-min(1, a²/4) < u < 0``,
    * ``(-a + i sqrt(-a² - 4u)) / (2u)`` for ``-1 < u <= -a²/4`` (0 < a < 2),
    * ``-i / sqrt(-u)`` for a = 0.

    Other cases follow from ``S_{D_c μ} = S_μ / c`` and
    ``S_{D_{-1} μ} = -conj S_μ``.
    """
    u = np.asarray(u, dtype=float)
    c = math.sqrt(v)
    b = a / c
    if b < 0:
        return -np.conj(semicircle_s(-b, u)) / c
    if b == 0:
        return -1j / np.sqrt(-u) / c
    out = np.empty(u.shape, dtype=complex)
    right = u > -min(1.0, b * b / 4)
    out[right] = (-b + np.sqrt(b * b + 4 * u[right])) / (2 * u[right])
    left = ~right
    out[left] = (-b + 1j * np.sqrt(np.maximum(-b * b - 4 * u[left], 0))) / (2 * u[left])
    return out / c


def closed_form_s(mu: Measure, u):
    """Closed-form S-transform of a parametric law, or None when unknown."""
    u = np.asarray(u, dtype=float)
    if mu.point_mass is not None:
        return None if mu.point_mass == 0 else np.full(u.shape, 1 / mu.point_mass, dtype=complex)
    if isinstance(mu, BooleanStable):
        return s_boolean_stable(mu.alpha, mu.rho, u)
    if isinstance(mu, FreeStable):
        return s_free_stable(mu.alpha, mu.rho, u)
    if isinstance(mu, MarchenkoPastur):
        return (1 / (mu.rate + u)).astype(complex)
    if isinstance(mu, FreePoissonPower):
        return mu.s_transform(u).astype(complex)
    if isinstance(mu, Semicircle):
        return semicircle_s(mu.a, u, mu.v)
    if isinstance(mu, CauchyDist):
        return np.full(u.shape, 1 / complex(mu.a, mu.b))
    if isinstance(mu, Dilation):
        base = closed_form_s(mu.base, u)
        if base is None:
            return None
        return base / mu.c if mu.c > 0 else -np.conj(base) / abs(mu.c)
    return None


# ---------------------------------------------------------------------------
# Identities
# ---------------------------------------------------------------------------

def verify_inversion(mu: Measure, samples: list[TSample], epsilons=None) -> float:
    """Max over samples of ``|ψ_μ(u/(1+u) S(u)) - u|``.

    Where the argument is (numerically) real, ψ is evaluated at
    ``z + iε`` over a decreasing ε-schedule and extrapolated to ε = 0.
    """
    eps = np.asarray(DEFAULT_EPSILONS if epsilons is None else epsilons, dtype=float)
    worst = 0.0
    for smp in samples:
        if not np.isfinite(smp.S):
            continue
        z = smp.u / (1 + smp.u) * smp.S
        scale = max(1.0, abs(z))
        if z.imag > 1e-6 * scale:
            val = complex(mu.psi(np.array([z]))[0])
        else:
            zs = z.real + 1j * max(z.imag, 0.0) + 1j * eps * scale
            vals = np.asarray(mu.psi(zs), dtype=complex)
            val = complex(_richardson(vals, eps * scale)[-1])
        worst = max(worst, abs(val - smp.u))
    return worst


@dataclass(frozen=True)
class MultiplicativityReport:
    """T_{μ⊠ν} against T_μ T_ν on a u-grid."""

    u: np.ndarray
    T_product: np.ndarray
    T_factors: np.ndarray
    max_deviation: float


def verify_multiplicativity(mu: Measure, nu: Measure, u_grid=None,
                            tol: float = 1e-13) -> MultiplicativityReport:
    """Compare the T-transform of μ⊠ν with the product of the factors' T.

    The convolution is the lazily evaluated measure whose Cauchy
    transform comes from the subordination functions, so T_{μ⊠ν} is
    computed from scratch rather than from the factors' T.
    """
    if not nu.is_positive:
        raise MeasureError("the second factor must live on [0, inf)")
    u = _check_grid(default_u_grid() if u_grid is None else u_grid)
    conv = FreeMultiplicativeConvolution(mu, nu)
    tp, _ = t_values(conv, u, tol)
    tm, _ = t_values(mu, u, tol)
    tn, _ = t_values(nu, u, tol)
    prod = tm * tn
    return MultiplicativityReport(u, tp, prod, float(np.max(np.abs(tp - prod))))


# ---------------------------------------------------------------------------
# Classification
# ---------------------------------------------------------------------------

class ClassKind(enum.Enum):
    POSITIVE_SUPPORT = "PositiveSupport"
    SYMMETRIC = "Symmetric"
    BOOLEAN_MIXTURE = "BooleanMixture"
    NONE = "None"


@dataclass(frozen=True)
class Classification:
    """Result of `classify`; `rho` is set for Boolean stable mixtures."""

    kind: ClassKind
    rho: float | None = None

    def __str__(self):
        if self.kind is ClassKind.BOOLEAN_MIXTURE:
            return f"BooleanMixture({self.rho:.6g})"
        return self.kind.value


def classify(mu: Measure, u_grid=None, tol: float = 1e-6) -> Classification:
    """Classify μ by the ray on which its T-transform lies.

    T lies on the ray ``e^{i(1-ρ)π}[0, ∞)`` for all u exactly when μ is a
    Boolean stable mixture with asymmetry ρ; ρ = 1 means support in
    [0, ∞) and ρ = 1/2 a symmetric law. The candidate ρ is read from the
    median argument of the nonzero samples.
    """
    if mu.point_mass == 0:
        raise MeasureError("δ₀ is degenerate")
    u = _check_grid(default_u_grid() if u_grid is None else u_grid)
    T, _ = t_values(mu, u)
    mags = np.abs(T)
    keep = np.isfinite(T) & (mags > 1e-9)
    if not keep.any():
        return Classification(ClassKind.NONE)
    Tk = T[keep]
    phase = np.angle(Tk)
    phase = np.where(phase < -np.pi / 2, phase + 2 * np.pi, phase)
    rho = 1 - float(np.median(phase)) / np.pi
    if rho < -tol or rho > 1 + tol:
        return Classification(ClassKind.NONE)
    rho = min(max(rho, 0.0), 1.0)
    rotated = np.exp(-1j * np.pi * (1 - rho)) * Tk
    scale = np.maximum(1.0, np.abs(Tk))
    on_ray = np.all(np.abs(rotated.imag) <= tol * scale) and np.all(rotated.real >= -tol * scale)
    if not on_ray:
        return Classification(ClassKind.NONE)
    if abs(rho - 1) <= tol:
        return Classification(ClassKind.POSITIVE_SUPPORT, 1.0)
    if abs(rho - 0.5) <= tol:
        return Classification(ClassKind.SYMMETRIC, 0.5)
    return Classification(ClassKind.BOOLEAN_MIXTURE, rho)
