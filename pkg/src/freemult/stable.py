"""
Free and Boolean stable laws.

Both families are indexed by an admissible pair (α, ρ) and are defined
through the same function,

    C_f(z) = η_b(z) = -(e^{-iρπ} z)^α,     z ∈ ℍ⁺,

where C is the free cumulant transform and η the Boolean one. The
Boolean laws have an explicit density. For the free laws the Cauchy
transform on ℂ⁻ solves ``w G - 1 = -(e^{-iρπ} G)^α``; it is computed by a
convergent series for large |w| and otherwise as the attracting fixed
point of ``v ↦ w - φ(v)`` with ``φ(v) = -v (e^{-iρπ}/v)^α``, followed by
a few Newton steps on the implicit equation.

All fractional powers are taken with the argument carried continuously
over the closed half-plane, which agrees with the principal branch in
the interior.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .dwsolver import solve_batch
from .measures import (BooleanStable, Domain, FreeStable, Measure, MeasureError,
                       _as_complex, is_admissible)
from .tables import TransformTable

__all__ = ["StableParams", "boolean_stable_density", "free_stable_cauchy",
           "free_stable_density", "series_radius", "levy_density", "in_A0",
           "mixture_eta", "s_boolean_stable", "s_free_stable", "reproducing_gamma",
           "IdentityReport"]

SERIES_TERMS = 400
NEWTON_STEPS = 4


@dataclass(frozen=True)
class StableParams:
    """Stability index α, asymmetry ρ and family (``"free"`` or ``"boolean"``)."""

    alpha: float
    rho: float
    family: str = "free"

    def __post_init__(self):
        if self.family not in ("free", "boolean"):
            raise ValueError("family must be 'free' or 'boolean'")
        if not is_admissible(self.alpha, self.rho):
            raise MeasureError(f"(alpha, rho) = ({self.alpha}, {self.rho}) is not admissible")

    def law(self) -> Measure:
        cls = FreeStable if self.family == "free" else BooleanStable
        return cls(self.alpha, self.rho)


def in_A0(alpha: float, rho: float, tol: float = 1e-14) -> bool:
    """Parameters for which the Boolean stable law is freely infinitely divisible."""
    if not 0 < alpha <= 2 / 3 + tol:
        return False
    lo = max(2 - 1 / alpha, 0.0)
    hi = min(1 / alpha - 1, 1.0)
    return lo - tol <= rho <= hi + tol


# ---------------------------------------------------------------------------
# Branch helpers
# ---------------------------------------------------------------------------

def _arg_lower(w):
    """Argument in [-π, 0] for points of the closed lower half-plane."""
    a = np.angle(w)
    return np.where(a > 0, np.where(w.real < 0, -np.pi, 0.0), a)


def _arg_upper(w):
    """Argument in [0, π] for points of the closed upper half-plane."""
    a = np.angle(w)
    return np.where(a < 0, np.where(w.real < 0, np.pi, 0.0), a)


def _polar(r, theta):
    return r * np.exp(1j * theta)


# ---------------------------------------------------------------------------
# Boolean stable density
# ---------------------------------------------------------------------------

def _q(alpha, rho, x):
    xa = x ** alpha
    c = math.cos(alpha * rho * math.pi)
    return math.sin(alpha * rho * math.pi) / math.pi * x ** (alpha - 1) / (xa * xa + 2 * xa * c + 1)


def boolean_stable_density(alpha: float, rho: float, x):
    """Density of the Boolean stable law ``b_{α,ρ}`` for 0 < α <= 1.

    Parameters
    ----------
    alpha, rho : float
    x : array_like
        Nonzero reals.

    Returns
    -------
    ndarray

    Notes
    -----
    For α = 1 and ρ ∈ {0, 1} the law is a point mass at ∓1 and the
    function returns zeros.
    """
    if not 0 < alpha <= 1:
        raise MeasureError("Boolean stable densities are available for 0 < alpha <= 1")
    if not is_admissible(alpha, rho):
        raise MeasureError(f"(alpha, rho) = ({alpha}, {rho}) is not admissible")
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    pos, neg = x > 0, x < 0
    with np.errstate(divide="ignore", invalid="ignore"):
        out[pos] = _q(alpha, rho, x[pos])
        out[neg] = _q(alpha, 1 - rho, -x[neg])
    return out


# ---------------------------------------------------------------------------
# Free stable Cauchy transform
# ---------------------------------------------------------------------------

@lru_cache(maxsize=64)
def _series_coefficients(alpha: float, n_terms: int = SERIES_TERMS) -> np.ndarray:
    """``a_n = (αn)_{n-1} / n!`` for n = 0..n_terms-1, a_0 = 1."""
    out = np.zeros(n_terms)
    out[0] = 1.0
    for n in range(1, n_terms):
        factors = alpha * n - np.arange(n - 1)
        if np.any(factors == 0):
            continue
        logabs = np.sum(np.log(np.abs(factors))) - math.lgamma(n + 1)
        sign = -1.0 if np.count_nonzero(factors < 0) % 2 else 1.0
        out[n] = sign * math.exp(logabs)
    return out


@lru_cache(maxsize=64)
def series_radius(alpha: float) -> float:
    """Radius beyond which the large-|w| series is used.

    The growth rate K of the coefficients is read off their tail; the
    series is then used where ``|w|^{-α} <= 1/(2K)``.
    """
    a = np.abs(_series_coefficients(alpha))
    n = np.arange(a.size)
    tail = (n >= a.size // 2) & (a > 0)
    k = float(np.max(a[tail] ** (1.0 / n[tail]))) if tail.any() else 1.0
    return (2 * max(k, 1e-3)) ** (1 / alpha)


def _series(alpha, rho, w):
    a = _series_coefficients(alpha)
    theta = -alpha * (rho * np.pi + _arg_lower(w))
    x = _polar(np.abs(w) ** (-alpha), theta)
    total = np.ones_like(w)
    term = np.ones_like(w)
    for n in range(1, a.size):
        term = term * (-x)
        add = a[n] * term
        total = total + add
        if a[n] != 0 and np.all(np.abs(add) <= 1e-16 * np.abs(total)):
            break
    return total / w


def _phi(alpha, rho, v):
    theta = alpha * (-rho * np.pi - _arg_lower(v))
    return -v * _polar(np.abs(v) ** (-alpha), theta)


def _fs1(alpha, rho, w, g):
    p = _polar(np.abs(g) ** alpha, alpha * (_arg_upper(g) - rho * np.pi))
    return w * g - 1 + p, w + alpha * p / g


def _newton_polish(alpha, rho, w, g):
    res, _ = _fs1(alpha, rho, w, g)
    res = np.abs(res)
    for _ in range(NEWTON_STEPS):
        f, df = _fs1(alpha, rho, w, g)
        with np.errstate(all="ignore"):
            cand = g - f / df
        fc, _ = _fs1(alpha, rho, w, cand)
        ok = np.isfinite(cand) & (np.abs(fc) < res) & (cand.imag >= -1e-14 * np.abs(cand))
        g = np.where(ok, cand, g)
        res = np.where(ok, np.abs(fc), res)
    return g


def _semicircle_lower(w):
    return (w - np.sqrt(w - 2) * np.sqrt(w + 2)) / 2


def free_stable_cauchy(alpha: float, rho: float, w, tol: float = 1e-14,
                       method: str = "auto"):
    """Cauchy transform of the free stable law at points of ℂ⁻ ∪ ℝ.

    Parameters
    ----------
    alpha, rho : float
        Admissible parameters.
    w : array_like
        Points with ``Im w <= 0``; real points give the boundary value
        from below.
    tol : float
        Tolerance of the fixed-point solve.
    method : {"auto", "series", "fixed_point"}
        ``"auto"`` uses closed forms for α ∈ {1, 2}, the series above
        `series_radius` and the fixed point elsewhere.

    Returns
    -------
    ndarray of complex
    """
    if not is_admissible(alpha, rho):
        raise MeasureError(f"(alpha, rho) = ({alpha}, {rho}) is not admissible")
    w = _as_complex(w)
    if np.any(w.imag > 0):
        raise ValueError("free_stable_cauchy expects points of the closed lower half-plane")
    shape = w.shape
    w = w.reshape(-1).copy()
    # real points are limits from below; the signed zero selects the branch
    w.imag = np.where(w.imag == 0, -0.0, w.imag)
    if method == "auto" and alpha == 1:
        return (1 / (w + np.exp(-1j * np.pi * rho))).reshape(shape)
    if method == "auto" and alpha == 2:
        return _semicircle_lower(w).reshape(shape)
    out = np.empty_like(w)
    if method == "series":
        far = np.ones(w.size, dtype=bool)
    elif method == "fixed_point":
        far = np.zeros(w.size, dtype=bool)
    else:
        far = np.abs(w) >= series_radius(alpha)
    if far.any():
        out[far] = _series(alpha, rho, w[far])
    near = ~far
    if near.any():
        wn = w[near]
        start = wn.real - 1j * np.maximum(1.0, np.abs(wn))
        res = solve_batch(lambda v, idx: wn[idx] - _phi(alpha, rho, v), start,
                          Domain.LOWER, tol=tol)
        out[near] = _newton_polish(alpha, rho, wn, 1 / res.points)
    return out.reshape(shape)


def free_stable_density(alpha: float, rho: float, x_grid) -> TransformTable:
    """Density of the free stable law on a strictly increasing grid.

    The density is ``Im G(x - i0) / π``, the boundary value from ℂ⁻.
    """
    x = np.asarray(x_grid, dtype=float)
    g = free_stable_cauchy(alpha, rho, x.astype(complex))
    dens = np.maximum(g.imag, 0.0) / np.pi
    return TransformTable("density", x, dens, f"law:freestable alpha={alpha} rho={rho}",
                          {"grid": "user"})


def _free_density_values(alpha, rho, x):
    x = np.asarray(x, dtype=float)
    g = free_stable_cauchy(alpha, rho, x.astype(complex))
    return np.maximum(g.imag, 0.0) / np.pi


def levy_density(alpha: float, rho: float, x):
    """Density of the free Lévy measure of ``b_{α,ρ}`` for (α, ρ) in the divisible range.

    It is built from two free stable densities of index 1 - α:
    ``x^{β-1} p_{1-α, αρ/(1-α)}(x^β)`` for x > 0 and
    ``(-x)^{β-1} p_{1-α, (αρ+1-2α)/(1-α)}(-(-x)^β)`` for x < 0, with
    ``β = α/(1-α)``.
    """
    if not in_A0(alpha, rho):
        raise MeasureError(f"(alpha, rho) = ({alpha}, {rho}) is outside the divisible range")
    x = np.asarray(x, dtype=float)
    beta = alpha / (1 - alpha)
    rp = min(max(alpha * rho / (1 - alpha), 0.0), 1.0)
    rn = min(max((alpha * rho + 1 - 2 * alpha) / (1 - alpha), 0.0), 1.0)
    out = np.zeros_like(x)
    pos, neg = x > 0, x < 0
    if pos.any():
        xp = x[pos]
        out[pos] = xp ** (beta - 1) * _free_density_values(1 - alpha, rp, xp ** beta)
    if neg.any():
        xn = -x[neg]
        out[neg] = xn ** (beta - 1) * _free_density_values(1 - alpha, rn, -(xn ** beta))
    return out


# ---------------------------------------------------------------------------
# Mixtures and closed-form S-transforms
# ---------------------------------------------------------------------------

def mixture_eta(alpha: float, rho: float, nu: Measure, z):
    """η-transform of the Boolean stable mixture ``b_{α,ρ} ⊛ ν^{1/α}`` on ℍ⁺.

    Equal to ``η_ν(-(e^{-iρπ} z)^α)``; no sampling is involved.
    """
    if not nu.is_positive:
        raise MeasureError("the mixing measure must live on [0, inf)")
    z = _as_complex(z)
    return nu.eta(BooleanStable(alpha, rho).eta(z))


def _neg_power(x, p):
    return np.power(np.asarray(x, dtype=float), p)


def s_boolean_stable(alpha: float, rho: float, u):
    """``S(u) = -e^{iρπ} (-u/(1+u))^{(1-α)/α}`` on (-1, 0)."""
    u = np.asarray(u, dtype=float)
    return -np.exp(1j * np.pi * rho) * _neg_power(-u / (1 + u), (1 - alpha) / alpha)


def s_free_stable(alpha: float, rho: float, u):
    """``S(u) = -e^{iρπ} (-u)^{(1-α)/α}`` on (-1, 0)."""
    u = np.asarray(u, dtype=float)
    return -np.exp(1j * np.pi * rho) * _neg_power(-u, (1 - alpha) / alpha)


def reproducing_gamma(alpha: float, beta: float) -> float:
    """Index γ with ``(b_{β,1})^{⊠1/α} = b_{γ,1}`` (same for the free family)."""
    return alpha * beta / (1 - beta + alpha * beta)


@dataclass(frozen=True)
class IdentityReport:
    """Outcome of a numerical identity check."""

    name: str
    max_deviation: float
    tolerance: float
    details: str = ""

    @property
    def passed(self) -> bool:
        return bool(np.isfinite(self.max_deviation) and self.max_deviation <= self.tolerance)

    def line(self) -> str:
        verdict = "PASS" if self.passed else "FAIL"
        return (f"{verdict} {self.name}: max deviation {self.max_deviation:.3e} "
                f"(tolerance {self.tolerance:.1e}) {self.details}".rstrip())
