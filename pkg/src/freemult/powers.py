"""
Convolution powers: free additive, Boolean and free multiplicative.

The free additive power μ^{⊞t}, t >= 1, is reached through

    L(w) = z + (t - 1)(F_μ(w) - w),      σ_{μ,t}(z) = DW point of L on ℂ⁻,
    F_{μ^{⊞t}}(z) = F_μ(σ_{μ,t}(z)) = (t σ_{μ,t}(z) - z)/(t - 1).

Powers are represented lazily by their transforms; a density is only
computed on request. Boolean powers scale η. Free multiplicative powers
are provided for the stable families and the free Poisson law, where
they have closed forms.
"""

from __future__ import annotations

import math

import numpy as np

from .dwsolver import BatchResult, Status, solve_batch
from .measures import (BooleanStable, CauchyDist, Dilation, Domain, EtaMeasure,
                       FreeStable, MarchenkoPastur, Measure, MeasureError, PointMass,
                       Semicircle, _as_complex, format_real)

__all__ = ["sigma", "sigma_batch", "sigma_at_zero", "free_additive_power_F",
           "FreeAdditivePower", "free_additive_power", "BooleanPower", "boolean_power",
           "dilation", "FreePoissonPower", "multiplicative_power_positive",
           "semicircle_sigma_at_zero", "semicircle_sigma_tracked", "is_boxplus_divisible"]


def _broadcast(mu_t, z):
    t = np.asarray(mu_t, dtype=float)
    z = _as_complex(z)
    t, z = np.broadcast_arrays(t, z)
    return t.reshape(-1).copy(), z.reshape(-1).copy(), z.shape


def sigma_batch(mu: Measure, t, z, tol: float = 1e-13, max_iter: int = 100_000,
                w0=None) -> tuple[np.ndarray, BatchResult]:
    """σ_{μ,t}(z) for arrays of t >= 1 and z ∈ ℂ⁻ ∪ ℝ, with solver diagnostics.

    Parameters
    ----------
    mu : Measure
    t : float or array_like
        Power parameters, all >= 1.
    z : complex or array_like
        Points of the closed lower half-plane.
    tol, max_iter : solver settings.
    w0 : array_like, optional
        Starting points in ℂ⁻.

    Returns
    -------
    values : ndarray
        Shaped like the broadcast of `t` and `z`.
    result : BatchResult
        Flat diagnostics for every point.
    """
    t, z, shape = _broadcast(t, z)
    if np.any(t < 1):
        raise ValueError("sigma requires t >= 1")
    if np.any(z.imag > 0):
        raise ValueError("sigma is defined on the closed lower half-plane")
    n = z.size
    out = np.empty(n, dtype=complex)
    exact = t == 1
    if mu.point_mass is not None:
        exact[:] = True
    out[exact] = z[exact] - (t[exact] - 1) * (mu.point_mass or 0.0)
    iters = np.zeros(n, dtype=np.int64)
    res = np.zeros(n)
    accel = np.zeros(n, dtype=bool)
    boundary = np.zeros(n, dtype=bool)
    status = np.full(n, Status.CONVERGED, dtype=object)
    k = np.flatnonzero(~exact)
    if k.size:
        zk, tk = z[k], t[k]
        if w0 is None:
            start = zk.real + 1j * (np.minimum(zk.imag, 0) - max(1.0, mu.scale) * np.sqrt(tk))
        else:
            start = np.broadcast_to(_as_complex(w0), shape).reshape(-1)[k]

        def L(w, idx):
            return zk[idx] + (tk[idx] - 1) * (mu.reciprocal_cauchy(w) - w)

        # L carries the factor t - 1, which amplifies rounding in F - w
        tol_k = np.maximum(tol, 256 * np.finfo(float).eps * tk)
        r = solve_batch(L, start, Domain.LOWER, tol_k, max_iter)
        # small fixed points: polish to a tolerance relative to |σ|
        mag = np.abs(r.points)
        small = np.flatnonzero(r.converged & ~r.boundary & (mag < 1) & (r.points.imag < 0))
        if small.size:
            kk = k[small]
            zk2, tk2 = z[kk], t[kk]
            r2 = solve_batch(lambda w, idx: zk2[idx] + (tk2[idx] - 1)
                             * (mu.reciprocal_cauchy(w) - w),
                             r.points[small], Domain.LOWER, tol_k[small] * mag[small], max_iter)
            better = r2.converged
            for name in ("points", "residual", "boundary", "status"):
                getattr(r, name)[small[better]] = getattr(r2, name)[better]
            r.iterations[small] += r2.iterations
        out[k] = r.points
        iters[k], res[k], accel[k] = r.iterations, r.residual, r.accelerated
        boundary[k], status[k] = r.boundary, r.status
    return out.reshape(shape), BatchResult(out, iters, res, accel, boundary, status)


def sigma(mu: Measure, t, z, tol: float = 1e-13, max_iter: int = 100_000):
    """σ_{μ,t}(z), the Denjoy-Wolff point of ``w ↦ z + (t-1)(F_μ(w) - w)`` on ℂ⁻.

    Examples
    --------
    >>> float(abs(sigma(PointMass(2.0), 3.0, -1j) - (-4 - 1j)))
    0.0
    """
    return sigma_batch(mu, t, z, tol, max_iter)[0]


def sigma_at_zero(mu: Measure, t, tol: float = 1e-13) -> tuple[np.ndarray, BatchResult]:
    """σ_{μ,t}(0) for an array of t >= 1."""
    return sigma_batch(mu, t, 0.0, tol)


def free_additive_power_F(mu: Measure, t: float, z, tol: float = 1e-13,
                          both: bool = False):
    """Reciprocal Cauchy transform of μ^{⊞t} on ℂ⁻ ∪ ℝ.

    With ``both=True`` the two expressions ``F_μ(σ)`` and
    ``(tσ - z)/(t-1)`` are returned as a pair.
    """
    if t <= 1:
        raise ValueError("free_additive_power_F needs t > 1")
    z = _as_complex(z)
    s = sigma(mu, t, z, tol)
    f1 = mu.reciprocal_cauchy(s)
    if both:
        return f1, (t * s - z) / (t - 1)
    return f1


class FreeAdditivePower(Measure):
    """Lazy μ^{⊞t} for t >= 1, evaluated through σ_{μ,t}."""

    def __init__(self, base: Measure, t: float, tol: float = 1e-13):
        if t < 1:
            raise MeasureError("lazy free additive powers need t >= 1")
        self.base, self.t, self.tol = base, float(t), tol
        self.is_positive = base.is_positive
        p = base.mass_at_zero
        self.mass_at_zero = max(0.0, self.t * p - (self.t - 1))
        self.scale = base.scale * self.t
        self.descriptor = f"({base.descriptor})^boxplus {format_real(t)}"

    def reciprocal_cauchy(self, z):
        z = _as_complex(z)
        up = z.imag > 0
        s = sigma(self.base, self.t, np.where(up, np.conj(z), z), self.tol)
        f = self.base.reciprocal_cauchy(s)
        return np.where(up, np.conj(f), f)

    def cauchy(self, z):
        return 1 / self.reciprocal_cauchy(z)

    def atoms(self):
        out = []
        for a, m in self.base.atoms():
            mt = self.t * m - (self.t - 1)
            if mt > 0:
                out.append((self.t * a, mt))
        return out


def is_boxplus_divisible(mu: Measure) -> bool:
    """True for the families whose free additive powers exist for every t > 0."""
    return (isinstance(mu, (Semicircle, FreeStable, CauchyDist, MarchenkoPastur))
            or mu.point_mass is not None)


def free_additive_power(mu: Measure, t: float) -> Measure:
    """μ^{⊞t}, in closed form for divisible families and lazily otherwise.

    Powers with t < 1 are accepted only for the divisible families
    (semicircle, free stable, Cauchy, free Poisson, point masses).
    """
    if t <= 0:
        raise MeasureError("power must be positive")
    if t == 1:
        return mu
    if mu.point_mass is not None:
        return PointMass(t * mu.point_mass)
    if isinstance(mu, Semicircle):
        return Semicircle(t * mu.a, t * mu.v)
    if isinstance(mu, FreeStable):
        return Dilation(mu, t ** (1 / mu.alpha))
    if isinstance(mu, CauchyDist):
        return CauchyDist(t * mu.a, t * mu.b)
    if isinstance(mu, MarchenkoPastur):
        return MarchenkoPastur(mu.rate * t)
    if t < 1:
        raise MeasureError(f"{mu.descriptor} is not declared divisible; need t >= 1")
    return FreeAdditivePower(mu, t)


class BooleanPower(Measure):
    """μ^{⊎t}: the measure with η = t η_μ."""

    def __init__(self, base: Measure, t: float):
        if t < 0:
            raise MeasureError("Boolean powers need t >= 0")
        self.base, self.t = base, float(t)
        self.is_positive = base.is_positive
        p = base.mass_at_zero
        self.mass_at_zero = p / (p + self.t * (1 - p)) if p > 0 else 0.0
        self.scale = base.scale * max(1.0, self.t)
        self.descriptor = f"({base.descriptor})^uplus {format_real(t)}"

    def eta(self, z):
        return self.t * self.base.eta(_as_complex(z))


def boolean_power(mu: Measure, t: float) -> Measure:
    """μ^{⊎t} for t >= 0; t = 0 gives δ₀ and t = 1 gives μ."""
    if t < 0:
        raise MeasureError("Boolean powers need t >= 0")
    if t == 1:
        return mu
    if t == 0:
        return PointMass(0.0)
    if mu.point_mass is not None:
        return PointMass(t * mu.point_mass)
    if isinstance(mu, BooleanStable):
        return Dilation(mu, t ** (1 / mu.alpha))
    if isinstance(mu, CauchyDist):
        return CauchyDist(t * mu.a, t * mu.b)
    return BooleanPower(mu, t)


def dilation(mu: Measure, c: float) -> Measure:
    """D_c(μ), the push-forward under x ↦ c x."""
    if c == 1:
        return mu
    if mu.point_mass is not None:
        return PointMass(c * mu.point_mass)
    return Dilation(mu, c)


# ---------------------------------------------------------------------------
# Free multiplicative powers
# ---------------------------------------------------------------------------

class FreePoissonPower(EtaMeasure):
    """(MP)^{⊠s}, the law with S-transform ``(1+u)^{-s}``.

    Its η-transform solves ``v (1 - v)^s = z``; the root is followed by
    Newton continuation from small |z|, where v ≈ z, along a path that
    avoids the critical value on the positive axis.
    """

    def __init__(self, s: float):
        if s <= 0:
            raise MeasureError("power must be positive")
        self.s = float(s)
        super().__init__(self._eta_upper_points, f"law:mp^boxtimes {format_real(s)}",
                         is_positive=True, scale=4.0 ** max(1.0, s))

    def s_transform(self, u):
        return (1 + np.asarray(u, dtype=float)) ** (-self.s)

    def _eta_upper_points(self, z):
        z = np.asarray(z, dtype=complex)
        out = np.zeros_like(z)
        neg = (z.imag == 0) & (z.real < 0)
        if neg.any():
            out[neg] = -self._solve_negative(-z[neg].real)
        upper = z.imag > 0
        if upper.any():
            out[upper] = self._solve_upper(z[upper])
        return out

    def _solve_negative(self, r):
        # y (1 + y)^s = r with y > 0; the left side is increasing.
        s = self.s
        y = np.minimum(r, r ** (1 / (1 + s)))
        for _ in range(100):
            g = np.log(y) + s * np.log1p(y) - np.log(r)
            step = g / (1 / y + s / (1 + y))
            y = np.where(y - step > 0, y - step, y / 2)
            if np.all(np.abs(step) <= 1e-15 * y):
                break
        return y

    def _solve_upper(self, z):
        # Continue the root of log v + s log(1 - v) = log ζ along a path that
        # stays away from the critical value on the positive axis: out along
        # the imaginary axis to |z|, then along the arc |ζ| = |z| down to z.
        # Steps are halved when Newton fails and grown after success.
        s = self.s
        rz = np.abs(z)
        theta = np.angle(z)
        r0 = 1e-8 * np.minimum(1.0, rz)
        lr0, lrz = np.log(r0), np.log(rz)

        def log_target(tau, idx):
            lr0_, lrz_, th = lr0[idx], lrz[idx], theta[idx]
            radial = tau < 1
            a = np.clip(tau, 0, 1)
            b = np.clip(tau - 1, 0, 1)
            logr = np.where(radial, (1 - a) * lr0_ + a * lrz_, lrz_)
            ang = np.where(radial, np.pi / 2, (1 - b) * np.pi / 2 + b * th)
            return logr + 1j * ang

        def newton(v, target):
            first = None
            for k in range(8):
                phi = np.log(v) + s * np.log(1 - v) - target
                dv = phi / (1 / v - s / (1 - v))
                if k == 0:
                    first = np.abs(dv)
                v = v - dv
            return v, first, np.abs(dv)

        v = np.exp(log_target(np.zeros(z.shape), slice(None))).astype(complex)
        tau = np.zeros(z.shape)
        h = np.full(z.shape, 0.05)
        for _ in range(4000):
            active = tau < 2
            if not active.any():
                break
            step = np.minimum(h[active], 2 - tau[active])
            idx = np.flatnonzero(active)
            va = v[idx]
            cand, first, last = newton(va, log_target(tau[idx] + step, idx))
            ok = ((first <= 0.2 * np.abs(va)) & (last <= 1e-13 * np.abs(cand))
                  & (cand.imag > 0) & np.isfinite(cand))
            acc = idx[ok]
            v[acc] = cand[ok]
            tau[acc] += step[ok]
            h[acc] = np.minimum(h[acc] * 1.5, 0.2)
            h[idx[~ok]] *= 0.5
        return v


def multiplicative_power_positive(nu: Measure, t: float) -> Measure:
    """ν^{⊠t} for the positive laws with closed-form S-transforms.

    Supported: Boolean and free stable laws with ρ = 1 (the index moves
    to ``β/(β + t(1-β))``), the free Poisson law (S = (1+u)^{-t}) and
    point masses. Any law with t = 1 is returned unchanged.
    """
    if t <= 0:
        raise MeasureError("power must be positive")
    if t == 1:
        return nu
    if nu.point_mass is not None and nu.point_mass > 0:
        return PointMass(nu.point_mass ** t)
    if isinstance(nu, (BooleanStable, FreeStable)) and nu.rho == 1 and nu.alpha <= 1:
        beta = nu.alpha
        gamma = beta / (beta + t * (1 - beta))
        return type(nu)(gamma, 1.0)
    if isinstance(nu, MarchenkoPastur) and nu.rate == 1:
        return FreePoissonPower(t)
    if isinstance(nu, FreePoissonPower):
        return FreePoissonPower(nu.s * t)
    raise MeasureError(f"no closed-form multiplicative power for {nu.descriptor}")


# ---------------------------------------------------------------------------
# Semicircle closed forms
# ---------------------------------------------------------------------------

def semicircle_sigma_at_zero(a: float, t, v: float = 1.0):
    """Closed-form σ_{μ,t}(0) for the semicircle law of mean `a` and variance `v`.

    Uses the piecewise formula for variance one and the dilation rule
    ``σ_{D_c μ, t}(0) = c σ_{μ,t}(0)``; a negative mean is handled by
    the reflection ``σ_{D_{-1}μ,t}(0) = -conj σ_{μ,t}(0)``.
    """
    c = math.sqrt(v)
    b = a / c
    t = np.asarray(t, dtype=float)
    if b < 0:
        return -np.conj(semicircle_sigma_at_zero(-b, t)) * c
    out = np.empty(t.shape, dtype=complex)
    if b == 0:
        out[...] = -1j * (t - 1) / np.sqrt(t)
        return out * c
    k = (t - 1) / (2 * t)
    high = t > max(1.0, 4 / b ** 2)
    out[high] = k[high] * (-b * t[high] - np.sqrt(b * b * t[high] ** 2 - 4 * t[high]))
    low = ~high
    out[low] = k[low] * (-b * t[low] - 1j * np.sqrt(np.maximum(4 * t[low] - b * b * t[low] ** 2, 0)))
    return out * c


def semicircle_sigma_tracked(a: float, t_sweep, v: float = 1.0):
    """σ_{μ,t}(0) along an increasing t-sweep by following quadratic roots.

    The two roots of ``t w² + a t(t-1) w + (t-1)² = 0`` are computed at
    each t and the one closest to the linear extrapolation of the last
    two values is kept. The first two values, and any step where both
    roots are about equally close (a double root splitting), are settled
    by the numerical Denjoy-Wolff point.
    """
    t = np.asarray(t_sweep, dtype=float)
    if np.any(np.diff(t) <= 0) or t[0] < 1:
        raise ValueError("t_sweep must be increasing and start at t >= 1")
    c = math.sqrt(v)
    b = a / c
    mu = Semicircle(b, 1.0)
    out = np.empty(t.size, dtype=complex)
    for i, ti in enumerate(t):
        k = (ti - 1) / (2 * ti)
        d = np.sqrt(complex(b * b * ti * ti - 4 * ti))
        roots = np.array([k * (-b * ti + d), k * (-b * ti - d)])
        ambiguous = i < 2
        if not ambiguous:
            slope = (out[i - 1] - out[i - 2]) / (t[i - 1] - t[i - 2])
            guess = out[i - 1] + slope * (ti - t[i - 1])
            dist = np.abs(roots - guess)
            ambiguous = abs(dist[0] - dist[1]) <= 0.25 * dist.max()
        if ambiguous:
            guess = complex(sigma(mu, ti, 0.0))
            dist = np.abs(roots - guess)
        out[i] = roots[np.argmin(dist)]
    return out * c
