"""
Closed-form free multiplicative convolution of two-atom measures.

For ``μ = λ_μ δ₁ + (1-λ_μ) δ_{α_μ}`` the function H_μ(z) = 1/h_μ(1/z) is
the Möbius map

    H_μ(z) = (z + b_μ) / (c_μ z + d_μ),
    b = -((1-λ) + λα),   c = λ + (1-λ)α,   d = -α,

and the same for ν. In reciprocal coordinates Ω_j(z) = 1/ω_j(1/z) the
subordination equations reduce to a quadratic for Ω₁ whose root in ℍ⁺ is
the subordination function; then Ω₂ = z H_μ(Ω₁), zM(z) = Ω₁Ω₂ and
``z G(z) = M(z) / (M(z) - 1)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .measures import Atomic, Measure

__all__ = ["TwoPointPair", "FIGURE1", "FIGURE2", "closed_form_subordination",
           "closed_form_cauchy", "closed_form_density", "quadratic_coefficients",
           "p_polynomial", "omega_from_reciprocal", "reciprocal_from_omega"]


@dataclass(frozen=True)
class TwoPointPair:
    """μ = λ_μ δ₁ + (1-λ_μ) δ_{α_μ} and ν = λ_ν δ₁ + (1-λ_ν) δ_{α_ν}, α_ν >= 0."""

    lambda_mu: float
    alpha_mu: float
    lambda_nu: float
    alpha_nu: float

    def __post_init__(self):
        for lam in (self.lambda_mu, self.lambda_nu):
            if not 0 < lam < 1:
                raise ValueError("weights must lie in (0, 1)")
        if self.alpha_nu < 0:
            raise ValueError("the second factor must live on [0, inf)")

    @property
    def mu(self) -> Measure:
        return _two_atom(self.lambda_mu, self.alpha_mu)

    @property
    def nu(self) -> Measure:
        return _two_atom(self.lambda_nu, self.alpha_nu)

    @staticmethod
    def _coeffs(lam, alpha):
        k = (1 - lam) + lam * alpha
        m = lam + (1 - lam) * alpha
        return -k, m, -alpha

    @property
    def coeffs_mu(self):
        return self._coeffs(self.lambda_mu, self.alpha_mu)

    @property
    def coeffs_nu(self):
        return self._coeffs(self.lambda_nu, self.alpha_nu)

    def atoms(self) -> list[tuple[float, float]]:
        """Atoms of μ⊠ν predicted from the atom overlap rule."""
        out = {}
        for b, mb in self.mu.atoms():
            for c, mc in self.nu.atoms():
                if b * c == 0:
                    continue
                if mb + mc > 1:
                    out[b * c] = out.get(b * c, 0) + mb + mc - 1
        zero = max(self.mu.mass_at_zero, self.nu.mass_at_zero)
        if zero > 0:
            out[0.0] = zero
        return sorted(out.items())


def _two_atom(lam, alpha):
    if alpha == 1:
        return Atomic([1.0], [1.0])
    return Atomic([1.0, alpha], [lam, 1 - lam])


FIGURE1 = TwoPointPair(0.5, -3.0, 0.5, 3.0)
FIGURE2 = TwoPointPair(1 / 3, -2.0, 0.5, 0.0)


def quadratic_coefficients(pair: TwoPointPair):
    """Coefficients (A, B, C) of ``A Ω² - B Ω - C = 0`` as polynomials in z.

    Each is returned as a numpy poly1d.
    """
    bm, cm, dm = pair.coeffs_mu
    bn, cn, dn = pair.coeffs_nu
    A = np.poly1d([cn, dn * cm])
    B = np.poly1d([1.0, bn * cm - cn * bm, -dm * dn])
    C = np.poly1d([bm, bn * dm, 0.0])
    return A, B, C


def p_polynomial(pair: TwoPointPair) -> np.poly1d:
    """Discriminant ``P = B² + 4 A C`` of the Ω₁ quadratic."""
    A, B, C = quadratic_coefficients(pair)
    return B * B + 4 * A * C


def closed_form_subordination(pair: TwoPointPair, z):
    """Reciprocal subordination functions (Ω₁, Ω₂) at points of ℍ⁺.

    The square-root branch is the one putting Ω₁ in ℍ⁺; the other root
    lies outside ℍ⁺, so the choice is unique and continuous. Real z are
    read as limits from above.
    """
    z = np.asarray(z, dtype=complex)
    zz = np.where(z.imag == 0, z + 1e-14j * np.maximum(1, np.abs(z)), z)
    A, B, C = quadratic_coefficients(pair)
    a, b = A(zz), B(zz)
    s = np.sqrt(b * b + 4 * a * C(zz))
    r1 = (b + s) / (2 * a)
    r2 = (b - s) / (2 * a)
    om1 = np.where(r1.imag >= r2.imag, r1, r2)
    bm, cm, dm = pair.coeffs_mu
    om2 = zz * (om1 + bm) / (cm * om1 + dm)
    return om1, om2


def closed_form_cauchy(pair: TwoPointPair, z):
    """Cauchy transform of μ⊠ν at points of ℍ⁺ from the closed forms."""
    z = np.asarray(z, dtype=complex)
    om1, om2 = closed_form_subordination(pair, z)
    M = om1 * om2 / z
    return M / (M - 1) / z


def closed_form_density(pair: TwoPointPair, x, eps: float = 0.0):
    """Density ``-Im G(x + iε)/π``; ε = 0 gives the boundary value.

    With ε = 0, grid points that sit exactly on an atom get density 0.
    """
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        d = -closed_form_cauchy(pair, x + 1j * eps).imag / np.pi
    if eps == 0:
        for p, _ in pair.atoms():
            d = np.where(x == p, 0.0, d)
    return d


def reciprocal_from_omega(omega, z):
    """Ω(ζ) = 1/conj(ω(1/conj ζ)): convert ω at z to Ω at ζ = 1/conj(z)."""
    return 1 / np.conj(omega)


def omega_from_reciprocal(Omega):
    """Inverse of `reciprocal_from_omega`."""
    return 1 / np.conj(Omega)
