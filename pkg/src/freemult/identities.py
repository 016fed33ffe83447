"""
Named identity checks between convolutions, powers and stable laws.

Each check evaluates both sides of an identity numerically, usually as
η-transforms on a fixed grid of ℍ⁺ or as S-transforms on a grid of
(-1, 0), and returns an `IdentityReport` with the largest deviation.
`IDENTITIES` maps the names accepted by the ``verify`` command to the
checks.
"""

from __future__ import annotations

from typing import Callable

import numpy as np

from .measures import (Atomic, BooleanStable, CauchyDist, EtaMeasure, FreeStable,
                       MarchenkoPastur, Measure, PointMass, _as_complex)
from .powers import (FreePoissonPower, boolean_power, dilation, free_additive_power,
                     multiplicative_power_positive)
from .stable import (IdentityReport, mixture_eta, reproducing_gamma, s_boolean_stable,
                     s_free_stable)
from .stransform import t_values
from .subordination import b_map, free_mult_convolution

__all__ = ["upper_grid", "eta_distance", "check_thm16", "check_prop63", "check_thm17",
           "check_cor61", "check_thm14", "check_eq_B", "check_eq_free_conv",
           "check_eq_BN", "check_eq_BN_free", "IDENTITIES", "run_identity"]


def upper_grid(n: int = 50, seed: int = 7) -> np.ndarray:
    """Fixed pseudo-random points of ℍ⁺ with modulus in [0.2, 3]."""
    rng = np.random.default_rng(seed)
    r = 0.2 * 15 ** rng.random(n)
    theta = np.pi * (0.05 + 0.9 * rng.random(n))
    return r * np.exp(1j * theta)


def u_grid(n: int = 50, lo: float = -0.9, hi: float = -0.1) -> np.ndarray:
    return np.linspace(lo, hi, n)


def eta_distance(a: Measure, b: Measure, z=None) -> float:
    """Max |η_a - η_b| over a grid of ℍ⁺."""
    z = upper_grid() if z is None else _as_complex(z)
    return float(np.max(np.abs(a.eta(z) - b.eta(z))))


def _s_numeric(mu: Measure, u):
    T, _ = t_values(mu, u)
    return 1 / T


def check_thm16(alpha: float, beta: float, rho: float, family: str = "boolean",
                numeric: bool = True, n: int = 50) -> list[IdentityReport]:
    """``x_{α,ρ} ⊠ (x_{β,1})^{⊠1/α} = x_{αβ,ρ}`` for x = b or f.

    The closed-form check multiplies S-transforms; the numeric check
    builds the product by subordination and recomputes its S-transform.
    """
    u = u_grid(n)
    law = BooleanStable if family == "boolean" else FreeStable
    s_of = s_boolean_stable if family == "boolean" else s_free_stable
    gamma = reproducing_gamma(alpha, beta)
    lhs = s_of(alpha, rho, u) * s_of(beta, 1.0, u) ** (1 / alpha)
    rhs = s_of(alpha * beta, rho, u)
    lhs2 = s_of(alpha, rho, u) * s_of(gamma, 1.0, u)
    dev = max(np.max(np.abs(lhs - rhs)), np.max(np.abs(lhs2 - rhs)))
    tag = f"{family} alpha={alpha} beta={beta} rho={rho}"
    out = [IdentityReport("thm1.6 closed form", float(dev), 1e-10, tag)]
    if numeric:
        power = multiplicative_power_positive(law(beta, 1.0), 1 / alpha)
        conv = free_mult_convolution(law(alpha, rho), power)
        dev = np.max(np.abs(_s_numeric(conv, u) - rhs))
        out.append(IdentityReport("thm1.6 numeric", float(dev), 1e-6, tag))
    return out


def check_prop63(alpha: float, rho: float, numeric: bool = True,
                 n: int = 50) -> list[IdentityReport]:
    """``b_{α,ρ} = f_{α,ρ} ⊠ MP^{⊠(1-α)/α}`` for 0 < α < 1."""
    if not 0 < alpha < 1:
        raise ValueError("prop6.3 needs 0 < alpha < 1")
    u = u_grid(n)
    p = (1 - alpha) / alpha
    lhs = s_free_stable(alpha, rho, u) * (1 + u) ** (-p)
    rhs = s_boolean_stable(alpha, rho, u)
    tag = f"alpha={alpha} rho={rho}"
    out = [IdentityReport("prop6.3 closed form", float(np.max(np.abs(lhs - rhs))), 1e-10, tag)]
    if numeric:
        conv = free_mult_convolution(FreeStable(alpha, rho), FreePoissonPower(p))
        b = BooleanStable(alpha, rho)
        out.append(IdentityReport("prop6.3 numeric eta", eta_distance(conv, b), 1e-6, tag))
        dev = np.max(np.abs(_s_numeric(conv, u) - rhs))
        out.append(IdentityReport("prop6.3 numeric S", float(dev), 1e-6, tag))
    return out


def check_thm17(alpha: float, rho: float, nu: Measure) -> IdentityReport:
    """``b_{α,ρ} ⊛ ν^{1/α} = b_{α,ρ} ⊠ ν^{⊠1/α}`` on a 50-point η-grid."""
    z = upper_grid()
    conv = free_mult_convolution(BooleanStable(alpha, rho),
                                 multiplicative_power_positive(nu, 1 / alpha))
    dev = np.max(np.abs(mixture_eta(alpha, rho, nu, z) - conv.eta(z)))
    return IdentityReport("thm1.7", float(dev), 1e-6,
                          f"alpha={alpha} rho={rho} nu={nu.descriptor}")


def check_cor61(a: float, b: float, nu: Measure) -> IdentityReport:
    """``c_{a,b} ⊛ ν = c_{a,b} ⊠ ν`` for a Cauchy law and ν on [0, ∞)."""
    z = upper_grid()
    mixture = nu.eta(complex(a, b) * z)
    conv = free_mult_convolution(CauchyDist(a, b), nu)
    dev = np.max(np.abs(mixture - conv.eta(z)))
    return IdentityReport("cor6.1", float(dev), 1e-6, f"a={a} b={b} nu={nu.descriptor}")


def _monotone(rho: Measure, sigma: Measure) -> Measure:
    """ρ ↻ σ, the positive measure with η = η_ρ ∘ η_σ."""
    return EtaMeasure(lambda z: rho.eta(sigma.eta(z)), f"({rho.descriptor}) mono "
                      f"({sigma.descriptor})", is_positive=True,
                      scale=rho.scale * sigma.scale)


def check_thm14(mu: Measure, nu: Measure, rho: Measure, sigma: Measure) -> list[IdentityReport]:
    """Homomorphism properties of the map 𝔹.

    ``𝔹_ρ(μ⊠ν) = 𝔹_ρ(μ) ⊠ 𝔹_ρ(ν)`` and ``𝔹_ρ(𝔹_σ(μ)) = 𝔹_{σ↻ρ}(μ)``.
    """
    lhs = b_map(rho, free_mult_convolution(mu, nu))
    rhs = free_mult_convolution(b_map(rho, mu), b_map(rho, nu))
    hom = IdentityReport("thm1.4 product", eta_distance(lhs, rhs), 1e-6)
    lhs2 = b_map(rho, b_map(sigma, mu))
    rhs2 = b_map(_monotone(sigma, rho), mu)
    comp = IdentityReport("thm1.4 composition", eta_distance(lhs2, rhs2), 1e-6)
    return [hom, comp]


def check_eq_B(mu: Measure, t: float) -> IdentityReport:
    """``𝔹_{δ_{1/t}}(μ) = D_{1/t}(μ^{⊎t})``."""
    lhs = b_map(PointMass(1 / t), mu)
    rhs = dilation(boolean_power(mu, t), 1 / t)
    return IdentityReport("eq:B", eta_distance(lhs, rhs), 1e-6, f"t={t}")


def check_eq_free_conv(mu: Measure, t: float) -> IdentityReport:
    """``𝔹_{τ_t}(μ) = D_{1/t}(μ^{⊞t})`` with τ_t = (1 - 1/t)δ₀ + (1/t)δ₁."""
    tau = Atomic([0.0, 1.0], [1 - 1 / t, 1 / t])
    lhs = b_map(tau, mu)
    rhs = dilation(free_additive_power(mu, t), 1 / t)
    return IdentityReport("eq:free_conv", eta_distance(lhs, rhs), 1e-6, f"t={t}")


def check_eq_BN(mu: Measure, t: float) -> IdentityReport:
    """``𝔹_{σ_t}(μ) = (μ^{⊞(1+t)})^{⊎1/(1+t)}`` with σ_t = t/(1+t)δ₀ + 1/(1+t)δ_{1+t}."""
    sig = Atomic([0.0, 1 + t], [t / (1 + t), 1 / (1 + t)])
    lhs = b_map(sig, mu)
    rhs = boolean_power(free_additive_power(mu, 1 + t), 1 / (1 + t))
    return IdentityReport("eq:BN", eta_distance(lhs, rhs), 1e-6, f"t={t}")


def check_eq_BN_free(mu: Measure, nu: Measure, t: float) -> IdentityReport:
    """``D_{1/t}((μ⊠ν)^{⊞t}) = D_{1/t}(μ^{⊞t}) ⊠ D_{1/t}(ν^{⊞t})``."""
    lhs = dilation(free_additive_power(free_mult_convolution(mu, nu), t), 1 / t)
    rhs = free_mult_convolution(dilation(free_additive_power(mu, t), 1 / t),
                                dilation(free_additive_power(nu, t), 1 / t))
    return IdentityReport("eq:BN_free", eta_distance(lhs, rhs), 1e-6, f"t={t}")


# Default arguments for the named checks.
_MU = Atomic([1.0, -3.0], [0.5, 0.5])
_NU = Atomic([1.0, 3.0], [0.5, 0.5])
_RHO = Atomic([0.5, 2.0], [0.4, 0.6])
_SIGMA = Atomic([1.0, 4.0], [0.7, 0.3])


def _thm16(alpha=0.5, beta=0.5, rho=0.3, **_):
    return (check_thm16(alpha, beta, rho, "boolean")
            + check_thm16(alpha, beta, rho, "free"))


def _prop63(alpha=0.5, rho=0.3, **_):
    return check_prop63(alpha, rho)


def _thm17(alpha=0.5, rho=0.3, beta=0.5, c=2.0, **_):
    return [check_thm17(alpha, rho, PointMass(c)),
            check_thm17(alpha, rho, BooleanStable(beta, 1.0))]


def _cor61(a=0.3, b=1.2, **_):
    return [check_cor61(a, b, _NU), check_cor61(a, b, MarchenkoPastur())]


def _thm14(**_):
    return check_thm14(_MU, _NU, _RHO, _SIGMA)


def _eq_BN(t=None, **_):
    ts = [t] if t is not None else [0.5, 1.0, 2.0]
    out = []
    for s in ts:
        out += [check_eq_B(_MU, 1 + s), check_eq_free_conv(_MU, 1 + s), check_eq_BN(_MU, s)]
    return out


def _eq_BN_free(t=None, **_):
    ts = [t] if t is not None else [1.5, 2.0, 3.0]
    return [check_eq_BN_free(_MU, _NU, s) for s in ts]


IDENTITIES: dict[str, Callable[..., list[IdentityReport]]] = {
    "thm1.6": _thm16,
    "thm1.7": _thm17,
    "thm1.4": _thm14,
    "eq:BN": _eq_BN,
    "eq:BN_free": _eq_BN_free,
    "prop6.3": _prop63,
    "cor6.1": _cor61,
}


def run_identity(name: str, **params) -> list[IdentityReport]:
    """Run a named identity check with optional parameters."""
    try:
        fn = IDENTITIES[name]
    except KeyError:
        raise KeyError(f"unknown identity {name!r}; choose from {sorted(IDENTITIES)}") from None
    params = {k: v for k, v in params.items() if v is not None}
    return fn(**params)
