"""
Free multiplicative convolution through subordination.

For μ on ℝ and ν on [0, ∞), neither equal to δ₀, the maps

    f_z(w) = z h_ν(z h_μ(w)),      g_z(w) = h_μ(z h_ν(z w)),

send ℍ⁺ into itself for z ∈ ℍ⁺. The Denjoy-Wolff point ω₁(z) of f_z and
ω₂(z) = z h_μ(ω₁(z)) satisfy

    η_{μ⊠ν}(z) = η_μ(ω₁(z)) = η_ν(ω₂(z)) = ω₁(z) ω₂(z) / z,

so one fixed-point solve per z gives the η-transform of μ⊠ν. The Cauchy
transform follows from ``G(1/z) = z / (1 - η(z))`` and the measure from
Stieltjes inversion.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline

from .dwsolver import ConvergenceReport, MapFamily, SelfMap, Status, solve_batch
from .measures import (DEFAULT_EPSILONS, Domain, Measure, MeasureError, PointMass,
                       atom_mass_estimate, stieltjes_invert_density)
from .tables import TransformTable

__all__ = ["SubordinationResult", "ConvolutionMeasure", "ConvolveOptions",
           "FreeMultiplicativeConvolution", "BMapMeasure", "build_maps",
           "subordination_family", "subordinate", "subordinate_batch", "convolve",
           "b_map", "free_mult_convolution", "interval_mass", "predicted_atoms"]

_GL64 = np.polynomial.legendre.leggauss(64)


def _check_pair(mu: Measure, nu: Measure):
    if not nu.is_positive:
        raise MeasureError(f"the second factor must live on [0, inf): {nu.descriptor}")
    for m in (mu, nu):
        if m.point_mass == 0:
            raise MeasureError("subordination is undefined for the point mass at 0")


def _upper_or_real(z):
    return (z.imag > 0) | (z.imag == 0)


# ---------------------------------------------------------------------------
# Maps and solves
# ---------------------------------------------------------------------------

def build_maps(mu: Measure, nu: Measure, z: complex) -> tuple[SelfMap, SelfMap]:
    """The self-maps f_z and g_z of ℍ⁺ whose fixed points are ω₁ and ω₂/z.

    Parameters
    ----------
    mu : Measure on ℝ
    nu : Measure on [0, ∞)
    z : complex
        A point of ℍ⁺, or a nonzero real for boundary evaluation.
    """
    _check_pair(mu, nu)
    z = complex(z)
    if z.imag < 0 or z == 0:
        raise ValueError("z must lie in the closed upper half-plane minus 0")
    f = SelfMap(lambda w: z * nu.h(z * mu.h(w)), Domain.UPPER, f"f_z z={z}")
    g = SelfMap(lambda w: mu.h(z * nu.h(z * w)), Domain.UPPER, f"g_z z={z}")
    return f, g


def subordination_family(mu: Measure, nu: Measure) -> MapFamily:
    """The family ``(w, z) ↦ z h_ν(z h_μ(w))``."""
    _check_pair(mu, nu)
    return MapFamily(lambda w, z: z * nu.h(z * mu.h(w)), Domain.UPPER,
                     f"f_z[{mu.descriptor} ; {nu.descriptor}]")


@dataclass(frozen=True)
class SubordinationResult:
    """Subordination functions and η_{μ⊠ν} at one point z."""

    z: complex
    omega1: complex
    omega2: complex
    eta_conv: complex
    report1: ConvergenceReport
    report2: ConvergenceReport

    def identity_residuals(self, mu: Measure, nu: Measure) -> tuple[float, float]:
        """``|η_μ(ω₁) - η_ν(ω₂)|`` and ``|η_ν(ω₂) - ω₁ω₂/z|``."""
        e1 = complex(mu.eta(self.omega1))
        e2 = complex(nu.eta(self.omega2))
        return abs(e1 - e2), abs(e2 - self.omega1 * self.omega2 / self.z)


def subordinate_batch(mu: Measure, nu: Measure, z, tol: float = 1e-13,
                      max_iter: int = 100_000, w0=None):
    """Vectorized subordination at every point of `z`.

    Returns
    -------
    omega1, omega2, eta : ndarray
    result : BatchResult
        Diagnostics of the ω₁ solve.
    """
    _check_pair(mu, nu)
    z = np.asarray(z, dtype=complex)
    shape = z.shape
    z = z.reshape(-1)
    if np.any(z.imag < 0) or np.any(z == 0):
        raise ValueError("z must lie in the closed upper half-plane minus 0")
    if mu.point_mass is not None:
        a = mu.point_mass
        o2 = a * z
        eta = nu.eta(o2)
        o1 = eta / a
        res = _exact_batch(o1)
    elif nu.point_mass is not None:
        o1 = nu.point_mass * z
        o2 = z * mu.h(o1)
        eta = mu.eta(o1)
        res = _exact_batch(o1)
    else:
        if w0 is None:
            w0 = np.full(z.shape, 1j)
        else:
            w0 = np.asarray(w0, dtype=complex).reshape(-1).copy()
            bad = ~(w0.imag > 0) | ~np.isfinite(w0)
            w0[bad] = 1j
        res = solve_batch(lambda w, idx: z[idx] * nu.h(z[idx] * mu.h(w)), w0,
                          Domain.UPPER, tol, max_iter)
        o1 = res.points
        o2 = z * mu.h(o1)
        eta = nu.eta(o2)
    return o1.reshape(shape), o2.reshape(shape), eta.reshape(shape), res


def _exact_batch(points):
    from .dwsolver import BatchResult
    n = points.size
    return BatchResult(points.copy(), np.ones(n, dtype=np.int64), np.zeros(n),
                       np.zeros(n, dtype=bool), np.abs(points.imag) <= 1e-6,
                       np.full(n, Status.CONVERGED, dtype=object))


def subordinate(mu: Measure, nu: Measure, z: complex, tol: float = 1e-13,
                max_iter: int = 100_000) -> SubordinationResult:
    """ω₁, ω₂ and η_{μ⊠ν} at a single point z of ℍ⁺.

    Examples
    --------
    >>> from freemult.measures import PointMass, MarchenkoPastur
    >>> r = subordinate(PointMass(2.0), MarchenkoPastur(), 1 + 1j)
    >>> r.omega2 == 2 * (1 + 1j)
    True
    """
    z = complex(z)
    o1, o2, eta, res = subordinate_batch(mu, nu, np.array([z]), tol, max_iter)
    o1, o2, eta = complex(o1[0]), complex(o2[0]), complex(eta[0])
    rep1 = res.report(0)
    # ω₂/z is the fixed point of g_z; report its residual
    g = complex(mu.h(z * nu.h(o2)))
    r2 = abs(g - o2 / z) / max(1.0, abs(o2 / z))
    rep2 = ConvergenceReport(rep1.iterations, r2, rep1.accelerated,
                             abs(o2.imag) <= 1e-6 * max(1, abs(o2)),
                             rep1.status if r2 <= max(tol, 1e-10) or
                             rep1.status is not Status.CONVERGED else Status.MAX_ITER)
    return SubordinationResult(z, o1, o2, eta, rep1, rep2)


# ---------------------------------------------------------------------------
# Lazy measures
# ---------------------------------------------------------------------------

def predicted_atoms(mu: Measure, nu: Measure) -> list[tuple[float, float]]:
    """Atoms of μ⊠ν away from 0: ``bc`` with mass ``μ({b}) + ν({c}) - 1 > 0``."""
    out = {}
    for b, mb in mu.atoms():
        for c, mc in nu.atoms():
            if b * c != 0 and mb + mc > 1:
                out[b * c] = out.get(b * c, 0.0) + mb + mc - 1
    return sorted(out.items())


class _SolvedEta(Measure):
    """Measure whose η on ℍ⁺ comes from a subordination solve."""

    tol = 1e-13
    max_iter = 100_000

    def _eta_upper(self, z, w0=None):
        raise NotImplementedError

    def eta(self, z):
        z = np.asarray(z, dtype=complex)
        up = _upper_or_real(z)
        w = np.where(up, z, np.conj(z))
        flat = w.reshape(-1)
        out = np.empty(flat.shape, dtype=complex)
        zero = flat == 0
        out[zero] = 0
        if (~zero).any():
            out[~zero] = self._eta_upper(flat[~zero])[0]
        out = out.reshape(z.shape)
        return np.where(up, out, np.conj(out))

    def cauchy(self, z):
        z = np.asarray(z, dtype=complex)
        return (1 / z) / (1 - self.eta(1 / z))


class FreeMultiplicativeConvolution(_SolvedEta):
    """Lazy representation of μ⊠ν through its η-transform.

    Parameters
    ----------
    mu : Measure on ℝ
    nu : Measure on [0, ∞)
    tol : float
        Fixed-point tolerance of each subordination solve.
    """

    def __init__(self, mu: Measure, nu: Measure, tol: float = 1e-13,
                 max_iter: int = 100_000):
        _check_pair(mu, nu)
        self.mu, self.nu, self.tol, self.max_iter = mu, nu, tol, max_iter
        self.is_positive = mu.is_positive
        self.mass_at_zero = max(mu.mass_at_zero, nu.mass_at_zero)
        self.scale = mu.scale * nu.scale
        if mu.point_mass is not None and nu.point_mass is not None:
            self.point_mass = mu.point_mass * nu.point_mass
        self.descriptor = f"({mu.descriptor}) [x] ({nu.descriptor})"

    def _eta_upper(self, z, w0=None):
        o1, o2, eta, res = subordinate_batch(self.mu, self.nu, z, self.tol, self.max_iter, w0)
        return eta, o1, res

    def atoms(self):
        out = predicted_atoms(self.mu, self.nu)
        if self.mass_at_zero > 0:
            out = sorted(out + [(0.0, self.mass_at_zero)])
        return out


def free_mult_convolution(mu: Measure, nu: Measure, **kw) -> Measure:
    """μ⊠ν as a lazy measure; products of point masses stay exact."""
    _check_pair(mu, nu)
    if mu.point_mass is not None and nu.point_mass is not None:
        return PointMass(mu.point_mass * nu.point_mass)
    return FreeMultiplicativeConvolution(mu, nu, **kw)


class BMapMeasure(_SolvedEta):
    """The measure 𝔹_ν(μ) whose η-transform is the subordination function ω₂."""

    def __init__(self, nu: Measure, mu: Measure, tol: float = 1e-13,
                 max_iter: int = 100_000):
        _check_pair(mu, nu)
        self.mu, self.nu, self.tol, self.max_iter = mu, nu, tol, max_iter
        self.is_positive = mu.is_positive
        self.mass_at_zero = mu.mass_at_zero
        self.scale = mu.scale
        self.descriptor = f"B[{nu.descriptor}]({mu.descriptor})"

    def _eta_upper(self, z, w0=None):
        o1, o2, eta, res = subordinate_batch(self.mu, self.nu, z, self.tol, self.max_iter, w0)
        return o2, o1, res


def b_map(nu: Measure, mu: Measure, **kw) -> Measure:
    """The measure 𝔹_ν(μ) with ``η_{𝔹_ν(μ)} = ω₂`` for the pair (μ, ν).

    Parameters
    ----------
    nu : Measure on [0, ∞), not δ₀
    mu : Measure

    Returns
    -------
    Measure
        ``δ_a`` when μ = δ_a; otherwise a lazy measure whose Cauchy
        transform is ``F(z) = z (1 - ω₂(1/z))`` inverted; materialize it
        with `stieltjes_invert_density` when a density is needed.
    """
    _check_pair(mu, nu)
    if mu.point_mass is not None:
        return PointMass(mu.point_mass)
    return BMapMeasure(nu, mu, **kw)


# ---------------------------------------------------------------------------
# Contour integrals of G
# ---------------------------------------------------------------------------

def interval_mass(G, a: float, b: float, n: int = 64) -> float:
    """μ((a, b)) from the Cauchy transform, for regular endpoints a < b.

    Uses ``∫_a^b G(x + i0) dx = ∫_γ G(ζ) dζ`` with γ the upper half
    circle over [a, b], so G is only evaluated inside ℍ⁺. Atoms inside
    (a, b) are included.
    """
    nodes, weights = _GL64 if n == 64 else np.polynomial.legendre.leggauss(n)
    theta = 0.5 * np.pi * (nodes + 1)
    c, r = 0.5 * (a + b), 0.5 * (b - a)
    zeta = c - r * np.cos(theta) + 1j * r * np.sin(theta)
    dzeta = r * (np.sin(theta) + 1j * np.cos(theta))
    integral = np.sum(0.5 * np.pi * weights * np.asarray(G(zeta)) * dzeta)
    return float(-integral.imag / np.pi)


class _WarmCauchy:
    """Cauchy transform of a lazy convolution on ℍ⁺ with warm starts.

    Each call starts the ω₁ iteration from the solution of the previous
    call when the input has the same shape. The state is private to one
    extraction run.
    """

    def __init__(self, conv: _SolvedEta):
        self.conv = conv
        self.w = None
        self.solves = 0
        self.failures = 0

    def __call__(self, zeta):
        zeta = np.asarray(zeta, dtype=complex)
        z = 1 / np.conj(zeta)
        w0 = self.w if self.w is not None and self.w.size == z.size else None
        eta, o1, res = self.conv._eta_upper(z.reshape(-1), w0)
        self.w = np.asarray(o1).reshape(-1)
        self.solves += z.size
        self.failures += int(z.size - np.count_nonzero(res.converged))
        return np.conj((z.reshape(-1) / (1 - eta))).reshape(zeta.shape)


# ---------------------------------------------------------------------------
# Convolution measure
# ---------------------------------------------------------------------------

@dataclass
class ConvolveOptions:
    """Numerical settings for `convolve`.

    Attributes
    ----------
    epsilons : array_like
        ε schedule for Stieltjes inversion.
    origin_exclusion : float or None
        Half-width δ of the excluded window around 0; by default
        ``1e-3 * max|x|``. Use 0 to keep the origin.
    exclusion_radius : float
        Radius of the neighborhoods of singular points and atoms whose
        mass is taken from contour integrals instead of the density.
    tol : float
        Subordination tolerance.
    refine_edges : bool
        Locate support edges by bisection and classify them.
    """

    epsilons: np.ndarray = field(default_factory=lambda: DEFAULT_EPSILONS.copy())
    origin_exclusion: float | None = None
    exclusion_radius: float = 0.05
    tol: float = 1e-13
    refine_edges: bool = True
    support_threshold: float = 1e-7


@dataclass
class ConvolutionMeasure:
    """μ⊠ν recovered as atoms plus a density table.

    Attributes
    ----------
    atoms : list of (position, mass)
        All atoms, including the one at 0.
    density_table : TransformTable
    atom_at_zero : float
    diagnostics : dict
        ``singular`` flags per grid point, ``edges`` (support edges with a
        singular/regular label), ``singular_points``, ``excluded`` grid
        mask for the origin window, ``not_converged_fraction`` of the
        subordination solves behind the density table.
    analytic : Measure
        The lazy convolution, used for contour integrals and CDFs.
    """

    atoms: list
    density_table: TransformTable
    atom_at_zero: float
    diagnostics: dict
    analytic: Measure

    @property
    def singular_points(self) -> list[float]:
        return list(self.diagnostics.get("singular_points", []))

    def density(self, x):
        t = self.density_table
        return np.interp(x, t.inputs, t.outputs, left=0.0, right=0.0)

    def _gaps(self, radius):
        x = self.density_table.inputs
        centers = list(self.singular_points) + [a for a, m in self.atoms if a != 0]
        gaps = []
        for c in centers:
            gaps.append((c - radius, c + radius))
        excl = self.diagnostics.get("origin_window")
        if excl is not None:
            gaps.append(excl)
        gaps.sort()
        merged = []
        for lo, hi in gaps:
            if merged and lo <= merged[-1][1]:
                merged[-1] = (merged[-1][0], max(hi, merged[-1][1]))
            else:
                merged.append((lo, hi))
        out = []
        for lo, hi in merged:
            left = x[x <= lo]
            right = x[x >= hi]
            out.append((left[-1] if left.size else None, right[0] if right.size else None))
        return out

    def total_mass(self, exclusion_radius: float | None = None) -> float:
        """Atoms plus the integral of the density.

        Neighborhoods of singular points and atoms are integrated by
        contour integrals of G instead of the density table.
        """
        r = self.diagnostics.get("exclusion_radius", 0.05) if exclusion_radius is None \
            else exclusion_radius
        x, f = self.density_table.inputs, self.density_table.outputs
        keep = np.ones(x.size - 1, dtype=bool)
        mass = 0.0
        gap_atoms = set()
        G = self.analytic.cauchy
        for lo, hi in self._gaps(r):
            a = x[0] if lo is None else lo
            b = x[-1] if hi is None else hi
            keep &= ~((x[:-1] >= a) & (x[1:] <= b))
            mass += interval_mass(G, a, b)
            gap_atoms.update(p for p, _ in self.atoms if a < p < b)
        cells = 0.5 * (f[:-1] + f[1:]) * np.diff(x)
        mass += float(cells[keep].sum())
        mass += sum(m for p, m in self.atoms if p not in gap_atoms)
        return mass

    def cdf(self, x, height: float = 1.0, n_vertical: int = 48) -> np.ndarray:
        """Distribution function ``μ⊠ν((-∞, x])``.

        Atoms enter as jumps. The continuous part is the contour integral
        of ``G - Σ m/(ζ - a)`` from a point left of the support, up to
        height `height`, across, and down to x. Assumes compact support.
        """
        x = np.asarray(x, dtype=float)
        flat = x.reshape(-1)
        atoms = [(p, m) for p, m in self.atoms if m > 0]
        lazy = self.analytic

        def g_ac(zeta):
            g = lazy.cauchy(zeta)
            for p, m in atoms:
                g = g - m / (zeta - p)
            return g

        support = 2 * max(lazy.scale, 1.0)
        lo = min(-support, float(flat.min()) - 1.0)
        hi = max(support, float(flat.max()) + 1.0)
        H = height
        # left leg: from lo up to lo + iH
        nodes, weights = np.polynomial.legendre.leggauss(32)
        y = 0.5 * H * (nodes + 1)
        up = np.sum(0.5 * H * weights * g_ac(lo + 1j * y) * 1j)
        # top leg: spline antiderivative along Im ζ = H
        tg = np.linspace(lo, hi, max(2001, int(200 * (hi - lo)) + 1))
        top_vals = g_ac(tg + 1j * H)
        spline = CubicSpline(tg, top_vals).antiderivative()
        top = spline(flat) - spline(lo)
        # down leg in log-height variables
        nodes, weights = np.polynomial.legendre.leggauss(n_vertical)
        s_lo, s_hi = np.log(1e-10 * max(lazy.scale, 1.0)), np.log(H)
        s = s_lo + 0.5 * (s_hi - s_lo) * (nodes + 1)
        ys = np.exp(s)
        zeta = flat[:, None] + 1j * ys[None, :]
        vals = g_ac(zeta.reshape(-1)).reshape(zeta.shape)
        down = (vals * (1j * ys) * (0.5 * (s_hi - s_lo) * weights)).sum(axis=1)
        cont = -(up + top - down).imag / np.pi
        jumps = np.zeros_like(flat)
        for p, m in atoms:
            jumps += m * (flat >= p)
        return (cont + jumps).reshape(x.shape)


def _point_density(G, x, eps=1e-9):
    """Density at isolated points from two tiny heights (Richardson)."""
    x = np.asarray(x, dtype=float)
    d1 = -np.asarray(G(x + 1j * eps)).imag / np.pi
    d2 = -np.asarray(G(x + 0.5j * eps)).imag / np.pi
    return 2 * d2 - d1


def _refine_edges(G, brackets, positive_left, threshold, steps=14):
    """Bisect support edges inside [l, r] brackets, all at once."""
    lo = np.array([b[0] for b in brackets], dtype=float)
    hi = np.array([b[1] for b in brackets], dtype=float)
    pl = np.asarray(positive_left, dtype=bool)
    for _ in range(steps):
        mid = 0.5 * (lo + hi)
        inside = _point_density(G, mid) > threshold
        go_right = inside == pl
        lo = np.where(go_right, mid, lo)
        hi = np.where(go_right, hi, mid)
    return 0.5 * (lo + hi)


def _classify_edges(G, edges, inward):
    """Singular when the density grows toward the edge."""
    edges = np.asarray(edges, dtype=float)
    inward = np.asarray(inward, dtype=float)
    near = _point_density(G, edges + inward * 1e-5)
    far = _point_density(G, edges + inward * 1e-3)
    return near > 3 * np.maximum(far, 1e-12)


def convolve(mu: Measure, nu: Measure, x_grid, options: ConvolveOptions | None = None
             ) -> ConvolutionMeasure:
    """Atoms and density of μ⊠ν.

    Parameters
    ----------
    mu : Measure on ℝ
    nu : Measure on [0, ∞)
    x_grid : array_like
        Strictly increasing grid for the density.
    options : ConvolveOptions, optional

    Returns
    -------
    ConvolutionMeasure

    Notes
    -----
    The density is the Stieltjes inversion of G_{μ⊠ν}(x + iε) over the ε
    schedule. Atoms off 0 are searched only at products bc of input atoms
    with μ({b}) + ν({c}) > 1 and confirmed from G; the atom at 0 is
    ``max(μ({0}), ν({0}))``.
    """
    opts = options or ConvolveOptions()
    lazy = FreeMultiplicativeConvolution(mu, nu, tol=opts.tol)
    x = np.asarray(x_grid, dtype=float)
    if x.ndim != 1 or x.size < 2 or np.any(np.diff(x) <= 0):
        raise ValueError("x_grid must be strictly increasing with at least 2 points")
    delta = (1e-3 * float(np.max(np.abs(x)))) if opts.origin_exclusion is None \
        else opts.origin_exclusion
    excluded = np.abs(x) < delta if delta > 0 else np.zeros(x.size, dtype=bool)
    kept = x[~excluded]

    G = _WarmCauchy(lazy)
    table = stieltjes_invert_density(G, kept, opts.epsilons,
                                     descriptor=lazy.descriptor)

    atoms = []
    for p, m_pred in predicted_atoms(mu, nu):
        est = atom_mass_estimate(lambda z: lazy.cauchy(z), p, opts.epsilons)
        if est.mass > 0:
            atoms.append((p, est.mass))
    zero = lazy.mass_at_zero
    if zero > 0:
        atoms.append((0.0, zero))
    atoms.sort()

    diagnostics = {"singular": table.metadata["singular"], "exclusion_radius":
                   opts.exclusion_radius, "origin_window": (-delta, delta) if delta > 0
                   else None, "excluded": excluded,
                   "not_converged_fraction": G.failures / max(G.solves, 1)}
    edges, singular_points = [], []
    if opts.refine_edges:
        f = table.outputs
        pos = f > opts.support_threshold
        change = np.flatnonzero(pos[1:] != pos[:-1])
        # skip transitions across the excluded origin window
        change = [i for i in change if kept[i + 1] - kept[i] <= 3 * np.median(np.diff(kept))]
        if change:
            brackets = [(kept[i], kept[i + 1]) for i in change]
            pl = [bool(pos[i]) for i in change]
            Gc = lambda z: lazy.cauchy(z)
            e = _refine_edges(Gc, brackets, pl, opts.support_threshold)
            inward = np.where(pl, -1.0, 1.0)
            sing = _classify_edges(Gc, e, inward)
            edges = [(float(a), bool(s)) for a, s in zip(e, sing)]
            singular_points = [a for a, s in edges if s]
        # interior spikes: flagged clusters away from edges and atoms
        flags = table.metadata["singular"]
        for i in np.flatnonzero(flags):
            xi = kept[i]
            if all(abs(xi - s) > opts.exclusion_radius for s in singular_points) and \
                    all(abs(xi - a) > opts.exclusion_radius for a, _ in atoms):
                singular_points.append(float(xi))
    diagnostics["edges"] = edges
    diagnostics["singular_points"] = sorted(singular_points)
    return ConvolutionMeasure(atoms, table, zero, diagnostics, lazy)
