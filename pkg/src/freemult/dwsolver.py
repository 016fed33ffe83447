"""
Denjoy-Wolff fixed points of analytic self-maps of a half-plane.

An analytic map of ℍ⁺ (or ℂ⁻) into itself that is not an automorphism
has a unique attracting point, possibly on the boundary, and Picard
iteration converges to it from any starting point. The solvers here run
that iteration vectorized over many maps at once, with two additions:

* every 8 steps a Steffensen (Aitken) extrapolation is tried and kept
  only if it stays inside the half-plane and lowers the residual;
* points whose residual stalls (multiplier close to 1, as at parabolic
  boundary points) and points ending near the boundary are finished by
  damped Newton steps, accepted only while the residual decreases.

The residual of an iterate w is ``|f(w) - w| / max(1, |w|)``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .measures import Domain

__all__ = ["Status", "ConvergenceReport", "SelfMap", "MapFamily", "BatchResult",
           "solve_batch", "dw_point", "dw_points", "dw_point_grid"]

STEFFENSEN_EVERY = 8
STALL_START = 1000
STALL_WINDOW = 100
STALL_FACTOR = 0.999 ** STALL_WINDOW
BOUNDARY_DIST = 1e-6
DIVERGED_ABS = 1e150
POLISH_FLOOR = 4 * np.finfo(float).eps


class Status(enum.Enum):
    CONVERGED = "converged"
    MAX_ITER = "max_iter"
    DIVERGED = "diverged"


@dataclass(frozen=True)
class ConvergenceReport:
    """Outcome of one fixed-point solve."""

    iterations: int
    residual: float
    accelerated: bool
    boundary_flag: bool
    status: Status

    @property
    def converged(self) -> bool:
        return self.status is Status.CONVERGED


@dataclass(frozen=True)
class SelfMap:
    """A vectorized self-map of a half-plane.

    Parameters
    ----------
    evaluator : callable
        Maps an array of points to an array of images.
    domain : Domain
        ``Domain.UPPER`` or ``Domain.LOWER``.
    descriptor : str
    """

    evaluator: Callable[[np.ndarray], np.ndarray]
    domain: Domain = Domain.UPPER
    descriptor: str = ""

    def __call__(self, w):
        return self.evaluator(np.asarray(w, dtype=complex))


@dataclass(frozen=True)
class MapFamily:
    """Self-maps ``w ↦ f(w, z)`` indexed by a parameter z."""

    evaluator: Callable[[np.ndarray, np.ndarray], np.ndarray]
    domain: Domain = Domain.UPPER
    descriptor: str = ""

    def at(self, z) -> SelfMap:
        z = complex(z)
        return SelfMap(lambda w: self.evaluator(w, np.full(np.shape(w), z)), self.domain,
                       f"{self.descriptor} at z={z}")


@dataclass
class BatchResult:
    """Fixed points and diagnostics of a vectorized solve."""

    points: np.ndarray
    iterations: np.ndarray
    residual: np.ndarray
    accelerated: np.ndarray
    boundary: np.ndarray
    status: np.ndarray

    def report(self, i: int) -> ConvergenceReport:
        return ConvergenceReport(int(self.iterations[i]), float(self.residual[i]),
                                 bool(self.accelerated[i]), bool(self.boundary[i]),
                                 self.status[i])

    @property
    def converged(self) -> np.ndarray:
        return np.array([s is Status.CONVERGED for s in self.status], dtype=bool)

    @property
    def all_converged(self) -> bool:
        return bool(self.converged.all())


def _default_start(domain: Domain) -> complex:
    return 1j if domain is Domain.UPPER else -1j


def _scaled(diff, w):
    return np.abs(diff) / np.maximum(1.0, np.abs(w))


def _inside(w, sign):
    return sign * w.imag > 0


def _newton_polish(func, w, idx, sign, max_steps=60, max_halvings=10):
    """Newton on ``f(w) - w`` with a central-difference derivative.

    Used where plain iteration is too slow (multiplier close to 1). Each
    step is halved until it stays in the closed half-plane and lowers the
    residual; a point drops out once a step fails or its residual reaches
    rounding level.
    """
    w = w.copy()
    fw = np.asarray(func(w, idx), dtype=complex)
    res = _scaled(fw - w, w)
    live = np.isfinite(res) & (res > POLISH_FLOOR)
    for _ in range(max_steps):
        a = np.flatnonzero(live)
        if a.size == 0:
            break
        wa, fa, ia = w[a], fw[a], idx[a]
        h = 1e-6 * np.maximum(1.0, np.abs(wa))
        hi = wa + 0.5j * sign * h
        lo = wa - 0.5j * sign * h
        lo = np.where(_inside(lo, sign), lo, wa)
        d = (func(hi, ia) - func(lo, ia)) / (hi - lo)
        step = (fa - wa) / (1 - d)
        pending = np.ones(a.size, dtype=bool)
        for _ in range(max_halvings):
            p = np.flatnonzero(pending)
            cand = wa[p] + step[p]
            inside = sign * cand.imag >= -BOUNDARY_DIST * np.maximum(1.0, np.abs(cand))
            fc = np.asarray(func(np.where(inside, cand, wa[p]), ia[p]), dtype=complex)
            rc = _scaled(fc - cand, cand)
            good = inside & np.isfinite(rc) & (rc < res[a[p]])
            g = a[p[good]]
            w[g], fw[g], res[g] = cand[good], fc[good], rc[good]
            pending[p[good]] = False
            if not pending.any():
                break
            step = step / 2
        live[a[pending]] = False
        live &= res > POLISH_FLOOR
    return w, res


def solve_batch(func: Callable[[np.ndarray, np.ndarray], np.ndarray], w0,
                domain: Domain = Domain.UPPER, tol: float = 1e-12,
                max_iter: int = 100_000) -> BatchResult:
    """Vectorized Denjoy-Wolff iteration.

    Parameters
    ----------
    func : callable
        ``func(w, idx)`` returns the images of the points ``w`` under the
        maps with indices ``idx`` (an integer array into the batch).
    w0 : array_like
        Starting points, strictly inside the half-plane.
    domain : Domain
    tol : float or array_like
        Residual tolerance, scalar or one per point.
    max_iter : int

    Returns
    -------
    BatchResult
    """
    sign = 1.0 if domain is Domain.UPPER else -1.0
    w = np.array(w0, dtype=complex).reshape(-1)
    n = w.size
    tol = np.broadcast_to(np.asarray(tol, dtype=float), (n,))
    if np.any(tol <= 0):
        raise ValueError("tol must be positive")
    if not np.all(_inside(w, sign)):
        raise ValueError("starting points must lie strictly inside the domain")
    all_idx = np.arange(n)
    fw = np.asarray(func(w, all_idx), dtype=complex).reshape(-1)
    res = _scaled(fw - w, w)
    iters = np.ones(n, dtype=np.int64)
    accel = np.zeros(n, dtype=bool)
    boundary = np.zeros(n, dtype=bool)
    status = np.full(n, Status.MAX_ITER, dtype=object)
    conv = res <= tol
    status[conv] = Status.CONVERGED
    active = ~conv
    ckpt = res.copy()

    it = 1
    while it < max_iter and active.any():
        idx = np.flatnonzero(active)
        w_prev = w[idx]
        w1 = fw[idx]
        f1 = np.asarray(func(w1, idx), dtype=complex)
        it += 1
        iters[idx] += 1
        new_w, new_f = w1, f1
        if it % STEFFENSEN_EVERY == 0:
            denom = f1 - 2 * w1 + w_prev
            with np.errstate(all="ignore"):
                ws = w_prev - (w1 - w_prev) ** 2 / denom
            ok = np.isfinite(ws) & (denom != 0)
            out = ok & ~_inside(ws, sign)
            ws[out] = ws[out].real + 0.5j * w1[out].imag
            if ok.any():
                k = np.flatnonzero(ok)
                fs = np.asarray(func(ws[k], idx[k]), dtype=complex)
                better = _scaled(fs - ws[k], ws[k]) < _scaled(f1[k] - w1[k], w1[k])
                better &= np.isfinite(fs)
                kb = k[better]
                new_w = new_w.copy()
                new_f = new_f.copy()
                new_w[kb], new_f[kb] = ws[kb], fs[better]
                accel[idx[kb]] = True
                iters[idx[k]] += 1
        w[idx], fw[idx] = new_w, new_f
        r = _scaled(new_f - new_w, new_w)
        res[idx] = r
        finite = np.isfinite(new_w) & np.isfinite(new_f)
        big = ~finite | (np.abs(new_w) > DIVERGED_ABS)
        status[idx[big]] = Status.DIVERGED
        done = (r <= tol[idx]) & ~big
        status[idx[done]] = Status.CONVERGED
        active[idx[done | big]] = False

        if it >= STALL_START and it % STALL_WINDOW == 0:
            # stalled points are handed to the Newton polish below
            active &= ~(res > STALL_FACTOR * ckpt)
            ckpt = res.copy()

    near = np.abs(w.imag) <= BOUNDARY_DIST * np.maximum(1.0, np.abs(w))
    # slow contraction amplifies the residual into the error; polish those too
    slow = np.flatnonzero((status != Status.DIVERGED) & ((res > tol) | near | (iters > 200)))
    if slow.size:
        with np.errstate(all="ignore"):
            wn, rn = _newton_polish(func, w[slow], slow, sign)
        better = rn < res[slow]
        w[slow[better]], res[slow[better]] = wn[better], rn[better]
        accel[slow[better]] = True
        status[slow[res[slow] <= tol[slow]]] = Status.CONVERGED

    boundary |= np.abs(w.imag) <= BOUNDARY_DIST * np.maximum(1.0, np.abs(w))
    return BatchResult(w, iters, res, accel, boundary, status)


def dw_point(fmap: SelfMap, w0=None, tol: float = 1e-12,
             max_iter: int = 100_000) -> tuple[complex, ConvergenceReport]:
    """Denjoy-Wolff point of a single self-map.

    Parameters
    ----------
    fmap : SelfMap
    w0 : complex, optional
        Starting point, by default ``i`` on ℍ⁺ and ``-i`` on ℂ⁻.
    tol : float
    max_iter : int

    Returns
    -------
    w : complex
    report : ConvergenceReport
        A diverging orbit is reported with status ``DIVERGED``; the
        Denjoy-Wolff point is then the point at infinity.

    Examples
    --------
    >>> w, rep = dw_point(SelfMap(lambda w: (w + 1j) / 2), 5j)
    >>> abs(w - 1j) < 1e-12
    True
    """
    start = _default_start(fmap.domain) if w0 is None else complex(w0)
    res = solve_batch(lambda w, idx: fmap(w), [start], fmap.domain, tol, max_iter)
    return complex(res.points[0]), res.report(0)


def dw_points(family: MapFamily, z, w0=None, tol: float = 1e-12,
              max_iter: int = 100_000) -> BatchResult:
    """Cold-start Denjoy-Wolff points of ``family`` at every parameter in `z`."""
    z = np.asarray(z, dtype=complex).reshape(-1)
    if w0 is None:
        w0 = np.full(z.shape, _default_start(family.domain))
    return solve_batch(lambda w, idx: family.evaluator(w, z[idx]), w0, family.domain,
                       tol, max_iter)


def dw_point_grid(family: MapFamily, z_grid, tol: float = 1e-12,
                  max_iter: int = 100_000) -> list[tuple[complex, ConvergenceReport]]:
    """Warm-started sweep along a path-ordered parameter grid.

    Each solve starts from the previous Denjoy-Wolff point, pushed
    slightly into the interior when that point sits on the boundary.
    Failures are reported per point and never stop the sweep.
    """
    sign = 1.0 if family.domain is Domain.UPPER else -1.0
    out = []
    start = _default_start(family.domain)
    for z in np.asarray(z_grid, dtype=complex).reshape(-1):
        res = solve_batch(lambda w, idx, z=z: family.evaluator(w, np.full(w.shape, z)),
                          [start], family.domain, tol, max_iter)
        w = complex(res.points[0])
        out.append((w, res.report(0)))
        if np.isfinite(w) and res.status[0] is not Status.DIVERGED:
            floor = 1e-3 * max(1.0, abs(w))
            start = complex(w.real, sign * max(sign * w.imag, floor))
        else:
            start = _default_start(family.domain)
    return out
