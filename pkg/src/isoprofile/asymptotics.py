"""Small-volume behaviour of isoperimetric profiles.

For a pseudo-ball of volume ``rho^n`` centered at ``p`` the boundary volume
behaves like ``c_n rho^(n-1) (1 - Sc(p) rho^2 / (2n(n+2) omega_n^(2/n)) + O(rho^4))``.
This module evaluates that expansion, fits its second-order coefficient to
computed profiles, minimizes pseudo-ball boundary lengths over centers, and
follows critical points of ``p -> f_rho(p)`` from the scalar-curvature maxima.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy import optimize

from .cmc import PseudoBall, PseudoBallError, as_conformal, continue_in_volume, _snap
from .geometry import ConformalTorus, ManifoldModel, geometry_constants, scalar_curvature

__all__ = [
    "DegenerateCriticalPointError",
    "ExpansionModel",
    "SmallProfileSample",
    "CriticalPath",
    "euclidean_profile",
    "expansion_coefficient",
    "expansion_predict",
    "fit_expansion_coefficient",
    "small_volume_profile",
    "scalar_curvature_maxima",
    "critical_point_track",
]

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


class DegenerateCriticalPointError(ValueError):
    """A scalar-curvature maximum is degenerate, so paths are not tracked."""


def euclidean_profile(n: int, v):
    """Boundary volume of the Euclidean ball of volume ``v`` in ``R^n``."""
    c = geometry_constants(n)
    v = np.asarray(v, dtype=float)
    if np.any(v < 0):
        raise ValueError("volume must be nonnegative")
    return (c.c * v ** ((n - 1) / n))[()]


def expansion_coefficient(n: int, sc: float) -> float:
    """Coefficient of ``rho^2`` in the bracket of the small-volume expansion."""
    c = geometry_constants(n)
    return -sc / (2.0 * n * (n + 2) * c.omega ** (2.0 / n))


@dataclass(frozen=True)
class ExpansionModel:
    n: int
    omega: float
    c: float
    sc: float

    @classmethod
    def at(cls, n: int, sc: float) -> "ExpansionModel":
        g = geometry_constants(n)
        return cls(n, g.omega, g.c, float(sc))

    @property
    def coefficient(self) -> float:
        return -self.sc / (2.0 * self.n * (self.n + 2) * self.omega ** (2.0 / self.n))

    def __call__(self, rho):
        rho = np.asarray(rho, dtype=float)
        return (self.c * rho ** (self.n - 1) * (1.0 + self.coefficient * rho**2))[()]


def expansion_predict(model: ManifoldModel, p, rho):
    """Second-order prediction of the boundary volume at volume ``rho^n``."""
    if np.any(np.asarray(rho) < 0):
        raise ValueError("rho must be nonnegative")
    sc = scalar_curvature(model, p) if isinstance(model, ConformalTorus) else scalar_curvature(model)
    return ExpansionModel.at(model.dim, float(sc))(rho)


def fit_expansion_coefficient(rho, I, n: int = 2) -> float:
    """Least-squares estimate of the ``rho^2`` coefficient from profile samples.

    ``(I / (c_n rho^(n-1)) - 1) / rho^2`` is fitted against ``{1, rho^2}`` and
    the constant term returned.

    Raises
    ------
    ValueError
        With fewer than three distinct positive ``rho`` or nonpositive ``I``.
    """
    rho = np.asarray(rho, dtype=float)
    I = np.asarray(I, dtype=float)
    if rho.shape != I.shape or rho.ndim != 1:
        raise ValueError("rho and I must be 1-d arrays of equal length")
    if np.unique(rho).size < 3 or np.any(rho <= 0):
        raise ValueError("need at least three distinct positive rho values")
    if np.any(I <= 0):
        raise ValueError("profile values must be positive")
    c = geometry_constants(n).c
    y = (I / (c * rho ** (n - 1)) - 1.0) / rho**2
    A = np.stack([np.ones_like(rho), rho**2], axis=1)
    coef, _, rank, _ = np.linalg.lstsq(A, y, rcond=None)
    if rank < 2:
        raise ValueError("degenerate design matrix")
    return float(coef[0])


# --------------------------------------------------------------------------
# minimization over centers


@dataclass
class SmallProfileSample:
    v: float
    I: float
    center: tuple
    grid_I: float
    grid_center: tuple
    ball: Optional[PseudoBall] = field(default=None, repr=False)


def _f_at(model, p, v, init: Optional[PseudoBall], vol_tol: float, **kw) -> tuple[float, PseudoBall]:
    """Pseudo-ball boundary length at volume ``v``, linearly corrected to exact ``v``."""
    ball = continue_in_volume(model, p, [v], vol_tol=vol_tol, init=init, **kw)[-1]
    # dw/dv equals the (mean) geodesic curvature to first order
    return ball.w + ball.h * (v - ball.v), ball


def _golden(f, a, b, tol, max_iter=60):
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(max_iter):
        if abs(b - a) <= tol:
            break
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = f(d)
    return (c, fc) if fc <= fd else (d, fd)


def small_volume_profile(
    model: ManifoldModel,
    centers=(16, 16),
    volumes: Sequence[float] = (),
    refine: bool = True,
    refine_tol: float = 1e-2,
    vol_tol: float = 1e-10,
    **solver_kwargs,
) -> list[SmallProfileSample]:
    """Minimum pseudo-ball boundary length over centers, per volume.

    Parameters
    ----------
    model : ConformalTorus or flat 2-torus
    centers : (int, int) or sequence of points
        Grid shape over the fundamental domain, or explicit centers.
    volumes : sequence of float
        Increasing target volumes.
    refine : bool
        Run one golden-section pass along each coordinate around the grid
        argmin, bracketed by one grid cell on each side.
    refine_tol : float
        Golden-section width relative to the grid cell.

    Returns
    -------
    list of SmallProfileSample
        One entry per volume reached by at least one center.

    Raises
    ------
    PseudoBallError
        If no center reaches any volume.
    """
    model = as_conformal(model)
    L1, L2 = model.sides
    if isinstance(centers, tuple) and len(centers) == 2 and all(isinstance(c, int) for c in centers):
        nx, ny = centers
        pts = [(i * L1 / nx, j * L2 / ny) for i in range(nx) for j in range(ny)]
        cell = (L1 / nx, L2 / ny)
    else:
        pts = [tuple(map(float, c)) for c in centers]
        nx = ny = max(1, int(round(math.sqrt(len(pts)))))
        cell = (L1 / nx, L2 / ny)
    volumes = [float(v) for v in volumes]
    W = np.full((len(pts), len(volumes)), np.nan)
    balls: list[list[Optional[PseudoBall]]] = []
    failures = 0
    for i, p in enumerate(pts):
        row: list[Optional[PseudoBall]] = [None] * len(volumes)
        try:
            seq = continue_in_volume(model, p, volumes, vol_tol=vol_tol, **solver_kwargs)
        except PseudoBallError:
            failures += 1
            seq = []
            # fall back to volume-by-volume solves so one bad step loses one entry
            for j, v in enumerate(volumes):
                try:
                    seq.append(continue_in_volume(model, p, [v], vol_tol=vol_tol, **solver_kwargs)[0])
                except PseudoBallError:
                    seq.append(None)
        for j, b in enumerate(seq):
            if b is not None:
                W[i, j] = b.w
                row[j] = b
        balls.append(row)
    out = []
    for j, v in enumerate(volumes):
        col = W[:, j]
        if np.all(np.isnan(col)):
            continue
        k = int(np.nanargmin(col))
        best_I, best_p, best_ball = float(col[k]), pts[k], balls[k][j]
        grid_I, grid_p = best_I, best_p
        if refine:
            cur = np.array(best_p, dtype=float)
            for axis in (0, 1):
                cache = {}

                def f(s, axis=axis, cur=cur.copy()):
                    q = cur.copy()
                    q[axis] = s
                    try:
                        val, b = _f_at(model, q, v, best_ball, vol_tol, **solver_kwargs)
                    except PseudoBallError:
                        return math.inf
                    cache[s] = (val, b)
                    return val

                s0 = cur[axis]
                s, _ = _golden(f, s0 - cell[axis], s0 + cell[axis], refine_tol * cell[axis])
                if s in cache and cache[s][0] < best_I:
                    best_I, best_ball = cache[s]
                    cur[axis] = s
            best_p = tuple(float(c) for c in _snap(model, cur))
        out.append(SmallProfileSample(v, best_I, best_p, grid_I, grid_p, best_ball))
    if not out:
        raise PseudoBallError("no center reached any of the requested volumes")
    return out


def write_small_profile_csv(samples: Sequence[SmallProfileSample], path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["v", "I", "cx", "cy"])
        for s in samples:
            writer.writerow([f"{s.v:.17g}", f"{s.I:.17g}", f"{s.center[0]:.17g}", f"{s.center[1]:.17g}"])


# --------------------------------------------------------------------------
# critical points of f_rho


def _sc_hessian(model, p, h):
    def sc(q):
        return float(scalar_curvature(model, np.asarray(q)))

    x, y = p
    fxx = (sc((x + h, y)) - 2 * sc((x, y)) + sc((x - h, y))) / h**2
    fyy = (sc((x, y + h)) - 2 * sc((x, y)) + sc((x, y - h))) / h**2
    fxy = (sc((x + h, y + h)) - sc((x + h, y - h)) - sc((x - h, y + h)) + sc((x - h, y - h))) / (4 * h**2)
    return np.array([[fxx, fxy], [fxy, fyy]])


def scalar_curvature_maxima(model: ConformalTorus, grid: int = 64, rtol: float = 1e-8):
    """Absolute maxima of Sc with their Hessians.

    Grid scan, then BFGS refinement of every grid local maximum whose value
    is within ``rtol`` of the best one.  Returns ``(points, values, hessians)``
    with duplicates (modulo the lattice) removed.
    """
    L1, L2 = model.sides
    xs = np.arange(grid) * (L1 / grid)
    ys = np.arange(grid) * (L2 / grid)
    P = np.stack(np.meshgrid(xs, ys, indexing="ij"), axis=-1)
    S = scalar_curvature(model, P)
    scale = max(1.0, float(np.max(np.abs(S))))
    if np.ptp(S) <= rtol * scale:
        # constant curvature: every point is a (degenerate) maximum
        return [np.zeros(2)], [float(S.flat[0])], [np.zeros((2, 2))]
    neigh = [np.roll(np.roll(S, a, 0), b, 1) for a in (-1, 0, 1) for b in (-1, 0, 1) if (a, b) != (0, 0)]
    is_max = np.all([S >= n for n in neigh], axis=0)
    cand = [P[i, j] for i, j in zip(*np.nonzero(is_max))]
    refined = []
    for c in cand:
        res = optimize.minimize(lambda q: -float(scalar_curvature(model, q)), c, method="BFGS",
                                options={"gtol": 1e-12})
        refined.append((_snap(model, res.x), -float(res.fun)))
    if not refined:
        return [], [], []
    top = max(val for _, val in refined)
    pts, vals = [], []
    for q, val in refined:
        if val < top - rtol * scale:
            continue
        dup = False
        for o in pts:
            d = np.abs(q - o)
            d = np.minimum(d, np.asarray(model.sides) - d)
            if np.all(d < 1e-5 * min(model.sides)):
                dup = True
                break
        if not dup:
            pts.append(q)
            vals.append(val)
    h = 1e-3 * min(model.sides)
    hess = [_sc_hessian(model, q, h) for q in pts]
    return pts, vals, hess


@dataclass
class CriticalPath:
    """Tracked critical points ``p_i(rho)`` of ``f_rho``, one path per Sc maximum."""

    rho: np.ndarray
    starts: list
    points: list  # per path: array (len(rho), 2)
    values: list  # per path: array (len(rho),)
    converged: list  # per path: bool array
    notes: list = field(default_factory=list)

    @property
    def profile(self) -> np.ndarray:
        """``min_i f_rho(p_i(rho))`` per rho."""
        return np.min(np.vstack(self.values), axis=0)


def critical_point_track(
    model: ManifoldModel,
    rhos: Sequence[float],
    grid: int = 64,
    degeneracy_tol: float = 1e-6,
    step: Optional[float] = None,
    max_newton: int = 20,
    vol_tol: float = 1e-14,
    **solver_kwargs,
) -> CriticalPath:
    """Follow stationary points of ``p -> f_rho(p)`` from the maxima of Sc.

    Each path starts at a nondegenerate absolute maximum of the scalar
    curvature and is continued in ``rho`` by Newton iterations on the
    central-difference gradient and Hessian of ``f_rho``.

    Raises
    ------
    DegenerateCriticalPointError
        If a maximum has a (numerically) singular Hessian, including the
        constant-curvature case.
    """
    model = as_conformal(model)
    rhos = np.asarray(rhos, dtype=float)
    if np.any(np.diff(rhos) <= 0) or np.any(rhos <= 0):
        raise ValueError("rho values must be positive and strictly increasing")
    pts, vals, hess = scalar_curvature_maxima(model, grid)
    if not pts:
        raise DegenerateCriticalPointError("scalar curvature has no isolated maximum")
    for q, H in zip(pts, hess):
        ev = np.linalg.eigvalsh(H)
        scale = max(1.0, float(np.max(np.abs(ev))))
        if np.min(np.abs(ev)) <= degeneracy_tol * scale:
            raise DegenerateCriticalPointError(
                f"scalar curvature maximum at {q.tolist()} is degenerate (Hessian eigenvalues {ev.tolist()})"
            )
    h = 1e-4 * min(model.sides) if step is None else step
    offsets = [(a, b) for a in (-1, 0, 1) for b in (-1, 0, 1)]
    all_points, all_values, all_conv = [], [], []
    for start in pts:
        p = np.array(start, dtype=float)
        init = None
        path_p, path_f, path_c = [], [], []
        for rho in rhos:
            v = rho**2
            ok = False
            for _ in range(max_newton):
                F = {}
                for a, b in offsets:
                    F[(a, b)], ball = _f_at(model, p + h * np.array([a, b]), v, init, vol_tol, **solver_kwargs)
                    if (a, b) == (0, 0):
                        init = ball
                g = np.array([(F[(1, 0)] - F[(-1, 0)]) / (2 * h), (F[(0, 1)] - F[(0, -1)]) / (2 * h)])
                fxx = (F[(1, 0)] - 2 * F[(0, 0)] + F[(-1, 0)]) / h**2
                fyy = (F[(0, 1)] - 2 * F[(0, 0)] + F[(0, -1)]) / h**2
                fxy = (F[(1, 1)] - F[(1, -1)] - F[(-1, 1)] + F[(-1, -1)]) / (4 * h**2)
                H = np.array([[fxx, fxy], [fxy, fyy]])
                try:
                    dp = -np.linalg.solve(H, g)
                except np.linalg.LinAlgError:
                    break
                if np.linalg.norm(dp) > 0.5 * min(model.sides):
                    break
                p = p + dp
                if np.linalg.norm(dp) <= 1e-9 * min(model.sides):
                    ok = True
                    break
            f0, init = _f_at(model, p, v, init, vol_tol, **solver_kwargs)
            path_p.append(p.copy())
            path_f.append(f0)
            path_c.append(ok)
        all_points.append(np.array(path_p))
        all_values.append(np.array(path_f))
        all_conv.append(np.array(path_c))
    return CriticalPath(rhos, [tuple(map(float, q)) for q in pts], all_points, all_values, all_conv)
