"""Pseudo-balls on a conformally flat torus.

A pseudo-ball about a chart point ``p`` with base radius ``r`` is the domain
bounded by the polar graph ``theta -> p + r (1 + x(theta)) (cos theta, sin theta)``
where ``x`` is a trigonometric polynomial with no constant and no first
harmonic terms.  The geodesic curvature of the boundary equals a constant
``h`` up to a first-harmonic remainder: the first harmonics of ``x`` generate
translations of the center, so they are removed from both the unknowns and
the equations, which makes the Newton system square and nonsingular for small
``r``.

The metric is ``exp(2 phi) (dx^2 + dy^2)``.  For a positively oriented curve
with Euclidean curvature ``k`` and outward Euclidean unit normal ``n``, the
geodesic curvature is ``exp(-phi) (k + d phi / d n)``.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional, Sequence

import numpy as np

from .geometry import (
    ConformalTorus,
    FlatTorus,
    ManifoldModel,
    conformal_data,
    phi_value,
    scalar_curvature,
)

__all__ = [
    "PseudoBallError",
    "EmbeddingError",
    "SelfIntersectionError",
    "ContinuationError",
    "PseudoBall",
    "as_conformal",
    "geodesic_curvature",
    "riemannian_measures",
    "solve_pseudo_ball",
    "omega_map",
    "continue_in_volume",
    "boundary_potential",
    "band_potential",
    "pseudo_ball_report",
    "write_curve_csv",
]


class PseudoBallError(RuntimeError):
    """Newton divergence or other failure of the pseudo-ball solver."""


class EmbeddingError(PseudoBallError):
    """The polar graph left the embedded regime (``1 + x <= 0``)."""


class SelfIntersectionError(PseudoBallError):
    """The curve, or the domain it bounds on the torus, overlaps itself."""


class ContinuationError(PseudoBallError):
    """Volume continuation could not reach a target."""


def as_conformal(model: ManifoldModel) -> ConformalTorus:
    """View a flat 2-torus as a conformal torus with ``phi = 0``."""
    if isinstance(model, ConformalTorus):
        return model
    if isinstance(model, FlatTorus) and model.dim == 2:
        return ConformalTorus(tuple(model.sides), (), volume=model.volume)
    raise TypeError("pseudo-balls are only available on 2-dimensional tori")


# --------------------------------------------------------------------------
# curve geometry from samples


def _spectral_derivatives(samples: np.ndarray):
    """First and second theta-derivatives of periodic samples along axis -2."""
    n = samples.shape[-2]
    k = np.fft.fftfreq(n, 1.0 / n)
    if n % 2 == 0:
        k[n // 2] = 0.0
    k = k[:, None]
    c = np.fft.fft(samples, axis=-2)
    d1 = np.fft.ifft(1j * k * c, axis=-2).real
    d2 = np.fft.ifft(-(k**2) * c, axis=-2).real
    return d1, d2


def _check_curve(samples) -> np.ndarray:
    pts = np.asarray(samples, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 8:
        raise ValueError("curve samples must have shape (n >= 8, 2)")
    return pts


def geodesic_curvature(model: ManifoldModel, samples) -> np.ndarray:
    """Geodesic curvature at periodic, positively oriented curve samples.

    Derivatives are taken spectrally in the sample index, so the samples
    should be equispaced in some smooth periodic parameter.

    Raises
    ------
    ValueError
        If the tangent degenerates at some sample.
    """
    model = as_conformal(model)
    pts = _check_curve(samples)
    rel = pts - pts.mean(axis=0)
    d1, d2 = _spectral_derivatives(rel)
    speed = np.hypot(d1[:, 0], d1[:, 1])
    if np.any(speed <= 1e-12 * max(np.max(speed), 1e-300)):
        raise ValueError("degenerate tangent in curve samples")
    kappa_e = (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0]) / speed**3
    normal = np.stack([d1[:, 1], -d1[:, 0]], axis=-1) / speed[:, None]
    phi, grad, _ = conformal_data(model, pts)
    return np.exp(-phi) * (kappa_e + np.sum(grad * normal, axis=-1))


# --------------------------------------------------------------------------
# enclosed volume by Green's theorem


@dataclass(frozen=True)
class _DensitySeries:
    """Fourier data of ``exp(2 phi) = mean + div grad Psi`` on the torus."""

    mean: float
    k: np.ndarray  # (K, 2) angular wavevectors
    grad_coef: np.ndarray  # (K, 2) complex coefficients of grad Psi
    grid: int


@lru_cache(maxsize=64)
def _density_series(model: ConformalTorus, rtol: float = 1e-16) -> _DensitySeries:
    L1, L2 = model.sides
    n = 32
    while True:
        xs = np.arange(n) * (L1 / n)
        ys = np.arange(n) * (L2 / n)
        X, Y = np.meshgrid(xs, ys, indexing="ij")
        rho = np.exp(2.0 * phi_value(model, np.stack([X, Y], axis=-1)))
        chat = np.fft.fft2(rho) / n**2
        ring = max(np.abs(chat[n // 2 - 2 : n // 2 + 3, :]).max(), np.abs(chat[:, n // 2 - 2 : n // 2 + 3]).max())
        if ring <= rtol * abs(chat[0, 0]) or n >= 1024:
            break
        n *= 2
    f = np.fft.fftfreq(n, 1.0 / n)
    KX, KY = np.meshgrid(2 * np.pi * f / L1, 2 * np.pi * f / L2, indexing="ij")
    keep = np.abs(chat) > 1e-18 * abs(chat[0, 0])
    keep[0, 0] = False
    if n % 2 == 0:
        keep[n // 2, :] = False
        keep[:, n // 2] = False
    k = np.stack([KX[keep], KY[keep]], axis=-1)
    c = chat[keep]
    k2 = np.sum(k * k, axis=-1)
    # Psi_hat = -c / |k|^2, grad Psi_hat = i k Psi_hat
    grad_coef = (-1j * c / k2)[:, None] * k
    return _DensitySeries(float(chat[0, 0].real), k, grad_coef, n)


def _flux_field(model: ConformalTorus, pts: np.ndarray, origin: np.ndarray) -> np.ndarray:
    """Vector field F with div F = exp(2 phi)."""
    ds = _density_series(model)
    F = 0.5 * ds.mean * (pts - origin)
    if ds.k.size:
        E = np.exp(1j * (pts @ ds.k.T))
        F = F + (E @ ds.grad_coef).real
    return F


def _winding_check(pts: np.ndarray, grid: int = 24) -> None:
    lo, hi = pts.min(axis=0), pts.max(axis=0)
    gx = np.linspace(lo[0], hi[0], grid + 2)[1:-1]
    gy = np.linspace(lo[1], hi[1], grid + 2)[1:-1]
    G = np.stack(np.meshgrid(gx, gy, indexing="ij"), axis=-1).reshape(-1, 2)
    a = np.arctan2(pts[None, :, 1] - G[:, None, 1], pts[None, :, 0] - G[:, None, 0])
    da = np.diff(np.concatenate([a, a[:, :1]], axis=1), axis=1)
    da = (da + np.pi) % (2 * np.pi) - np.pi
    wind = np.rint(da.sum(axis=1) / (2 * np.pi))
    if np.any((wind != 0) & (wind != 1)):
        raise SelfIntersectionError("curve is not simple (winding number outside {0, 1})")


def riemannian_measures(model: ManifoldModel, samples, check: bool = True) -> tuple[float, float]:
    """Enclosed volume and length of a simple, positively oriented closed curve.

    The length is the spectral quadrature of ``exp(phi) |X'|``; the volume is
    the flux of ``F = mean (X - c) / 2 + grad Psi`` through the curve, where
    ``Laplacian Psi = exp(2 phi) - mean`` is solved spectrally on the torus.

    Raises
    ------
    SelfIntersectionError
        If the coarse winding-number check finds a non-simple curve.
    ValueError
        If the curve is negatively oriented.
    """
    model = as_conformal(model)
    pts = _check_curve(samples)
    n = pts.shape[0]
    origin = pts.mean(axis=0)
    d1, _ = _spectral_derivatives(pts - origin)
    euclid_area = 0.5 * np.mean((pts - origin)[:, 0] * d1[:, 1] - (pts - origin)[:, 1] * d1[:, 0]) * 2 * np.pi
    if euclid_area <= 0:
        raise ValueError("curve must be positively oriented")
    if check:
        _winding_check(pts)
    speed = np.hypot(d1[:, 0], d1[:, 1])
    dtheta = 2 * np.pi / n
    w = float(np.sum(np.exp(phi_value(model, pts)) * speed) * dtheta)
    F = _flux_field(model, pts, origin)
    v = float(np.sum(F[:, 0] * d1[:, 1] - F[:, 1] * d1[:, 0]) * dtheta)
    return v, w


# --------------------------------------------------------------------------
# pseudo-balls


@dataclass
class PseudoBall:
    """Solved pseudo-ball.

    ``cos_coef[k]`` and ``sin_coef[k]`` are the coefficients of ``x`` for
    ``k = 0..modes``; entries 0 and 1 are exactly zero.
    """

    center: np.ndarray
    r: float
    cos_coef: np.ndarray
    sin_coef: np.ndarray
    h: float
    v: float
    w: float
    residual: float
    iterations: int = 0
    curvature_deviation: float = 0.0
    first_harmonic: tuple = (0.0, 0.0)
    collocation: int = 256
    meta: dict = field(default_factory=dict)

    @property
    def modes(self) -> int:
        return len(self.cos_coef) - 1

    def x(self, theta) -> np.ndarray:
        return _polar_profile(self.cos_coef, self.sin_coef, np.asarray(theta, dtype=float))[0]

    def samples(self, n: Optional[int] = None) -> np.ndarray:
        n = self.collocation if n is None else n
        theta = 2 * np.pi * np.arange(n) / n
        return _polar_points(self.center, self.r, self.cos_coef, self.sin_coef, theta)

    def curvature(self, model, theta) -> np.ndarray:
        return _polar_geometry(as_conformal(model), self.center, self.r, self.cos_coef,
                               self.sin_coef, np.asarray(theta, dtype=float))["kappa_g"]


def _polar_profile(cc, sc, theta):
    k = np.arange(len(cc))
    ang = np.multiply.outer(theta, k)
    C, S = np.cos(ang), np.sin(ang)
    x = C @ cc + S @ sc
    x1 = (-S * k) @ cc + (C * k) @ sc
    x2 = -(C * k**2) @ cc - (S * k**2) @ sc
    return x, x1, x2


def _polar_points(center, r, cc, sc, theta):
    x = _polar_profile(cc, sc, theta)[0]
    rho = r * (1.0 + x)
    return np.asarray(center)[None, :] + rho[:, None] * np.stack([np.cos(theta), np.sin(theta)], axis=-1)


def _curve_terms(model, center, r, x, x1, x2, ct, st):
    """Geodesic curvature of polar graphs; leading axes of x are batch axes."""
    rho, rho1, rho2 = r * (1.0 + x), r * x1, r * x2
    tx = rho1 * ct - rho * st
    ty = rho1 * st + rho * ct
    speed = np.sqrt(rho**2 + rho1**2)
    kappa_e = (rho**2 + 2.0 * rho1**2 - rho * rho2) / speed**3
    pts = np.stack([center[0] + rho * ct, center[1] + rho * st], axis=-1)
    phi, grad, _ = conformal_data(model, pts)
    dphi_dn = (grad[..., 0] * ty - grad[..., 1] * tx) / speed
    return np.exp(-phi) * (kappa_e + dphi_dn), pts, speed, phi


def _polar_geometry(model, center, r, cc, sc, theta):
    x, x1, x2 = _polar_profile(cc, sc, theta)
    kg, pts, speed, phi = _curve_terms(model, np.asarray(center), r, x, x1, x2, np.cos(theta), np.sin(theta))
    return {"kappa_g": kg, "points": pts, "speed": speed, "phi": phi, "x": x}


class _Collocation:
    """Basis values on equispaced nodes for modes 2..M."""

    def __init__(self, modes: int, nodes: int):
        if nodes < 2 * modes + 2:
            raise ValueError("need at least 2 * modes + 2 collocation nodes")
        self.modes = modes
        self.nodes = nodes
        self.theta = 2 * np.pi * np.arange(nodes) / nodes
        k = np.arange(2, modes + 1)
        ang = np.multiply.outer(self.theta, k)
        C, S = np.cos(ang), np.sin(ang)
        # value / first / second derivative maps from (a_k, b_k) to nodes
        self.B0 = np.hstack([C, S])
        self.B1 = np.hstack([-S * k, C * k])
        self.B2 = np.hstack([-C * k**2, -S * k**2])
        # projection of a nodal function onto modes 0, 2..M
        self.P = np.vstack([np.full(nodes, 1.0 / nodes), (2.0 / nodes) * C.T, (2.0 / nodes) * S.T])
        self.ct, self.st = np.cos(self.theta), np.sin(self.theta)
        self.c1 = np.cos(self.theta) * (2.0 / nodes)
        self.s1 = np.sin(self.theta) * (2.0 / nodes)
        self.n_x = 2 * (modes - 1)


@lru_cache(maxsize=8)
def _collocation(modes: int, nodes: int) -> _Collocation:
    return _Collocation(modes, nodes)


def _residual(model, center, r, col: _Collocation, U: np.ndarray):
    """Nodal residual ``kappa_g - h`` for unknown rows ``U = [a_2.., b_2.., h]``."""
    coef = U[..., : col.n_x]
    h = U[..., col.n_x]
    x = coef @ col.B0.T
    x1 = coef @ col.B1.T
    x2 = coef @ col.B2.T
    kg, _, _, _ = _curve_terms(model, center, r, x, x1, x2, col.ct, col.st)
    return kg - h[..., None], x


def _pack(cc, sc, modes):
    a = np.zeros(modes - 1)
    b = np.zeros(modes - 1)
    m = min(modes, len(cc) - 1)
    a[: m - 1] = cc[2 : m + 1]
    b[: m - 1] = sc[2 : m + 1]
    return np.concatenate([a, b])


def _unpack(coef, modes):
    cc = np.zeros(modes + 1)
    sc = np.zeros(modes + 1)
    cc[2:] = coef[: modes - 1]
    sc[2:] = coef[modes - 1 :]
    return cc, sc


def _snap(model: ConformalTorus, center) -> np.ndarray:
    c = np.asarray(center, dtype=float).reshape(2)
    L = np.asarray(model.sides)
    return c - np.floor(c / L) * L


def solve_pseudo_ball(
    model: ManifoldModel,
    center,
    r: float,
    init: Optional[PseudoBall] = None,
    modes: int = 64,
    collocation: int = 256,
    tol: float = 1e-10,
    max_iter: int = 50,
    r_max_fraction: float = 0.4,
) -> PseudoBall:
    """Solve for the pseudo-ball with center ``center`` and base radius ``r``.

    Unknowns are the coefficients of ``x`` for modes ``2..modes`` and the
    curvature value ``h``; equations are the mode-0 and mode-``2..modes``
    Fourier coefficients of ``kappa_g - h`` on ``collocation`` nodes.  The
    solve is a damped Newton iteration with a central-difference Jacobian.

    Parameters
    ----------
    model : ConformalTorus or flat 2-torus
    center : array_like, shape (2,)
        Snapped into the fundamental domain.
    r : float
        Base radius, in ``[1e-4, r_max_fraction] * min(sides)``.
    init : PseudoBall, optional
        Warm start; otherwise ``x = 0`` and ``h = exp(-phi(p)) / r``.
    tol : float
        Bound on the sup-norm of ``kappa_g - h`` with its first harmonic
        removed.

    Raises
    ------
    ValueError
        For radii outside the admissible range.
    EmbeddingError, SelfIntersectionError, PseudoBallError
        On loss of embedding or Newton failure.
    """
    model = as_conformal(model)
    Lmin = min(model.sides)
    r = float(r)
    if not (1e-4 * Lmin <= r <= r_max_fraction * Lmin):
        raise ValueError(f"base radius {r} outside [{1e-4 * Lmin}, {r_max_fraction * Lmin}]")
    p = _snap(model, center)
    col = _collocation(int(modes), int(collocation))
    n_x = col.n_x

    u = np.zeros(n_x + 1)
    if init is not None:
        u[:n_x] = _pack(init.cos_coef, init.sin_coef, modes)
        u[n_x] = init.h * init.r / r
    else:
        u[n_x] = math.exp(-float(phi_value(model, p))) / r

    def projected(R):
        return R @ col.P.T

    def defect(R):
        # drop the first harmonic, which the pseudo-ball does not control
        a1 = R @ col.c1
        b1 = R @ col.s1
        return R - np.multiply.outer(a1, col.ct) - np.multiply.outer(b1, col.st)

    R, x = _residual(model, p, r, col, u)
    F = projected(R)
    res = float(np.max(np.abs(defect(R))))
    it = 0
    eye = np.eye(n_x)
    step = 1e-7
    while res > tol:
        if it >= max_iter:
            raise PseudoBallError(f"Newton did not converge in {max_iter} iterations (residual {res:.3e})")
        it += 1
        U = np.concatenate([u + step * np.pad(eye, ((0, 0), (0, 1))), u - step * np.pad(eye, ((0, 0), (0, 1)))])
        Rb, _ = _residual(model, p, r, col, U)
        Fb = projected(Rb)
        J = np.empty((F.size, n_x + 1))
        J[:, :n_x] = ((Fb[:n_x] - Fb[n_x:]) / (2 * step)).T
        J[:, n_x] = 0.0
        J[0, n_x] = -1.0
        try:
            du = np.linalg.solve(J, -F)
        except np.linalg.LinAlgError:
            raise PseudoBallError("singular Newton system") from None
        if not np.all(np.isfinite(du)):
            raise PseudoBallError("non-finite Newton step")
        alpha = 1.0
        fnorm = np.linalg.norm(F)
        for _ in range(30):
            trial = u + alpha * du
            Rt, xt = _residual(model, p, r, col, trial)
            if np.all(1.0 + xt > 0) and np.all(np.isfinite(Rt)):
                Ft = projected(Rt)
                if np.linalg.norm(Ft) < fnorm or alpha < 1e-3:
                    break
            alpha *= 0.5
        else:
            raise PseudoBallError("line search failed")
        if np.any(1.0 + xt <= 0):
            raise EmbeddingError("polar graph lost embedding (1 + x <= 0)")
        new_res = float(np.max(np.abs(defect(Rt))))
        if not np.isfinite(new_res):
            raise PseudoBallError("residual became non-finite")
        u, R, x, F = trial, Rt, xt, Ft
        res = new_res

    if np.any(1.0 + x <= 0):
        raise EmbeddingError("polar graph lost embedding (1 + x <= 0)")
    cc, sc = _unpack(u[:n_x], modes)
    ball = PseudoBall(
        center=p, r=r, cos_coef=cc, sin_coef=sc, h=float(u[n_x]), v=0.0, w=0.0,
        residual=res, iterations=it, collocation=col.nodes,
    )
    pts = ball.samples()
    extent = pts.max(axis=0) - pts.min(axis=0)
    if np.any(extent >= np.asarray(model.sides)):
        raise SelfIntersectionError("pseudo-ball overlaps its periodic translates")
    ball.v, ball.w = riemannian_measures(model, pts, check=False)
    ball.curvature_deviation = float(np.max(np.abs(R)))
    ball.first_harmonic = (float(R @ col.c1), float(R @ col.s1))
    return ball


def omega_map(model: ManifoldModel, center, r: float, **kwargs) -> tuple[float, float]:
    """``(enclosed volume, boundary length)`` of the pseudo-ball at ``(center, r)``."""
    ball = solve_pseudo_ball(model, center, r, **kwargs)
    return ball.v, ball.w


def continue_in_volume(
    model: ManifoldModel,
    center,
    targets: Sequence[float],
    vol_tol: float = 1e-10,
    max_secant: int = 40,
    init: Optional[PseudoBall] = None,
    **solver_kwargs,
) -> list[PseudoBall]:
    """Pseudo-balls about ``center`` with the prescribed volumes.

    For each target the base radius is found by a secant iteration on
    ``v(r)``; every solve is warm-started from the previous pseudo-ball, and
    the first radius guess is predicted from ``v ~ r^2``.  A failing volume
    step is halved until it drops below ``1e-6`` of the original step.

    ``vol_tol`` is relative to the total volume of the model.  ``init``
    optionally warm-starts the first target.
    """
    model = as_conformal(model)
    targets = [float(t) for t in targets]
    if any(b <= a for a, b in zip(targets, targets[1:])):
        raise ValueError("targets must be strictly increasing")
    if targets and targets[0] <= 0:
        raise ValueError("targets must be positive")
    p = _snap(model, center)
    atol = vol_tol * model.volume
    phi0 = float(phi_value(model, p))

    def reach(target, prev):
        if prev is None:
            r0 = math.sqrt(target * math.exp(-2.0 * phi0) / math.pi)
            b0 = solve_pseudo_ball(model, p, r0, **solver_kwargs)
        else:
            r0 = prev.r * math.sqrt(target / prev.v)
            b0 = solve_pseudo_ball(model, p, r0, init=prev, **solver_kwargs)
        if abs(b0.v - target) <= atol:
            return b0
        r1 = b0.r * math.sqrt(target / b0.v)
        b1 = solve_pseudo_ball(model, p, r1, init=b0, **solver_kwargs)
        for _ in range(max_secant):
            if abs(b1.v - target) <= atol:
                return b1
            dv = b1.v - b0.v
            if dv == 0:
                break
            r2 = b1.r + (target - b1.v) * (b1.r - b0.r) / dv
            b0, b1 = b1, solve_pseudo_ball(model, p, r2, init=b1, **solver_kwargs)
        if abs(b1.v - target) <= atol:
            return b1
        raise ContinuationError(f"secant iteration did not reach volume {target}")

    out = []
    prev = init
    for target in targets:
        start_v = prev.v if prev is not None and prev.v < target else 0.0
        full_step = target - start_v
        goal = target
        while True:
            try:
                ball = reach(goal, prev)
            except (PseudoBallError, ValueError) as exc:
                step = 0.5 * (goal - start_v)
                if step < 1e-6 * full_step:
                    raise ContinuationError(f"continuation failed before volume {target}: {exc}") from exc
                goal = start_v + step
                continue
            prev = ball
            if goal == target:
                break
            start_v, goal = ball.v, target
        out.append(ball)
    return out


# --------------------------------------------------------------------------
# Jacobi potentials along numeric boundaries


def _uniform_arclength(speed: np.ndarray, period: float, count: int) -> tuple[float, np.ndarray]:
    """Parameters at which the arclength ``int speed`` is equispaced."""
    n = speed.size
    c = np.fft.fft(speed) / n
    k = np.fft.fftfreq(n, 1.0 / n)
    omega = 2 * np.pi * k / period
    length = float(c[0].real * period)
    nz = k != 0
    if n % 2 == 0:
        nz &= np.abs(k) != n // 2

    def S(t):
        t = np.asarray(t)
        E = np.exp(1j * np.multiply.outer(t, omega[nz]))
        return c[0].real * t + ((E - 1.0) @ (c[nz] / (1j * omega[nz]))).real

    def dS(t):
        E = np.exp(1j * np.multiply.outer(np.asarray(t), omega[nz]))
        return c[0].real + (E @ c[nz]).real

    s_target = length * np.arange(count) / count
    t = period * np.arange(count) / count
    for _ in range(50):
        dt = (S(t) - s_target) / dS(t)
        t = t - dt
        if np.max(np.abs(dt)) < 1e-15 * period:
            break
    return length, t


def boundary_potential(model: ManifoldModel, ball: PseudoBall, count: Optional[int] = None) -> tuple[float, np.ndarray]:
    """Length and Jacobi potential ``kappa_g^2 + Sc / 2`` at uniform arclength nodes."""
    model = as_conformal(model)
    count = ball.collocation if count is None else count
    theta = 2 * np.pi * np.arange(4 * ball.collocation) / (4 * ball.collocation)
    g = _polar_geometry(model, ball.center, ball.r, ball.cos_coef, ball.sin_coef, theta)
    speed = np.exp(g["phi"]) * g["speed"]
    length, t = _uniform_arclength(speed, 2 * np.pi, count)
    g = _polar_geometry(model, ball.center, ball.r, ball.cos_coef, ball.sin_coef, t)
    q = g["kappa_g"] ** 2 + 0.5 * scalar_curvature(model, g["points"])
    return length, q


def band_potential(model: ConformalTorus, axis: int, count: int = 256) -> np.ndarray:
    """Gaussian curvature at uniform arclength nodes of a coordinate geodesic."""
    L = model.sides[axis]
    n = 4 * count
    s = np.arange(n) * (L / n)
    pts = np.zeros((n, 2))
    pts[:, axis] = s
    _, t = _uniform_arclength(np.exp(phi_value(model, pts)), L, count)
    pts = np.zeros((count, 2))
    pts[:, axis] = t
    return 0.5 * scalar_curvature(model, pts)


# --------------------------------------------------------------------------
# output


def pseudo_ball_report(ball: PseudoBall, tol: float = 1e-10) -> dict:
    return {
        "center": [float(c) for c in ball.center],
        "r": ball.r,
        "h": ball.h,
        "v": ball.v,
        "w": ball.w,
        "residual": ball.residual,
        "tolerance": tol,
        "iterations": ball.iterations,
        "curvature_deviation": ball.curvature_deviation,
        "first_harmonic": list(ball.first_harmonic),
        "x_cos": [float(c) for c in ball.cos_coef],
        "x_sin": [float(c) for c in ball.sin_coef],
    }


def write_pseudo_ball_json(ball: PseudoBall, path, tol: float = 1e-10) -> None:
    with open(path, "w") as fh:
        json.dump(pseudo_ball_report(ball, tol), fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_curve_csv(ball: PseudoBall, path, n: Optional[int] = None) -> None:
    """Write ``theta,xcoord,ycoord`` samples of the boundary."""
    n = ball.collocation if n is None else n
    theta = 2 * np.pi * np.arange(n) / n
    pts = ball.samples(n)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["theta", "xcoord", "ycoord"])
        for t, (x, y) in zip(theta, pts):
            writer.writerow([f"{t:.17g}", f"{x:.17g}", f"{y:.17g}"])
