"""Manifold models and their curvature data.

Three model classes are supported:

* ``FlatTorus`` -- a rectangular flat n-torus ``R^n / (L_1 Z x ... x L_n Z)``;
* ``RoundSphere`` -- the round 2-sphere of radius ``R``;
* ``ConformalTorus`` -- a rectangular 2-torus with metric ``exp(2 phi) (dx^2 + dy^2)``
  where ``phi`` is a finite trigonometric series.

Points on the conformal torus are given in chart coordinates ``(x, y)`` of the
fundamental domain ``[0, L_1) x [0, L_2)``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Union

import numpy as np

__all__ = [
    "ModelError",
    "FlatTorus",
    "RoundSphere",
    "ConformalTorus",
    "FourierMode",
    "GeometryConstants",
    "ManifoldModel",
    "unit_ball_volume",
    "geometry_constants",
    "validate_model",
    "load_model",
    "model_to_dict",
    "conformal_data",
    "scalar_curvature",
    "gaussian_curvature_fd",
]


class ModelError(ValueError):
    """Raised for malformed or invalid model descriptions."""


@dataclass(frozen=True)
class FourierMode:
    """One term ``cos * cos(k.X) + sin * sin(k.X)`` of the conformal exponent.

    ``k.X = 2 pi (kx x / L1 + ky y / L2)``.
    """

    kx: int
    ky: int
    cos: float = 0.0
    sin: float = 0.0


@dataclass(frozen=True)
class FlatTorus:
    sides: tuple[float, ...]
    volume: float = field(default=0.0, compare=False)

    @property
    def dim(self) -> int:
        return len(self.sides)


@dataclass(frozen=True)
class RoundSphere:
    radius: float
    volume: float = field(default=0.0, compare=False)

    @property
    def dim(self) -> int:
        return 2


@dataclass(frozen=True)
class ConformalTorus:
    sides: tuple[float, float]
    phi: tuple[FourierMode, ...] = ()
    quad_points: int = 256
    volume: float = field(default=0.0, compare=False)

    @property
    def dim(self) -> int:
        return 2

    @property
    def is_flat(self) -> bool:
        """True when phi is constant (only the zero frequency, or no modes)."""
        return all((m.kx, m.ky) == (0, 0) or (m.cos == 0.0 and m.sin == 0.0) for m in self.phi)

    def depends_on(self, axis: int) -> bool:
        """Whether phi varies along coordinate ``axis`` (0 for x, 1 for y)."""
        for m in self.phi:
            if m.cos == 0.0 and m.sin == 0.0:
                continue
            if (m.kx, m.ky)[axis] != 0:
                return True
        return False

    def wavevectors(self) -> np.ndarray:
        """Array of shape (n_modes, 2) of angular wavevectors."""
        L1, L2 = self.sides
        return np.array(
            [[2.0 * math.pi * m.kx / L1, 2.0 * math.pi * m.ky / L2] for m in self.phi],
            dtype=float,
        ).reshape(-1, 2)


ManifoldModel = Union[FlatTorus, RoundSphere, ConformalTorus]


@dataclass(frozen=True)
class GeometryConstants:
    n: int
    omega: float
    c: float


def unit_ball_volume(n: int) -> float:
    """Volume of the Euclidean unit n-ball via ``omega_n = omega_{n-2} 2 pi / n``."""
    if n < 0:
        raise ValueError("dimension must be nonnegative")
    if n == 0:
        return 1.0
    if n == 1:
        return 2.0
    if n == 2:
        return math.pi
    return unit_ball_volume(n - 2) * 2.0 * math.pi / n


def geometry_constants(n: int) -> GeometryConstants:
    """Dimensional constants ``(n, omega_n, c_n)`` with ``c_n = n omega_n^(1/n)``."""
    if n < 2:
        raise ValueError("dimension must be at least 2")
    omega = unit_ball_volume(n)
    return GeometryConstants(n=n, omega=omega, c=n * omega ** (1.0 / n))


# --------------------------------------------------------------------------
# validation / parsing


def _positive(value: Any, what: str) -> float:
    try:
        x = float(value)
    except (TypeError, ValueError):
        raise ModelError(f"{what} must be a number, got {value!r}") from None
    if not math.isfinite(x) or x <= 0.0:
        raise ModelError(f"{what} must be positive and finite, got {value!r}")
    return x


def _parse_modes(raw: Any) -> tuple[FourierMode, ...]:
    if raw is None:
        return ()
    if not isinstance(raw, (list, tuple)):
        raise ModelError("phi must be a list of modes")
    modes = []
    seen = set()
    for entry in raw:
        if isinstance(entry, FourierMode):
            mode = entry
        elif isinstance(entry, dict):
            unknown = set(entry) - {"kx", "ky", "cos", "sin"}
            if unknown:
                raise ModelError(f"unknown phi mode keys: {sorted(unknown)}")
            try:
                kx, ky = entry["kx"], entry["ky"]
            except KeyError:
                raise ModelError("each phi mode needs integer 'kx' and 'ky'") from None
            if isinstance(kx, bool) or isinstance(ky, bool) or int(kx) != kx or int(ky) != ky:
                raise ModelError(f"frequencies must be integers, got ({kx!r}, {ky!r})")
            c, s = entry.get("cos", 0.0), entry.get("sin", 0.0)
            try:
                c, s = float(c), float(s)
            except (TypeError, ValueError):
                raise ModelError("phi coefficients must be numbers") from None
            if not (math.isfinite(c) and math.isfinite(s)):
                raise ModelError("phi coefficients must be finite")
            mode = FourierMode(int(kx), int(ky), c, s)
        else:
            raise ModelError(f"malformed phi mode {entry!r}")
        key = (mode.kx, mode.ky)
        if key in seen:
            raise ModelError(f"duplicate phi frequency pair {key}")
        seen.add(key)
        modes.append(mode)
    return tuple(modes)


def validate_model(raw: Any) -> ManifoldModel:
    """Validate a model description and precompute its total volume.

    Parameters
    ----------
    raw : dict or ManifoldModel
        Either a parsed JSON description (see ``load_model``) or an already
        constructed model, which is re-validated.

    Returns
    -------
    ManifoldModel
        Model with sides sorted ascending (flat torus) and ``volume`` filled in.

    Raises
    ------
    ModelError
        On nonpositive lengths, unknown types or malformed coefficient lists.
    """
    if isinstance(raw, FlatTorus):
        raw = {"type": "flat_torus", "sides": list(raw.sides)}
    elif isinstance(raw, RoundSphere):
        raw = {"type": "sphere", "radius": raw.radius}
    elif isinstance(raw, ConformalTorus):
        raw = {
            "type": "conformal_torus",
            "sides": list(raw.sides),
            "phi": list(raw.phi),
            "quad_points": raw.quad_points,
        }
    if not isinstance(raw, dict) or not raw:
        raise ModelError("model description must be a non-empty object")
    kind = raw.get("type")
    if kind == "flat_torus":
        sides = raw.get("sides")
        if not isinstance(sides, (list, tuple)) or len(sides) < 2:
            raise ModelError("flat_torus needs a list of at least two sides")
        sorted_sides = tuple(sorted(_positive(s, "side length") for s in sides))
        return FlatTorus(sorted_sides, volume=math.prod(sorted_sides))
    if kind == "sphere":
        radius = _positive(raw.get("radius"), "sphere radius")
        return RoundSphere(radius, volume=4.0 * math.pi * radius**2)
    if kind == "conformal_torus":
        sides = raw.get("sides")
        if not isinstance(sides, (list, tuple)) or len(sides) != 2:
            raise ModelError("conformal_torus needs exactly two sides")
        # sides keep their given order: phi's frequencies are tied to the axes
        L = (_positive(sides[0], "side length"), _positive(sides[1], "side length"))
        modes = _parse_modes(raw.get("phi", []))
        npts = int(raw.get("quad_points", 256))
        if npts < 8:
            raise ModelError("quad_points must be at least 8")
        model = ConformalTorus(L, modes, npts)
        return ConformalTorus(L, modes, npts, volume=_conformal_volume(model, npts))
    raise ModelError(f"unknown model type {kind!r}")


def load_model(path: str | Path) -> ManifoldModel:
    """Read and validate a model JSON file."""
    text = Path(path).read_text()
    if not text.strip():
        raise ModelError(f"model file {path} is empty")
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelError(f"model file {path} is not valid JSON: {exc}") from None
    return validate_model(raw)


def model_to_dict(model: ManifoldModel) -> dict:
    if isinstance(model, FlatTorus):
        return {"type": "flat_torus", "sides": list(model.sides)}
    if isinstance(model, RoundSphere):
        return {"type": "sphere", "radius": model.radius}
    return {
        "type": "conformal_torus",
        "sides": list(model.sides),
        "phi": [{"kx": m.kx, "ky": m.ky, "cos": m.cos, "sin": m.sin} for m in model.phi],
        "quad_points": model.quad_points,
    }


# --------------------------------------------------------------------------
# conformal factor


def _phase(model: ConformalTorus, points: np.ndarray) -> np.ndarray:
    """Phases ``k.X`` of shape (..., n_modes)."""
    return points @ model.wavevectors().T


def conformal_data(model: ConformalTorus, p) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Exact values of phi, grad phi and Laplacian of phi.

    Parameters
    ----------
    model : ConformalTorus
    p : array_like, shape (..., 2)
        Chart coordinates.

    Returns
    -------
    phi : ndarray, shape (...)
    grad : ndarray, shape (..., 2)
    lap : ndarray, shape (...)
    """
    pts = np.asarray(p, dtype=float)
    if not model.phi:
        shape = pts.shape[:-1]
        return np.zeros(shape), np.zeros(shape + (2,)), np.zeros(shape)
    k = model.wavevectors()
    c = np.array([m.cos for m in model.phi])
    s = np.array([m.sin for m in model.phi])
    arg = _phase(model, pts)
    ca, sa = np.cos(arg), np.sin(arg)
    val = ca @ c + sa @ s
    dphase = -sa * c + ca * s
    grad = dphase @ k
    lap = -(ca * c + sa * s) @ np.sum(k * k, axis=1)
    return val, grad, lap


def phi_value(model: ConformalTorus, p) -> np.ndarray:
    pts = np.asarray(p, dtype=float)
    if not model.phi:
        return np.zeros(pts.shape[:-1])
    arg = _phase(model, pts)
    c = np.array([m.cos for m in model.phi])
    s = np.array([m.sin for m in model.phi])
    return np.cos(arg) @ c + np.sin(arg) @ s


def _conformal_volume(model: ConformalTorus, npts: int) -> float:
    # periodic trapezoid rule: spectrally accurate for the analytic integrand
    L1, L2 = model.sides
    xs = np.arange(npts) * (L1 / npts)
    ys = np.arange(npts) * (L2 / npts)
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    phi = phi_value(model, np.stack([X, Y], axis=-1))
    return float(np.exp(2.0 * phi).sum() * (L1 * L2) / npts**2)


def scalar_curvature(model: ManifoldModel, p=None):
    """Scalar curvature at ``p`` (twice the Gaussian curvature in dimension 2).

    Flat tori give 0, the sphere ``2 / R^2`` and the conformal torus
    ``-2 exp(-2 phi) Laplacian(phi)``.
    """
    if isinstance(model, FlatTorus):
        return 0.0 if p is None else np.zeros(np.asarray(p, dtype=float).shape[:-1])[()]
    if isinstance(model, RoundSphere):
        val = 2.0 / model.radius**2
        return val if p is None else np.full(np.asarray(p, dtype=float).shape[:-1], val)[()]
    if p is None:
        raise ValueError("a point is required for the conformal torus")
    phi, _, lap = conformal_data(model, p)
    return (-2.0 * np.exp(-2.0 * phi) * lap)[()]


def gaussian_curvature_fd(model: ConformalTorus, p, step: float = 1e-3) -> float:
    """Gaussian curvature from finite differences of the metric coefficient.

    Uses the Brioschi form for an orthogonal metric ``E = G = exp(2 phi)``
    with phi evaluated pointwise only, so it is independent of the analytic
    derivative path of ``conformal_data``.
    """
    x0, y0 = float(p[0]), float(p[1])
    h = step

    def E(x, y):
        return float(np.exp(2.0 * phi_value(model, np.array([x, y]))))

    # K = -1/(2E) * (d_xx + d_yy) log E
    def logE(x, y):
        return math.log(E(x, y))

    lxx = (logE(x0 + h, y0) - 2 * logE(x0, y0) + logE(x0 - h, y0)) / h**2
    lyy = (logE(x0, y0 + h) - 2 * logE(x0, y0) + logE(x0, y0 - h)) / h**2
    return -(lxx + lyy) / (2.0 * E(x0, y0))
