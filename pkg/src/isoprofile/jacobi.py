"""Jacobi operator ``L = -Laplacian - q`` on boundary curves and its spectrum.

Boundaries are unions of closed curves parametrized by arclength.  On each
component the potential ``q = |II|^2 + Ric(nu)`` is either a constant or a
periodic sample array at equispaced arclength nodes.  In dimension 2,
``|II|^2`` is the squared geodesic curvature and ``Ric(nu)`` the Gaussian
curvature.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np
from scipy import linalg

from .geometry import ConformalTorus, FlatTorus, ManifoldModel, RoundSphere

__all__ = [
    "Component",
    "BoundaryDescriptor",
    "JacobiSpectrum",
    "jacobi_potential",
    "jacobi_spectrum",
    "spectrum_report",
]


@dataclass(frozen=True)
class Component:
    length: float
    potential: Union[float, np.ndarray]

    def __post_init__(self):
        if not self.length > 0:
            raise ValueError("component length must be positive")
        q = self.potential
        if not np.isscalar(q):
            q = np.asarray(q, dtype=float)
            if q.ndim != 1 or q.size < 3:
                raise ValueError("sampled potential must be a 1-d array with at least 3 samples")
            object.__setattr__(self, "potential", q)

    @property
    def constant(self) -> bool:
        return np.isscalar(self.potential)

    def samples(self, n: int) -> np.ndarray:
        if self.constant:
            return np.full(n, float(self.potential))
        return self.potential


@dataclass(frozen=True)
class BoundaryDescriptor:
    components: tuple[Component, ...]

    def __post_init__(self):
        if not self.components:
            raise ValueError("boundary needs at least one component")


@dataclass
class JacobiSpectrum:
    eigenvalues: np.ndarray
    kernel_dim: int
    stability: str
    constrained_min: float
    N: int
    kernel_tol: float
    constraint: str = "per_component"
    per_component: list = field(default_factory=list)


def _circle(length, q) -> BoundaryDescriptor:
    return BoundaryDescriptor((Component(float(length), q),))


def jacobi_potential(model: ManifoldModel, family_id: str, t: float, center=None,
                     modes: int = 64, collocation: int = 256) -> BoundaryDescriptor:
    """Boundary data of the member ``t`` of family ``family_id``.

    Complements share the boundary of the original family.  For pseudo-balls
    on a conformal torus the center is parsed from the family id
    (``pseudo-ball@x,y``) unless given explicitly.
    """
    fid = family_id.removesuffix("~complement")
    t = float(t)
    if isinstance(model, FlatTorus):
        if model.dim != 2:
            raise ValueError("stability analysis is only available for 2-dimensional models")
        L1, L2 = model.sides
        if fid == "disk":
            if not 0 < t <= L1 / 2:
                raise ValueError(f"disk radius must lie in (0, {L1 / 2}]")
            return _circle(2 * math.pi * t, 1.0 / t**2)
        if fid in ("band-x", "band-y"):
            L = L1 if fid == "band-x" else L2
            return BoundaryDescriptor((Component(L, 0.0), Component(L, 0.0)))
        raise ValueError(f"unknown family {family_id!r} for a flat 2-torus")
    if isinstance(model, RoundSphere):
        if fid != "cap":
            raise ValueError(f"unknown family {family_id!r} for the sphere")
        R = model.radius
        if not 0 < t < math.pi * R:
            raise ValueError("cap radius must lie in (0, pi R)")
        s = math.sin(t / R)
        # kappa_g = cot(r/R)/R and Ric(nu) = 1/R^2
        return _circle(2 * math.pi * R * s, 1.0 / (R * s) ** 2)
    if isinstance(model, ConformalTorus):
        if fid.startswith("pseudo-ball"):
            if center is None:
                m = re.fullmatch(r"pseudo-ball@([^,]+),(.+)", fid)
                if m is None:
                    raise ValueError("pseudo-ball family needs a center")
                center = (float(m.group(1)), float(m.group(2)))
            from .cmc import boundary_potential, solve_pseudo_ball

            ball = solve_pseudo_ball(model, center, t, modes=modes, collocation=collocation)
            length, q = boundary_potential(model, ball)
            return _circle(length, q)
        if fid in ("band-x", "band-y"):
            from .families import _line_integrals

            axis = 0 if fid == "band-x" else 1
            if model.depends_on(1 - axis):
                raise ValueError(f"{fid} is not a geodesic band for this metric")
            length, _ = _line_integrals(model, axis)
            # a geodesic band on a metric independent of the transverse axis:
            # kappa_g = 0 and q reduces to the Gaussian curvature along the line
            from .cmc import band_potential

            q = band_potential(model, axis, collocation)
            return BoundaryDescriptor((Component(length, q), Component(length, q)))
        raise ValueError(f"unknown family {family_id!r} for a conformal torus")
    raise TypeError(f"unsupported model {type(model).__name__}")


def _fourier_block(comp: Component, N: int) -> np.ndarray:
    """Hermitian matrix of L on span{exp(2 pi i k s / l) : |k| <= N}."""
    k = np.arange(-N, N + 1)
    lap = (2.0 * math.pi * k / comp.length) ** 2
    if comp.constant:
        return np.diag(lap - float(comp.potential)).astype(complex)
    q = comp.potential
    M = q.size
    qhat = np.fft.fft(q) / M
    if M % 2 == 0:
        # split the Nyquist mode symmetrically so the multiplier stays Hermitian
        qhat = np.concatenate([qhat[: M // 2], [0.5 * qhat[M // 2]], qhat[M // 2 + 1 :]])
        freq = np.concatenate([np.arange(M // 2), [M // 2], np.arange(-(M // 2) + 1, 0)])
        coeff = {int(f): c for f, c in zip(freq, qhat)}
        coeff[-(M // 2)] = coeff[M // 2]
    else:
        freq = np.fft.fftfreq(M, 1.0 / M).astype(int)
        coeff = {int(f): c for f, c in zip(freq, qhat)}
    D = k[:, None] - k[None, :]
    Q = np.zeros(D.shape, dtype=complex)
    for f, c in coeff.items():
        Q[D == f] = c
    return np.diag(lap).astype(complex) - Q


def _stability(blocks: Sequence[np.ndarray], comps: Sequence[Component], N: int,
               constraint: str) -> float:
    """Smallest eigenvalue of L on volume-preserving perturbations.

    The basis ``exp(2 pi i k s / l) / sqrt(l)`` is orthonormal; a function's
    boundary integral is ``sqrt(l)`` times its k = 0 coefficient.
    """
    size = 2 * N + 1
    if constraint == "per_component":
        keep = [k for k in range(size) if k != N]
        return min(float(linalg.eigvalsh(B[np.ix_(keep, keep)])[0]) for B in blocks)
    if constraint != "joint":
        raise ValueError("constraint must be 'joint' or 'per_component'")
    H = linalg.block_diag(*blocks)
    a = np.zeros(H.shape[0], dtype=complex)
    for j, c in enumerate(comps):
        a[j * size + N] = math.sqrt(c.length)
    basis = linalg.null_space(a[None, :].conj())
    return float(linalg.eigvalsh(basis.conj().T @ H @ basis)[0])


def jacobi_spectrum(descriptor: BoundaryDescriptor, N: int = 64, kernel_tol: Optional[float] = None,
                    constraint: str = "per_component") -> JacobiSpectrum:
    """Spectrum, kernel dimension and stability class of the Jacobi operator.

    Parameters
    ----------
    descriptor : BoundaryDescriptor
    N : int
        Highest Fourier mode; each component contributes ``2N + 1`` eigenvalues.
    kernel_tol : float, optional
        Zero threshold.  Defaults to 1e-8 for constant potentials and
        ``1e-6 (max|q| + (2 pi / l)^2)`` when any potential is sampled.
    constraint : {"per_component", "joint"}
        Volume-preserving subspace used for the stability class: zero mean on
        every component, or zero total mean over the whole boundary.

    Returns
    -------
    JacobiSpectrum
    """
    if N < 8:
        raise ValueError("N must be at least 8")
    comps = descriptor.components
    if kernel_tol is None:
        if all(c.constant for c in comps):
            kernel_tol = 1e-8
        else:
            kernel_tol = 1e-6 * max(
                float(np.max(np.abs(c.samples(3)))) + (2 * math.pi / c.length) ** 2 for c in comps
            )
    per = []
    blocks = []
    for c in comps:
        if c.constant:
            k = np.arange(N + 1)
            lam = (2 * math.pi * k / c.length) ** 2 - float(c.potential)
            ev = np.sort(np.concatenate([lam, lam[1:]]))
        else:
            ev = None
        B = _fourier_block(c, N)
        blocks.append(B)
        if ev is None:
            ev = linalg.eigvalsh(B)
        per.append(np.asarray(ev, dtype=float))
    eigenvalues = np.sort(np.concatenate(per))
    kernel_dim = int(np.sum(np.abs(eigenvalues) <= kernel_tol))
    cmin = _stability(blocks, comps, N, constraint)
    if cmin > kernel_tol:
        stability = "stable"
    elif cmin >= -kernel_tol:
        stability = "weakly_stable"
    else:
        stability = "unstable"
    return JacobiSpectrum(eigenvalues, kernel_dim, stability, cmin, N, float(kernel_tol),
                          constraint, per)


def spectrum_report(spec: JacobiSpectrum, count: Optional[int] = None) -> dict:
    ev = spec.eigenvalues if count is None else spec.eigenvalues[:count]
    return {
        "eigenvalues": [float(x) for x in ev],
        "kernel_dim": spec.kernel_dim,
        "stability": spec.stability,
        "constrained_min": spec.constrained_min,
        "constraint": spec.constraint,
        "N": spec.N,
        "kernel_tol": spec.kernel_tol,
        "per_component_kernel_dim": [int(np.sum(np.abs(p) <= spec.kernel_tol)) for p in spec.per_component],
    }


def write_spectrum_json(spec: JacobiSpectrum, path, count: Optional[int] = None) -> None:
    with open(path, "w") as fh:
        json.dump(spectrum_report(spec, count), fh, indent=2, sort_keys=True)
        fh.write("\n")
