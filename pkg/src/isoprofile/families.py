"""Candidate bubble families as parametric (volume, boundary volume) curves."""

from __future__ import annotations

import csv
import itertools
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from .geometry import (
    ConformalTorus,
    FlatTorus,
    ManifoldModel,
    RoundSphere,
    phi_value,
    unit_ball_volume,
)

__all__ = [
    "ProfileCurve",
    "enumerate_families",
    "omitted_families",
    "complement_curve",
    "flat_torus_families",
    "sphere_families",
    "conformal_families",
    "pseudo_ball_curve",
    "sample_curve",
    "write_families_csv",
]

COMPLEMENT = "~complement"
AXES = "xyzwuvst"


@dataclass(frozen=True)
class ProfileCurve:
    """A one-parameter family ``t -> (v(t), w(t))`` of candidate domains.

    ``evaluator`` is vectorized: it maps an array of parameters to a pair of
    arrays.  ``inverse``, when present, maps volumes back to parameters and is
    only meaningful for ``monotone_v`` curves.
    """

    family_id: str
    t_min: float
    t_max: float
    evaluator: Callable[[np.ndarray], tuple[np.ndarray, np.ndarray]]
    monotone_v: bool = True
    provenance: str = "closed-form"
    inverse: Optional[Callable[[np.ndarray], np.ndarray]] = None
    meta: dict = field(default_factory=dict, compare=False, hash=False)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        v, w = self.evaluator(t)
        return np.broadcast_to(v, t.shape).astype(float), np.broadcast_to(w, t.shape).astype(float)

    @property
    def closed_form(self) -> bool:
        return self.provenance == "closed-form"


def complement_curve(curve: ProfileCurve, total_volume: float) -> ProfileCurve:
    """Family of complements ``t -> (V - v(t), w(t))``.

    Complementing twice restores the original family (including its id).
    """
    ev = curve.evaluator

    def evaluator(t):
        v, w = ev(np.asarray(t, dtype=float))
        return total_volume - v, w

    inverse = None
    if curve.inverse is not None:
        inv = curve.inverse
        inverse = lambda v: inv(total_volume - np.asarray(v, dtype=float))  # noqa: E731

    if curve.family_id.endswith(COMPLEMENT):
        if curve.meta.get("complement_of") is not None:
            return curve.meta["complement_of"]
        fid = curve.family_id[: -len(COMPLEMENT)]
    else:
        fid = curve.family_id + COMPLEMENT
    meta = dict(curve.meta)
    meta["complement_of"] = curve
    meta["total_volume"] = total_volume
    return replace(curve, family_id=fid, evaluator=evaluator, inverse=inverse, meta=meta)


# --------------------------------------------------------------------------
# flat tori


def _ball_times_torus(sides, subset, fid):
    n_ball = len(subset)
    omega = unit_ball_volume(n_ball)
    rest = math.prod(L for i, L in enumerate(sides) if i not in subset)
    r_max = min(sides[i] for i in subset) / 2.0

    def evaluator(r):
        return omega * r**n_ball * rest, n_ball * omega * r ** (n_ball - 1) * rest

    def inverse(v):
        return (np.asarray(v, dtype=float) / (omega * rest)) ** (1.0 / n_ball)

    return ProfileCurve(
        fid, 0.0, r_max, evaluator, True, "closed-form", inverse,
        meta={"kind": "ball", "subset": tuple(subset), "sides": tuple(sides)},
    )


def _band(length, width_max, fid, area_per_width=None):
    # boundary: two parallel closed geodesics of length ``length``
    a = length if area_per_width is None else area_per_width

    def evaluator(t):
        return a * t, np.full(np.shape(t), 2.0 * length)

    def inverse(v):
        return np.asarray(v, dtype=float) / a

    return ProfileCurve(
        fid, 0.0, width_max, evaluator, True, "closed-form", inverse,
        meta={"kind": "band", "geodesic_length": length},
    )


def flat_torus_families(model: FlatTorus) -> list[ProfileCurve]:
    """Balls crossed with sub-tori, and their complements."""
    sides = model.sides
    n = len(sides)
    curves = []
    if n == 2:
        L1, L2 = sides
        disk = _ball_times_torus(sides, (0, 1), "disk")
        disk.meta["kind"] = "disk"
        curves.append(disk)
        curves.append(_band(L1, L2, "band-x"))
        curves.append(_band(L2, L1, "band-y"))
    else:
        if n > len(AXES):
            raise ValueError(f"flat tori of dimension > {len(AXES)} are not supported")
        for k in range(n, 0, -1):
            for subset in itertools.combinations(range(n), k):
                fid = "ball" if k == n else "ball-" + "".join(AXES[i] for i in subset)
                curves.append(_ball_times_torus(sides, subset, fid))
    curves += [complement_curve(c, model.volume) for c in curves]
    return curves


# --------------------------------------------------------------------------
# sphere


def sphere_families(model: RoundSphere) -> list[ProfileCurve]:
    R = model.radius

    def evaluator(r):
        return 2.0 * math.pi * R**2 * (1.0 - np.cos(r / R)), 2.0 * math.pi * R * np.sin(r / R)

    def inverse(v):
        c = np.clip(1.0 - np.asarray(v, dtype=float) / (2.0 * math.pi * R**2), -1.0, 1.0)
        return R * np.arccos(c)

    return [ProfileCurve("cap", 0.0, math.pi * R, evaluator, True, "closed-form", inverse,
                         meta={"kind": "cap"})]


# --------------------------------------------------------------------------
# conformal tori


def _line_integrals(model: ConformalTorus, axis: int, npts: int = 512) -> tuple[float, float]:
    """Length and area density of coordinate lines along ``axis``.

    Only meaningful when phi does not depend on the other coordinate.
    """
    L = model.sides[axis]
    s = np.arange(npts) * (L / npts)
    pts = np.zeros((npts, 2))
    pts[:, axis] = s
    phi = phi_value(model, pts)
    return float(np.exp(phi).mean() * L), float(np.exp(2.0 * phi).mean() * L)


def omitted_families(model: ManifoldModel) -> list[tuple[str, str]]:
    """Families that are not enumerated for ``model``, with the reason."""
    if not isinstance(model, ConformalTorus):
        return []
    out = []
    if model.depends_on(1):
        out.append(("band-x", "phi depends on y; closed geodesic representatives not enumerated"))
    if model.depends_on(0):
        out.append(("band-y", "phi depends on x; closed geodesic representatives not enumerated"))
    return out


def pseudo_ball_curve(
    model: ConformalTorus,
    center,
    r_max: Optional[float] = None,
    nodes: int = 24,
    modes: int = 64,
    collocation: int = 256,
) -> ProfileCurve:
    """Numeric pseudo-ball family about a fixed center, parametrized by radius.

    Pseudo-balls are solved at Chebyshev points of ``[0, r_max]`` (the point
    ``r = 0`` is the closure value ``(0, 0)``) and ``v(r), w(r)`` are
    represented by their Chebyshev interpolants.  If a solve fails the radius
    range is halved, at most three times.
    """
    from .cmc import PseudoBallError, solve_pseudo_ball

    center = np.asarray(center, dtype=float)
    if r_max is None:
        r_max = 0.4 * min(model.sides)
    for _ in range(4):
        k = np.arange(nodes + 1)
        r_nodes = 0.5 * r_max * (1.0 - np.cos(np.pi * k / nodes))
        v = np.zeros(nodes + 1)
        w = np.zeros(nodes + 1)
        guess = None
        try:
            for j in range(1, nodes + 1):
                ball = solve_pseudo_ball(model, center, r_nodes[j], init=guess,
                                         modes=modes, collocation=collocation)
                v[j], w[j] = ball.v, ball.w
                guess = ball
        except PseudoBallError:
            r_max *= 0.5
            continue
        break
    else:
        raise PseudoBallError(f"pseudo-ball family at {center.tolist()} could not be built")

    cheb = np.polynomial.chebyshev
    # interpolate the scale-free ratios v / r^2 and w / r, whose limits at the
    # center are those of a Euclidean disk in the rescaled metric; this keeps
    # the relative error uniform down to r = 0
    e = float(np.exp(phi_value(model, center)))
    qv = np.empty(nodes + 1)
    qw = np.empty(nodes + 1)
    qv[0], qw[0] = np.pi * e * e, 2.0 * np.pi * e
    qv[1:] = v[1:] / r_nodes[1:] ** 2
    qw[1:] = w[1:] / r_nodes[1:]
    s_nodes = 2.0 * r_nodes / r_max - 1.0
    cv = cheb.chebfit(s_nodes, qv, nodes)
    cw = cheb.chebfit(s_nodes, qw, nodes)

    def evaluator(r, _rm=r_max, _cv=cv, _cw=cw):
        r = np.asarray(r, dtype=float)
        s = 2.0 * r / _rm - 1.0
        return r * r * cheb.chebval(s, _cv), r * cheb.chebval(s, _cw)

    fid = f"pseudo-ball@{center[0]:.6g},{center[1]:.6g}"
    monotone = bool(np.all(np.diff(evaluator(np.linspace(0.0, r_max, 512))[0]) > 0))
    return ProfileCurve(
        fid, 0.0, float(r_max), evaluator, monotone, "numeric", None,
        meta={"kind": "pseudo-ball", "center": (float(center[0]), float(center[1])),
              "r_nodes": r_nodes, "v_nodes": v, "w_nodes": w},
    )


def conformal_families(
    model: ConformalTorus,
    centers=None,
    r_max: Optional[float] = None,
    nodes: int = 24,
    modes: int = 64,
) -> list[ProfileCurve]:
    """Numeric pseudo-ball families plus geodesic bands where they exist."""
    L1, L2 = model.sides
    if centers is None:
        centers = [(i * L1 / 4, j * L2 / 4) for i in range(4) for j in range(4)]
    curves = []
    for c in centers:
        curves.append(pseudo_ball_curve(model, c, r_max=r_max, nodes=nodes, modes=modes))
    if not model.depends_on(1):
        length, area = _line_integrals(model, 0)
        curves.append(_band(length, L2, "band-x", area_per_width=area))
    if not model.depends_on(0):
        length, area = _line_integrals(model, 1)
        curves.append(_band(length, L1, "band-y", area_per_width=area))
    curves += [complement_curve(c, model.volume) for c in curves]
    return curves


def enumerate_families(model: ManifoldModel, **options) -> list[ProfileCurve]:
    """All candidate families for ``model``.

    Keyword options are forwarded to ``conformal_families`` for the
    conformal torus and ignored otherwise.
    """
    if isinstance(model, FlatTorus):
        return flat_torus_families(model)
    if isinstance(model, RoundSphere):
        return sphere_families(model)
    if isinstance(model, ConformalTorus):
        return conformal_families(model, **options)
    raise TypeError(f"unsupported model variant {type(model).__name__}")


def sample_curve(curve: ProfileCurve, samples: int = 101) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    t = np.linspace(curve.t_min, curve.t_max, samples)
    v, w = curve(t)
    return t, v, w


def write_families_csv(curves, path, samples: int = 101) -> None:
    """Write ``family_id,t,v,w`` rows for every curve."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["family_id", "t", "v", "w"])
        for c in curves:
            t, v, w = sample_curve(c, samples)
            for row in zip(t, v, w):
                writer.writerow([c.family_id] + [f"{x:.17g}" for x in row])
