"""Lower contour of a finite union of (volume, boundary volume) curves.

The lower contour of a planar set ``A`` is ``v -> inf{w : (v, w) in A}``.  For
a union of parametric curves it is computed on a volume grid, the optimal
family is recorded per grid point, and every change of family is refined to a
breakpoint by bisection.  Between breakpoints the profile is given by a
single family, evaluated exactly (closed-form curves are inverted to machine
precision).
"""

from __future__ import annotations

import bisect
import csv
import json
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .families import ProfileCurve

__all__ = [
    "EnvelopeError",
    "Piece",
    "Segment",
    "Breakpoint",
    "EnvelopeResult",
    "monotone_pieces",
    "lower_contour",
    "refine_breakpoint",
    "envelope_eval",
    "envelope_curve",
    "write_profile_csv",
    "envelope_report",
]

_BISECT_STEPS = 200


class EnvelopeError(ValueError):
    """Raised for empty inputs, uncovered volume ranges or bad brackets."""


@dataclass(frozen=True)
class Piece:
    """A sub-range ``[ta, tb]`` of a curve on which ``v`` is strictly monotone."""

    curve: ProfileCurve
    ta: float
    tb: float
    v_lo: float
    v_hi: float
    increasing: bool
    index: int = 0

    @property
    def family_id(self) -> str:
        return self.curve.family_id

    @property
    def key(self) -> tuple[str, int]:
        return (self.curve.family_id, self.index)

    def _param(self, v: np.ndarray) -> np.ndarray:
        c = self.curve
        if c.inverse is not None and c.monotone_v and self.ta == c.t_min and self.tb == c.t_max:
            return np.clip(c.inverse(v), self.ta, self.tb)
        # vectorized bisection for t with v(t) = v
        lo = np.full(v.shape, self.ta)
        hi = np.full(v.shape, self.tb)
        for _ in range(_BISECT_STEPS):
            mid = 0.5 * (lo + hi)
            if np.all((mid <= lo) | (mid >= hi)):
                break
            vm = c(mid)[0]
            below = vm < v if self.increasing else vm > v
            lo = np.where(below, mid, lo)
            hi = np.where(below, hi, mid)
        return 0.5 * (lo + hi)

    def w_at(self, v, slack: float = 0.0) -> np.ndarray:
        """Boundary volume at volume ``v``; NaN where the piece does not reach."""
        v = np.atleast_1d(np.asarray(v, dtype=float))
        inside = (v >= self.v_lo - slack) & (v <= self.v_hi + slack)
        out = np.full(v.shape, np.nan)
        if np.any(inside):
            vv = np.clip(v[inside], self.v_lo, self.v_hi)
            out[inside] = self.curve(self._param(vv))[1]
        return out


@dataclass(frozen=True)
class Segment:
    v_start: float
    v_end: float
    family_id: str
    piece: Piece = field(repr=False, compare=False)


@dataclass(frozen=True)
class Breakpoint:
    v: float
    tol: float
    left: str
    right: str


@dataclass
class EnvelopeResult:
    """Computed lower contour.

    ``values`` and ``labels`` hold the contour on ``v_grid``.  Segments
    partition ``[v_lo, v_hi]``; a volume equal to a breakpoint belongs to the
    segment on its left.
    """

    v_grid: np.ndarray
    values: np.ndarray
    labels: list[str]
    segments: list[Segment]
    breakpoints: list[Breakpoint]
    tolerances: dict = field(default_factory=dict)
    upper_bound_only: bool = False
    notes: list[str] = field(default_factory=list)

    @property
    def v_lo(self) -> float:
        return float(self.v_grid[0])

    @property
    def v_hi(self) -> float:
        return float(self.v_grid[-1])

    @property
    def breakpoint_volumes(self) -> list[float]:
        return [b.v for b in self.breakpoints]

    def __call__(self, v):
        return envelope_eval(self, v)


def _sign_changes(values: np.ndarray) -> np.ndarray:
    s = np.sign(values)
    # carry the last nonzero sign across exact zeros
    for i in range(1, len(s)):
        if s[i] == 0:
            s[i] = s[i - 1]
    return np.nonzero(s[1:] * s[:-1] < 0)[0]


def monotone_pieces(curve: ProfileCurve, samples: int = 513) -> list[Piece]:
    """Split ``curve`` at the interior extrema of ``v(t)``."""
    if curve.monotone_v:
        cuts = [curve.t_min, curve.t_max]
    else:
        t = np.linspace(curve.t_min, curve.t_max, samples)
        v = curve(t)[0]
        dv = np.diff(v)
        cuts = [curve.t_min]
        h = (curve.t_max - curve.t_min) * 1e-9
        for i in _sign_changes(dv):
            # extremum lies in [t[i], t[i+2]]; bisect on the sign of dv/dt
            lo, hi = t[i], t[min(i + 2, samples - 1)]
            s_lo = np.sign(dv[i])
            for _ in range(_BISECT_STEPS):
                mid = 0.5 * (lo + hi)
                d = curve(np.array([mid + h]))[0][0] - curve(np.array([mid - h]))[0][0]
                if np.sign(d) == s_lo:
                    lo = mid
                else:
                    hi = mid
                if hi - lo <= 4 * h:
                    break
            cuts.append(0.5 * (lo + hi))
        cuts.append(curve.t_max)
    pieces = []
    for k, (ta, tb) in enumerate(zip(cuts[:-1], cuts[1:])):
        va, vb = curve(np.array([ta, tb]))[0]
        pieces.append(Piece(curve, float(ta), float(tb), float(min(va, vb)), float(max(va, vb)),
                            bool(vb >= va), k))
    return pieces


def _as_piece(curve, bracket) -> Piece:
    if isinstance(curve, Piece):
        return curve
    a, b = bracket
    for p in monotone_pieces(curve):
        if p.v_lo <= a and b <= p.v_hi:
            return p
    raise EnvelopeError(f"curve {curve.family_id} is not defined on [{a}, {b}]")


def _default_tol(*curves) -> float:
    closed = all((c.curve if isinstance(c, Piece) else c).closed_form for c in curves)
    return 1e-9 if closed else 1e-6


def refine_breakpoint(curve_a, curve_b, bracket, tol: Optional[float] = None) -> float:
    """Volume where ``w_a - w_b`` changes sign inside ``bracket``, by bisection.

    Raises
    ------
    EnvelopeError
        If the difference does not change sign on the bracket.
    """
    v1, v2 = float(bracket[0]), float(bracket[1])
    a = _as_piece(curve_a, (v1, v2))
    b = _as_piece(curve_b, (v1, v2))
    if tol is None:
        tol = _default_tol(a, b)

    def diff(v):
        return float(a.w_at(v)[0] - b.w_at(v)[0])

    d1, d2 = diff(v1), diff(v2)
    if d1 == 0.0:
        return v1
    if d2 == 0.0:
        return v2
    if np.sign(d1) == np.sign(d2):
        raise EnvelopeError(f"no sign change of w difference on [{v1}, {v2}]")
    lo, hi = v1, v2
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        dm = diff(mid)
        if dm == 0.0:
            return mid
        if np.sign(dm) == np.sign(d1):
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _select(W: np.ndarray, tie_rtol: float) -> np.ndarray:
    """Row index of the minimum per column.

    A tie that includes the previous column's choice keeps it (the tied
    volume belongs to the segment on its left); other ties go to the lowest
    row.
    """
    m = np.nanmin(W, axis=0)
    tie = W <= m + tie_rtol * np.maximum(1.0, np.abs(m))
    choice = np.argmax(tie, axis=0)
    for i in range(1, W.shape[1]):
        if tie[choice[i - 1], i]:
            choice[i] = choice[i - 1]
    return choice


def lower_contour(
    curves: Sequence[ProfileCurve],
    v_lo: float,
    v_hi: float,
    grid: int = 2048,
    tol: Optional[float] = None,
    tie_rtol: float = 1e-12,
) -> EnvelopeResult:
    """Lower contour of the union of ``curves`` on ``[v_lo, v_hi]``.

    Parameters
    ----------
    curves : sequence of ProfileCurve
    v_lo, v_hi : float
        Volume range; every volume in it must be reached by some curve.
    grid : int
        Number of equispaced sample volumes.
    tol : float, optional
        Breakpoint refinement width.  Defaults to 1e-9 when both adjacent
        families are closed-form and 1e-6 otherwise.
    tie_rtol : float
        Relative tolerance under which two values count as tied; ties go to
        the lexicographically smallest family id.

    Raises
    ------
    EnvelopeError
        For an empty curve list or a volume not covered by any curve.
    """
    if not curves:
        raise EnvelopeError("empty curve list")
    if not v_hi > v_lo:
        raise EnvelopeError("v_hi must exceed v_lo")
    if grid < 2:
        raise EnvelopeError("grid must have at least two points")
    pieces = sorted((p for c in curves for p in monotone_pieces(c)), key=lambda p: p.key)
    v_grid = np.linspace(v_lo, v_hi, grid)
    slack = 1e-12 * max(abs(v_lo), abs(v_hi), 1.0)
    W = np.vstack([p.w_at(v_grid, slack) for p in pieces])
    uncovered = np.all(np.isnan(W), axis=0)
    if np.any(uncovered):
        bad = v_grid[uncovered]
        raise EnvelopeError(f"volumes in [{bad.min()}, {bad.max()}] are not covered by any curve")
    choice = _select(W, tie_rtol)
    values = W[choice, np.arange(grid)]

    segments: list[Segment] = []
    breakpoints: list[Breakpoint] = []
    start = float(v_grid[0])
    for i in range(grid - 1):
        a, b = choice[i], choice[i + 1]
        if a == b:
            continue
        pa, pb = pieces[a], pieces[b]
        lo, hi = float(v_grid[i]), float(v_grid[i + 1])
        btol = tol if tol is not None else _default_tol(pa, pb)
        try:
            # both pieces must be defined across the bracket for a crossing
            if pa.v_lo - slack <= lo and hi <= pa.v_hi + slack and pb.v_lo - slack <= lo and hi <= pb.v_hi + slack:
                vb = refine_breakpoint(pa, pb, (max(lo, pa.v_lo, pb.v_lo), min(hi, pa.v_hi, pb.v_hi)), btol)
            else:
                raise EnvelopeError("coverage change")
        except EnvelopeError:
            # switch caused by the end of a piece's range, or a tie flip
            if pa.v_hi < hi:
                vb = pa.v_hi
            elif pb.v_lo > lo:
                vb = pb.v_lo
            else:
                vb = 0.5 * (lo + hi)
        vb = min(max(vb, lo), hi)
        if vb <= start or vb >= v_hi:
            # degenerate: fold into the neighbouring segment
            vb = 0.5 * (lo + hi)
        segments.append(Segment(start, vb, pa.family_id, pa))
        breakpoints.append(Breakpoint(vb, btol, pa.family_id, pb.family_id))
        start = vb
    last = pieces[choice[-1]]
    segments.append(Segment(start, float(v_grid[-1]), last.family_id, last))
    return EnvelopeResult(
        v_grid=v_grid,
        values=values,
        labels=[pieces[k].family_id for k in choice],
        segments=segments,
        breakpoints=breakpoints,
        tolerances={"grid": grid, "tie_rtol": tie_rtol,
                    "breakpoint_tol": [b.tol for b in breakpoints]},
    )


def envelope_eval(result: EnvelopeResult, v):
    """Profile value and optimal family at volume ``v``.

    Scalars give ``(I, family_id)``; arrays give ``(I_array, [family_ids])``.
    """
    scalar = np.ndim(v) == 0
    vs = np.atleast_1d(np.asarray(v, dtype=float))
    lo, hi = result.v_lo, result.v_hi
    if np.any(vs < lo) or np.any(vs > hi) or np.any(np.isnan(vs)):
        raise EnvelopeError(f"volume outside [{lo}, {hi}]")
    bps = result.breakpoint_volumes
    idx = np.array([bisect.bisect_left(bps, x) for x in vs], dtype=int)
    out = np.empty(vs.shape)
    for k in np.unique(idx):
        mask = idx == k
        out[mask] = result.segments[k].piece.w_at(vs[mask], slack=np.inf)
    labels = [result.segments[k].family_id for k in idx]
    if scalar:
        return float(out[0]), labels[0]
    return out, labels


def envelope_curve(result: EnvelopeResult, family_id: str = "envelope") -> ProfileCurve:
    """The envelope itself as a profile curve parametrized by volume."""

    def evaluator(t):
        t = np.asarray(t, dtype=float)
        vals = envelope_eval(result, np.clip(t.ravel(), result.v_lo, result.v_hi))[0]
        return t, np.asarray(vals).reshape(t.shape)

    closed = all(s.piece.curve.closed_form for s in result.segments)
    return ProfileCurve(family_id, result.v_lo, result.v_hi, evaluator, True,
                        "closed-form" if closed else "numeric", lambda v: np.asarray(v, dtype=float))


def write_profile_csv(result: EnvelopeResult, path, extra_volumes: Sequence[float] = ()) -> None:
    """Write ``v,I,family_id`` rows on the grid plus the breakpoints."""
    vs = np.union1d(result.v_grid, np.asarray(list(result.breakpoint_volumes) + list(extra_volumes), dtype=float))
    vals, labels = envelope_eval(result, vs)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["v", "I", "family_id"])
        for v, I, fid in zip(vs, vals, labels):
            writer.writerow([f"{v:.17g}", f"{I:.17g}", fid])


def envelope_report(result: EnvelopeResult) -> dict:
    return {
        "breakpoints": [b.v for b in result.breakpoints],
        "breakpoint_details": [
            {"v": b.v, "tol": b.tol, "left": b.left, "right": b.right} for b in result.breakpoints
        ],
        "segments": [
            {"v_start": s.v_start, "v_end": s.v_end, "family": s.family_id} for s in result.segments
        ],
        "v_range": [result.v_lo, result.v_hi],
        "tolerances": {"grid": result.tolerances.get("grid"),
                       "tie_rtol": result.tolerances.get("tie_rtol")},
        "upper_bound_only": result.upper_bound_only,
        "notes": list(result.notes),
    }


def write_report_json(report: dict, path) -> None:
    with open(path, "w") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")
