"""Command-line front end.

Subcommands write their data products into ``--out``::

    isoprofile profile      --model torus.json          # profile.csv, envelope.json
    isoprofile families     --model torus.json          # families.csv
    isoprofile stability    --model torus.json --family disk --param 1.0   # spectrum.json
    isoprofile pseudo-ball  --model conf.json --center 0,0 --radius 0.3   # pseudo_ball.json, curve.csv
    isoprofile small-profile --model conf.json --centers 8x8 --volumes 0.01,0.1
    isoprofile expand       --model sphere.json         # expansion.json

``--dump-config`` prints the resolved run configuration as JSON and exits;
``isoprofile --config run.json`` replays it.  Exit status is 0 on success,
2 on invalid input and 3 on solver failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import asymptotics, cmc, envelope, families, jacobi
from .geometry import ConformalTorus, FlatTorus, ModelError, RoundSphere, load_model, scalar_curvature

SUBCOMMANDS = ("profile", "stability", "pseudo-ball", "small-profile", "expand", "families")


@dataclass
class RunConfig:
    subcommand: str = "profile"
    model: Optional[str] = None
    out: str = "."
    grid: int = 2048
    tol: Optional[float] = None
    v_min: Optional[float] = None
    v_max: Optional[float] = None
    modes: int = 64
    nodes: int = 24
    centers: str = "4x4"
    volumes: Optional[list] = None
    samples: int = 101
    family: Optional[str] = None
    param: Optional[float] = None
    center: Optional[list] = None
    radius: Optional[float] = None
    spectrum_modes: int = 64
    constraint: str = "per_component"
    rho: list = field(default_factory=lambda: [0.05, 0.1, 0.15, 0.2])
    refine: bool = True
    track: bool = False

    def validate(self) -> None:
        if self.subcommand not in SUBCOMMANDS:
            raise ModelError(f"unknown subcommand {self.subcommand!r}")
        if not self.model:
            raise ModelError("--model is required")
        if self.grid < 2:
            raise ModelError("--grid must be at least 2")
        if not 4 <= self.modes <= 512:
            raise ModelError("--modes must lie in [4, 512]")
        if self.nodes < 4:
            raise ModelError("--nodes must be at least 4")
        if self.samples < 2:
            raise ModelError("--samples must be at least 2")
        if self.tol is not None and not self.tol > 0:
            raise ModelError("--tol must be positive")
        if self.spectrum_modes < 8:
            raise ModelError("--spectrum-modes must be at least 8")
        if self.constraint not in ("per_component", "joint"):
            raise ModelError("--constraint must be 'per_component' or 'joint'")
        parse_centers(self.centers)


def parse_centers(text: str) -> tuple[int, int]:
    try:
        a, b = str(text).lower().split("x")
        nx, ny = int(a), int(b)
    except ValueError:
        raise ModelError(f"--centers must look like NxM, got {text!r}") from None
    if nx < 1 or ny < 1:
        raise ModelError("--centers needs positive counts")
    return nx, ny


def _floats(text: str) -> list:
    try:
        return [float(x) for x in str(text).split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="isoprofile", description=__doc__.split("\n\n")[0])
    parser.add_argument("--config", help="replay a configuration written by --dump-config")
    sub = parser.add_subparsers(dest="subcommand")
    S = argparse.SUPPRESS

    def common(p):
        p.add_argument("--model", default=S, help="model JSON file")
        p.add_argument("--out", default=S, help="output directory")
        p.add_argument("--dump-config", action="store_true", help="print the run configuration and exit")

    p = sub.add_parser("profile", help="isoperimetric profile from candidate families")
    common(p)
    p.add_argument("--grid", type=int, default=S)
    p.add_argument("--tol", type=float, default=S, help="breakpoint refinement width")
    p.add_argument("--v-min", dest="v_min", type=float, default=S)
    p.add_argument("--v-max", dest="v_max", type=float, default=S)
    p.add_argument("--centers", default=S, help="pseudo-ball centers NxM (conformal torus)")
    p.add_argument("--modes", type=int, default=S)
    p.add_argument("--nodes", type=int, default=S, help="radii per pseudo-ball family")

    p = sub.add_parser("families", help="dump sampled candidate families")
    common(p)
    p.add_argument("--samples", type=int, default=S)
    p.add_argument("--centers", default=S)
    p.add_argument("--modes", type=int, default=S)
    p.add_argument("--nodes", type=int, default=S)

    p = sub.add_parser("stability", help="Jacobi spectrum of a family member")
    common(p)
    p.add_argument("--family", default=S)
    p.add_argument("--param", type=float, default=S)
    p.add_argument("--center", type=_floats, default=S)
    p.add_argument("--modes", type=int, default=S, help="pseudo-ball modes")
    p.add_argument("--spectrum-modes", dest="spectrum_modes", type=int, default=S)
    p.add_argument("--tol", type=float, default=S, help="kernel tolerance")
    p.add_argument("--constraint", choices=("per_component", "joint"), default=S)

    p = sub.add_parser("pseudo-ball", help="solve one pseudo-ball")
    common(p)
    p.add_argument("--center", type=_floats, default=S)
    p.add_argument("--radius", type=float, default=S)
    p.add_argument("--modes", type=int, default=S)
    p.add_argument("--tol", type=float, default=S, help="residual tolerance")

    p = sub.add_parser("small-profile", help="minimize pseudo-ball boundary over centers")
    common(p)
    p.add_argument("--centers", default=S)
    p.add_argument("--volumes", type=_floats, default=S)
    p.add_argument("--modes", type=int, default=S)
    p.add_argument("--no-refine", dest="refine", action="store_false", default=S)

    p = sub.add_parser("expand", help="compare the small-volume expansion with computed profiles")
    common(p)
    p.add_argument("--rho", type=_floats, default=S)
    p.add_argument("--centers", default=S)
    p.add_argument("--center", type=_floats, default=S)
    p.add_argument("--modes", type=int, default=S)
    p.add_argument("--no-refine", dest="refine", action="store_false", default=S)
    p.add_argument("--track", action="store_true", default=S, help="also track critical points")
    return parser


def resolve_config(argv: Optional[Sequence[str]]) -> tuple[RunConfig, bool]:
    args = build_parser().parse_args(argv)
    values = {}
    if args.config:
        try:
            values.update(json.loads(Path(args.config).read_text()))
        except (OSError, json.JSONDecodeError) as exc:
            raise ModelError(f"cannot read config {args.config}: {exc}") from None
        unknown = set(values) - {f.name for f in fields(RunConfig)}
        if unknown:
            raise ModelError(f"unknown config keys {sorted(unknown)}")
    ns = vars(args)
    if ns.get("subcommand"):
        values["subcommand"] = ns["subcommand"]
    for f in fields(RunConfig):
        if f.name != "subcommand" and f.name in ns:
            values[f.name] = ns[f.name]
    if "subcommand" not in values:
        raise ModelError("a subcommand (or --config) is required")
    cfg = RunConfig(**values)
    return cfg, bool(ns.get("dump_config"))


# --------------------------------------------------------------------------
# subcommands


def _conformal_centers(model, cfg):
    nx, ny = parse_centers(cfg.centers)
    L1, L2 = model.sides
    return [(i * L1 / nx, j * L2 / ny) for i in range(nx) for j in range(ny)]


def _families(model, cfg):
    if isinstance(model, ConformalTorus):
        return families.enumerate_families(
            model, centers=_conformal_centers(model, cfg), nodes=cfg.nodes, modes=cfg.modes
        )
    return families.enumerate_families(model)


def _covered_range(curves, total):
    spans = sorted((p.v_lo, p.v_hi) for c in curves for p in envelope.monotone_pieces(c))
    lo, hi = spans[0]
    for a, b in spans[1:]:
        if a > hi * (1 + 1e-12) + 1e-300:
            break
        hi = max(hi, b)
    return max(lo, 0.0), min(hi, total)


def run_profile(model, cfg, out: Path) -> dict:
    curves = _families(model, cfg)
    lo, hi = _covered_range(curves, model.volume)
    v_lo = lo if cfg.v_min is None else cfg.v_min
    v_hi = hi if cfg.v_max is None else cfg.v_max
    result = envelope.lower_contour(curves, v_lo, v_hi, grid=cfg.grid, tol=cfg.tol)
    if isinstance(model, FlatTorus) and model.dim >= 3:
        result.upper_bound_only = True
        result.notes.append(
            "candidate upper bound: lower contour of ball x subtorus families; "
            "optimality is only established for flat 2-tori"
        )
    for fid, why in families.omitted_families(model):
        result.notes.append(f"{fid} not enumerated: {why}")
    if isinstance(model, ConformalTorus):
        result.notes.append("pseudo-ball families are numeric; breakpoints refined to 1e-6 unless --tol is given")
    envelope.write_profile_csv(result, out / "profile.csv")
    report = envelope.envelope_report(result)
    report["families"] = sorted({c.family_id for c in curves})
    report["model_volume"] = model.volume
    envelope.write_report_json(report, out / "envelope.json")
    return report


def run_families(model, cfg, out: Path) -> dict:
    curves = _families(model, cfg)
    families.write_families_csv(curves, out / "families.csv", cfg.samples)
    return {"families": [c.family_id for c in curves]}


def run_stability(model, cfg, out: Path) -> dict:
    if cfg.family is None or cfg.param is None:
        raise ModelError("stability needs --family and --param")
    desc = jacobi.jacobi_potential(model, cfg.family, cfg.param, center=cfg.center, modes=cfg.modes)
    spec = jacobi.jacobi_spectrum(desc, N=cfg.spectrum_modes, kernel_tol=cfg.tol, constraint=cfg.constraint)
    report = jacobi.spectrum_report(spec)
    report["family"] = cfg.family
    report["param"] = cfg.param
    with open(out / "spectrum.json", "w") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return report


def run_pseudo_ball(model, cfg, out: Path) -> dict:
    if cfg.center is None or cfg.radius is None:
        raise ModelError("pseudo-ball needs --center and --radius")
    if len(cfg.center) != 2:
        raise ModelError("--center needs two coordinates")
    tol = 1e-10 if cfg.tol is None else cfg.tol
    ball = cmc.solve_pseudo_ball(model, cfg.center, cfg.radius, modes=cfg.modes, tol=tol)
    cmc.write_pseudo_ball_json(ball, out / "pseudo_ball.json", tol)
    cmc.write_curve_csv(ball, out / "curve.csv")
    return cmc.pseudo_ball_report(ball, tol)


def _default_volumes(model):
    return [float(v) for v in np.geomspace(1e-4, 2.5e-2, 10) * model.volume]


def run_small_profile(model, cfg, out: Path) -> dict:
    vols = cfg.volumes or _default_volumes(model)
    samples = asymptotics.small_volume_profile(model, parse_centers(cfg.centers), vols,
                                               refine=cfg.refine, modes=cfg.modes)
    asymptotics.write_small_profile_csv(samples, out / "small_profile.csv")
    return {"volumes": [s.v for s in samples], "I": [s.I for s in samples]}


def run_expand(model, cfg, out: Path) -> dict:
    rho = np.asarray(cfg.rho, dtype=float)
    n = model.dim
    report = {"rho": rho.tolist(), "n": n}
    if isinstance(model, (FlatTorus, RoundSphere)):
        curves = families.enumerate_families(model)
        res = envelope.lower_contour(curves, 0.0, model.volume, grid=cfg.grid)
        I = np.asarray(envelope.envelope_eval(res, rho**n)[0])
        sc = float(scalar_curvature(model))
        report["center"] = None
    else:
        vols = (rho**2).tolist()
        if cfg.center is not None:
            balls = cmc.continue_in_volume(model, cfg.center, vols, modes=cfg.modes)
            I = np.array([b.w for b in balls])
            center = tuple(float(c) for c in balls[0].center)
        else:
            samples = asymptotics.small_volume_profile(model, parse_centers(cfg.centers), vols,
                                                       refine=cfg.refine, modes=cfg.modes)
            if len(samples) != len(vols):
                raise cmc.PseudoBallError("some volumes were not reached")
            I = np.array([s.I for s in samples])
            # argmin of the smallest volume: where the expansion is sharpest
            center = samples[0].center
        sc = float(scalar_curvature(model, np.asarray(center)))
        report["center"] = list(center)
    predicted = asymptotics.expansion_coefficient(n, sc)
    fitted = asymptotics.fit_expansion_coefficient(rho, I, n)
    report.update({
        "I": I.tolist(),
        "prediction": [float(x) for x in asymptotics.ExpansionModel.at(n, sc)(rho)],
        "euclidean": [float(x) for x in asymptotics.euclidean_profile(n, rho**n)],
        "scalar_curvature": sc,
        "fitted_coefficient": fitted,
        "predicted_coefficient": predicted,
        "relative_error": abs(fitted - predicted) / abs(predicted) if predicted != 0 else abs(fitted),
    })
    if cfg.track and isinstance(model, ConformalTorus):
        try:
            path = asymptotics.critical_point_track(model, rho, modes=cfg.modes)
            report["critical_paths"] = [
                {"start": list(s), "points": p.tolist(), "values": v.tolist(), "converged": c.tolist()}
                for s, p, v, c in zip(path.starts, path.points, path.values, path.converged)
            ]
        except asymptotics.DegenerateCriticalPointError as exc:
            report["critical_paths"] = None
            report["degenerate"] = str(exc)
    with open(out / "expansion.json", "w") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return report


RUNNERS = {
    "profile": run_profile,
    "families": run_families,
    "stability": run_stability,
    "pseudo-ball": run_pseudo_ball,
    "small-profile": run_small_profile,
    "expand": run_expand,
}


def run(argv: Optional[Sequence[str]] = None) -> int:
    """Run the CLI and return the exit status."""
    try:
        cfg, dump = resolve_config(argv)
        if dump:
            json.dump(asdict(cfg), sys.stdout, indent=2, sort_keys=True)
            sys.stdout.write("\n")
            return 0
        cfg.validate()
        model = load_model(cfg.model)
        out = Path(cfg.out)
        out.mkdir(parents=True, exist_ok=True)
        RUNNERS[cfg.subcommand](model, cfg, out)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    except (cmc.PseudoBallError, np.linalg.LinAlgError) as exc:
        print(f"isoprofile: solver failure: {exc}", file=sys.stderr)
        return 3
    except (ModelError, ValueError, TypeError, OSError, envelope.EnvelopeError) as exc:
        print(f"isoprofile: error: {exc}", file=sys.stderr)
        return 2
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
