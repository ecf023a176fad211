import csv
import json
import math

import numpy as np
import pytest

from isoprofile.cmc import (
    ContinuationError,
    PseudoBallError,
    SelfIntersectionError,
    continue_in_volume,
    geodesic_curvature,
    omega_map,
    riemannian_measures,
    solve_pseudo_ball,
    write_curve_csv,
    write_pseudo_ball_json,
)

from conftest import TWO_PI
from oracles import ball_rho_fn, curvature_by_first_variation, masked_grid_area, polar_area, polar_length

C = 0.3  # constant conformal exponent of the const_conformal fixture


def circle(center, r, n=256):
    t = 2 * np.pi * np.arange(n) / n
    return np.asarray(center) + r * np.stack([np.cos(t), np.sin(t)], axis=1)


def circle_rho(r):
    return lambda t: (np.full_like(t, r), np.zeros_like(t))


# ---- geodesic curvature and measures


def test_curvature_of_flat_circle(flat_conformal):
    assert np.allclose(geodesic_curvature(flat_conformal, circle((1, 2), 0.7)), 1 / 0.7, atol=1e-12)


def test_curvature_under_constant_scaling(const_conformal):
    k = geodesic_curvature(const_conformal, circle((1, 2), 0.7))
    assert np.allclose(k, math.exp(-C) / 0.7, atol=1e-12)


def test_curvature_matches_first_variation(cos_x):
    theta, pts, oracle = curvature_by_first_variation(cos_x, (0.0, 0.0), 1.0)
    assert np.max(np.abs(geodesic_curvature(cos_x, pts) - oracle)) <= 1e-6


def test_curvature_off_center(cos_xy):
    theta, pts, oracle = curvature_by_first_variation(cos_xy, (1.0, -0.5), 0.8)
    assert np.max(np.abs(geodesic_curvature(cos_xy, pts) - oracle)) <= 1e-6


def test_measures_flat_and_scaled(flat_conformal, const_conformal):
    v, w = riemannian_measures(flat_conformal, circle((3, 3), 2.0))
    assert (v, w) == pytest.approx((4 * math.pi, 4 * math.pi), rel=1e-13)
    v, w = riemannian_measures(const_conformal, circle((3, 3), 0.9))
    assert v == pytest.approx(math.exp(2 * C) * math.pi * 0.81, rel=1e-13)
    assert w == pytest.approx(math.exp(C) * 2 * math.pi * 0.9, rel=1e-13)


def test_measures_against_quadrature_oracles(cos_x):
    v, w = riemannian_measures(cos_x, circle((0, 0), 1.0, 512))
    assert v == pytest.approx(polar_area(cos_x, (0, 0), circle_rho(1.0)), abs=1e-8)
    assert w == pytest.approx(polar_length(cos_x, (0, 0), circle_rho(1.0)), abs=1e-8)
    # the binary mask is only first-order accurate
    mask = masked_grid_area(cos_x, lambda P: np.sum(P**2, axis=-1) < 1.0, ((-1.1, 1.1), (-1.1, 1.1)))
    assert v == pytest.approx(mask, abs=1e-4)


def test_measures_across_the_period_boundary(cos_xy):
    # the same curve shifted by a lattice vector encloses the same domain
    a = riemannian_measures(cos_xy, circle((0.2, 6.0), 0.9))
    b = riemannian_measures(cos_xy, circle((0.2, 6.0 - TWO_PI), 0.9))
    assert a == pytest.approx(b, rel=1e-12)


def test_measure_errors(cos_x):
    with pytest.raises(ValueError):
        riemannian_measures(cos_x, circle((0, 0), 1.0)[::-1])
    t = 2 * np.pi * np.arange(256) / 256
    eight = np.stack([np.sin(2 * t), np.sin(t)], axis=1)
    with pytest.raises((SelfIntersectionError, ValueError)):
        riemannian_measures(cos_x, eight)
    with pytest.raises(ValueError):
        geodesic_curvature(cos_x, np.zeros((64, 2)))


# ---- pseudo-ball solver


PAIRS = [((0.0, 0.0), 0.1), ((1.0, 2.0), 1.0), ((3.0, 0.5), 2.0), ((6.0, 6.0), 2.5), ((-1.0, 4.0), 0.5),
         ((2.5, 2.5), 0.01), ((5.0, 1.0), 1.7), ((0.3, 5.9), 0.8), ((4.4, 3.3), 1.2), ((7.0, -2.0), 0.3)]


@pytest.mark.parametrize("p, r", PAIRS)
def test_flat_exactness(flat_conformal, p, r):
    b = solve_pseudo_ball(flat_conformal, p, r)
    assert np.max(np.abs(b.cos_coef)) <= 1e-12 and np.max(np.abs(b.sin_coef)) <= 1e-12
    assert abs(b.h - 1 / r) <= 1e-12
    assert b.v == pytest.approx(math.pi * r * r, abs=1e-10)
    assert b.w == pytest.approx(2 * math.pi * r, abs=1e-10)


def test_flat_translation_equivariance(flat_conformal):
    vw = [omega_map(flat_conformal, p, 1.3) for p, _ in PAIRS]
    assert np.max(np.abs(np.array(vw) - vw[0])) <= 1e-12


def test_flat_torus_accepted(torus2pi):
    assert omega_map(torus2pi, (1.0, 1.0), 2.0) == pytest.approx((4 * math.pi, 4 * math.pi), abs=1e-10)


@pytest.mark.parametrize("p, r", PAIRS[:4])
def test_constant_factor_exactness(const_conformal, p, r):
    b = solve_pseudo_ball(const_conformal, p, r)
    e = math.exp(C)
    assert np.max(np.abs(b.cos_coef)) <= 1e-12
    assert b.h == pytest.approx(1 / (e * r), abs=1e-10)
    assert b.v == pytest.approx(e * e * math.pi * r * r, abs=1e-10)
    assert b.w == pytest.approx(e * 2 * math.pi * r, abs=1e-10)


def test_perturbed_example(cos_x):
    b = solve_pseudo_ball(cos_x, (0.0, 0.0), 0.3)
    assert b.residual <= 1e-10
    assert np.max(np.abs(b.x(np.linspace(0, 2 * np.pi, 721)))) <= 0.05
    v, w = riemannian_measures(cos_x, b.samples())
    assert b.v == pytest.approx(v, abs=1e-8) and b.w == pytest.approx(w, abs=1e-8)
    rho = ball_rho_fn(b)
    assert b.v == pytest.approx(polar_area(cos_x, b.center, rho), abs=1e-8)
    assert b.w == pytest.approx(polar_length(cos_x, b.center, rho), abs=1e-8)


def test_omega_map_increasing(cos_x):
    vw = np.array([omega_map(cos_x, (0.0, 0.0), r) for r in (0.1, 0.2, 0.3)])
    assert np.all(np.diff(vw, axis=0) > 0)
    assert omega_map(validate_flat(), (0, 0), 1.0) == pytest.approx((math.pi, 2 * math.pi), abs=1e-12)
    assert omega_map(validate_flat(), (0, 0), 2.0) == pytest.approx((4 * math.pi, 4 * math.pi), abs=1e-12)


def validate_flat():
    from isoprofile.geometry import validate_model

    return validate_model({"type": "conformal_torus", "sides": [TWO_PI, TWO_PI], "phi": []})


@pytest.mark.parametrize("model_name", ["cos_x", "cos_xy"])
@pytest.mark.parametrize("p", [(0.0, 0.0), (1.0, 0.5), (4.0, 2.0)])
def test_kernel_projection_and_consistency(request, model_name, p):
    model = request.getfixturevalue(model_name)
    for r in (0.2, 1.0, 2.0):
        b = solve_pseudo_ball(model, p, r)
        assert b.cos_coef[0] == 0.0 and b.cos_coef[1] == 0.0 and b.sin_coef[1] == 0.0
        assert b.residual <= 1e-10 and b.v > 0 and b.w > 0
        assert np.all(1 + b.x(np.linspace(0, 2 * np.pi, 1000)) > 0)
        v2, w2 = riemannian_measures(model, b.samples(2 * b.collocation))
        assert abs(v2 - b.v) <= 1e-7 and abs(w2 - b.w) <= 1e-7


@pytest.mark.parametrize("p", [(0.0, 0.0), (1.0, 0.5), (2.0, 1.0)])
def test_curvature_constancy(cos_x, p):
    theta = 2 * np.pi * np.arange(1024) / 1024
    devs = []
    for r in (0.1, 0.2, 0.4):
        b = solve_pseudo_ball(cos_x, p, r)
        k = b.curvature(cos_x, theta)
        a1 = 2 * np.mean(k * np.cos(theta))
        b1 = 2 * np.mean(k * np.sin(theta))
        rest = k - a1 * np.cos(theta) - b1 * np.sin(theta)
        assert np.std(rest) <= 1e-8
        assert np.mean(rest) == pytest.approx(b.h, abs=1e-10)
        devs.append(b.curvature_deviation)
    # the first-harmonic gap closes like r^2 (it vanishes, up to the solver
    # tolerance, at critical points of phi)
    assert devs[1] <= 4.2 * devs[0] + 1e-10 and devs[2] <= 4.2 * devs[1] + 1e-10


def test_solver_errors(cos_x):
    with pytest.raises(ValueError):
        solve_pseudo_ball(cos_x, (0, 0), 1e-5)
    with pytest.raises(ValueError):
        solve_pseudo_ball(cos_x, (0, 0), 3.0)
    with pytest.raises(PseudoBallError):
        solve_pseudo_ball(cos_x, (0, 0), 1.0, max_iter=0)
    strong = __import__("conftest").cos_x_model(2.0)
    with pytest.raises(PseudoBallError):
        solve_pseudo_ball(strong, (math.pi, 0.0), 2.5)


def test_center_snapping(cos_xy):
    a = solve_pseudo_ball(cos_xy, (0.5, 1.0), 0.7)
    b = solve_pseudo_ball(cos_xy, (0.5 + TWO_PI, 1.0 - 2 * TWO_PI), 0.7)
    assert np.allclose(a.center, b.center, atol=1e-12)
    assert (a.v, a.w) == pytest.approx((b.v, b.w), abs=1e-12)


# ---- continuation


def test_continuation_flat(flat_conformal):
    balls = continue_in_volume(flat_conformal, (1.0, 1.0), [math.pi / 4, math.pi])
    assert [b.r for b in balls] == pytest.approx([0.5, 1.0], abs=1e-10)


def test_continuation_scaled(const_conformal):
    (b,) = continue_in_volume(const_conformal, (2.0, 1.0), [math.exp(2 * C) * math.pi])
    assert b.r == pytest.approx(1.0, abs=1e-10)


def test_continuation_perturbed(cos_x):
    targets = np.geomspace(0.01, 1.0, 10)
    balls = continue_in_volume(cos_x, (0.0, 0.0), targets)
    assert np.all(np.abs([b.v for b in balls] - targets) <= 1e-10 * cos_x.volume)
    assert all(b.residual <= 1e-10 for b in balls)
    assert np.all(np.diff([b.r for b in balls]) > 0)
    for b in balls[::3]:
        assert b.v == pytest.approx(polar_area(cos_x, b.center, ball_rho_fn(b)), abs=1e-10)


def test_continuation_errors(cos_x):
    with pytest.raises(ValueError):
        continue_in_volume(cos_x, (0, 0), [1.0, 0.5])
    with pytest.raises(ValueError):
        continue_in_volume(cos_x, (0, 0), [0.0, 0.5])
    with pytest.raises(ContinuationError):
        continue_in_volume(cos_x, (0, 0), [30.0])


def test_outputs(tmp_path, cos_x):
    b = solve_pseudo_ball(cos_x, (1.0, 1.0), 0.5)
    write_pseudo_ball_json(b, tmp_path / "b.json")
    data = json.loads((tmp_path / "b.json").read_text())
    for key in ("center", "r", "h", "v", "w", "residual"):
        assert key in data
    assert data["v"] == b.v
    write_curve_csv(b, tmp_path / "c.csv")
    rows = list(csv.reader((tmp_path / "c.csv").open()))
    assert rows[0] == ["theta", "xcoord", "ycoord"] and len(rows) > 100
