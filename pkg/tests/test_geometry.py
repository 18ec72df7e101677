"""Feasible-set geometry: projections, linear minimization, regularized argmin."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sea_oco import Ball, Box, ConfigurationError, ContractViolationError, reg_argmin
from sea_oco.geometry import maximize_convex_quadratic, sup_affine_norm_sq


def test_ball_projection_scales_to_boundary():
    ball = Ball([0.0, 0.0], 1.0)
    np.testing.assert_allclose(ball.project(np.array([3.0, 4.0])), [0.6, 0.8])


def test_box_projection_clamps_coordinates():
    box = Box([-1.0, -1.0], [1.0, 1.0])
    np.testing.assert_allclose(box.project(np.array([2.0, -0.5])), [1.0, -0.5])


def test_projection_identity_inside():
    ball = Ball([0.0, 0.0], 1.0)
    p = np.array([0.3, -0.2])
    assert ball.project(p) is p
    box = Box([-1.0, -1.0], [1.0, 1.0])
    np.testing.assert_array_equal(box.project(p), p)


def test_linear_minimize_ball():
    np.testing.assert_allclose(
        Ball([0.0, 0.0], 2.0).linear_minimize(np.array([0.0, 3.0])), [0.0, -2.0]
    )


def test_linear_minimize_box():
    np.testing.assert_allclose(
        Box([-1.0, -1.0], [1.0, 1.0]).linear_minimize(np.array([1.0, -2.0])), [-1.0, 1.0]
    )


def test_linear_minimize_zero_direction_tie_break():
    ball = Ball([0.5, -0.5], 1.0)
    np.testing.assert_array_equal(ball.linear_minimize(np.zeros(2)), [0.5, -0.5])
    box = Box([0.0, 0.0], [2.0, 4.0])
    np.testing.assert_array_equal(box.linear_minimize(np.zeros(2)), [1.0, 2.0])
    # zero coordinate of the direction also falls back to the midpoint
    np.testing.assert_array_equal(box.linear_minimize(np.array([1.0, 0.0])), [0.0, 2.0])


def test_reg_argmin_examples():
    ball = Ball([0.0, 0.0], 1.0)
    np.testing.assert_allclose(reg_argmin(np.array([2.0, 0.0]), 1.0, ball), [-1.0, 0.0])
    np.testing.assert_allclose(reg_argmin(np.zeros(2), 3.0, ball), [0.0, 0.0])
    # unconstrained (-2, 0) projected back to the boundary
    np.testing.assert_allclose(reg_argmin(np.array([4.0, 0.0]), 1.0, ball), [-1.0, 0.0])


def test_reg_argmin_rejects_nonpositive_weight():
    with pytest.raises(ContractViolationError):
        reg_argmin(np.zeros(2), 0.0, Ball([0.0, 0.0], 1.0))


def test_dimension_mismatch_rejected():
    ball = Ball([0.0, 0.0], 1.0)
    with pytest.raises(ConfigurationError):
        ball.project(np.zeros(3))
    with pytest.raises(ConfigurationError):
        ball.linear_minimize(np.zeros(1))


def test_invalid_sets_rejected():
    with pytest.raises(ConfigurationError):
        Ball([0.0], 0.0)
    with pytest.raises(ConfigurationError):
        Box([0.0, 1.0], [1.0, 1.0])


def test_diameters():
    assert Ball([1.0, 1.0], 2.5).diameter == 5.0
    assert Box([0.0, 0.0], [3.0, 4.0]).diameter == 5.0


def test_projection_idempotent_box_bitwise():
    box = Box([-1.0, 0.5], [1.0, 2.0])
    rng = np.random.default_rng(0)
    for _ in range(200):
        p = rng.normal(scale=4.0, size=2)
        once = box.project(p)
        np.testing.assert_array_equal(box.project(once), once)


def test_projection_idempotent_ball():
    ball = Ball([0.2, -0.3], 1.7)
    rng = np.random.default_rng(1)
    for _ in range(200):
        p = rng.normal(scale=4.0, size=2)
        once = ball.project(p)
        assert np.linalg.norm(ball.project(once) - once) <= 1e-12


@pytest.mark.parametrize(
    "feasible",
    [Ball([0.0, 0.0, 0.0], 1.3), Box([-2.0, 0.0, -1.0], [0.0, 1.0, 1.0])],
    ids=["ball", "box"],
)
def test_projection_optimality(feasible):
    rng = np.random.default_rng(7)
    for _ in range(1000):
        p = rng.normal(scale=3.0, size=3)
        q = feasible.sample_point(rng)
        proj = feasible.project(p)
        assert np.linalg.norm(p - proj) <= np.linalg.norm(p - q) + 1e-9


@pytest.mark.parametrize(
    "feasible",
    [Ball([0.1, -0.4], 0.8), Box([-1.0, -1.0], [1.0, 2.0])],
    ids=["ball", "box"],
)
def test_linear_minimize_dominance(feasible):
    rng = np.random.default_rng(8)
    for _ in range(1000):
        direction = rng.normal(size=2)
        best = feasible.linear_minimize(direction)
        q = feasible.sample_point(rng)
        assert float(direction @ best) <= float(direction @ q) + 1e-9


def _masked_grid(feasible, per_axis=401):
    if isinstance(feasible, Ball):
        lo, hi = feasible.center - feasible.radius, feasible.center + feasible.radius
    else:
        lo, hi = feasible.lo, feasible.hi
    xs, ys = np.meshgrid(
        np.linspace(lo[0], hi[0], per_axis), np.linspace(lo[1], hi[1], per_axis), indexing="ij"
    )
    pts = np.column_stack([xs.ravel(), ys.ravel()])
    if isinstance(feasible, Ball):
        pts = pts[np.linalg.norm(pts - feasible.center, axis=1) <= feasible.radius]
    return pts


@pytest.mark.parametrize(
    "feasible",
    [Ball([0.0, 0.0], 1.0), Box([-1.0, -0.5], [0.5, 1.0])],
    ids=["ball", "box"],
)
def test_reg_argmin_matches_grid_oracle(feasible):
    pts = _masked_grid(feasible)
    spacing = feasible.diameter / 400.0
    rng = np.random.default_rng(11)
    for _ in range(20):
        theta = rng.normal(scale=2.0, size=2)
        c = float(rng.uniform(0.3, 3.0))
        ours = reg_argmin(theta, c, feasible)
        obj = pts @ theta + c * np.sum(pts * pts, axis=1)
        grid_best = pts[int(np.argmin(obj))]
        # our exact solution can never lose to the grid by more than resolution
        ours_obj = float(theta @ ours + c * ours @ ours)
        assert ours_obj <= float(obj.min()) + 1e-9
        assert np.linalg.norm(ours - grid_best) <= 2.0 * spacing + 1e-9


@given(
    px=st.floats(-10, 10), py=st.floats(-10, 10), radius=st.floats(0.1, 5.0)
)
@settings(max_examples=100, deadline=None)
def test_ball_projection_feasible_hypothesis(px, py, radius):
    ball = Ball([0.0, 0.0], radius)
    proj = ball.project(np.array([px, py]))
    assert ball.contains(proj, tol=1e-12)


def test_maximize_convex_quadratic_fast_path_matches_ascent():
    # sup of ||diag(1,0) x||^2 over the unit ball is 1
    ball = Ball([0.0, 0.0], 1.0)
    val = sup_affine_norm_sq(np.diag([1.0, 0.0]), np.zeros(2), ball)
    assert val == pytest.approx(1.0, abs=1e-10)
    # shifted center disables the closed form; ascent must still find it
    shifted = Ball([0.3, 0.0], 1.0)
    val2 = sup_affine_norm_sq(np.diag([1.0, 0.0]), np.zeros(2), shifted)
    assert val2 == pytest.approx(1.3**2, abs=1e-6)


def test_maximize_convex_quadratic_certificate_vs_grid():
    box = Box([-1.0, -1.0], [1.0, 1.0])
    rng = np.random.default_rng(3)
    pts = _masked_grid(box, per_axis=201)
    for _ in range(10):
        B = rng.normal(size=(2, 2))
        M = B.T @ B
        q = rng.normal(size=2)
        r = float(rng.normal())
        best = maximize_convex_quadratic(M, q, r, box)
        grid_vals = np.einsum("td,dk,tk->t", pts, M, pts) + 2.0 * pts @ q + r
        assert best >= float(grid_vals.max()) - 1e-6
