"""Loss families and gradient distributions: exact moments and samples."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sea_oco import (
    Ball,
    ConfigurationError,
    DiracDist,
    FiniteUniformDist,
    LinearLoss,
    QuadraticLoss,
    ShiftedDist,
    SphereNoiseDist,
    trial_rng,
    variation,
)

BALL = Ball([0.0, 0.0], 1.0)


def test_linear_grad_and_value():
    loss = LinearLoss([1.0, 2.0])
    np.testing.assert_array_equal(loss.grad(np.array([5.0, 5.0])), [1.0, 2.0])
    assert loss.value(np.array([1.0, 1.0])) == 3.0


def test_quadratic_grad_and_value():
    identity = QuadraticLoss(np.eye(2), np.zeros(2))
    np.testing.assert_allclose(identity.grad(np.array([1.0, 0.0])), [1.0, 0.0])
    assert identity.value(np.array([1.0, 0.0])) == 0.5
    mixed = QuadraticLoss(np.diag([2.0, 0.0]), np.array([0.0, 1.0]))
    np.testing.assert_allclose(mixed.grad(np.array([1.0, 1.0])), [2.0, 1.0])
    flat = QuadraticLoss(np.zeros((2, 2)), np.array([1.0, 0.0]))
    assert flat.value(np.array([2.0, 0.0])) == 2.0


def test_quadratic_requires_psd_symmetric():
    with pytest.raises(ConfigurationError):
        QuadraticLoss(np.array([[0.0, 1.0], [0.0, 0.0]]), np.zeros(2))
    with pytest.raises(ConfigurationError):
        QuadraticLoss(-np.eye(2), np.zeros(2))


def test_sphere_noise_mean_and_variance():
    dist = SphereNoiseDist(LinearLoss([1.0, 0.0]), 5.0)
    np.testing.assert_array_equal(dist.mean_grad(np.array([9.0, -9.0])), [1.0, 0.0])
    assert SphereNoiseDist(LinearLoss([1.0, 0.0]), 2.0).variance_bound(BALL) == 4.0


def test_dirac_variance_zero():
    assert DiracDist(LinearLoss([3.0, 0.0])).variance_bound(BALL) == 0.0


def test_finite_uniform_mean_and_variance():
    b1 = Ball([0.0], 1.0)
    pool = [LinearLoss([1.0]), LinearLoss([-1.0])]
    dist = FiniteUniformDist(pool)
    np.testing.assert_array_equal(dist.mean_grad(np.zeros(1)), [0.0])
    # enumeration oracle: mean gradient 0, average squared deviation (1 + 1)/2
    assert dist.variance_bound(b1) == pytest.approx(1.0)


def test_finite_uniform_active_subset():
    pool = [LinearLoss([1.0]), LinearLoss([-1.0]), LinearLoss([3.0])]
    dist = FiniteUniformDist(pool, active=[0, 2])
    np.testing.assert_array_equal(dist.mean_grad(np.zeros(1)), [2.0])
    with pytest.raises(ConfigurationError):
        FiniteUniformDist(pool, active=[])


def test_shifted_additivity():
    base = SphereNoiseDist(LinearLoss([1.0, 0.0]), 1.0)
    shifted = ShiftedDist(base, LinearLoss([0.0, 1.0]))
    np.testing.assert_array_equal(shifted.mean_grad(np.array([0.5, 0.5])), [1.0, 1.0])
    assert shifted.variance_bound(BALL) == base.variance_bound(BALL)


def test_variation_examples():
    a = DiracDist(LinearLoss([1.0, 0.0]))
    b = DiracDist(LinearLoss([0.0, 0.0]))
    assert variation(a, b, BALL) == pytest.approx(1.0)
    assert variation(a, a, BALL) == 0.0


def test_variation_mixed_curvature_grid_oracle():
    # sup over the unit ball of ||diag(1,0) x||^2: grid maximization oracle
    qa = DiracDist(QuadraticLoss(np.diag([1.0, 0.0]), np.zeros(2)))
    qb = DiracDist(LinearLoss(np.zeros(2)))
    xs, ys = np.meshgrid(np.linspace(-1, 1, 301), np.linspace(-1, 1, 301), indexing="ij")
    pts = np.column_stack([xs.ravel(), ys.ravel()])
    pts = pts[np.linalg.norm(pts, axis=1) <= 1.0]
    oracle = float(np.max(pts[:, 0] ** 2))
    got = variation(qa, qb, BALL)
    assert got == pytest.approx(1.0, abs=1e-9)
    assert got >= oracle - 1e-9


def test_variation_symmetry_random_quadratics():
    rng = np.random.default_rng(4)
    for _ in range(50):
        B1, B2 = rng.normal(size=(2, 2, 2))
        qa = DiracDist(QuadraticLoss(B1.T @ B1, rng.normal(size=2)))
        qb = DiracDist(QuadraticLoss(B2.T @ B2, rng.normal(size=2)))
        assert variation(qa, qb, BALL) == pytest.approx(variation(qb, qa, BALL), abs=1e-9)


def test_sphere_noise_monte_carlo_calibration():
    rng = trial_rng(99, 0)
    for sigma in (0.5, 1.0, 2.0):
        dist = SphereNoiseDist(LinearLoss([1.0, 0.0, 0.0]), sigma)
        base = dist.mean_grad(np.zeros(3))
        total = 0.0
        n = 100_000
        for _ in range(n):
            dev = dist.sample(rng).g - base
            total += float(dev @ dev)
        assert total / n == pytest.approx(sigma**2, rel=0.02)


def test_sampled_gradients_bounded():
    rng = trial_rng(1, 2)
    feasible = Ball([0.0, 0.0], 1.0)
    dists = [
        SphereNoiseDist(LinearLoss([1.0, 0.0]), 1.0),
        SphereNoiseDist(QuadraticLoss(np.eye(2), np.zeros(2)), 0.5),
        FiniteUniformDist([LinearLoss([1.0, 0.0]), LinearLoss([0.0, -2.0])]),
        ShiftedDist(SphereNoiseDist(LinearLoss([1.0, 0.0]), 1.0), LinearLoss([0.5, 0.5])),
    ]
    for dist in dists:
        cap = dist.grad_norm_bound(feasible)
        for _ in range(300):
            loss = dist.sample(rng)
            for _ in range(5):
                x = feasible.sample_point(rng)
                assert np.linalg.norm(loss.grad(x)) <= cap + 1e-9


@given(st.integers(0, 2**31 - 1))
@settings(max_examples=50, deadline=None)
def test_quadratic_smoothness_consistency(seed):
    rng = np.random.default_rng(seed)
    B = rng.normal(size=(3, 3))
    quad = QuadraticLoss(B.T @ B, rng.normal(size=3))
    x, y = rng.normal(size=(2, 3))
    lhs = np.linalg.norm(quad.grad(x) - quad.grad(y))
    assert lhs <= quad.lam_max * np.linalg.norm(x - y) + 1e-9
