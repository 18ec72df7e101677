"""Adversary implementations: distribution selection, exact sigma/Sigma reporting."""

import itertools

import numpy as np
import pytest

from sea_oco import (
    AdversarialScript,
    Ball,
    Box,
    ConfigurationError,
    ContractViolationError,
    CorruptedIIDEnvironment,
    IIDEnvironment,
    LinearLoss,
    ProtocolError,
    RademacherLBEnvironment,
    RandomOrderEnvironment,
    ShiftEnvironment,
    SphereNoiseDist,
    SwitchEnvironment,
    trial_rng,
    uniform_corruption_schedule,
)

BALL = Ball([0.0, 0.0], 1.0)


def _rng(seed=0):
    return trial_rng(seed, 1)


def test_iid_reports_constant_sigma_zero_variation():
    env = IIDEnvironment(SphereNoiseDist(LinearLoss([1.0, 0.0]), 1.0), BALL, _rng())
    for t in range(1, 6):
        out = env.step(t, np.zeros(2))
        assert out.sigma_sq == 1.0
        assert out.variation_sq == 0.0


def test_adversarial_script_dirac_and_variation():
    losses = [LinearLoss([1.0, 0.0]), LinearLoss([-1.0, 0.0]), LinearLoss([-1.0, 0.0])]
    env = AdversarialScript(losses, BALL)
    out1 = env.step(1, np.zeros(2))
    assert out1.sigma_sq == 0.0 and out1.variation_sq == 0.0  # F^0 := F^1
    out2 = env.step(2, np.zeros(2))
    assert out2.variation_sq == pytest.approx(4.0)
    out3 = env.step(3, np.zeros(2))
    assert out3.variation_sq == 0.0
    with pytest.raises(ProtocolError):
        env.step(4, np.zeros(2))  # script exhausted


def test_script_round_counter_is_strict():
    env = AdversarialScript([LinearLoss([1.0, 0.0])] * 5, BALL)
    env.step(1, np.zeros(2))
    with pytest.raises(ProtocolError):
        env.step(3, np.zeros(2))


def test_corruption_budget_enforced_at_construction():
    base = SphereNoiseDist(LinearLoss([1.0, 0.0]), 1.0)
    schedule = [np.array([(-1.0) ** k, 0.0]) for k in range(10)]  # sum of norms = 10
    CorruptedIIDEnvironment(base, schedule, 10.0, BALL, _rng())
    with pytest.raises(ConfigurationError):
        CorruptedIIDEnvironment(base, schedule, 9.0, BALL, _rng())


def test_corruption_variation_uses_c0_zero_convention():
    base = SphereNoiseDist(LinearLoss([1.0, 0.0]), 0.5)
    schedule = [np.array([0.0, 1.0]), np.array([0.0, -1.0])]
    env = CorruptedIIDEnvironment(base, schedule, 2.0, BALL, _rng())
    assert env.t1_variation_convention == "c0=0"
    assert env.step(1, np.zeros(2)).variation_sq == pytest.approx(1.0)  # ||c_1||^2
    assert env.step(2, np.zeros(2)).variation_sq == pytest.approx(4.0)  # ||c_2 - c_1||^2
    assert env.step(3, np.zeros(2)).variation_sq == pytest.approx(1.0)  # back to zero
    assert env.step(4, np.zeros(2)).sigma_sq == pytest.approx(0.25)


def test_uniform_corruption_schedule_spends_budget_exactly():
    schedule = uniform_corruption_schedule(10.5, 2.0, np.array([1.0, 0.0]))
    norms = [np.linalg.norm(c) for c in schedule]
    assert sum(norms) == pytest.approx(10.5)
    assert norms[:-1] == [2.0] * 5 and norms[-1] == pytest.approx(0.5)
    signs = [np.sign(c[0]) for c in schedule]
    assert signs == [1.0, -1.0, 1.0, -1.0, 1.0, -1.0]


def test_rom_removes_drawn_member():
    pool = [LinearLoss([1.0, 0.0]), LinearLoss([0.0, 1.0]), LinearLoss([-1.0, 0.0])]
    env = RandomOrderEnvironment(pool, BALL, _rng(3))
    out1 = env.step(1, np.zeros(2))
    assert set(out1.dist.active) == {0, 1, 2}
    drawn = pool.index(out1.loss)
    out2 = env.step(2, np.zeros(2))
    assert set(out2.dist.active) == {0, 1, 2} - {drawn}
    env.step(3, np.zeros(2))
    with pytest.raises(ProtocolError):
        env.step(4, np.zeros(2))  # single pass exhausted


def test_rom_exchangeability():
    pool = [LinearLoss([float(i), 0.0]) for i in range(4)]
    counts = {perm: 0 for perm in itertools.permutations(range(4))}
    n_runs = 10_000
    for seed in range(n_runs):
        env = RandomOrderEnvironment(pool, BALL, trial_rng(seed, 4))
        order = tuple(pool.index(env.step(t, np.zeros(2)).loss) for t in range(1, 5))
        counts[order] += 1
    p = 1.0 / 24.0
    tol = 3.0 * np.sqrt(p * (1 - p) / n_runs)
    for perm, count in counts.items():
        assert abs(count / n_runs - p) <= tol, f"permutation {perm} frequency off"


def test_rom_variance_decay_and_variation_budget():
    rng_pool = np.random.default_rng(12)
    n = 100
    g = rng_pool.normal(size=(n, 2))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    pool = [LinearLoss(row) for row in g]
    sums = []
    for seed in range(50):
        env = RandomOrderEnvironment(pool, BALL, trial_rng(seed, n))
        sigma1_sq = None
        total_var = 0.0
        for t in range(1, n + 1):
            out = env.step(t, np.zeros(2))
            if t == 1:
                sigma1_sq = out.sigma_sq
            assert out.sigma_sq <= (n / (n - t + 1)) * sigma1_sq * (1 + 1e-12)
            total_var += out.variation_sq
        sums.append(total_var)
    assert np.mean(sums) <= 8.0  # G = 1


def test_multipass_rom_reshuffles_and_spikes():
    pool = [LinearLoss([1.0, 0.0]), LinearLoss([-1.0, 0.0]), LinearLoss([0.0, 1.0])]
    env = RandomOrderEnvironment(pool, BALL, _rng(5), passes=2)
    variations = [env.step(t, np.zeros(2)).variation_sq for t in range(1, 7)]
    assert variations[3] > 0.0  # pass boundary at t = n + 1
    with pytest.raises(ProtocolError):
        env.step(7, np.zeros(2))


def test_rom_rejects_mixed_curvature_pools():
    from sea_oco import QuadraticLoss

    pool = [QuadraticLoss(np.eye(2), np.zeros(2)), QuadraticLoss(2 * np.eye(2), np.zeros(2))]
    with pytest.raises(ConfigurationError):
        RandomOrderEnvironment(pool, BALL, _rng())


def test_shift_variation_within_eps():
    eps = 0.01
    env = ShiftEnvironment(1.0, eps, 0.5, 2, BALL, _rng())
    for t in range(1, 200):
        out = env.step(t, np.zeros(2))
        assert out.variation_sq <= eps + 1e-15
        assert out.sigma_sq == pytest.approx(0.25)


def test_shift_requires_two_dims():
    with pytest.raises(ConfigurationError):
        ShiftEnvironment(1.0, 0.1, 0.0, 1, Ball([0.0], 1.0), _rng())


def test_switch_counts_exactly_c_nonzero_variations():
    dists = [
        SphereNoiseDist(LinearLoss([1.0, 0.0]), 0.3),
        SphereNoiseDist(LinearLoss([0.0, 1.0]), 0.3),
        SphereNoiseDist(LinearLoss([-1.0, 0.0]), 0.3),
    ]
    env = SwitchEnvironment(dists, [40, 80], BALL, _rng())
    nonzero = [t for t in range(1, 121) if env.step(t, np.zeros(2)).variation_sq > 0.0]
    assert nonzero == [40, 80]


def test_rademacher_even_rounds_are_silent():
    box = Box([1.0], [2.0])
    env = RademacherLBEnvironment(1.0, 2.0, 1.0, box, _rng())
    out1 = env.step(1, np.array([2.0]))
    assert abs(out1.loss.g[0]) == pytest.approx(0.5)  # slope at x = b is G/2
    out2 = env.step(2, np.array([1.5]))
    assert out2.loss.g[0] == 0.0 and out2.sigma_sq == 0.0
    out3 = env.step(3, np.array([1.0]))
    assert abs(out3.loss.g[0]) == pytest.approx(1.0 / 4.0)  # G * a / (2b)


def test_rademacher_gradient_band():
    box = Box([1.0], [2.0])
    G = 1.0
    env = RademacherLBEnvironment(1.0, 2.0, G, box, _rng(17))
    rng = np.random.default_rng(2)
    for t in range(1, 500):
        x = np.array([rng.uniform(1.0, 2.0)])
        out = env.step(t, x)
        magnitude = abs(float(out.loss.g[0]))
        assert magnitude <= G / 2 + 1e-12
        if t % 2 == 1:
            assert magnitude >= G * 1.0 / (2 * 2.0) - 1e-12


def test_rademacher_rejects_bad_domains_and_points():
    with pytest.raises(ConfigurationError):
        RademacherLBEnvironment(0.5, 2.0, 1.0, Box([0.5], [2.0]), _rng())
    with pytest.raises(ConfigurationError):
        RademacherLBEnvironment(1.0, 2.5, 1.0, Box([1.0], [2.5]), _rng())  # a < b/2
    env = RademacherLBEnvironment(1.0, 2.0, 1.0, Box([1.0], [2.0]), _rng())
    with pytest.raises(ContractViolationError):
        env.step(1, np.array([0.5]))
