"""Stochastically extended adversaries: per-round distribution selection.

Each environment owns the state that drives the choice of the round-t
distribution (scripts, permutations, corruption budgets, drift trajectories),
draws the realized loss, and reports the exact per-round variance and
mean-field variation so that downstream metrics need no estimation.

Environments see the learner's point x_t before emitting the sample, so
adaptive adversaries are legal; the first-round variation convention differs
between families (F^0 := F^1 for most, c_0 := 0 for the corrupted model) and
is recorded on the instance.
"""

from __future__ import annotations

from typing import Callable, NamedTuple, Sequence

import numpy as np

from .errors import ConfigurationError, ContractViolationError, ProtocolError
from .geometry import Ball, Box, FeasibleSet
from .losses import (
    DiracDist,
    FiniteUniformDist,
    LinearLoss,
    ShiftedDist,
    SphereNoiseDist,
    _same_curvature,
    _shift_loss,
    variation,
)

__all__ = [
    "RoundOutcome",
    "Environment",
    "AdversarialScript",
    "IIDEnvironment",
    "CorruptedIIDEnvironment",
    "RandomOrderEnvironment",
    "ShiftEnvironment",
    "SwitchEnvironment",
    "RademacherLBEnvironment",
    "uniform_corruption_schedule",
]


class RoundOutcome(NamedTuple):
    dist: object
    loss: object
    sigma_sq: float
    variation_sq: float


class Environment:
    """Base: strict round bookkeeping shared by all adversaries."""

    name = "environment"
    t1_variation_convention = "F0=F1"

    def __init__(self):
        self._t_next = 1

    def _advance(self, t: int) -> None:
        if t != self._t_next:
            raise ProtocolError(f"expected round {self._t_next}, got {t}")
        self._t_next += 1

    def step(self, t: int, x_t: np.ndarray) -> RoundOutcome:
        raise NotImplementedError


class AdversarialScript(Environment):
    """Dirac measures on a scripted loss sequence: the classical adversary."""

    name = "adversarial"

    def __init__(self, losses, feasible: FeasibleSet, rng=None):
        super().__init__()
        if callable(losses):
            self._script: Callable[[int], object] = losses
            self._length = None
        else:
            seq = list(losses)
            if not seq:
                raise ConfigurationError("adversarial script must be nonempty")
            self._script = lambda t: seq[t - 1]
            self._length = len(seq)
        self.feasible = feasible
        self._prev_dist = None

    def step(self, t: int, x_t: np.ndarray) -> RoundOutcome:
        self._advance(t)
        if self._length is not None and t > self._length:
            raise ProtocolError(f"script exhausted at round {t} (length {self._length})")
        loss = self._script(t)
        dist = DiracDist(loss)
        if self._prev_dist is None:
            var_sq = 0.0
        elif _same_curvature(loss.curvature, self._prev_dist.loss.curvature):
            delta = loss.grad_offset - self._prev_dist.loss.grad_offset
            var_sq = float(delta @ delta)
        else:
            var_sq = variation(dist, self._prev_dist, self.feasible)
        self._prev_dist = dist
        return RoundOutcome(dist, loss, 0.0, var_sq)


class IIDEnvironment(Environment):
    """A fixed distribution every round: zero adversarial variation."""

    name = "iid"

    def __init__(self, dist, feasible: FeasibleSet, rng: np.random.Generator):
        super().__init__()
        self.dist = dist
        self.feasible = feasible
        self.rng = rng
        self._sigma_sq = dist.variance_bound(feasible)

    def step(self, t: int, x_t: np.ndarray) -> RoundOutcome:
        self._advance(t)
        loss = self.dist.sample(self.rng)
        return RoundOutcome(self.dist, loss, self._sigma_sq, 0.0)


def uniform_corruption_schedule(
    budget: float, gamma: float, direction: np.ndarray
) -> list[np.ndarray]:
    """Spend the budget at per-round gradient norm gamma, alternating +/-.

    Full-strength rounds come first; a final partial round carries the
    remainder so the schedule's norms sum to the budget exactly. Alternating
    the sign along a fixed unit vector maximizes the round-to-round variation
    the corruption can cause.
    """
    if budget < 0.0:
        raise ConfigurationError("corruption budget must be nonnegative")
    if gamma <= 0.0:
        raise ConfigurationError("corruption per-round norm must be positive")
    direction = np.asarray(direction, dtype=float)
    direction = direction / np.linalg.norm(direction)
    norms = [gamma] * int(budget // gamma)
    remainder = budget - gamma * len(norms)
    if remainder > 1e-12 * max(1.0, budget):
        norms.append(remainder)
    return [(-1.0) ** k * norms[k] * direction for k in range(len(norms))]


class CorruptedIIDEnvironment(Environment):
    """An i.i.d. source perturbed by deterministic linear corruptions.

    The cumulative corruption sum_t ||grad c_t|| must stay within the declared
    budget; this is checked at construction. The variation at t = 1 charges
    ||grad c_1||^2, i.e. the c_0 := 0 convention.
    """

    name = "corrupted"
    t1_variation_convention = "c0=0"

    def __init__(
        self,
        base,
        corruptions: Sequence[np.ndarray],
        budget: float,
        feasible: FeasibleSet,
        rng: np.random.Generator,
    ):
        super().__init__()
        self.base = base
        self.corruptions = [np.asarray(c, dtype=float) for c in corruptions]
        spent = sum(float(np.linalg.norm(c)) for c in self.corruptions)
        if spent > budget + 1e-9 * max(1.0, budget):
            raise ConfigurationError(
                f"corruption schedule spends {spent:.6g} > budget {budget:.6g}"
            )
        self.budget = float(budget)
        self.feasible = feasible
        self.rng = rng
        self._sigma_sq = base.variance_bound(feasible)
        self._zero = np.zeros(base.dim)

    def _corruption(self, t: int) -> np.ndarray:
        if 1 <= t <= len(self.corruptions):
            return self.corruptions[t - 1]
        return self._zero

    def step(self, t: int, x_t: np.ndarray) -> RoundOutcome:
        self._advance(t)
        c_t = self._corruption(t)
        c_prev = self._corruption(t - 1) if t >= 2 else self._zero
        delta = c_t - c_prev
        var_sq = float(delta @ delta)
        base_loss = self.base.sample(self.rng)
        if np.any(c_t):
            dist = ShiftedDist(self.base, LinearLoss(c_t))
            loss = _shift_loss(base_loss, c_t)
        else:
            dist, loss = self.base, base_loss
        return RoundOutcome(dist, loss, self._sigma_sq, var_sq)


class _UniformRemaining:
    """Uniform distribution over the not-yet-drawn pool members.

    Duck-types the distribution interface with the moments the environment
    already maintains incrementally, avoiding a per-round pool scan.
    """

    __slots__ = ("pool", "active", "_curv", "_offset", "_sigma_sq")

    def __init__(self, pool, active, curv, offset, sigma_sq):
        self.pool = pool
        self.active = active
        self._curv = curv
        self._offset = offset
        self._sigma_sq = sigma_sq

    @property
    def dim(self) -> int:
        return self._offset.size

    def sample(self, rng: np.random.Generator):
        return self.pool[self.active[rng.integers(self.active.size)]]

    def mean_grad(self, x: np.ndarray) -> np.ndarray:
        if self._curv is None:
            return self._offset
        return self._curv @ x + self._offset

    def mean_affine(self):
        return self._curv, self._offset

    def variance_bound(self, feasible: FeasibleSet) -> float:
        return self._sigma_sq

    def grad_norm_bound(self, feasible: FeasibleSet) -> float:
        return max(self.pool[i].sup_grad_norm(feasible) for i in self.active)


class RandomOrderEnvironment(Environment):
    """Sampling without replacement from a fixed pool, optionally over P passes.

    D_t is uniform over the members not yet drawn in the current pass; a fresh
    uniform permutation is drawn at each pass boundary. Pools whose members
    share a curvature matrix (in particular all-linear pools) use exact O(d)
    incremental updates of the remaining-set mean and variance.
    """

    name = "rom"

    def __init__(
        self,
        pool,
        feasible: FeasibleSet,
        rng: np.random.Generator,
        passes: int = 1,
    ):
        super().__init__()
        if passes < 1:
            raise ConfigurationError("passes must be >= 1")
        self.pool = list(pool)
        self.n = len(self.pool)
        if self.n == 0:
            raise ConfigurationError("ROM pool must be nonempty")
        self.passes = int(passes)
        self.feasible = feasible
        self.rng = rng
        full = FiniteUniformDist(self.pool)
        self._shared_curv = full._shared_curv
        self._curv = full._mean_curv
        if not self._shared_curv:
            raise ConfigurationError(
                "ROM pools must share a curvature matrix so moments stay exact"
            )
        self._offsets = np.stack([m.grad_offset for m in self.pool])
        self._offset_sq = np.sum(self._offsets * self._offsets, axis=1)
        self._pass_idx = 0
        self._prev_mean: np.ndarray | None = None
        self._start_pass()

    def _start_pass(self) -> None:
        self.perm = self.rng.permutation(self.n)
        self.pos = 0
        self._rem_sum = self._offsets.sum(axis=0)
        self._rem_sumsq = float(self._offset_sq.sum())

    def step(self, t: int, x_t: np.ndarray) -> RoundOutcome:
        self._advance(t)
        if self.pos == self.n:
            if self._pass_idx + 1 >= self.passes:
                raise ProtocolError(
                    f"ROM pool exhausted at round {t} ({self.passes} pass(es) of {self.n})"
                )
            self._pass_idx += 1
            self._start_pass()
        m = self.n - self.pos
        mean = self._rem_sum / m
        sigma_sq = max(self._rem_sumsq / m - float(mean @ mean), 0.0)
        if self._prev_mean is None:
            var_sq = 0.0
        else:
            delta = mean - self._prev_mean
            var_sq = float(delta @ delta)
        # the permutation array is never mutated within a pass, so a view is safe
        dist = _UniformRemaining(
            self.pool, self.perm[self.pos :], self._curv, mean, sigma_sq
        )
        k = int(self.perm[self.pos])
        loss = self.pool[k]
        self.pos += 1
        self._rem_sum = self._rem_sum - self._offsets[k]
        self._rem_sumsq -= float(self._offset_sq[k])
        self._prev_mean = mean
        return RoundOutcome(dist, loss, sigma_sq, var_sq)


class ShiftEnvironment(Environment):
    """Mean gradient drifting deterministically on a circle.

    Per-round squared drift of the mean field never exceeds eps: the mean
    rotates in the plane of the first two coordinates with chord length
    min(sqrt(eps), diameter of the circle). Deterministic drift keeps the
    reported variance/variation aggregates reproducible.
    """

    name = "shift"

    def __init__(
        self,
        mean_radius: float,
        eps: float,
        sigma: float,
        dim: int,
        feasible: FeasibleSet,
        rng: np.random.Generator,
    ):
        super().__init__()
        if dim < 2:
            raise ConfigurationError("shift environment needs dim >= 2 to rotate the mean")
        if mean_radius <= 0.0 or eps < 0.0:
            raise ConfigurationError("mean_radius must be positive and eps nonnegative")
        self.rho = float(mean_radius)
        self.eps = float(eps)
        self.sigma = float(sigma)
        self.dim = dim
        self.feasible = feasible
        self.rng = rng
        chord = min(np.sqrt(self.eps), 2.0 * self.rho)
        self._chord_sq = chord**2
        self._delta = 2.0 * np.arcsin(chord / (2.0 * self.rho))

    def _mean(self, t: int) -> np.ndarray:
        theta = (t - 1) * self._delta
        m = np.zeros(self.dim)
        m[0] = self.rho * np.cos(theta)
        m[1] = self.rho * np.sin(theta)
        return m

    def step(self, t: int, x_t: np.ndarray) -> RoundOutcome:
        self._advance(t)
        dist = SphereNoiseDist(LinearLoss(self._mean(t)), self.sigma)
        loss = dist.sample(self.rng)
        var_sq = 0.0 if t == 1 else self._chord_sq
        return RoundOutcome(dist, loss, self.sigma**2, var_sq)


class SwitchEnvironment(Environment):
    """Piecewise-constant distribution schedule with scripted switch rounds."""

    name = "switch"

    def __init__(
        self,
        dists,
        switch_rounds: Sequence[int],
        feasible: FeasibleSet,
        rng: np.random.Generator,
    ):
        super().__init__()
        self.dists = list(dists)
        self.switch_rounds = [int(r) for r in switch_rounds]
        if len(self.dists) != len(self.switch_rounds) + 1:
            raise ConfigurationError(
                "need exactly one more distribution than switch rounds"
            )
        if any(r < 2 for r in self.switch_rounds):
            raise ConfigurationError("switch rounds must be >= 2")
        if sorted(set(self.switch_rounds)) != self.switch_rounds:
            raise ConfigurationError("switch rounds must be strictly increasing")
        self.feasible = feasible
        self.rng = rng
        self._sigmas = [d.variance_bound(feasible) for d in self.dists]
        self._switch_var = [
            variation(self.dists[i + 1], self.dists[i], feasible)
            for i in range(len(self.switch_rounds))
        ]
        self._phase = 0

    def step(self, t: int, x_t: np.ndarray) -> RoundOutcome:
        self._advance(t)
        var_sq = 0.0
        if self._phase < len(self.switch_rounds) and t == self.switch_rounds[self._phase]:
            var_sq = self._switch_var[self._phase]
            self._phase += 1
        dist = self.dists[self._phase]
        loss = dist.sample(self.rng)
        return RoundOutcome(dist, loss, self._sigmas[self._phase], var_sq)


class _SymmetricPairDist:
    """Uniform over {+v, -v} as linear losses: mean zero, variance ||v||^2."""

    __slots__ = ("v",)

    def __init__(self, v: np.ndarray):
        self.v = v

    @property
    def dim(self) -> int:
        return self.v.size

    def sample(self, rng: np.random.Generator):
        sign = 1.0 if rng.integers(2) else -1.0
        return LinearLoss(sign * self.v)

    def mean_grad(self, x: np.ndarray) -> np.ndarray:
        return np.zeros_like(self.v)

    def mean_affine(self):
        return None, np.zeros_like(self.v)

    def variance_bound(self, feasible: FeasibleSet) -> float:
        return float(self.v @ self.v)

    def grad_norm_bound(self, feasible: FeasibleSet) -> float:
        return float(np.linalg.norm(self.v))


class RademacherLBEnvironment(Environment):
    """Constructive sqrt(T) lower-bound adversary on an interval [a, b].

    Even rounds emit the zero gradient. Odd rounds draw a Rademacher sign and
    emit the linear loss with gradient sign * G * x_t / (2b): the derivative at
    x_t of the G-Lipschitz smooth potential G x^2 / (4b), whose slope lies in
    [G/2, G] on the domain because a >= b/2.
    """

    name = "lb_rademacher"

    def __init__(self, a: float, b: float, g_scale: float, feasible: FeasibleSet, rng):
        super().__init__()
        if not (1.0 <= a < b):
            raise ConfigurationError(f"need 1 <= a < b, got a={a}, b={b}")
        if a < 0.5 * b:
            raise ConfigurationError(f"need a >= b/2, got a={a}, b={b}")
        if g_scale <= 0.0:
            raise ConfigurationError("gradient scale must be positive")
        if not isinstance(feasible, Box) or feasible.dim != 1:
            raise ConfigurationError("lb_rademacher runs on a 1-d interval")
        self.a, self.b, self.g_scale = float(a), float(b), float(g_scale)
        self.feasible = feasible
        self.rng = rng
        self._zero_loss = LinearLoss(np.zeros(1))
        self._zero_dist = DiracDist(self._zero_loss)

    def step(self, t: int, x_t: np.ndarray) -> RoundOutcome:
        self._advance(t)
        x = float(x_t[0])
        if not (self.a - 1e-9 <= x <= self.b + 1e-9):
            raise ContractViolationError(f"iterate {x} outside [{self.a}, {self.b}]")
        if t % 2 == 0:
            return RoundOutcome(self._zero_dist, self._zero_loss, 0.0, 0.0)
        slope = self.g_scale * x / (2.0 * self.b)
        lo = self.g_scale * self.a / (2.0 * self.b)
        assert lo - 1e-12 <= slope <= 0.5 * self.g_scale + 1e-12
        v = np.array([slope])
        dist = _SymmetricPairDist(v)
        loss = dist.sample(self.rng)
        return RoundOutcome(dist, loss, slope**2, 0.0)


def coordinate_quadratic_pool(dim: int) -> list:
    """The d quadratic losses f(x, i) = x_i^2 / 2."""
    from .losses import QuadraticLoss

    if dim < 2:
        raise ConfigurationError("coordinate quadratic family needs dim >= 2")
    pool = []
    for i in range(dim):
        A = np.zeros((dim, dim))
        A[i, i] = 1.0
        pool.append(QuadraticLoss(A, np.zeros(dim)))
    return pool


def coordinate_quadratic_env(
    dim: int, feasible: FeasibleSet, rng: np.random.Generator
) -> IIDEnvironment:
    """I.i.d. uniform draws from the coordinate-quadratic family."""
    env = IIDEnvironment(FiniteUniformDist(coordinate_quadratic_pool(dim)), feasible, rng)
    env.name = "coord_quadratic"
    return env
