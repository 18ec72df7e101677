"""Optimistic learners with exact closed-form updates, plus an OGD baseline.

Both optimistic learners guess M_t = g_{t-1} (M_1 = 0, making the first
iterate the projection of the origin). The predict/observe alternation is a
strict protocol enforced by a state flag; every prediction lies in the
feasible set exactly because updates reduce to a single projection.
"""

from __future__ import annotations

import numpy as np

from .errors import ConfigurationError, ContractViolationError, ProtocolError
from .geometry import FeasibleSet, reg_argmin

__all__ = ["OFTRL", "OFTL", "OGD", "ogd_step"]


class _ProtocolMixin:
    _awaiting_observe = False

    def _enter_predict(self) -> None:
        if self._awaiting_observe:
            raise ProtocolError("predict called twice without an observe in between")
        self._awaiting_observe = True

    def _enter_observe(self) -> None:
        if not self._awaiting_observe:
            raise ProtocolError("observe called without a preceding predict")
        self._awaiting_observe = False


class OFTRL(_ProtocolMixin):
    """Optimistic FTRL with the self-tuned step size.

    Round t plays argmin over the set of <x, M_t + sum_{s<t} g_s> + ||x||^2 / eta_t
    with eta_t = D^2 / (nu + sum_{s<t} eta_s ||g_s - M_s||^2). The step-size
    sequence is positive and non-increasing by construction; nu > 0 is the only
    tuning knob (2DG recovers the worst-case-safe deterministic bound).

    regularizer="display" uses the ||x||^2 / eta weight as written in the
    update rule; "lemma" uses the 2/eta weight that the analysis manipulates.
    """

    name = "oftrl"

    def __init__(self, feasible: FeasibleSet, nu: float, regularizer: str = "display"):
        if nu <= 0.0:
            raise ConfigurationError(f"nu must be positive, got {nu}")
        if regularizer not in ("display", "lemma"):
            raise ConfigurationError(f"unknown regularizer variant {regularizer!r}")
        self.feasible = feasible
        self.nu = float(nu)
        self.D = feasible.diameter
        self._reg_weight = 1.0 if regularizer == "display" else 2.0
        self.regularizer = regularizer
        d = feasible.dim
        self.grad_sum = np.zeros(d)
        self.M_next = np.zeros(d)
        self.eta_denominator = self.nu
        self.eta_current = self.D**2 / self.nu
        self.t = 1

    @property
    def eta(self) -> float:
        return self.eta_current

    def predict(self) -> np.ndarray:
        self._enter_predict()
        theta = self.M_next + self.grad_sum
        return reg_argmin(theta, self._reg_weight / self.eta_current, self.feasible)

    def observe(self, g_t: np.ndarray) -> None:
        self._enter_observe()
        g_t = np.asarray(g_t, dtype=float)
        diff = g_t - self.M_next
        self.eta_denominator += self.eta_current * float(diff @ diff)
        self.grad_sum += g_t
        self.M_next = g_t.copy()
        self.t += 1
        self.eta_current = self.D**2 / self.eta_denominator

    def descriptor(self) -> dict:
        return {"name": self.name, "nu": self.nu, "regularizer": self.regularizer}


class OFTL(_ProtocolMixin):
    """Optimistic follow-the-leader on quadratic surrogate losses.

    The surrogate for round s is <g_s, x - x_s> + (mu/2) ||x - x_s||^2, so the
    round-t objective sum_{s<t} l_s(x) + <M_t, x> is a quadratic with curvature
    (t-1) mu and closed-form constrained minimizer

        project( (mu * sum x_s - sum g_s - M_t) / ((t-1) mu) ).

    Requires only the strong-convexity modulus mu of the expected losses.
    """

    name = "oftl"

    def __init__(self, feasible: FeasibleSet, mu: float):
        if mu <= 0.0:
            raise ConfigurationError(f"mu must be positive, got {mu}")
        self.feasible = feasible
        self.mu = float(mu)
        d = feasible.dim
        self.x_sum = np.zeros(d)
        self.grad_sum = np.zeros(d)
        self.M_next = np.zeros(d)
        self.t = 1
        self._last_x: np.ndarray | None = None

    @property
    def eta(self) -> float:
        return 0.0

    def predict(self) -> np.ndarray:
        self._enter_predict()
        if self.t == 1:
            x = self.feasible.project(np.zeros(self.feasible.dim))
        else:
            target = (self.mu * self.x_sum - self.grad_sum - self.M_next) / (
                (self.t - 1) * self.mu
            )
            x = self.feasible.project(target)
        self._last_x = x
        return x

    def observe(self, g_t: np.ndarray) -> None:
        self._enter_observe()
        g_t = np.asarray(g_t, dtype=float)
        self.x_sum += self._last_x
        self.grad_sum += g_t
        self.M_next = g_t.copy()
        self.t += 1

    def descriptor(self) -> dict:
        return {"name": self.name, "mu": self.mu}


def ogd_step(
    x_t: np.ndarray, g_t: np.ndarray, step: float, feasible: FeasibleSet
) -> np.ndarray:
    """One projected gradient step."""
    if step <= 0.0:
        raise ContractViolationError(f"step must be positive, got {step}")
    return feasible.project(np.asarray(x_t, float) - step * np.asarray(g_t, float))


class OGD(_ProtocolMixin):
    """Projected online gradient descent baseline, step = scale / sqrt(t) or constant."""

    name = "ogd"

    def __init__(self, feasible: FeasibleSet, step_scale: float, schedule: str = "inv_sqrt"):
        if step_scale <= 0.0:
            raise ConfigurationError(f"step_scale must be positive, got {step_scale}")
        if schedule not in ("inv_sqrt", "constant"):
            raise ConfigurationError(f"unknown step schedule {schedule!r}")
        self.feasible = feasible
        self.step_scale = float(step_scale)
        self.schedule = schedule
        self.t = 1
        self._x = feasible.project(np.zeros(feasible.dim))
        self._step_last = self._step(1)

    def _step(self, t: int) -> float:
        if self.schedule == "constant":
            return self.step_scale
        return self.step_scale / np.sqrt(t)

    @property
    def eta(self) -> float:
        return self._step_last

    def predict(self) -> np.ndarray:
        self._enter_predict()
        self._step_last = self._step(self.t)
        return self._x

    def observe(self, g_t: np.ndarray) -> None:
        self._enter_observe()
        self._x = ogd_step(self._x, g_t, self._step_last, self.feasible)
        self.t += 1

    def descriptor(self) -> dict:
        return {"name": self.name, "step_scale": self.step_scale, "schedule": self.schedule}
