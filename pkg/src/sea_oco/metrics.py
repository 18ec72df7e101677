"""Regret curves, variance/variation aggregates, and bound evaluators.

All metrics are pure functions over completed traces. The primary regret is
the linearized regret sum_t <g_t, x_t - u*> against the best fixed comparator
for the realized gradients; a function-value regret against the best fixed
point for the realized losses is computed alongside, since for curved losses
it is the quantity that exhibits the logarithmic rate.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ContractViolationError
from .geometry import Ball, Box, FeasibleSet, sup_affine_norm_sq
from .losses import _same_curvature

__all__ = [
    "RoundRecord",
    "Trace",
    "best_comparator",
    "RegretCurves",
    "regret_curve",
    "CumAggregates",
    "cum_aggregates",
    "theorem1_bound",
    "theorem3_bound",
    "VarDiagnostics",
    "diagnostics_var_d2",
    "minimize_sum_losses",
]


@dataclass
class RoundRecord:
    t: int
    x: np.ndarray
    g: np.ndarray
    eta: float
    sigma_sq: float
    variation_sq: float
    loss_value: float


class Trace:
    """Column-wise storage of one trial; one row per round."""

    def __init__(self, T: int, dim: int, env: dict, learner: dict, seed: int):
        self.T = int(T)
        self.dim = int(dim)
        self.env = env
        self.learner = learner
        self.seed = int(seed)
        self.x = np.zeros((T, dim))
        self.g = np.zeros((T, dim))
        self.eta = np.zeros(T)
        self.sigma_sq = np.zeros(T)
        self.variation_sq = np.zeros(T)
        self.loss_value = np.zeros(T)
        self.losses: list = [None] * T

    def __len__(self) -> int:
        return self.T

    def record(self, i: int) -> RoundRecord:
        return RoundRecord(
            t=i + 1,
            x=self.x[i],
            g=self.g[i],
            eta=float(self.eta[i]),
            sigma_sq=float(self.sigma_sq[i]),
            variation_sq=float(self.variation_sq[i]),
            loss_value=float(self.loss_value[i]),
        )

    @property
    def records(self) -> list[RoundRecord]:
        return [self.record(i) for i in range(self.T)]


def best_comparator(grads, feasible: FeasibleSet) -> np.ndarray:
    """Fixed point minimizing the linearized cumulative loss sum_t <g_t, u>."""
    grads = np.atleast_2d(np.asarray(grads, dtype=float))
    if grads.size == 0:
        raise ContractViolationError("best_comparator needs at least one gradient")
    return feasible.linear_minimize(grads.sum(axis=0))


def minimize_sum_losses(losses, feasible: FeasibleSet) -> np.ndarray:
    """Exact minimizer over the set of the cumulative realized loss.

    The sum of the supported families is a convex quadratic. Balls are solved
    through the radial KKT condition (eigendecomposition plus bisection on the
    multiplier); boxes with diagonal curvature decompose per coordinate, and
    general boxes fall back to projected gradient descent.
    """
    if not losses:
        raise ContractViolationError("minimize_sum_losses needs at least one loss")
    d = feasible.dim
    b = np.zeros(d)
    A = np.zeros((d, d))
    curved = False
    for l in losses:
        b += l.grad_offset
        if l.curvature is not None:
            A += l.curvature
            curved = True
    if not curved or not np.any(A):
        return feasible.linear_minimize(b)
    if isinstance(feasible, Ball):
        return _minimize_quadratic_ball(A, b, feasible)
    return _minimize_quadratic_box(A, b, feasible)


def _minimize_quadratic_ball(A: np.ndarray, b: np.ndarray, ball: Ball) -> np.ndarray:
    # shift to the ball's center: minimize 0.5 y'Ay + g'y over ||y|| <= R
    g = A @ ball.center + b
    R = ball.radius
    lam, V = np.linalg.eigh(A)
    lam = np.maximum(lam, 0.0)
    ghat = V.T @ g

    def norm_at(mult: float) -> float:
        denom = lam + mult
        y = np.where(denom > 0.0, -ghat / np.where(denom > 0.0, denom, 1.0), 0.0)
        return float(np.linalg.norm(y))

    # interior candidate: pseudo-inverse solution, valid when the zero-eigen
    # components of g vanish
    flat = lam <= 1e-14 * max(lam[-1], 1.0)
    if not np.any(np.abs(ghat[flat]) > 1e-12 * max(1.0, float(np.linalg.norm(g)))):
        y0 = np.where(flat, 0.0, -ghat / np.where(flat, 1.0, lam))
        if np.linalg.norm(y0) <= R * (1.0 + 1e-12):
            return ball.center + V @ y0
    lo, hi = 0.0, 1.0
    while norm_at(hi) > R:
        hi *= 2.0
        if hi > 1e18:
            break
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if norm_at(mid) > R:
            lo = mid
        else:
            hi = mid
    y = -ghat / (lam + hi)
    return ball.center + V @ y


def _minimize_quadratic_box(A: np.ndarray, b: np.ndarray, box: Box) -> np.ndarray:
    diag = np.diag(np.diag(A))
    if np.allclose(A, diag, atol=1e-14):
        a = np.diag(A)
        x = np.where(a > 0.0, -b / np.where(a > 0.0, a, 1.0), np.where(b > 0.0, box.lo, box.hi))
        x = np.where((a <= 0.0) & (b == 0.0), box.center, x)
        return np.clip(x, box.lo, box.hi)
    lam_max = float(np.linalg.eigvalsh(A)[-1])
    step = 1.0 / max(lam_max, 1e-14)
    x = box.center.copy()
    for _ in range(200_000):
        x_new = np.clip(x - step * (A @ x + b), box.lo, box.hi)
        if float(np.max(np.abs(x_new - x))) <= 1e-13 * max(1.0, float(np.max(np.abs(x)))):
            return x_new
        x = x_new
    return x


@dataclass
class RegretCurves:
    linear: np.ndarray
    function_value: np.ndarray
    comparator_linear: np.ndarray
    comparator_function: np.ndarray

    @property
    def linear_final(self) -> float:
        return float(self.linear[-1]) if self.linear.size else 0.0

    @property
    def function_final(self) -> float:
        return float(self.function_value[-1]) if self.function_value.size else 0.0


def regret_curve(trace: Trace, feasible: FeasibleSet) -> RegretCurves:
    """Cumulative regret against full-horizon fixed comparators.

    Entry T' of the linear series is sum_{t<=T'} <g_t, x_t - u*> with u* the
    linearized-loss minimizer over the whole horizon; the function-value series
    uses the minimizer of the cumulative realized loss instead.
    """
    if trace.T == 0:
        z = np.zeros(0)
        c = feasible.center
        return RegretCurves(z, z.copy(), c.copy(), c.copy())
    u_lin = best_comparator(trace.g, feasible)
    inc = np.einsum("td,td->t", trace.g, trace.x - u_lin)
    linear = np.cumsum(inc)

    all_linear = all(l is not None and l.curvature is None for l in trace.losses)
    if all_linear:
        u_fn = u_lin
        comp_vals = trace.g @ u_fn
    else:
        u_fn = minimize_sum_losses(trace.losses, feasible)
        comp_vals = np.array([l.value(u_fn) for l in trace.losses])
    function_value = np.cumsum(trace.loss_value - comp_vals)
    return RegretCurves(linear, function_value, u_lin, u_fn)


@dataclass
class CumAggregates:
    sigma_sq_cum: float
    Sigma_sq_cum: float
    sigma_bar: float
    Sigma_bar: float
    sigma_max: float  # root of the largest per-round sigma_t^2
    Sigma_max: float


def cum_aggregates(trace: Trace) -> CumAggregates:
    """Per-trace cumulative variance/variation sums, per-round root-means, maxima.

    Expectations over seeds are the harness's job, not taken here.
    """
    T = trace.T
    if T == 0:
        return CumAggregates(0.0, 0.0, 0.0, 0.0, 0.0, 0.0)
    s_cum = float(trace.sigma_sq.sum())
    v_cum = float(trace.variation_sq.sum())
    return CumAggregates(
        sigma_sq_cum=s_cum,
        Sigma_sq_cum=v_cum,
        sigma_bar=float(np.sqrt(s_cum / T)),
        Sigma_bar=float(np.sqrt(v_cum / T)),
        sigma_max=float(np.sqrt(trace.sigma_sq.max())),
        Sigma_max=float(np.sqrt(trace.variation_sq.max())),
    )


def theorem1_bound(
    D: float,
    G: float,
    L: float,
    nu: float,
    sigma_bar: float,
    Sigma_bar: float,
    T: int,
) -> float:
    """Adaptive-OFTRL regret bound for convex smooth expected losses:

        D (6 sigma_bar + 3 sqrt(2) Sigma_bar) sqrt(T)
          + 3 sqrt(2) D G / 2 + nu + (4 D^2 G^2 + 9 L^2 D^4) / nu.
    """
    if D <= 0.0 or G <= 0.0 or nu <= 0.0:
        raise ContractViolationError("D, G, nu must be positive")
    if L < 0.0 or sigma_bar < 0.0 or Sigma_bar < 0.0 or T < 0:
        raise ContractViolationError("L, sigma_bar, Sigma_bar, T must be nonnegative")
    root2 = np.sqrt(2.0)
    return float(
        D * (6.0 * sigma_bar + 3.0 * root2 * Sigma_bar) * np.sqrt(T)
        + 1.5 * root2 * D * G
        + nu
        + (4.0 * D**2 * G**2 + 9.0 * L**2 * D**4) / nu
    )


def theorem3_bound(
    mu: float,
    L: float,
    D: float,
    G: float,
    sigma_max: float,
    Sigma_max: float,
    T: float,
    include_gd_term: bool = True,
) -> float:
    """Surrogate-OFTL regret bound for strongly convex expected losses:

        (8 sigma_max^2 + 4 Sigma_max^2) log(T) / mu
          + (4 D^2 L^2 / mu) log(1 + 16 L / mu) [+ G D].

    The G D term appears in the final display of the analysis but not in the
    headline statement; include_gd_term=False gives the strict headline form.
    """
    if mu <= 0.0:
        raise ContractViolationError("mu must be positive")
    if T < 2:
        raise ContractViolationError("bound needs T >= 2")
    val = (8.0 * sigma_max**2 + 4.0 * Sigma_max**2) * np.log(T) / mu
    val += 4.0 * D**2 * L**2 / mu * np.log(1.0 + 16.0 * L / mu)
    if include_gd_term:
        val += G * D
    return float(val)


@dataclass
class VarDiagnostics:
    var_t: float
    d2: float
    exact_sup: bool
    probe: np.ndarray = field(repr=False, default=None)


def diagnostics_var_d2(losses, probe: np.ndarray, feasible: FeasibleSet) -> VarDiagnostics:
    """Gradual-variation diagnostics of a realized loss sequence.

    Var_T = sum_t ||grad f_t(probe) - mean_T(probe)||^2 evaluated at the probe
    point (exact and probe-independent when all gradients are constant in x).
    D_2 = sum_t sup_x ||grad f_t(x) - grad f_{t-1}(x)||^2 with the f_0 := f_1
    convention; the supremum is exact for the affine-gradient families.
    """
    if not losses:
        raise ContractViolationError("diagnostics need at least one loss")
    probe = np.asarray(probe, dtype=float)
    grads = np.stack([l.grad(probe) for l in losses])
    mu_star = grads.mean(axis=0)
    dev = grads - mu_star
    var_t = float(np.sum(dev * dev))

    d2 = 0.0
    cache: dict = {}
    for prev, cur in zip(losses, losses[1:]):
        if _same_curvature(prev.curvature, cur.curvature):
            db = cur.grad_offset - prev.grad_offset
            d2 += float(db @ db)
            continue
        key = (id(prev), id(cur)) if id(prev) < id(cur) else (id(cur), id(prev))
        got = cache.get(key)
        if got is None:
            dA = cur.curvature if cur.curvature is not None else 0.0
            pA = prev.curvature if prev.curvature is not None else 0.0
            got = sup_affine_norm_sq(
                np.asarray(dA) - np.asarray(pA),
                cur.grad_offset - prev.grad_offset,
                feasible,
            )
            cache[key] = got
        d2 += got
    return VarDiagnostics(var_t=var_t, d2=d2, exact_sup=True, probe=probe)
