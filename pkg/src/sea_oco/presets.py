"""Named environment and learner presets and their parameter grammar.

Presets turn flat string-keyed parameter mappings (from config files or CLI
overrides) into per-trial factories plus the derived constants (gradient
bound G, smoothness L, strong convexity mu) that the bound evaluators and
step-size tunings consume. Unknown keys are rejected by name.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .environments import (
    AdversarialScript,
    CorruptedIIDEnvironment,
    Environment,
    IIDEnvironment,
    RademacherLBEnvironment,
    RandomOrderEnvironment,
    ShiftEnvironment,
    SwitchEnvironment,
    coordinate_quadratic_env,
    uniform_corruption_schedule,
)
from .errors import ConfigurationError
from .geometry import Ball, Box, FeasibleSet
from .learners import OFTL, OFTRL, OGD
from .losses import FiniteUniformDist, LinearLoss, QuadraticLoss, SphereNoiseDist

__all__ = [
    "EnvInfo",
    "EnvBundle",
    "LearnerPlan",
    "build_environment",
    "build_learner",
    "ENV_PRESETS",
    "LEARNER_PRESETS",
    "pool_rng",
]

_POOL_LANE = np.uint64(2**63)  # keeps pool-construction streams disjoint from trial streams


def pool_rng(pool_seed: int) -> np.random.Generator:
    return np.random.Generator(
        np.random.Philox(key=np.array([np.uint64(pool_seed), _POOL_LANE], dtype=np.uint64))
    )


@dataclass
class EnvInfo:
    name: str
    G: float
    L: float
    mu: float
    sigma: float
    t1_variation_convention: str
    params: dict = field(default_factory=dict)


@dataclass
class EnvBundle:
    factory: Callable[[np.random.Generator], Environment]
    feasible: FeasibleSet
    info: EnvInfo


@dataclass
class LearnerPlan:
    factory: Callable[[], object]
    params: dict


def _parse_float(params, key, default=None):
    if key not in params:
        if default is None:
            raise ConfigurationError(f"missing required key '{key}'")
        return default
    return float(params[key])


def _parse_int(params, key, default=None):
    if key not in params:
        if default is None:
            raise ConfigurationError(f"missing required key '{key}'")
        return default
    return int(params[key])


def _parse_vector(value, dim=None) -> np.ndarray:
    if isinstance(value, (list, tuple, np.ndarray)):
        v = np.asarray(value, dtype=float)
    else:
        v = np.array([float(s) for s in str(value).split(",") if s.strip() != ""])
    if dim is not None and v.size != dim:
        raise ConfigurationError(f"vector {value!r} has size {v.size}, expected {dim}")
    return v


_COMMON_ENV_KEYS = {"preset", "dim", "set", "radius", "center", "lo", "hi"}

ENV_PRESETS = {
    "adversarial": {"script", "g_scale"},
    "iid": {"base", "grad", "curvature", "offset", "sigma", "g_bound"},
    "corrupted": {"grad", "sigma", "budget", "gamma", "corruption_axis"},
    "rom": {"n", "pool_radius", "pool_seed"},
    "multipass_rom": {"n", "pool_radius", "pool_seed", "passes"},
    "shift": {"eps", "sigma", "mean_radius"},
    "switch": {"n_dists", "switch_rounds", "sigma", "mean_scale"},
    "lb_rademacher": {"a", "b", "g_scale"},
    "coord_quadratic": set(),
}

LEARNER_PRESETS = {
    "oftrl": {"preset", "nu", "regularizer"},
    "oftl": {"preset", "mu"},
    "ogd": {"preset", "step_scale", "step_schedule"},
}


def _build_feasible(params: dict, dim: int) -> FeasibleSet:
    kind = str(params.get("set", "ball")).lower()
    if kind == "ball":
        radius = _parse_float(params, "radius", 1.0)
        center = (
            _parse_vector(params["center"], dim) if "center" in params else np.zeros(dim)
        )
        return Ball(center, radius)
    if kind == "box":
        lo = _parse_vector(params.get("lo", "-1" + ",-1" * (dim - 1)), dim)
        hi = _parse_vector(params.get("hi", "1" + ",1" * (dim - 1)), dim)
        return Box(lo, hi)
    raise ConfigurationError(f"unknown feasible set kind '{kind}'")


def _parse_curvature(value, dim: int) -> np.ndarray:
    spec = str(value).strip().lower()
    if spec == "identity":
        return np.eye(dim)
    if spec.startswith("scaled_identity:"):
        return float(spec.split(":", 1)[1]) * np.eye(dim)
    if spec.startswith("diag:"):
        return np.diag(_parse_vector(spec.split(":", 1)[1], dim))
    raise ConfigurationError(f"unknown curvature spec '{value}'")


def build_environment(params: dict) -> EnvBundle:
    """Resolve an environment preset into a per-trial factory plus constants."""
    params = dict(params)
    preset = str(params.get("preset", "")).lower()
    if preset not in ENV_PRESETS:
        raise ConfigurationError(f"unknown environment preset '{preset}'")
    allowed = _COMMON_ENV_KEYS | ENV_PRESETS[preset]
    for key in params:
        if key not in allowed:
            raise ConfigurationError(f"unknown key 'env.{key}' for preset '{preset}'")
    builder = {
        "adversarial": _build_adversarial,
        "iid": _build_iid,
        "corrupted": _build_corrupted,
        "rom": _build_rom,
        "multipass_rom": _build_rom,
        "shift": _build_shift,
        "switch": _build_switch,
        "lb_rademacher": _build_lb_rademacher,
        "coord_quadratic": _build_coord_quadratic,
    }[preset]
    return builder(params)


def _echo(params: dict) -> dict:
    return {k: str(v) for k, v in params.items()}


def _build_adversarial(params: dict) -> EnvBundle:
    dim = _parse_int(params, "dim", 1)
    feasible = _build_feasible(params, dim)
    script = str(params.get("script", "sign_flip")).lower()
    g_scale = _parse_float(params, "g_scale", 1.0)
    if script != "sign_flip":
        raise ConfigurationError(f"unknown adversarial script '{script}'")
    base = np.zeros(dim)
    base[0] = g_scale
    plus, minus = LinearLoss(base), LinearLoss(-base)

    def rule(t: int) -> LinearLoss:
        return plus if t % 2 == 1 else minus

    def factory(rng: np.random.Generator) -> Environment:
        return AdversarialScript(rule, feasible)

    info = EnvInfo(
        name="adversarial",
        G=g_scale,
        L=0.0,
        mu=0.0,
        sigma=0.0,
        t1_variation_convention="F0=F1",
        params=_echo(params),
    )
    return EnvBundle(factory, feasible, info)


def _iid_dist(params: dict, dim: int, feasible: FeasibleSet):
    base_kind = str(params.get("base", "linear")).lower()
    sigma = _parse_float(params, "sigma", 0.0)
    if base_kind == "linear":
        g = _parse_vector(params.get("grad", "1" + ",0" * (dim - 1)), dim)
        base = LinearLoss(g)
        L_val, mu_val = 0.0, 0.0
    elif base_kind == "quadratic":
        A = _parse_curvature(params.get("curvature", "identity"), dim)
        b = _parse_vector(params.get("offset", "0" + ",0" * (dim - 1)), dim)
        base = QuadraticLoss(A, b)
        L_val, mu_val = base.lam_max, base.lam_min
    else:
        raise ConfigurationError(f"unknown base loss kind '{base_kind}'")
    dist = SphereNoiseDist(base, sigma) if sigma > 0.0 else base_as_dirac(base)
    G = base.sup_grad_norm(feasible) + sigma
    return dist, G, L_val, mu_val, sigma


def base_as_dirac(loss):
    from .losses import DiracDist

    return DiracDist(loss)


def _build_iid(params: dict) -> EnvBundle:
    dim = _parse_int(params, "dim", 2)
    feasible = _build_feasible(params, dim)
    dist, G, L_val, mu_val, sigma = _iid_dist(params, dim, feasible)
    if "g_bound" in params:
        # declared a.s. gradient bound; any value above the tight one is valid
        g_bound = float(params["g_bound"])
        if g_bound < G * (1.0 - 1e-12):
            raise ConfigurationError(
                f"g_bound={g_bound} is below the actual gradient bound {G:.6g}"
            )
        G = g_bound

    def factory(rng: np.random.Generator) -> Environment:
        return IIDEnvironment(dist, feasible, rng)

    info = EnvInfo("iid", G, L_val, mu_val, sigma, "F0=F1", _echo(params))
    return EnvBundle(factory, feasible, info)


def _build_corrupted(params: dict) -> EnvBundle:
    dim = _parse_int(params, "dim", 2)
    feasible = _build_feasible(params, dim)
    sigma = _parse_float(params, "sigma", 1.0)
    g = _parse_vector(params.get("grad", "1" + ",0" * (dim - 1)), dim)
    base = SphereNoiseDist(LinearLoss(g), sigma)
    budget = _parse_float(params, "budget")
    gamma = _parse_float(params, "gamma", 1.0)
    # default corruption axis is orthogonal to the default base gradient: near
    # the pinned optimum it moves the iterate along the boundary tangent, where
    # projection cannot absorb it
    axis = _parse_int(params, "corruption_axis", 1 if dim >= 2 else 0)
    direction = np.zeros(dim)
    direction[axis] = 1.0
    schedule = (
        uniform_corruption_schedule(budget, gamma, direction) if budget > 0.0 else []
    )
    max_corruption = max((float(np.linalg.norm(c)) for c in schedule), default=0.0)

    def factory(rng: np.random.Generator) -> Environment:
        return CorruptedIIDEnvironment(base, schedule, budget, feasible, rng)

    info = EnvInfo(
        name="corrupted",
        G=float(np.linalg.norm(g)) + sigma + max_corruption,
        L=0.0,
        mu=0.0,
        sigma=sigma,
        t1_variation_convention="c0=0",
        params=_echo(params),
    )
    return EnvBundle(factory, feasible, info)


def _linear_pool(n: int, dim: int, pool_radius: float, pool_seed: int) -> list[LinearLoss]:
    rng = pool_rng(pool_seed)
    g = rng.standard_normal((n, dim))
    g *= pool_radius / np.linalg.norm(g, axis=1, keepdims=True)
    return [LinearLoss(row) for row in g]


def _build_rom(params: dict) -> EnvBundle:
    dim = _parse_int(params, "dim", 2)
    feasible = _build_feasible(params, dim)
    n = _parse_int(params, "n")
    pool_radius = _parse_float(params, "pool_radius", 1.0)
    pool_seed = _parse_int(params, "pool_seed", 0)
    passes = _parse_int(params, "passes", 1) if "passes" in params else 1
    pool = _linear_pool(n, dim, pool_radius, pool_seed)

    def factory(rng: np.random.Generator) -> Environment:
        return RandomOrderEnvironment(pool, feasible, rng, passes=passes)

    name = "multipass_rom" if passes > 1 else "rom"
    info = EnvInfo(name, pool_radius, 0.0, 0.0, 0.0, "F0=F1", _echo(params))
    return EnvBundle(factory, feasible, info)


def _build_shift(params: dict) -> EnvBundle:
    dim = _parse_int(params, "dim", 2)
    feasible = _build_feasible(params, dim)
    eps = _parse_float(params, "eps")
    sigma = _parse_float(params, "sigma", 0.0)
    mean_radius = _parse_float(params, "mean_radius", 1.0)

    def factory(rng: np.random.Generator) -> Environment:
        return ShiftEnvironment(mean_radius, eps, sigma, dim, feasible, rng)

    info = EnvInfo("shift", mean_radius + sigma, 0.0, 0.0, sigma, "F0=F1", _echo(params))
    return EnvBundle(factory, feasible, info)


def _build_switch(params: dict) -> EnvBundle:
    dim = _parse_int(params, "dim", 2)
    feasible = _build_feasible(params, dim)
    n_dists = _parse_int(params, "n_dists", 2)
    if n_dists < 2 or n_dists > dim * 2:
        raise ConfigurationError("switch preset needs 2 <= n_dists <= 2 * dim")
    sigma = _parse_float(params, "sigma", 0.0)
    mean_scale = _parse_float(params, "mean_scale", 1.0)
    if "switch_rounds" not in params:
        raise ConfigurationError("missing required key 'switch_rounds'")
    rounds = [int(v) for v in str(params["switch_rounds"]).split(",")]
    if len(rounds) != n_dists - 1:
        raise ConfigurationError("need exactly n_dists - 1 switch rounds")
    dists = []
    for k in range(n_dists):
        mean = np.zeros(dim)
        mean[k % dim] = mean_scale * (-1.0) ** (k // dim)
        base = LinearLoss(mean)
        dists.append(SphereNoiseDist(base, sigma) if sigma > 0.0 else base_as_dirac(base))

    def factory(rng: np.random.Generator) -> Environment:
        return SwitchEnvironment(dists, rounds, feasible, rng)

    info = EnvInfo("switch", mean_scale + sigma, 0.0, 0.0, sigma, "F0=F1", _echo(params))
    return EnvBundle(factory, feasible, info)


def _build_lb_rademacher(params: dict) -> EnvBundle:
    a = _parse_float(params, "a", 1.0)
    b = _parse_float(params, "b", 2.0)
    g_scale = _parse_float(params, "g_scale", 1.0)
    feasible = Box([a], [b])

    def factory(rng: np.random.Generator) -> Environment:
        return RademacherLBEnvironment(a, b, g_scale, feasible, rng)

    # realized gradients never exceed g_scale / 2 on [a, b]
    info = EnvInfo(
        name="lb_rademacher",
        G=0.5 * g_scale,
        L=0.0,
        mu=0.0,
        sigma=0.0,
        t1_variation_convention="F0=F1",
        params=_echo(params),
    )
    return EnvBundle(factory, feasible, info)


def _build_coord_quadratic(params: dict) -> EnvBundle:
    dim = _parse_int(params, "dim", 4)
    feasible = Ball(np.zeros(dim), 1.0)

    def factory(rng: np.random.Generator) -> Environment:
        return coordinate_quadratic_env(dim, feasible, rng)

    info = EnvInfo(
        name="coord_quadratic",
        G=1.0,
        L=1.0 / dim,
        mu=1.0 / dim,
        sigma=0.0,
        t1_variation_convention="F0=F1",
        params=_echo(params),
    )
    return EnvBundle(factory, feasible, info)


def build_learner(
    params: dict, feasible: FeasibleSet, env_info: EnvInfo, worst_case: bool = False
) -> LearnerPlan:
    """Resolve a learner preset against the environment's constants."""
    params = dict(params)
    preset = str(params.get("preset", "")).lower()
    if preset not in LEARNER_PRESETS:
        raise ConfigurationError(f"unknown learner preset '{preset}'")
    for key in params:
        if key not in LEARNER_PRESETS[preset]:
            raise ConfigurationError(f"unknown key 'learner.{key}' for preset '{preset}'")
    D = feasible.diameter
    G, L = env_info.G, env_info.L

    if preset == "oftrl":
        nu_raw = str(params.get("nu", "auto")).lower()
        if worst_case or nu_raw == "worst_case":
            nu = 2.0 * D * G
        elif nu_raw == "auto":
            nu = L * D**2 + D * G**2
        else:
            nu = float(nu_raw)
        regularizer = str(params.get("regularizer", "display"))
        return LearnerPlan(
            factory=lambda: OFTRL(feasible, nu, regularizer=regularizer),
            params={"name": "oftrl", "nu": nu, "regularizer": regularizer},
        )

    if preset == "oftl":
        mu_raw = str(params.get("mu", "auto")).lower()
        mu = env_info.mu if mu_raw == "auto" else float(mu_raw)
        if mu <= 0.0:
            raise ConfigurationError(
                "oftl requires strong convexity: environment has mu = "
                f"{env_info.mu}; set learner.mu explicitly or pick a curved environment"
            )
        return LearnerPlan(
            factory=lambda: OFTL(feasible, mu), params={"name": "oftl", "mu": mu}
        )

    # ogd
    scale_raw = str(params.get("step_scale", "auto")).lower()
    if scale_raw == "auto":
        if G <= 0.0:
            raise ConfigurationError("ogd auto step needs a positive gradient bound")
        scale = D / G
    else:
        scale = float(scale_raw)
    schedule = str(params.get("step_schedule", "inv_sqrt"))
    return LearnerPlan(
        factory=lambda: OGD(feasible, scale, schedule=schedule),
        params={"name": "ogd", "step_scale": scale, "schedule": schedule},
    )
