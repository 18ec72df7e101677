"""Seeded trial execution, multi-seed aggregation, and rate-slope fitting.

A trial is a deterministic function of (config, horizon, seed): each trial
owns a counter-based RNG stream keyed by (seed, T), so results do not depend
on scheduling and permuting the seed list only permutes output rows.
Expectations in the bound statements are approximated by seed averages with
reported standard errors.
"""

from __future__ import annotations

import configparser
import json
import os
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, ContractViolationError
from .metrics import (
    Trace,
    cum_aggregates,
    regret_curve,
    theorem1_bound,
    theorem3_bound,
)
from .presets import EnvBundle, LearnerPlan, build_environment, build_learner

__all__ = [
    "ExperimentConfig",
    "parse_config_file",
    "apply_overrides",
    "trial_rng",
    "run_trial",
    "run_experiment",
    "ExperimentResult",
    "fit_loglog_slope",
]

CSV_COLUMNS = (
    "T",
    "seed",
    "regret_final",
    "sigma_bar",
    "Sigma_bar",
    "bound_thm1",
    "bound_thm3",
    "eta_final",
)

_RUN_KEYS = {
    "horizons",
    "seeds",
    "out",
    "debug",
    "slope_points",
    "sweep_min",
    "sweep_max",
    "sweep_points",
}


@dataclass
class ExperimentConfig:
    env: dict
    learner: dict
    horizons: list[int]
    seeds: list[int]
    out_dir: str | None = None
    debug: bool = False
    worst_case: bool = False
    slope_points: int = 3
    run_extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.horizons:
            raise ConfigurationError("at least one horizon is required")
        if any(t <= 0 for t in self.horizons):
            raise ConfigurationError("horizons must be positive")
        if any(b <= a for a, b in zip(self.horizons, self.horizons[1:])):
            raise ConfigurationError("horizons must be strictly increasing")
        if not self.seeds:
            raise ConfigurationError("at least one seed is required")
        if len(set(self.seeds)) != len(self.seeds):
            raise ConfigurationError("seeds must be distinct")


def _parse_int_list(text: str) -> list[int]:
    text = text.strip()
    if ":" in text and "," not in text:
        parts = [int(p) for p in text.split(":")]
        if len(parts) == 2:
            return list(range(parts[0], parts[1]))
        raise ConfigurationError(f"bad range syntax {text!r}, expected start:stop")
    return [int(p) for p in text.split(",") if p.strip() != ""]


def parse_config_file(path: str) -> ExperimentConfig:
    """Read an INI-style config with [env], [learner] and [run] sections."""
    if not os.path.exists(path):
        raise ConfigurationError(f"config file not found: {path}")
    cp = configparser.ConfigParser()
    cp.read(path)
    for section in cp.sections():
        if section not in ("env", "learner", "run"):
            raise ConfigurationError(f"unknown config section '[{section}]'")
    env = dict(cp["env"]) if cp.has_section("env") else {}
    learner = dict(cp["learner"]) if cp.has_section("learner") else {}
    run = dict(cp["run"]) if cp.has_section("run") else {}
    return _config_from_sections(env, learner, run)


def _config_from_sections(env: dict, learner: dict, run: dict) -> ExperimentConfig:
    for key in run:
        if key not in _RUN_KEYS:
            raise ConfigurationError(f"unknown key 'run.{key}'")
    horizons = _parse_int_list(run.get("horizons", "1000"))
    seeds = _parse_int_list(run.get("seeds", "0:20"))
    if "SEA_OCO_SEED" in os.environ:
        base = int(os.environ["SEA_OCO_SEED"])
        seeds = list(range(base, base + len(seeds)))
    extra = {
        k: run[k] for k in ("sweep_min", "sweep_max", "sweep_points") if k in run
    }
    return ExperimentConfig(
        env=env,
        learner=learner,
        horizons=horizons,
        seeds=seeds,
        out_dir=run.get("out"),
        debug=str(run.get("debug", "false")).lower() in ("1", "true", "yes"),
        slope_points=int(run.get("slope_points", 3)),
        run_extra=extra,
    )


def apply_overrides(cfg: ExperimentConfig, overrides: list[str]) -> ExperimentConfig:
    """Apply dotted-path key=value overrides (last one wins)."""
    env = dict(cfg.env)
    learner = dict(cfg.learner)
    run: dict = {
        "horizons": ",".join(str(t) for t in cfg.horizons),
        "seeds": ",".join(str(s) for s in cfg.seeds),
        "debug": str(cfg.debug).lower(),
        "slope_points": str(cfg.slope_points),
        **cfg.run_extra,
    }
    if cfg.out_dir is not None:
        run["out"] = cfg.out_dir
    for item in overrides:
        if "=" not in item:
            raise ConfigurationError(f"override {item!r} is not of the form section.key=value")
        path, value = item.split("=", 1)
        if "." not in path:
            raise ConfigurationError(f"override key {path!r} must be section.key")
        section, key = path.split(".", 1)
        target = {"env": env, "learner": learner, "run": run}.get(section)
        if target is None:
            raise ConfigurationError(f"unknown override section '{section}'")
        target[key] = value
    out = _config_from_sections(env, learner, run)
    out.worst_case = cfg.worst_case
    return out


def trial_rng(seed: int, T: int) -> np.random.Generator:
    """Counter-based stream keyed by (seed, T); rounds consume it sequentially."""
    key = np.array([np.uint64(seed), np.uint64(T)], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def run_trial(
    cfg: ExperimentConfig,
    T: int,
    seed: int,
    bundle: EnvBundle | None = None,
    plan: LearnerPlan | None = None,
) -> Trace:
    """One seeded trial: predict -> adversary picks D_t -> sample -> observe."""
    if bundle is None:
        bundle = build_environment(cfg.env)
    if plan is None:
        plan = build_learner(cfg.learner, bundle.feasible, bundle.info, cfg.worst_case)
    rng = trial_rng(seed, T)
    env = bundle.factory(rng)
    learner = plan.factory()
    feasible = bundle.feasible
    g_cap = bundle.info.G * (1.0 + 1e-9) + 1e-9

    env_desc = {
        "name": env.name,
        "t1_variation_convention": env.t1_variation_convention,
        **bundle.info.params,
    }
    trace = Trace(T, feasible.dim, env_desc, dict(plan.params), seed)
    X, Gm = trace.x, trace.g
    eta_col, sig_col, var_col, val_col = (
        trace.eta,
        trace.sigma_sq,
        trace.variation_sq,
        trace.loss_value,
    )
    debug = cfg.debug
    for t in range(1, T + 1):
        x_t = learner.predict()
        eta_t = learner.eta
        outcome = env.step(t, x_t)
        loss = outcome.loss
        g_t = loss.grad(x_t)
        if debug:
            assert float(np.linalg.norm(g_t)) <= g_cap, "sampled gradient exceeds G"
        learner.observe(g_t)
        i = t - 1
        X[i] = x_t
        Gm[i] = g_t
        eta_col[i] = eta_t
        sig_col[i] = outcome.sigma_sq
        var_col[i] = outcome.variation_sq
        val_col[i] = loss.value(x_t)
        trace.losses[i] = loss
    return trace


def fit_loglog_slope(Ts, values) -> float:
    """OLS slope of log(values) on log(Ts); needs >= 3 strictly positive points."""
    Ts = np.asarray(Ts, dtype=float)
    values = np.asarray(values, dtype=float)
    if Ts.size < 3 or values.size != Ts.size:
        raise ContractViolationError("slope fit needs at least 3 matching points")
    if np.any(values <= 0.0) or np.any(Ts <= 0.0):
        raise ContractViolationError("slope fit requires positive values and horizons")
    return float(np.polyfit(np.log(Ts), np.log(values), 1)[0])


@dataclass
class ExperimentResult:
    config: dict
    rows: list[dict]
    aggregates: list[dict]
    slopes: dict
    checks: dict
    csv_path: str | None = None
    json_path: str | None = None

    def aggregate_for(self, T: int) -> dict:
        for agg in self.aggregates:
            if agg["T"] == T:
                return agg
        raise KeyError(f"no aggregate for T={T}")


def run_experiment(cfg: ExperimentConfig) -> ExperimentResult:
    """Run every (T, seed) trial, aggregate, and optionally write CSV + JSON."""
    bundle = build_environment(cfg.env)
    plan = build_learner(cfg.learner, bundle.feasible, bundle.info, cfg.worst_case)
    info = bundle.info
    D = bundle.feasible.diameter
    nu_for_bound = plan.params.get("nu", info.L * D**2 + D * info.G**2)

    rows: list[dict] = []
    aggregates: list[dict] = []
    eta_monotone = True
    iterates_feasible = True

    for T in cfg.horizons:
        lin_finals, fn_finals, eta_finals = [], [], []
        sigma_cums, Sigma_cums = [], []
        sigma_rounds = np.zeros(T)
        var_rounds = np.zeros(T)
        for seed in cfg.seeds:
            try:
                trace = run_trial(cfg, T, seed, bundle=bundle, plan=plan)
            except Exception as exc:
                raise RuntimeError(
                    f"trial failed (env={info.name}, learner={plan.params['name']}, "
                    f"T={T}, seed={seed}): {exc}"
                ) from exc
            curves = regret_curve(trace, bundle.feasible)
            agg = cum_aggregates(trace)
            if plan.params["name"] == "oftrl" and T >= 2:
                eta_monotone &= bool(np.all(np.diff(trace.eta) <= 1e-12))
            iterates_feasible &= _all_feasible(trace, bundle.feasible)
            sigma_rounds += trace.sigma_sq
            var_rounds += trace.variation_sq
            sigma_cums.append(agg.sigma_sq_cum)
            Sigma_cums.append(agg.Sigma_sq_cum)
            lin_finals.append(curves.linear_final)
            fn_finals.append(curves.function_final)
            eta_finals.append(float(trace.eta[-1]) if T > 0 else 0.0)
            bound1 = theorem1_bound(
                D, info.G, info.L, nu_for_bound, agg.sigma_bar, agg.Sigma_bar, T
            )
            bound3 = (
                theorem3_bound(info.mu, info.L, D, info.G, agg.sigma_max, agg.Sigma_max, T)
                if info.mu > 0.0 and T >= 2
                else float("nan")
            )
            rows.append(
                {
                    "T": T,
                    "seed": seed,
                    "regret_final": curves.linear_final,
                    "sigma_bar": agg.sigma_bar,
                    "Sigma_bar": agg.Sigma_bar,
                    "bound_thm1": bound1,
                    "bound_thm3": bound3,
                    "eta_final": eta_finals[-1],
                }
            )
        n = len(cfg.seeds)
        sigma_rounds /= n
        var_rounds /= n
        sigma_bar_agg = float(np.sqrt(np.mean(sigma_cums) / T))
        Sigma_bar_agg = float(np.sqrt(np.mean(Sigma_cums) / T))
        sigma_max_agg = float(np.sqrt(sigma_rounds.max()))
        Sigma_max_agg = float(np.sqrt(var_rounds.max()))
        agg_entry = {
            "T": T,
            "n_seeds": n,
            "regret_mean": float(np.mean(lin_finals)),
            "regret_stderr": _stderr(lin_finals),
            "fn_regret_mean": float(np.mean(fn_finals)),
            "fn_regret_stderr": _stderr(fn_finals),
            "sigma_bar": sigma_bar_agg,
            "Sigma_bar": Sigma_bar_agg,
            "sigma_max": sigma_max_agg,
            "Sigma_max": Sigma_max_agg,
            "bound_thm1": theorem1_bound(
                D, info.G, info.L, nu_for_bound, sigma_bar_agg, Sigma_bar_agg, T
            ),
            "bound_thm3": (
                theorem3_bound(info.mu, info.L, D, info.G, sigma_max_agg, Sigma_max_agg, T)
                if info.mu > 0.0 and T >= 2
                else float("nan")
            ),
            "eta_final_mean": float(np.mean(eta_finals)),
            "warn_single_seed": n == 1,
        }
        aggregates.append(agg_entry)

    slopes = _fit_slopes(cfg, aggregates)
    checks = {
        "eta_monotone": bool(eta_monotone),
        "iterates_feasible": bool(iterates_feasible),
        "bound_thm1_dominates": all(
            a["regret_mean"] <= a["bound_thm1"] for a in aggregates
        ),
    }
    if info.mu > 0.0:
        checks["bound_thm3_dominates"] = all(
            a["fn_regret_mean"] <= a["bound_thm3"] for a in aggregates if a["T"] >= 2
        )

    config_echo = {
        "env": {k: str(v) for k, v in cfg.env.items()},
        "learner": {k: str(v) for k, v in cfg.learner.items()},
        "resolved_learner": {k: str(v) for k, v in plan.params.items()},
        "horizons": cfg.horizons,
        "seeds": cfg.seeds,
        "worst_case": cfg.worst_case,
        "derived": {"D": D, "G": info.G, "L": info.L, "mu": info.mu},
    }
    result = ExperimentResult(config_echo, rows, aggregates, slopes, checks)
    if cfg.out_dir:
        _write_outputs(result, cfg.out_dir, info.name, plan.params["name"])
    return result


def _all_feasible(trace: Trace, feasible) -> bool:
    from .geometry import Ball

    if trace.T == 0:
        return True
    if isinstance(feasible, Ball):
        norms = np.linalg.norm(trace.x - feasible.center, axis=1)
        return bool(np.all(norms <= feasible.radius + 1e-12))
    return bool(
        np.all(trace.x >= feasible.lo - 1e-12) and np.all(trace.x <= feasible.hi + 1e-12)
    )


def _stderr(values) -> float:
    if len(values) < 2:
        return 0.0
    return float(np.std(values, ddof=1) / np.sqrt(len(values)))


def _fit_slopes(cfg: ExperimentConfig, aggregates: list[dict]) -> dict:
    slopes: dict = {}
    k = max(cfg.slope_points, 3)
    tail = aggregates[-k:]
    for key, out_name in (("regret_mean", "regret"), ("fn_regret_mean", "fn_regret")):
        vals = [a[key] for a in tail]
        Ts = [a["T"] for a in tail]
        if len(vals) >= 3 and all(v > 0 for v in vals):
            slopes[out_name] = fit_loglog_slope(Ts, vals)
        else:
            slopes[out_name] = None
    return slopes


def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _write_outputs(result: ExperimentResult, out_dir: str, env_name: str, learner_name: str):
    os.makedirs(out_dir, exist_ok=True)
    stem = f"{env_name}_{learner_name}"
    csv_path = os.path.join(out_dir, f"{stem}.csv")
    with open(csv_path, "w") as fh:
        fh.write(",".join(CSV_COLUMNS) + "\n")
        for row in result.rows:
            fh.write(",".join(_fmt(row[c]) for c in CSV_COLUMNS) + "\n")
    json_path = os.path.join(out_dir, f"{stem}.json")
    with open(json_path, "w") as fh:
        json.dump(
            {
                "config": result.config,
                "aggregates": result.aggregates,
                "slopes": result.slopes,
                "checks": result.checks,
            },
            fh,
            indent=2,
            sort_keys=True,
            default=float,
        )
        fh.write("\n")
    result.csv_path = csv_path
    result.json_path = json_path
