"""Online convex optimization against stochastically extended adversaries.

The adversary picks a gradient distribution each round (possibly adaptively);
the learner sees one sample. This package provides the adaptive optimistic
FTRL learner for convex smooth expected losses, optimistic FTL on quadratic
surrogates for strongly convex ones, a family of environments spanning the
i.i.d.-to-adversarial range (corruption, random order models, drifts,
switches, a constructive sqrt(T) lower-bound adversary), and a seeded harness
that measures regret against the exact per-round variance and variation of
the chosen distributions.
"""

from .environments import (
    AdversarialScript,
    CorruptedIIDEnvironment,
    IIDEnvironment,
    RademacherLBEnvironment,
    RandomOrderEnvironment,
    RoundOutcome,
    ShiftEnvironment,
    SwitchEnvironment,
    coordinate_quadratic_env,
    coordinate_quadratic_pool,
    uniform_corruption_schedule,
)
from .errors import ConfigurationError, ContractViolationError, ProtocolError
from .geometry import Ball, Box, FeasibleSet, reg_argmin
from .harness import (
    ExperimentConfig,
    ExperimentResult,
    apply_overrides,
    fit_loglog_slope,
    parse_config_file,
    run_experiment,
    run_trial,
    trial_rng,
)
from .learners import OFTL, OFTRL, OGD, ogd_step
from .losses import (
    DiracDist,
    FiniteUniformDist,
    LinearLoss,
    QuadraticLoss,
    ShiftedDist,
    SphereNoiseDist,
    variation,
)
from .metrics import (
    CumAggregates,
    RegretCurves,
    RoundRecord,
    Trace,
    VarDiagnostics,
    best_comparator,
    cum_aggregates,
    diagnostics_var_d2,
    minimize_sum_losses,
    regret_curve,
    theorem1_bound,
    theorem3_bound,
)
from .presets import build_environment, build_learner

__version__ = "0.1.0"

__all__ = [
    "AdversarialScript",
    "Ball",
    "Box",
    "ConfigurationError",
    "ContractViolationError",
    "CorruptedIIDEnvironment",
    "CumAggregates",
    "DiracDist",
    "ExperimentConfig",
    "ExperimentResult",
    "FeasibleSet",
    "FiniteUniformDist",
    "IIDEnvironment",
    "LinearLoss",
    "OFTL",
    "OFTRL",
    "OGD",
    "ProtocolError",
    "QuadraticLoss",
    "RademacherLBEnvironment",
    "RandomOrderEnvironment",
    "RegretCurves",
    "RoundOutcome",
    "RoundRecord",
    "ShiftEnvironment",
    "ShiftedDist",
    "SphereNoiseDist",
    "SwitchEnvironment",
    "Trace",
    "VarDiagnostics",
    "apply_overrides",
    "best_comparator",
    "build_environment",
    "build_learner",
    "coordinate_quadratic_env",
    "coordinate_quadratic_pool",
    "cum_aggregates",
    "diagnostics_var_d2",
    "fit_loglog_slope",
    "minimize_sum_losses",
    "ogd_step",
    "parse_config_file",
    "reg_argmin",
    "regret_curve",
    "run_experiment",
    "run_trial",
    "theorem1_bound",
    "theorem3_bound",
    "trial_rng",
    "uniform_corruption_schedule",
    "variation",
]
