"""Difficulty-based sample weighting with selectable priority modes."""

from .biasvar import (
    BiasVarConfig,
    BiasVarReport,
    check_assumptions,
    check_proposition,
    run_biasvar,
)
from .datagen import (
    DifficultySkew,
    FlipNoise,
    LabeledDataset,
    LongTail,
    MixtureSpec,
    ScenarioSpec,
    UniformNoise,
    apply_flip_noise,
    apply_uniform_noise,
    build_scenario,
    make_difficulty_skewed,
    make_gaussian_mixture,
    make_longtail,
    write_dataset,
)
from .difficulty import (
    DifficultyProfile,
    TargetDensity,
    TauCurve,
    difficulty_from_prob,
    distribution_shift,
    estimate_density,
    infer_mode_from_tau,
    optimal_weights,
    tau_curve,
)
from .errors import (
    AmbiguousCurveError,
    ConfigError,
    DegenerateBatchError,
    SingularInputError,
)
from .schedule import (
    DEFAULT_MODE_PARAMS,
    STABLE_INTERVALS,
    Adaptive,
    Fixed,
    GridSearch,
    ModeSchedule,
    SearchResult,
    SearchRow,
    VariedAtEpoch,
    grid_search,
    mode_at_epoch,
)
from .trainer import (
    ModelParams,
    MomentumSGD,
    TrainConfig,
    TrainReport,
    WeightedSGDClassifier,
    backward_weighted,
    evaluate,
    fit_classifier,
    forward,
    per_sample_loss,
    probe_losses,
    train,
)
from .weighting import (
    ClassBalance,
    FlexW,
    FlexWClassScaled,
    FlexWSPL,
    Focal,
    PriorityMode,
    SPLBinary,
    SPLLog,
    Uniform,
    WeightScheme,
    WeightVector,
    class_balance_weight,
    classify_curve,
    classify_mode,
    flexw_loss_gradient,
    flexw_scaled_weight,
    flexw_spl_weight,
    flexw_stationary_points,
    flexw_weight,
    focal_weight,
    normalize_weights,
    sample_weights,
    spl_binary_weight,
    spl_log_weight,
    weight_curve,
    weighted_loss,
)

__version__ = "0.1.0"
