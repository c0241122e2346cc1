"""Difficulty-based sample weight functions and priority-mode analysis.

Everything in this module is a pure function of its arguments.  Difficulty
is the standard loss-based proxy d = 1 - p, where p is the predicted
probability of the correct class.  The central family is the flexible
weight function

    w(d; gamma, alpha) = (d + alpha)^gamma * exp(-gamma * (d + alpha))

whose two hyper-parameters select any of four priority modes: easy-first,
medium-first, hard-first, or two-ends-first.  Classic comparators (focal,
self-paced, class-balance) are provided with the same conventions.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from ._validation import (
    PROB_EPS,
    check_nonnegative,
    check_unit_interval,
    clamp_probability,
    scalar_like,
)
from .errors import AmbiguousCurveError, DegenerateBatchError, SingularInputError


class PriorityMode(enum.Enum):
    """Which difficulty band receives the largest weights."""

    EASY_FIRST = "easy_first"
    MEDIUM_FIRST = "medium_first"
    HARD_FIRST = "hard_first"
    TWO_ENDS_FIRST = "two_ends_first"
    FLAT = "flat"

    def __str__(self) -> str:  # nicer CLI / report output
        return self.value


# ---------------------------------------------------------------------------
# Weighting scheme records (tagged union)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FlexW:
    """Flexible weight (d + alpha)^gamma * exp(-gamma * (d + alpha)).

    gamma is the shape exponent, alpha >= 0 the horizontal shift.  gamma = 0
    gives uniform weights; the sign of gamma and the size of alpha select
    the priority mode.
    """

    gamma: float
    alpha: float = 0.0

    def __post_init__(self):
        if self.alpha < 0:
            raise ValueError("alpha must be >= 0 (guarantees nonnegative weights)")


@dataclass(frozen=True)
class FlexWSPL:
    """FlexW combined with a self-paced cutoff: weight 0 whenever loss > lam."""

    gamma: float
    alpha: float = 0.0
    lam: float = 1.0

    def __post_init__(self):
        if self.alpha < 0:
            raise ValueError("alpha must be >= 0")
        if self.lam <= 0:
            raise ValueError("lam must be > 0")


@dataclass(frozen=True)
class FlexWClassScaled:
    """FlexW multiplied by a per-class positive scale c_y."""

    gamma: float
    alpha: float = 0.0
    class_scales: tuple[float, ...] = field(default_factory=tuple)

    def __post_init__(self):
        if self.alpha < 0:
            raise ValueError("alpha must be >= 0")
        object.__setattr__(self, "class_scales", tuple(float(c) for c in self.class_scales))
        if not self.class_scales:
            raise ValueError("class_scales must be nonempty")
        if any(c <= 0 for c in self.class_scales):
            raise ValueError("all class scales must be strictly positive")


@dataclass(frozen=True)
class Focal:
    """Weight (1 - p)^gamma: hard-first for gamma > 0, easy-first for gamma < 0."""

    gamma: float


@dataclass(frozen=True)
class SPLBinary:
    """Self-paced binary weight: 1 when loss < lam, else 0."""

    lam: float

    def __post_init__(self):
        if self.lam <= 0:
            raise ValueError("lam must be > 0")


@dataclass(frozen=True)
class SPLLog:
    """Self-paced soft weight with log regularizer, xi = 1 - lam in (0, 1)."""

    lam: float

    def __post_init__(self):
        if not 0.0 < self.lam < 1.0:
            raise ValueError("lam must lie in (0, 1) so that xi = 1 - lam is in (0, 1)")


@dataclass(frozen=True)
class ClassBalance:
    """Per-class weight (1 - beta) / (1 - beta^{n_c}), beta in [0, 1)."""

    beta: float

    def __post_init__(self):
        if not 0.0 <= self.beta < 1.0:
            raise ValueError("beta must lie in [0, 1)")


@dataclass(frozen=True)
class Uniform:
    """Every sample gets weight 1."""


WeightScheme = (
    FlexW
    | FlexWSPL
    | FlexWClassScaled
    | Focal
    | SPLBinary
    | SPLLog
    | ClassBalance
    | Uniform
)

# Schemes whose weight depends on the class label rather than the sample alone.
CLASS_LEVEL_SCHEMES = (ClassBalance, FlexWClassScaled)


@dataclass(frozen=True)
class WeightVector:
    """A batch of nonnegative sample weights.

    ``normalized`` records whether the entries have been rescaled to mean 1.
    """

    weights: np.ndarray
    normalized: bool = False

    def __post_init__(self):
        arr = np.asarray(self.weights, dtype=float)
        if arr.ndim != 1:
            raise ValueError("weights must be a 1-d vector")
        check_nonnegative(arr, "weights")
        object.__setattr__(self, "weights", arr)

    def __len__(self) -> int:
        return self.weights.size


def _weight_values(weights) -> np.ndarray:
    if isinstance(weights, WeightVector):
        return weights.weights
    arr = np.asarray(weights, dtype=float)
    check_nonnegative(arr, "weights")
    return arr


# ---------------------------------------------------------------------------
# Weight functions
# ---------------------------------------------------------------------------


def flexw_weight(d, gamma: float, alpha: float):
    """Evaluate (d + alpha)^gamma * exp(-gamma * (d + alpha)) for d in [0, 1].

    Raises SingularInputError when d + alpha = 0 with gamma < 0, where the
    power term has a pole.  gamma = 0 returns 1 for every input.
    """
    if alpha < 0:
        raise ValueError("alpha must be >= 0")
    d_arr = check_unit_interval(d, "d")
    t = d_arr + alpha
    if gamma < 0 and np.any(t == 0.0):
        raise SingularInputError(
            "flexw_weight is singular at d + alpha = 0 with gamma < 0"
        )
    w = np.power(t, gamma) * np.exp(-gamma * t)
    return scalar_like(w, d)


def flexw_stationary_points(gamma: float, alpha: float) -> list[float] | None:
    """Zeros of the derivative of t^gamma * exp(-gamma t) on t in [alpha, 1 + alpha].

    The derivative factors as gamma * t^(gamma-1) * exp(-gamma t) * (1 - t),
    so t = 1 is stationary whenever the interval reaches it, and t = 0 only
    when alpha = 0 and gamma > 1.  Returns None for gamma = 0, where the
    curve is constant and every point is trivially stationary.
    """
    if alpha < 0:
        raise ValueError("alpha must be >= 0")
    if gamma == 0:
        return None
    points = []
    if alpha == 0.0 and gamma > 1.0:
        points.append(0.0)
    if alpha <= 1.0:
        points.append(1.0)
    return points


def focal_weight(p, gamma: float):
    """Focal-style weight (1 - p)^gamma for p in (0, 1].

    p = 1 is rejected for gamma < 0 (the weight diverges there).
    """
    p_arr = np.asarray(p, dtype=float)
    if np.any(p_arr <= 0.0) or np.any(p_arr > 1.0):
        raise ValueError("p must lie in (0, 1]")
    if gamma < 0 and np.any(p_arr == 1.0):
        raise SingularInputError("focal_weight diverges at p = 1 with gamma < 0")
    w = np.power(1.0 - p_arr, gamma)
    return scalar_like(w, p)


def spl_binary_weight(l, lam: float):
    """Hard self-paced weight: 1 when l < lam, 0 otherwise (ties excluded).

    This is the minimizer of sum(w_i * l_i) - lam * sum(w_i) over w in [0,1]^n.
    """
    if lam <= 0:
        raise ValueError("lam must be > 0")
    l_arr = check_nonnegative(l, "l")
    w = (l_arr < lam).astype(float)
    return scalar_like(w, l)


def spl_log_weight(l, lam: float):
    """Soft self-paced weight minimizing w*l + (xi*w - xi^w / log(xi)), xi = 1 - lam.

    The first-order condition gives xi^w = l + xi, i.e.
    w* = log(l + xi) / log(xi), clipped to [0, 1]; the weight hits 0 exactly
    at l = lam and stays 0 beyond.
    """
    if not 0.0 < lam < 1.0:
        raise ValueError("lam must lie in (0, 1)")
    l_arr = check_nonnegative(l, "l")
    xi = 1.0 - lam
    with np.errstate(divide="ignore", invalid="ignore"):
        w = np.log(l_arr + xi) / np.log(xi)
    w = np.where(l_arr >= lam, 0.0, w)
    w = np.clip(w, 0.0, 1.0)
    return scalar_like(w, l)


def class_balance_weight(beta: float, n_c):
    """Effective-number class weight (1 - beta) / (1 - beta^{n_c})."""
    if not 0.0 <= beta < 1.0:
        raise ValueError("beta must lie in [0, 1)")
    n_arr = np.asarray(n_c)
    if np.any(n_arr < 1):
        raise ValueError("class counts must be positive integers")
    if beta == 0.0:
        w = np.ones_like(n_arr, dtype=float)
    else:
        w = (1.0 - beta) / (1.0 - np.power(beta, n_arr.astype(float)))
    return scalar_like(w, n_c)


def flexw_spl_weight(p, l, gamma: float, alpha: float, lam: float):
    """FlexW weight on d = 1 - p, zeroed for samples whose loss exceeds lam."""
    if lam <= 0:
        raise ValueError("lam must be > 0")
    p_arr = check_unit_interval(p, "p")
    l_arr = check_nonnegative(l, "l")
    w = flexw_weight(1.0 - p_arr, gamma, alpha)
    w = np.where(l_arr <= lam, w, 0.0)
    return scalar_like(w, p)


def flexw_scaled_weight(p, gamma: float, alpha: float, c_y):
    """FlexW weight on d = 1 - p multiplied by the class scale c_y > 0."""
    c_arr = np.asarray(c_y, dtype=float)
    if np.any(c_arr <= 0):
        raise ValueError("class scale must be > 0")
    p_arr = check_unit_interval(p, "p")
    w = c_arr * flexw_weight(1.0 - p_arr, gamma, alpha)
    return scalar_like(w, p)


def _normalized_values(raw: np.ndarray) -> np.ndarray:
    total = raw.sum()
    if total <= 0.0:
        raise DegenerateBatchError("degenerate batch: all weights zero")
    return raw * (raw.size / total)


def normalize_weights(raw) -> WeightVector:
    """Rescale nonnegative weights so their mean is exactly 1.

    Order and arg-ranking are preserved (multiplication by a positive
    constant).  An all-zero batch raises DegenerateBatchError, which for
    self-paced schemes signals that the loss threshold is too small.
    """
    values = _weight_values(raw)
    if values.size == 0:
        raise ValueError("cannot normalize an empty weight vector")
    return WeightVector(_normalized_values(values), normalized=True)


def weighted_loss(losses, weights) -> float:
    """Mean of w_i * l_i over the batch: (1/N) * sum(w_i * l_i)."""
    l_arr = check_nonnegative(losses, "losses")
    w_arr = _weight_values(weights)
    if l_arr.shape != w_arr.shape:
        raise ValueError(
            f"losses and weights must have equal length, got {l_arr.shape} vs {w_arr.shape}"
        )
    return float(np.mean(w_arr * l_arr))


def flexw_loss_gradient(z, gamma: float, alpha: float):
    """d/dz of L(z) = flexw_weight(1 - p) * (-log p) with p = sigmoid(z).

    Closed form:

        p(1-p) * (1-p+alpha)^(gamma-1) * exp(-gamma(1-p+alpha))
        * (gamma * log(p) * (p - alpha) - (1-p+alpha)/p)

    p is clamped to [1e-12, 1 - 1e-12] so the expression stays finite for
    |z| up to ~30.  With gamma = 0 this reduces to the plain cross-entropy
    gradient p - 1.
    """
    if alpha < 0:
        raise ValueError("alpha must be >= 0")
    z_arr = np.asarray(z, dtype=float)
    p = clamp_probability(1.0 / (1.0 + np.exp(-z_arr)))
    u = 1.0 - p + alpha
    grad = (
        p
        * (1.0 - p)
        * np.power(u, gamma - 1.0)
        * np.exp(-gamma * u)
        * (gamma * np.log(p) * (p - alpha) - u / p)
    )
    return scalar_like(grad, z)


# ---------------------------------------------------------------------------
# Per-batch dispatch
# ---------------------------------------------------------------------------


def sample_weights(
    scheme: WeightScheme,
    *,
    p=None,
    l=None,
    labels=None,
    class_counts=None,
) -> np.ndarray:
    """Raw (un-normalized) weights for a batch under any scheme.

    ``p`` are correct-class probabilities, ``l`` per-sample losses,
    ``labels`` integer class indices; ``class_counts`` are the training-set
    class sizes needed by class-level schemes.
    """
    if isinstance(scheme, Uniform):
        if p is None:
            raise ValueError("p is required to size the batch")
        return np.ones_like(np.asarray(p, dtype=float))
    if isinstance(scheme, FlexW):
        return np.asarray(flexw_weight(1.0 - np.asarray(p, float), scheme.gamma, scheme.alpha))
    if isinstance(scheme, FlexWSPL):
        return np.asarray(flexw_spl_weight(p, l, scheme.gamma, scheme.alpha, scheme.lam))
    if isinstance(scheme, FlexWClassScaled):
        scales = np.asarray(scheme.class_scales)
        if labels is None:
            raise ValueError("labels are required for class-scaled weighting")
        if np.max(labels) >= scales.size:
            raise ValueError("class_scales shorter than the number of classes")
        return np.asarray(flexw_scaled_weight(p, scheme.gamma, scheme.alpha, scales[labels]))
    if isinstance(scheme, Focal):
        return np.asarray(focal_weight(p, scheme.gamma))
    if isinstance(scheme, SPLBinary):
        return np.asarray(spl_binary_weight(l, scheme.lam))
    if isinstance(scheme, SPLLog):
        return np.asarray(spl_log_weight(l, scheme.lam))
    if isinstance(scheme, ClassBalance):
        if labels is None or class_counts is None:
            raise ValueError("labels and class_counts are required for class-balance weighting")
        counts = np.asarray(class_counts)
        return np.asarray(class_balance_weight(scheme.beta, counts[labels]))
    raise TypeError(f"unknown weighting scheme: {scheme!r}")


# ---------------------------------------------------------------------------
# Priority-mode classification of a weight curve
# ---------------------------------------------------------------------------

# Discrete steps smaller than this fraction of max|w| are treated as flat.
STEP_TOLERANCE = 1e-6
# An interior extremum counts only if both adjacent monotone arms move the
# curve by at least this fraction of its total range; smaller wiggles (for
# example the shallow dip past d = 1 - alpha in a hard-first curve) are
# folded into the surrounding trend.
SIGNIFICANCE = 0.1


def _monotone_arms(values: np.ndarray, step_tol: float) -> list[list]:
    """Runs of consistent slope sign as [direction, start_index, end_index]."""
    arms: list[list] = []
    for i in range(values.size - 1):
        delta = values[i + 1] - values[i]
        if abs(delta) <= step_tol:
            continue
        direction = 1 if delta > 0 else -1
        if arms and arms[-1][0] == direction:
            arms[-1][2] = i + 1
        else:
            arms.append([direction, i, i + 1])
    return arms


def _simplify_arms(arms: list[list], values: np.ndarray, min_amplitude: float) -> list[list]:
    """Iteratively drop/merge arms whose amplitude falls below min_amplitude."""

    def amplitude(arm):
        return abs(values[arm[2]] - values[arm[1]])

    arms = [list(a) for a in arms]
    while len(arms) > 1:
        k = min(range(len(arms)), key=lambda i: amplitude(arms[i]))
        if amplitude(arms[k]) >= min_amplitude:
            break
        if k == 0:
            arms.pop(0)
        elif k == len(arms) - 1:
            arms.pop()
        else:
            merged = [arms[k - 1][0], arms[k - 1][1], arms[k + 1][2]]
            arms[k - 1 : k + 2] = [merged]
    return arms


def classify_curve(
    values,
    *,
    significance: float = SIGNIFICANCE,
    flat_rtol: float = 1e-9,
) -> PriorityMode:
    """Classify a sampled weight-versus-difficulty curve into a priority mode.

    Monotone decreasing -> easy-first, monotone increasing -> hard-first,
    single significant interior maximum -> medium-first, single significant
    interior minimum -> two-ends-first, constant -> flat.  More than one
    surviving direction change raises AmbiguousCurveError.
    """
    arr = np.asarray(values, dtype=float)
    if arr.size < 2:
        raise ValueError("need at least two curve samples")
    if not np.all(np.isfinite(arr)):
        raise ValueError("curve contains non-finite values")
    scale = float(np.max(np.abs(arr)))
    span = float(arr.max() - arr.min())
    if scale == 0.0 or span <= flat_rtol * scale:
        return PriorityMode.FLAT
    arms = _monotone_arms(arr, STEP_TOLERANCE * scale)
    if not arms:
        return PriorityMode.FLAT
    arms = _simplify_arms(arms, arr, significance * span)
    pattern = tuple(a[0] for a in arms)
    if pattern == (1,):
        return PriorityMode.HARD_FIRST
    if pattern == (-1,):
        return PriorityMode.EASY_FIRST
    if pattern == (1, -1):
        return PriorityMode.MEDIUM_FIRST
    if pattern == (-1, 1):
        return PriorityMode.TWO_ENDS_FIRST
    raise AmbiguousCurveError(
        f"ambiguous curve: {len(pattern) - 1} interior direction changes survive the tolerance"
    )


def weight_curve(scheme, d) -> np.ndarray:
    """Weight as a function of difficulty for sample-level schemes.

    Loss-thresholded schemes are evaluated through l = -log(1 - d) with the
    standard probability clamp.  Class-level schemes have no per-difficulty
    curve and are rejected.
    """
    if isinstance(scheme, CLASS_LEVEL_SCHEMES):
        raise TypeError("class-level schemes have no difficulty curve")
    d_arr = check_unit_interval(np.asarray(d, dtype=float), "d")
    p = clamp_probability(1.0 - d_arr)
    l = -np.log(p)
    if isinstance(scheme, (FlexW, FlexWSPL)):
        # FlexW uses d directly, so its own singularities surface unclamped.
        w = flexw_weight(d_arr, scheme.gamma, scheme.alpha)
        if isinstance(scheme, FlexWSPL):
            w = np.where(l <= scheme.lam, w, 0.0)
        return np.asarray(w)
    if isinstance(scheme, Uniform):
        return np.ones_like(d_arr)
    if isinstance(scheme, Focal):
        return np.asarray(focal_weight(p, scheme.gamma))
    if isinstance(scheme, SPLBinary):
        return np.asarray(spl_binary_weight(l, scheme.lam))
    if isinstance(scheme, SPLLog):
        return np.asarray(spl_log_weight(l, scheme.lam))
    if callable(scheme):
        return np.asarray(scheme(d_arr), dtype=float)
    raise TypeError(f"unknown weighting scheme: {scheme!r}")


def classify_mode(scheme, grid_size: int = 512, *, significance: float = SIGNIFICANCE) -> PriorityMode:
    """Sample a scheme's weight curve on a uniform difficulty grid and classify it.

    ``scheme`` may be any sample-level WeightScheme or a callable mapping a
    difficulty array to weights.
    """
    if grid_size < 16:
        raise ValueError("grid_size must be >= 16")
    d = np.linspace(0.0, 1.0, grid_size)
    return classify_curve(weight_curve(scheme, d), significance=significance)
