"""Weighted softmax classifier trained from scratch with momentum SGD.

The model is a linear softmax classifier or a one-hidden-layer rectifier
network.  Every batch is reweighted by the active scheme using online
difficulty d = 1 - p from the current model, weights are normalized to
mean 1 per batch, and per-epoch diagnostics (accuracies, class weights,
clean/noisy losses, difficulty profiles) are collected into a TrainReport.
Runs are single-threaded and bit-deterministic under their seed.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from ._validation import clamp_probability
from .datagen import LabeledDataset
from .difficulty import DifficultyProfile, distribution_shift, estimate_density
from .errors import DegenerateBatchError
from .weighting import Uniform, WeightScheme, _normalized_values, sample_weights

# Learning-rate drop points as fractions of the epoch budget.
DEFAULT_LR_DROP_FRACTIONS = (0.3, 0.6, 0.8)


@dataclass(frozen=True)
class ModelParams:
    """Layer weights/biases: one (W, b) pair for linear, two for the MLP."""

    layers: tuple[tuple[np.ndarray, np.ndarray], ...]

    @property
    def num_features(self) -> int:
        return self.layers[0][0].shape[0]

    @property
    def num_classes(self) -> int:
        return self.layers[-1][0].shape[1]

    @property
    def complexity(self) -> str | int:
        """Hidden width for the MLP, 'linear' otherwise."""
        return "linear" if len(self.layers) == 1 else self.layers[0][0].shape[1]


def init_model(num_features: int, num_classes: int, hidden: int | None, rng) -> ModelParams:
    if hidden is None:
        w = rng.normal(0.0, 1.0 / np.sqrt(num_features), (num_features, num_classes))
        return ModelParams(((w, np.zeros(num_classes)),))
    w1 = rng.normal(0.0, np.sqrt(2.0 / num_features), (num_features, hidden))
    w2 = rng.normal(0.0, np.sqrt(2.0 / hidden), (hidden, num_classes))
    return ModelParams(((w1, np.zeros(hidden)), (w2, np.zeros(num_classes))))


def _softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=-1, keepdims=True)


def _forward_hidden(model: ModelParams, features: np.ndarray):
    activations = [features]
    a = features
    for w, b in model.layers[:-1]:
        a = np.maximum(a @ w + b, 0.0)
        activations.append(a)
    w, b = model.layers[-1]
    return a @ w + b, activations


def forward(model: ModelParams, features) -> np.ndarray:
    """Class probabilities (softmax over logits) for a batch of feature rows."""
    x = np.asarray(features, dtype=float)
    squeeze = x.ndim == 1
    if squeeze:
        x = x[None, :]
    if x.shape[1] != model.num_features:
        raise ValueError(
            f"feature dimension {x.shape[1]} does not match model ({model.num_features})"
        )
    logits, _ = _forward_hidden(model, x)
    probs = _softmax(logits)
    return probs[0] if squeeze else probs


def per_sample_loss(probs, labels):
    """Cross-entropy -log p of the labeled class, with a clamp guard at p = 0."""
    p = np.asarray(probs, dtype=float)
    if p.ndim == 1:
        return float(-np.log(max(p[int(labels)], 1e-12)))
    idx = np.asarray(labels)
    return -np.log(np.maximum(p[np.arange(p.shape[0]), idx], 1e-12))


def backward_weighted(model: ModelParams, features, labels, weights) -> list:
    """Gradients of (1/B) * sum(w_i * l_i) with respect to every layer.

    Exactly linear in the weights: scaling one sample's weight by k scales
    its gradient contribution by k.
    """
    x = np.asarray(features, dtype=float)
    y = np.asarray(labels)
    w = np.asarray(weights, dtype=float)
    logits, activations = _forward_hidden(model, x)
    probs = _softmax(logits)
    if not np.all(np.isfinite(probs)):
        raise FloatingPointError("NaN in forward pass")
    batch = x.shape[0]
    delta = probs
    delta[np.arange(batch), y] -= 1.0
    delta *= (w / batch)[:, None]
    grads = []
    for i in range(len(model.layers) - 1, -1, -1):
        a_in = activations[i]
        grads.append((a_in.T @ delta, delta.sum(axis=0)))
        if i > 0:
            delta = (delta @ model.layers[i][0].T) * (activations[i] > 0.0)
    grads.reverse()
    return grads


class MomentumSGD:
    """Momentum SGD with coupled weight decay.

    velocity <- momentum * velocity + grad + weight_decay * param
    param    <- param - lr * velocity
    """

    def __init__(self, momentum: float = 0.9, weight_decay: float = 5e-4):
        if not 0.0 <= momentum < 1.0:
            raise ValueError("momentum must lie in [0, 1)")
        self.momentum = momentum
        self.weight_decay = weight_decay
        self._velocity = None

    def step(self, model: ModelParams, grads, lr: float) -> ModelParams:
        if self._velocity is None:
            self._velocity = [
                (np.zeros_like(w), np.zeros_like(b)) for w, b in model.layers
            ]
        new_layers = []
        new_velocity = []
        for (w, b), (dw, db), (vw, vb) in zip(model.layers, grads, self._velocity):
            vw = self.momentum * vw + dw + self.weight_decay * w
            vb = self.momentum * vb + db + self.weight_decay * b
            new_layers.append((w - lr * vw, b - lr * vb))
            new_velocity.append((vw, vb))
        self._velocity = new_velocity
        return ModelParams(tuple(new_layers))


@dataclass(frozen=True)
class TrainConfig:
    """Full specification of a single training run."""

    epochs: int = 100
    batch_size: int = 32
    lr: float = 0.1
    momentum: float = 0.9
    weight_decay: float = 5e-4
    lr_drop_epochs: tuple[int, ...] | None = None
    lr_drop_factor: float = 0.2
    seed: int = 0
    scheme: WeightScheme | None = None
    schedule: object | None = None
    hidden: int | None = 64
    bins: int = 32
    track_clean_noisy: bool = False

    def __post_init__(self):
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.lr <= 0:
            raise ValueError("lr must be > 0")
        if not 0.0 <= self.momentum < 1.0:
            raise ValueError("momentum must lie in [0, 1)")
        if self.lr_drop_epochs is not None:
            drops = tuple(int(e) for e in self.lr_drop_epochs)
            if any(b <= a for a, b in zip(drops, drops[1:])):
                raise ValueError("lr_drop_epochs must be strictly increasing")
            object.__setattr__(self, "lr_drop_epochs", drops)
        if self.scheme is not None and self.schedule is not None:
            raise ValueError("give either a scheme or a schedule, not both")

    def resolved_lr_drops(self) -> tuple[int, ...]:
        if self.lr_drop_epochs is not None:
            return self.lr_drop_epochs
        drops = sorted({max(1, round(f * self.epochs)) for f in DEFAULT_LR_DROP_FRACTIONS})
        return tuple(drops)

    def resolved_schedule(self):
        from .schedule import Fixed, VariedAtEpoch

        if self.schedule is not None:
            if isinstance(self.schedule, VariedAtEpoch) and not (
                1 <= self.schedule.switch_epoch < self.epochs
            ):
                raise ValueError("switch_epoch must lie in [1, epochs)")
            return self.schedule
        return Fixed(self.scheme if self.scheme is not None else Uniform())


@dataclass(frozen=True)
class TrainReport:
    """Per-epoch metrics and final summary of one training run."""

    config: TrainConfig
    train_accuracy: np.ndarray
    test_accuracy: np.ndarray
    per_class_test_accuracy: np.ndarray
    class_mean_weight: np.ndarray
    learning_rates: np.ndarray
    scheme_labels: tuple[str, ...]
    profiles: tuple[DifficultyProfile, ...]
    clean_loss: np.ndarray | None = None
    noisy_loss: np.ndarray | None = None
    best_test_accuracy: float = float("nan")
    best_epoch: int = 0

    @property
    def epochs(self) -> int:
        return self.train_accuracy.size


def evaluate(model: ModelParams, features, labels) -> tuple[float, np.ndarray]:
    """Overall and per-class accuracy in percent."""
    x = np.asarray(features, dtype=float)
    y = np.asarray(labels)
    n_classes = model.num_classes
    if x.shape[0] == 0:
        return float("nan"), np.full(n_classes, np.nan)
    pred = np.argmax(forward(model, x), axis=1)
    overall = 100.0 * float(np.mean(pred == y))
    totals = np.bincount(y, minlength=n_classes).astype(float)
    correct = np.bincount(y[pred == y], minlength=n_classes).astype(float)
    with np.errstate(invalid="ignore", divide="ignore"):
        per_class = 100.0 * correct / totals
    return overall, per_class


def _next_scheme(schedule, epoch, current, latest_profile, prev_profile, inferred_once):
    """Active scheme for this epoch plus updated adaptive-inference flag."""
    from .schedule import Adaptive, mode_at_epoch

    if isinstance(schedule, Adaptive):
        if latest_profile is None:
            return mode_at_epoch(schedule, epoch, None), inferred_once
        triggered = not inferred_once or (
            prev_profile is not None
            and distribution_shift(prev_profile, latest_profile) > schedule.shift_threshold
        )
        if triggered:
            return mode_at_epoch(schedule, epoch, latest_profile), True
        return current, inferred_once
    return mode_at_epoch(schedule, epoch, latest_profile), inferred_once


def fit_classifier(data: LabeledDataset, config: TrainConfig) -> tuple[ModelParams, TrainReport]:
    """Run the full training loop; returns the final model and its report."""
    schedule = config.resolved_schedule()
    x_train, y_train = data.train_arrays()
    x_test, y_test = data.test_arrays()
    n_train = x_train.shape[0]
    n_classes = data.num_classes
    class_counts = data.class_counts
    clean_train = None
    if config.track_clean_noisy and data.clean_labels is not None:
        clean_train = data.clean_labels[data.train_idx]

    rng = np.random.default_rng(config.seed)
    model = init_model(data.num_features, n_classes, config.hidden, rng)
    optimizer = MomentumSGD(config.momentum, config.weight_decay)
    lr = config.lr
    drops = set(config.resolved_lr_drops())

    epochs = config.epochs
    train_acc = np.empty(epochs)
    test_acc = np.empty(epochs)
    per_class_acc = np.empty((epochs, n_classes))
    class_weight = np.full((epochs, n_classes), np.nan)
    lrs = np.empty(epochs)
    clean_losses = np.full(epochs, np.nan) if clean_train is not None else None
    noisy_losses = np.full(epochs, np.nan) if clean_train is not None else None
    scheme_labels = []
    profiles: list[DifficultyProfile] = []

    current_scheme = None
    latest_profile = None
    prev_profile = None
    inferred_once = False

    for epoch in range(1, epochs + 1):
        if epoch in drops:
            lr *= config.lr_drop_factor
        current_scheme, inferred_once = _next_scheme(
            schedule, epoch, current_scheme, latest_profile, prev_profile, inferred_once
        )
        scheme_labels.append(repr(current_scheme))
        lrs[epoch - 1] = lr

        perm = rng.permutation(n_train)
        difficulties = np.empty(n_train)
        weight_sum = np.zeros(n_classes)
        weight_cnt = np.zeros(n_classes)
        for start in range(0, n_train, config.batch_size):
            sl = perm[start : start + config.batch_size]
            xb, yb = x_train[sl], y_train[sl]
            probs = forward(model, xb)
            p = clamp_probability(probs[np.arange(sl.size), yb])
            losses = -np.log(p)
            d = 1.0 - p
            raw = sample_weights(
                current_scheme, p=p, l=losses, labels=yb, class_counts=class_counts
            )
            try:
                weights = _normalized_values(raw)
            except DegenerateBatchError:
                raise DegenerateBatchError(
                    f"epoch {epoch}: degenerate batch, all weights zero under {current_scheme!r}"
                ) from None
            difficulties[start : start + sl.size] = d
            np.add.at(weight_sum, yb, weights)
            np.add.at(weight_cnt, yb, 1.0)
            grads = backward_weighted(model, xb, yb, weights)
            model = optimizer.step(model, grads, lr)

        prev_profile = latest_profile
        latest_profile = estimate_density(difficulties, bins=config.bins, epoch=epoch)
        profiles.append(latest_profile)

        train_acc[epoch - 1], _ = evaluate(model, x_train, y_train)
        test_acc[epoch - 1], per_class_acc[epoch - 1] = evaluate(model, x_test, y_test)
        with np.errstate(invalid="ignore", divide="ignore"):
            class_weight[epoch - 1] = weight_sum / weight_cnt
        if clean_train is not None:
            full_probs = forward(model, x_train)
            full_losses = per_sample_loss(full_probs, y_train)
            noisy_mask = y_train != clean_train
            if np.any(~noisy_mask):
                clean_losses[epoch - 1] = float(full_losses[~noisy_mask].mean())
            if np.any(noisy_mask):
                noisy_losses[epoch - 1] = float(full_losses[noisy_mask].mean())

    if x_test.shape[0] > 0:
        best_epoch = int(np.argmax(test_acc)) + 1
        best = float(test_acc[best_epoch - 1])
    else:
        best_epoch = epochs
        best = float("nan")
    report = TrainReport(
        config=config,
        train_accuracy=train_acc,
        test_accuracy=test_acc,
        per_class_test_accuracy=per_class_acc,
        class_mean_weight=class_weight,
        learning_rates=lrs,
        scheme_labels=tuple(scheme_labels),
        profiles=tuple(profiles),
        clean_loss=clean_losses,
        noisy_loss=noisy_losses,
        best_test_accuracy=best,
        best_epoch=best_epoch,
    )
    return model, report


def train(data: LabeledDataset, config: TrainConfig) -> TrainReport:
    """Train under the configured scheme/schedule and return the report."""
    _, report = fit_classifier(data, config)
    return report


def probe_losses(data: LabeledDataset, epochs: int = 10, seed: int = 0) -> np.ndarray:
    """Per-sample training losses from a short uniform-weight probe run."""
    config = TrainConfig(
        epochs=epochs, scheme=Uniform(), seed=seed, lr_drop_epochs=(), track_clean_noisy=False
    )
    model, _ = fit_classifier(data, config)
    x_train, y_train = data.train_arrays()
    return per_sample_loss(forward(model, x_train), y_train)


class WeightedSGDClassifier(ClassifierMixin, BaseEstimator):
    """Scikit-learn style front end for the weighted softmax classifier.

    Parameters mirror TrainConfig; ``scheme`` is any WeightScheme and
    ``schedule`` any ModeSchedule (give at most one).  ``fit`` accepts an
    optional held-out split for per-epoch test metrics and optional clean
    labels for noise diagnostics; the resulting TrainReport is stored on
    ``report_``.
    """

    def __init__(
        self,
        scheme=None,
        schedule=None,
        epochs=50,
        batch_size=32,
        learning_rate=0.1,
        momentum=0.9,
        weight_decay=5e-4,
        lr_drop_epochs=None,
        lr_drop_factor=0.2,
        hidden=64,
        bins=32,
        track_clean_noisy=False,
        random_state=0,
    ):
        self.scheme = scheme
        self.schedule = schedule
        self.epochs = epochs
        self.batch_size = batch_size
        self.learning_rate = learning_rate
        self.momentum = momentum
        self.weight_decay = weight_decay
        self.lr_drop_epochs = lr_drop_epochs
        self.lr_drop_factor = lr_drop_factor
        self.hidden = hidden
        self.bins = bins
        self.track_clean_noisy = track_clean_noisy
        self.random_state = random_state

    def _config(self) -> TrainConfig:
        return TrainConfig(
            epochs=self.epochs,
            batch_size=self.batch_size,
            lr=self.learning_rate,
            momentum=self.momentum,
            weight_decay=self.weight_decay,
            lr_drop_epochs=self.lr_drop_epochs,
            lr_drop_factor=self.lr_drop_factor,
            seed=self.random_state,
            scheme=self.scheme,
            schedule=self.schedule,
            hidden=self.hidden,
            bins=self.bins,
            track_clean_noisy=self.track_clean_noisy,
        )

    def fit(self, X, y, X_val=None, y_val=None, clean_y=None):
        X, y = check_X_y(X, y)
        self.classes_, y_enc = np.unique(y, return_inverse=True)
        features = X
        labels = y_enc
        train_idx = np.arange(X.shape[0])
        test_idx = np.arange(0)
        if X_val is not None:
            X_val, y_val = check_X_y(X_val, y_val)
            val_enc = np.searchsorted(self.classes_, y_val)
            if np.any(self.classes_[np.clip(val_enc, 0, self.classes_.size - 1)] != y_val):
                raise ValueError("validation labels contain classes unseen in y")
            features = np.vstack([X, X_val])
            labels = np.concatenate([y_enc, val_enc])
            test_idx = np.arange(X.shape[0], features.shape[0])
        clean = None
        if clean_y is not None:
            clean_enc = np.searchsorted(self.classes_, np.asarray(clean_y))
            clean = np.concatenate([clean_enc, labels[test_idx]])
        data = LabeledDataset(
            features, labels, int(self.classes_.size), train_idx, test_idx, clean_labels=clean
        )
        self.model_, self.report_ = fit_classifier(data, self._config())
        self.n_features_in_ = X.shape[1]
        return self

    def predict_proba(self, X):
        check_is_fitted(self, "model_")
        X = check_array(X)
        return forward(self.model_, X)

    def predict(self, X):
        return self.classes_[np.argmax(self.predict_proba(X), axis=1)]
