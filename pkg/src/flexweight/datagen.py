"""Deterministic synthetic datasets for the four scenario families.

A Gaussian-mixture generator stands in for image benchmarks at desk scale.
Modifiers inject flip/uniform label noise, carve a long-tailed class
profile, or keep a difficulty-skewed subset.  All operations are
deterministic under their seeds, and every modifier touches the training
split only: the held-out split stays clean and balanced so that reported
accuracies are meaningful.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np


@dataclass(frozen=True)
class LabeledDataset:
    """Feature/label arrays with a train/test split and label bookkeeping.

    ``clean_labels`` is present only after noise injection and preserves the
    original labels.  ``class_counts``/``class_freqs`` describe the training
    split (the held-out split stays balanced under every modifier).
    """

    features: np.ndarray
    labels: np.ndarray
    num_classes: int
    train_idx: np.ndarray
    test_idx: np.ndarray
    clean_labels: np.ndarray | None = None

    def __post_init__(self):
        feats = np.asarray(self.features, dtype=float)
        labels = np.asarray(self.labels, dtype=np.int64)
        if feats.ndim != 2 or labels.ndim != 1 or feats.shape[0] != labels.shape[0]:
            raise ValueError("features must be (N, D) aligned with labels (N,)")
        if self.clean_labels is not None:
            clean = np.asarray(self.clean_labels, dtype=np.int64)
            if clean.shape != labels.shape:
                raise ValueError("clean_labels must align with labels")
            object.__setattr__(self, "clean_labels", clean)
        object.__setattr__(self, "features", feats)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "train_idx", np.asarray(self.train_idx, dtype=np.int64))
        object.__setattr__(self, "test_idx", np.asarray(self.test_idx, dtype=np.int64))

    @property
    def num_features(self) -> int:
        return self.features.shape[1]

    @property
    def class_counts(self) -> np.ndarray:
        """Per-class sample counts of the training split."""
        return np.bincount(self.labels[self.train_idx], minlength=self.num_classes)

    @property
    def class_freqs(self) -> np.ndarray:
        counts = self.class_counts
        return counts / counts.sum()

    def train_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        return self.features[self.train_idx], self.labels[self.train_idx]

    def test_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        return self.features[self.test_idx], self.labels[self.test_idx]


# ---------------------------------------------------------------------------
# Scenario specification
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MixtureSpec:
    """Parameters of the base Gaussian-mixture generator."""

    classes: int = 10
    dims: int = 16
    per_class: int = 500
    separation: float = 3.0
    spread: float = 1.0
    seed: int = 0


@dataclass(frozen=True)
class FlipNoise:
    rate: float

    def __post_init__(self):
        if not 0.0 <= self.rate < 1.0:
            raise ValueError("noise rate must lie in [0, 1)")


@dataclass(frozen=True)
class UniformNoise:
    rate: float

    def __post_init__(self):
        if not 0.0 <= self.rate < 1.0:
            raise ValueError("noise rate must lie in [0, 1)")


@dataclass(frozen=True)
class LongTail:
    imbalance_factor: float

    def __post_init__(self):
        if self.imbalance_factor < 1.0:
            raise ValueError("imbalance_factor must be >= 1")


@dataclass(frozen=True)
class DifficultySkew:
    """Keep a subset skewed by probe-model difficulty: e/h/m/b kinds."""

    kind: str
    keep_n: int
    probe_epochs: int = 10

    def __post_init__(self):
        if self.kind not in ("e", "h", "m", "b"):
            raise ValueError("kind must be one of 'e', 'h', 'm', 'b'")
        if self.keep_n < 1:
            raise ValueError("keep_n must be >= 1")


Modifier = FlipNoise | UniformNoise | LongTail | DifficultySkew


@dataclass(frozen=True)
class ScenarioSpec:
    base: MixtureSpec
    modifier: Modifier | None = None


# ---------------------------------------------------------------------------
# Generators and modifiers
# ---------------------------------------------------------------------------


def _class_means(classes: int, dims: int, separation: float) -> np.ndarray:
    """Distinct class means: scaled basis vectors, or a circle when D < C."""
    if dims >= classes:
        means = np.zeros((classes, dims))
        means[np.arange(classes), np.arange(classes)] = separation
        return means
    if dims < 2:
        raise ValueError("need dims >= 2 to place more classes than dimensions")
    angles = 2.0 * np.pi * np.arange(classes) / classes
    means = np.zeros((classes, dims))
    means[:, 0] = separation * np.cos(angles)
    means[:, 1] = separation * np.sin(angles)
    return means


def make_gaussian_mixture(spec: MixtureSpec) -> LabeledDataset:
    """Isotropic Gaussian blobs at distinct means with an 80/20 stratified split."""
    if spec.classes < 2:
        raise ValueError("need at least 2 classes")
    if spec.per_class < 2:
        raise ValueError("need at least 2 samples per class")
    if spec.dims < 1:
        raise ValueError("need at least 1 feature dimension")
    if spec.separation < 0:
        raise ValueError("separation must be >= 0")
    if spec.spread <= 0:
        raise ValueError("spread must be > 0")
    rng = np.random.default_rng(spec.seed)
    means = _class_means(spec.classes, spec.dims, spec.separation)
    features = np.empty((spec.classes * spec.per_class, spec.dims))
    labels = np.empty(spec.classes * spec.per_class, dtype=np.int64)
    train_parts, test_parts = [], []
    for c in range(spec.classes):
        lo = c * spec.per_class
        hi = lo + spec.per_class
        features[lo:hi] = means[c] + spec.spread * rng.standard_normal((spec.per_class, spec.dims))
        labels[lo:hi] = c
        order = lo + rng.permutation(spec.per_class)
        n_test = max(1, int(round(spec.per_class * 0.2)))
        test_parts.append(order[:n_test])
        train_parts.append(order[n_test:])
    train_idx = np.sort(np.concatenate(train_parts))
    test_idx = np.sort(np.concatenate(test_parts))
    return LabeledDataset(features, labels, spec.classes, train_idx, test_idx)


def _require_unmodified(data: LabeledDataset):
    if data.clean_labels is not None:
        raise ValueError("dataset already carries a noise modifier")


def apply_flip_noise(data: LabeledDataset, rate: float, seed: int) -> LabeledDataset:
    """Flip a seeded fraction of training labels to the paired class c -> c+1 mod C.

    Exactly floor(rate * n_train) labels change; clean_labels keep the
    originals.
    """
    if not 0.0 <= rate < 1.0:
        raise ValueError("rate must lie in [0, 1)")
    _require_unmodified(data)
    rng = np.random.default_rng(seed)
    n_noisy = int(np.floor(rate * data.train_idx.size))
    chosen = rng.choice(data.train_idx, size=n_noisy, replace=False)
    labels = data.labels.copy()
    labels[chosen] = (labels[chosen] + 1) % data.num_classes
    return LabeledDataset(
        data.features, labels, data.num_classes, data.train_idx, data.test_idx,
        clean_labels=data.labels.copy(),
    )


def apply_uniform_noise(data: LabeledDataset, rate: float, seed: int) -> LabeledDataset:
    """Resample a seeded fraction of training labels uniformly over the other classes."""
    if not 0.0 <= rate < 1.0:
        raise ValueError("rate must lie in [0, 1)")
    _require_unmodified(data)
    rng = np.random.default_rng(seed)
    n_noisy = int(np.floor(rate * data.train_idx.size))
    chosen = rng.choice(data.train_idx, size=n_noisy, replace=False)
    labels = data.labels.copy()
    offsets = rng.integers(1, data.num_classes, size=n_noisy)
    labels[chosen] = (labels[chosen] + offsets) % data.num_classes
    return LabeledDataset(
        data.features, labels, data.num_classes, data.train_idx, data.test_idx,
        clean_labels=data.labels.copy(),
    )


def longtail_class_sizes(n_max: int, classes: int, imbalance_factor: float) -> np.ndarray:
    """Exponentially decaying class sizes n_max * mu^c with mu = (1/IF)^(1/(C-1))."""
    if imbalance_factor < 1.0:
        raise ValueError("imbalance_factor must be >= 1")
    if classes < 2:
        raise ValueError("need at least 2 classes")
    mu = (1.0 / imbalance_factor) ** (1.0 / (classes - 1))
    sizes = np.floor(n_max * mu ** np.arange(classes)).astype(int)
    if sizes[-1] < 1:
        raise ValueError(
            f"imbalance factor {imbalance_factor} would leave the tail class empty"
        )
    return np.maximum(sizes, 1)


def make_longtail(data: LabeledDataset, imbalance_factor: float) -> LabeledDataset:
    """Subsample the balanced training split into an exponential long-tail profile.

    The head class keeps everything and the tail keeps n_max / IF samples;
    the test split is untouched and stays balanced.
    """
    counts = data.class_counts
    if np.any(counts != counts[0]):
        raise ValueError("make_longtail requires a balanced training split")
    sizes = longtail_class_sizes(int(counts[0]), data.num_classes, imbalance_factor)
    train_labels = data.labels[data.train_idx]
    kept = []
    for c in range(data.num_classes):
        class_positions = data.train_idx[train_labels == c]
        kept.append(class_positions[: sizes[c]])
    train_idx = np.sort(np.concatenate(kept))
    clean = None if data.clean_labels is None else data.clean_labels
    keep_all = np.sort(np.concatenate([train_idx, data.test_idx]))
    remap = np.full(data.labels.size, -1, dtype=np.int64)
    remap[keep_all] = np.arange(keep_all.size)
    return LabeledDataset(
        data.features[keep_all],
        data.labels[keep_all],
        data.num_classes,
        remap[train_idx],
        remap[data.test_idx],
        clean_labels=None if clean is None else clean[keep_all],
    )


def make_difficulty_skewed(
    data: LabeledDataset,
    kind: str,
    keep_n: int,
    probe_losses: np.ndarray,
    seed: int = 0,
) -> LabeledDataset:
    """Keep a training subset selected by probe-model loss rank.

    kind 'e': the keep_n lowest-loss samples; 'h': 7/8 highest-loss plus 1/8
    random others; 'm': the centered keep_n of the loss ranking; 'b': half
    lowest plus half highest.  The test split is untouched.
    """
    if kind not in ("e", "h", "m", "b"):
        raise ValueError("kind must be one of 'e', 'h', 'm', 'b'")
    losses = np.asarray(probe_losses, dtype=float)
    n_train = data.train_idx.size
    if losses.shape != (n_train,):
        raise ValueError("probe_losses must align with the training split")
    if keep_n > n_train:
        raise ValueError(f"keep_n={keep_n} exceeds the {n_train} available training samples")
    order = np.argsort(losses, kind="stable")  # ascending difficulty
    if kind == "e":
        selected = order[:keep_n]
    elif kind == "m":
        start = (n_train - keep_n) // 2
        selected = order[start : start + keep_n]
    elif kind == "b":
        n_low = keep_n // 2
        selected = np.concatenate([order[:n_low], order[n_train - (keep_n - n_low) :]])
    else:  # 'h'
        n_hard = int(np.floor(keep_n * 7 / 8))
        hard = order[n_train - n_hard :]
        rest = order[: n_train - n_hard]
        rng = np.random.default_rng(seed)
        filler = rng.choice(rest, size=keep_n - n_hard, replace=False)
        selected = np.concatenate([hard, filler])
    train_idx = np.sort(data.train_idx[selected])
    keep_all = np.sort(np.concatenate([train_idx, data.test_idx]))
    remap = np.full(data.labels.size, -1, dtype=np.int64)
    remap[keep_all] = np.arange(keep_all.size)
    return LabeledDataset(
        data.features[keep_all],
        data.labels[keep_all],
        data.num_classes,
        remap[train_idx],
        remap[data.test_idx],
        clean_labels=None if data.clean_labels is None else data.clean_labels[keep_all],
    )


def build_scenario(spec: ScenarioSpec) -> LabeledDataset:
    """Generate the base mixture and apply the scenario's modifier.

    Modifier randomness derives deterministically from the base seed.
    Difficulty-skew scenarios first train the uniform-weight probe model
    for ``probe_epochs`` to obtain per-sample losses.
    """
    data = make_gaussian_mixture(spec.base)
    mod = spec.modifier
    if mod is None:
        return data
    if isinstance(mod, FlipNoise):
        return apply_flip_noise(data, mod.rate, seed=spec.base.seed + 1_000_003)
    if isinstance(mod, UniformNoise):
        return apply_uniform_noise(data, mod.rate, seed=spec.base.seed + 1_000_003)
    if isinstance(mod, LongTail):
        return make_longtail(data, mod.imbalance_factor)
    if isinstance(mod, DifficultySkew):
        from .trainer import probe_losses  # deferred: trainer imports this module

        losses = probe_losses(data, epochs=mod.probe_epochs, seed=spec.base.seed + 2_000_003)
        return make_difficulty_skewed(
            data, mod.kind, mod.keep_n, losses, seed=spec.base.seed + 3_000_003
        )
    raise TypeError(f"unknown modifier: {mod!r}")


def write_dataset(data: LabeledDataset, path) -> None:
    """Dump the dataset as columnar text: f0..fD-1, label, clean_label, split."""
    path = Path(path)
    header = [f"f{i}" for i in range(data.num_features)] + ["label"]
    if data.clean_labels is not None:
        header.append("clean_label")
    header.append("split")
    split = np.full(data.labels.size, "train", dtype=object)
    split[data.test_idx] = "test"
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for i in range(data.labels.size):
            row = [repr(float(v)) for v in data.features[i]]
            row.append(int(data.labels[i]))
            if data.clean_labels is not None:
                row.append(int(data.clean_labels[i]))
            row.append(split[i])
            writer.writerow(row)
