"""Difficulty distributions, density-ratio curves, and priority-mode inference.

The training set's difficulty density p_tr(d) is estimated with a smoothed
histogram; the target density p_opt(d) defaults to uniform on [0, 1].  The
per-bin ratio tau(d) = p_opt(d) / p_tr(d) is the optimal sample weight for
matching the target distribution, and its monotonicity pattern determines
the recommended priority mode.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._validation import check_unit_interval
from .errors import AmbiguousCurveError
from .weighting import PriorityMode, WeightVector, classify_curve, normalize_weights


@dataclass(frozen=True)
class DifficultyProfile:
    """Per-sample difficulties plus a binned density estimate on [0, 1]."""

    difficulties: np.ndarray
    bin_edges: np.ndarray
    densities: np.ndarray
    epoch: int = 0

    def __post_init__(self):
        diffs = check_unit_interval(np.asarray(self.difficulties, float), "difficulties")
        edges = np.asarray(self.bin_edges, dtype=float)
        dens = np.asarray(self.densities, dtype=float)
        if diffs.size == 0:
            raise ValueError("difficulties must be nonempty")
        if edges.ndim != 1 or edges.size < 3:
            raise ValueError("bin_edges must define at least 2 bins")
        if np.any(np.diff(edges) <= 0):
            raise ValueError("bin_edges must be strictly increasing")
        if dens.shape != (edges.size - 1,):
            raise ValueError("densities must have one entry per bin")
        if np.any(dens < 0):
            raise ValueError("densities must be nonnegative")
        total = float(np.sum(dens * np.diff(edges)))
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"densities must integrate to 1, got {total!r}")
        object.__setattr__(self, "difficulties", diffs)
        object.__setattr__(self, "bin_edges", edges)
        object.__setattr__(self, "densities", dens)

    @property
    def bin_centers(self) -> np.ndarray:
        return 0.5 * (self.bin_edges[:-1] + self.bin_edges[1:])

    @property
    def bin_widths(self) -> np.ndarray:
        return np.diff(self.bin_edges)


@dataclass(frozen=True)
class TargetDensity:
    """The target difficulty density p_opt: uniform on [0, 1] or explicit bins."""

    kind: str = "uniform"
    edges: np.ndarray | None = None
    densities: np.ndarray | None = None

    def __post_init__(self):
        if self.kind not in ("uniform", "binned"):
            raise ValueError("kind must be 'uniform' or 'binned'")
        if self.kind == "binned":
            edges = np.asarray(self.edges, dtype=float)
            dens = np.asarray(self.densities, dtype=float)
            if np.any(dens < 0):
                raise ValueError("target densities must be nonnegative")
            total = float(np.sum(dens * np.diff(edges)))
            if abs(total - 1.0) > 1e-9:
                raise ValueError(f"target density must integrate to 1, got {total!r}")
            object.__setattr__(self, "edges", edges)
            object.__setattr__(self, "densities", dens)

    @classmethod
    def uniform(cls) -> "TargetDensity":
        return cls(kind="uniform")

    @classmethod
    def binned(cls, edges, densities) -> "TargetDensity":
        return cls(kind="binned", edges=edges, densities=densities)

    def on_grid(self, edges: np.ndarray) -> np.ndarray:
        """Density values on the given bin grid.

        Uniform targets resample onto any grid over [0, 1]; binned targets
        require the identical grid.
        """
        edges = np.asarray(edges, dtype=float)
        if self.kind == "uniform":
            return np.ones(edges.size - 1)
        if self.edges.shape != edges.shape or not np.allclose(self.edges, edges, atol=1e-12):
            raise ValueError("grid mismatch between target density and profile")
        return np.asarray(self.densities)


@dataclass(frozen=True)
class TauCurve:
    """Binned ratio p_opt(d) / p_tr(d) with the inferred priority mode.

    ``inferred_mode`` is None when fewer than 4 bins are available or the
    ratio pattern is ambiguous.
    """

    bin_centers: np.ndarray
    tau: np.ndarray
    inferred_mode: PriorityMode | None = None
    bin_edges: np.ndarray = field(default=None, repr=False)


def difficulty_from_prob(p):
    """Loss-based learning difficulty d = 1 - p of the correct-class probability."""
    p_arr = check_unit_interval(p, "p")
    out = 1.0 - p_arr
    if np.ndim(p) == 0:
        return float(out)
    return out


def estimate_density(difficulties, bins: int = 32, epoch: int = 0) -> DifficultyProfile:
    """Histogram density of difficulties with add-one (Laplace) smoothing.

    Smoothing keeps every bin strictly positive so downstream ratios are
    always defined.  Bins are half-open [lo, hi) with the last bin closed.
    """
    diffs = check_unit_interval(np.asarray(difficulties, dtype=float).ravel(), "difficulties")
    if diffs.size == 0:
        raise ValueError("difficulties must be nonempty")
    if bins < 2:
        raise ValueError("bins must be >= 2")
    edges = np.linspace(0.0, 1.0, bins + 1)
    counts, _ = np.histogram(diffs, bins=edges)
    widths = np.diff(edges)
    densities = (counts + 1.0) / ((diffs.size + bins) * widths)
    return DifficultyProfile(diffs, edges, densities, epoch=epoch)


def bin_index(edges: np.ndarray, values: np.ndarray) -> np.ndarray:
    """Bin assignment matching the histogram convention (boundary -> upper bin)."""
    idx = np.searchsorted(edges, values, side="right") - 1
    return np.clip(idx, 0, edges.size - 2)


def median_filter3(values: np.ndarray) -> np.ndarray:
    """Sliding median of window 3 with edge replication."""
    arr = np.asarray(values, dtype=float)
    if arr.size < 3:
        return arr.copy()
    padded = np.concatenate([arr[:1], arr, arr[-1:]])
    stacked = np.stack([padded[:-2], padded[1:-1], padded[2:]])
    return np.median(stacked, axis=0)


def tau_curve(p_opt: TargetDensity, profile: DifficultyProfile) -> TauCurve:
    """Per-bin ratio of the target density to the profile's estimated density."""
    target = p_opt.on_grid(profile.bin_edges)
    if np.any(profile.densities <= 0):
        raise ValueError("profile density has empty bins; estimate with smoothing")
    tau = target / profile.densities
    mode: PriorityMode | None
    try:
        mode = infer_mode_from_tau(tau) if tau.size >= 4 else None
    except AmbiguousCurveError:
        mode = None
    return TauCurve(profile.bin_centers, tau, mode, bin_edges=profile.bin_edges)


def infer_mode_from_tau(tau, *, significance: float = 0.1, flat_rtol: float = 0.1) -> PriorityMode:
    """Priority mode implied by a tau curve.

    Decreasing tau -> easy-first, increasing -> hard-first, fall-then-rise ->
    two-ends-first, rise-then-fall -> medium-first, constant -> flat.  The
    curve is median-filtered (window 3) first; raises AmbiguousCurveError if
    more than one direction change survives.
    """
    values = tau.tau if isinstance(tau, TauCurve) else np.asarray(tau, dtype=float)
    if values.size < 4:
        raise ValueError("need at least 4 defined bins to infer a mode")
    if np.any(~np.isfinite(values)):
        raise ValueError("tau contains undefined bins")
    smoothed = median_filter3(values)
    return classify_curve(smoothed, significance=significance, flat_rtol=flat_rtol)


def optimal_weights(profile: DifficultyProfile, p_opt: TargetDensity) -> WeightVector:
    """Per-sample weights equal to the tau value of each sample's bin, mean-1 normalized.

    Re-sampling the training set in proportion to these weights moves its
    difficulty density toward the target.
    """
    curve = tau_curve(p_opt, profile)
    idx = bin_index(profile.bin_edges, profile.difficulties)
    raw = curve.tau[idx]
    return normalize_weights(raw)


def distribution_shift(a: DifficultyProfile, b: DifficultyProfile) -> float:
    """Total-variation distance between two profiles on the same bin grid."""
    if a.bin_edges.shape != b.bin_edges.shape or not np.array_equal(a.bin_edges, b.bin_edges):
        raise ValueError("profiles use different bin grids")
    widths = np.diff(a.bin_edges)
    return float(0.5 * np.sum(np.abs(a.densities - b.densities) * widths))
