"""Monte Carlo bias-variance decomposition for weighted polynomial regression.

The sample space [-1, 1] splits into easy/medium/hard regions by local
target complexity.  For each polynomial degree c, many training sets are
drawn and fitted by weighted least squares (region weights 1 except an
optional 1 + epsilon bump); squared bias and variance of the fitted curves
are measured pointwise against the noiseless target and aggregated
globally and per region.  The argmin degrees c* quantify how weighting a
region shifts the optimal model complexity: bumping the hard region pushes
c* up, bumping the easy region pushes it down.
"""

from __future__ import annotations

import dataclasses
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import polynomial as npoly

REGION_NAMES = ("easy", "medium", "hard")


@dataclass(frozen=True)
class BiasVarConfig:
    """Target family, regions, noise, degree grid, and Monte Carlo budget."""

    target: str = "piecewise"
    poly_coeffs: tuple[float, ...] = ()
    noise_sigma: float = 0.25
    region_bounds: tuple[float, float] = (-1.0 / 3.0, 1.0 / 3.0)
    degrees: tuple[int, ...] = tuple(range(9))
    num_sets: int = 100
    set_size: int = 64
    epsilon: float = 0.0
    weight_region: str | None = None
    seed: int = 0
    eval_points: int = 400

    def __post_init__(self):
        if self.target not in ("piecewise", "polynomial", "flat"):
            raise ValueError("target must be 'piecewise', 'polynomial', or 'flat'")
        if self.target == "polynomial" and not self.poly_coeffs:
            raise ValueError("polynomial target needs poly_coeffs")
        object.__setattr__(self, "poly_coeffs", tuple(float(c) for c in self.poly_coeffs))
        object.__setattr__(self, "region_bounds", tuple(float(b) for b in self.region_bounds))
        b0, b1 = self.region_bounds
        if not -1.0 < b0 < b1 < 1.0:
            raise ValueError("region_bounds must satisfy -1 < b0 < b1 < 1")
        degrees = tuple(int(c) for c in self.degrees)
        if len(degrees) < 1 or any(b <= a for a, b in zip(degrees, degrees[1:])):
            raise ValueError("degrees must be strictly increasing")
        object.__setattr__(self, "degrees", degrees)
        if self.num_sets < 50:
            raise ValueError("num_sets must be >= 50 for stable Monte Carlo estimates")
        if self.set_size < 2:
            raise ValueError("set_size must be >= 2")
        if self.epsilon < 0:
            raise ValueError("epsilon must be >= 0")
        if self.weight_region is not None and self.weight_region not in REGION_NAMES:
            raise ValueError(f"weight_region must be one of {REGION_NAMES}")
        if self.noise_sigma < 0:
            raise ValueError("noise_sigma must be >= 0")

    def target_function(self):
        if self.target == "flat":
            return lambda x: np.zeros_like(np.asarray(x, dtype=float))
        if self.target == "polynomial":
            coeffs = np.asarray(self.poly_coeffs)
            return lambda x: npoly.polyval(np.asarray(x, dtype=float), coeffs)
        b0, b1 = self.region_bounds
        return lambda x: _piecewise_target(np.asarray(x, dtype=float), b0, b1)

    def region_masks(self, x: np.ndarray) -> dict[str, np.ndarray]:
        b0, b1 = self.region_bounds
        return {
            "easy": x < b0,
            "medium": (x >= b0) & (x < b1),
            "hard": x >= b1,
        }


def _piecewise_target(x: np.ndarray, b0: float, b1: float) -> np.ndarray:
    """Default target: flat on the easy region, gently curved on the medium
    region, high-frequency on the hard region (continuous at both joins)."""
    medium_end = 1.5 * (b1 - b0) ** 2
    return np.where(
        x < b0,
        0.0,
        np.where(
            x < b1,
            1.5 * (x - b0) ** 2,
            medium_end + 0.8 * np.sin(4.0 * np.pi * (x - b1)),
        ),
    )


@dataclass(frozen=True)
class BiasVarReport:
    """Bias/variance/error curves over the degree grid, globally and per region."""

    config: BiasVarConfig
    degrees: tuple[int, ...]
    bias: np.ndarray
    var: np.ndarray
    err: np.ndarray
    region_bias: dict[str, np.ndarray]
    region_var: dict[str, np.ndarray]
    region_err: dict[str, np.ndarray]
    region_proportions: dict[str, float]
    c_star: int
    c_star_easy: int
    c_star_medium: int
    c_star_hard: int
    skipped_degrees: tuple[int, ...] = ()


def _argmin_degree(degrees, err: np.ndarray) -> int:
    # NaN entries are skipped degrees; ties resolve to the smallest degree.
    if np.all(np.isnan(err)):
        raise ValueError("all degrees were skipped (degree >= training-set size)")
    return int(degrees[np.nanargmin(err)])


def run_biasvar(config: BiasVarConfig, workers: int = 1) -> BiasVarReport:
    """Monte Carlo decomposition over the degree grid.

    The same seeded training sets are reused for every degree (common random
    numbers), which stabilizes argmin comparisons across runs that differ
    only in their weighting.  Degrees with more coefficients than training
    points are skipped and flagged.
    """
    rng = np.random.default_rng(config.seed)
    target = config.target_function()
    m, n = config.num_sets, config.set_size
    xs = rng.uniform(-1.0, 1.0, size=(m, n))
    ys = target(xs) + config.noise_sigma * rng.standard_normal((m, n))
    sqrt_w = np.ones_like(xs)
    if config.weight_region is not None and config.epsilon > 0:
        masks = config.region_masks(xs)
        sqrt_w = np.sqrt(1.0 + config.epsilon * masks[config.weight_region])

    grid = np.linspace(-1.0, 1.0, config.eval_points)
    truth = target(grid)
    grid_masks = config.region_masks(grid)
    proportions = {name: float(mask.mean()) for name, mask in grid_masks.items()}

    n_deg = len(config.degrees)
    bias = np.full(n_deg, np.nan)
    var = np.full(n_deg, np.nan)
    region_bias = {name: np.full(n_deg, np.nan) for name in REGION_NAMES}
    region_var = {name: np.full(n_deg, np.nan) for name in REGION_NAMES}
    skipped = []

    def decompose(index_degree):
        i, degree = index_degree
        preds = np.empty((m, grid.size))
        for k in range(m):
            coeffs = npoly.polyfit(xs[k], ys[k], degree, w=sqrt_w[k])
            preds[k] = npoly.polyval(grid, coeffs)
        mean_pred = preds.mean(axis=0)
        var_point = preds.var(axis=0, ddof=1)
        bias_point = (mean_pred - truth) ** 2
        return i, bias_point, var_point

    jobs = [(i, d) for i, d in enumerate(config.degrees) if d + 1 <= n]
    skipped = [d for d in config.degrees if d + 1 > n]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(decompose, jobs))
    else:
        results = [decompose(job) for job in jobs]
    for i, bias_point, var_point in results:
        bias[i] = bias_point.mean()
        var[i] = var_point.mean()
        for name, mask in grid_masks.items():
            region_bias[name][i] = bias_point[mask].mean()
            region_var[name][i] = var_point[mask].mean()

    err = bias + var
    region_err = {name: region_bias[name] + region_var[name] for name in REGION_NAMES}
    return BiasVarReport(
        config=config,
        degrees=config.degrees,
        bias=bias,
        var=var,
        err=err,
        region_bias=region_bias,
        region_var=region_var,
        region_err=region_err,
        region_proportions=proportions,
        c_star=_argmin_degree(config.degrees, err),
        c_star_easy=_argmin_degree(config.degrees, region_err["easy"]),
        c_star_medium=_argmin_degree(config.degrees, region_err["medium"]),
        c_star_hard=_argmin_degree(config.degrees, region_err["hard"]),
        skipped_degrees=tuple(skipped),
    )


def _monotone(values: np.ndarray, direction: int, rel_tol: float) -> bool:
    valid = values[~np.isnan(values)]
    if valid.size < 2:
        return True
    tol = rel_tol * float(valid.max() - valid.min())
    steps = np.diff(valid) * direction
    return bool(np.all(steps >= -tol))


@dataclass(frozen=True)
class AssumptionCheck:
    """Monotonicity of the per-region bias/variance terms and the c* ordering."""

    bias_decreasing: dict[str, bool]
    var_increasing: dict[str, bool]
    ordering_ok: bool
    c_star_easy: int
    c_star: int
    c_star_hard: int

    @property
    def monotonicity_ok(self) -> bool:
        return all(self.bias_decreasing.values()) and all(self.var_increasing.values())

    @property
    def all_ok(self) -> bool:
        return self.monotonicity_ok and self.ordering_ok


def check_assumptions(report: BiasVarReport, rel_tol: float = 0.1) -> AssumptionCheck:
    """Verify the working assumptions on a finished report.

    Per region: squared bias nonincreasing and variance nondecreasing in the
    degree, within a Monte Carlo tolerance of ``rel_tol`` times each curve's
    range.  Additionally the strict ordering c*_easy < c* < c*_hard.
    Failures are reported, never hidden.
    """
    if len(report.degrees) < 4:
        raise ValueError("need at least 4 degrees to check the assumptions")
    bias_ok = {
        name: _monotone(report.region_bias[name], -1, rel_tol) for name in REGION_NAMES
    }
    var_ok = {
        name: _monotone(report.region_var[name], +1, rel_tol) for name in REGION_NAMES
    }
    ordering = report.c_star_easy < report.c_star < report.c_star_hard
    return AssumptionCheck(
        bias_decreasing=bias_ok,
        var_increasing=var_ok,
        ordering_ok=bool(ordering),
        c_star_easy=report.c_star_easy,
        c_star=report.c_star,
        c_star_hard=report.c_star_hard,
    )


@dataclass(frozen=True)
class PropositionCheck:
    ok: bool
    margin: int


def check_proposition(
    base: BiasVarReport, weighted: BiasVarReport, direction: str
) -> PropositionCheck:
    """Compare optimal complexities of a base run and a region-weighted run.

    direction 'hard': upweighting the hard region must not lower c*
    (margin = c*_new - c* >= 0); direction 'easy': must not raise it.
    """
    if direction not in ("hard", "easy"):
        raise ValueError("direction must be 'hard' or 'easy'")
    base_cfg = dataclasses.replace(base.config, epsilon=0.0, weight_region=None)
    weighted_cfg = dataclasses.replace(weighted.config, epsilon=0.0, weight_region=None)
    if base_cfg != weighted_cfg:
        raise ValueError("reports differ beyond the epsilon/weight-region knobs")
    margin = weighted.c_star - base.c_star
    ok = margin >= 0 if direction == "hard" else margin <= 0
    return PropositionCheck(ok=bool(ok), margin=int(margin))
