"""Epoch-level scheme selection and hyper-parameter grid search.

Schedules decide which weighting scheme drives each epoch: fixed, switched
at a chosen epoch, or adaptive (re-inferring the priority mode whenever the
training difficulty distribution drifts).  The grid-search helper sweeps
the stable (gamma, alpha) boxes of each priority mode.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from .difficulty import DifficultyProfile, TargetDensity, tau_curve
from .weighting import FlexW, PriorityMode, Uniform, WeightScheme

# Recommended (gamma, alpha) pairs per priority mode.
DEFAULT_MODE_PARAMS: dict[PriorityMode, tuple[float, float]] = {
    PriorityMode.EASY_FIRST: (-0.5, 0.15),
    PriorityMode.HARD_FIRST: (0.5, 0.15),
    PriorityMode.MEDIUM_FIRST: (0.5, 0.58),
    PriorityMode.TWO_ENDS_FIRST: (-0.5, 0.58),
}

# (gamma, alpha) boxes in which each mode's performance is stable.
STABLE_INTERVALS: dict[PriorityMode, tuple[tuple[tuple[float, float], tuple[float, float]], ...]] = {
    PriorityMode.EASY_FIRST: (((-0.6, -0.2), (0.1, 0.4)), ((0.2, 0.6), (0.9, 1.2))),
    PriorityMode.MEDIUM_FIRST: (((0.2, 0.6), (0.4, 0.8)),),
    PriorityMode.HARD_FIRST: (((0.2, 0.6), (0.1, 0.4)), ((-0.6, -0.2), (0.9, 1.2))),
    PriorityMode.TWO_ENDS_FIRST: (((-0.6, -0.2), (0.4, 0.8)),),
}

_MODE_ORDER = (
    PriorityMode.EASY_FIRST,
    PriorityMode.MEDIUM_FIRST,
    PriorityMode.HARD_FIRST,
    PriorityMode.TWO_ENDS_FIRST,
)


@dataclass(frozen=True)
class Fixed:
    scheme: WeightScheme


@dataclass(frozen=True)
class VariedAtEpoch:
    """Use ``first`` before ``switch_epoch`` and ``second`` from it onward."""

    first: WeightScheme
    second: WeightScheme
    switch_epoch: int

    def __post_init__(self):
        if self.switch_epoch < 1:
            raise ValueError("switch_epoch must be >= 1")


@dataclass(frozen=True)
class Adaptive:
    """Re-infer the priority mode from the difficulty density-ratio curve.

    The trainer re-runs inference when the total-variation shift between
    consecutive epoch profiles exceeds ``shift_threshold``.  Two-ends-first
    is excluded from the candidate set unless explicitly enabled; inferred
    flat or excluded modes fall back to uniform weighting.
    """

    p_opt: TargetDensity = field(default_factory=TargetDensity.uniform)
    shift_threshold: float = 0.2
    mode_params: tuple[tuple[PriorityMode, tuple[float, float]], ...] | None = None
    include_two_ends: bool = False

    def __post_init__(self):
        if not 0.0 < self.shift_threshold <= 1.0:
            raise ValueError("shift_threshold must lie in (0, 1]")

    def params_for(self, mode: PriorityMode) -> tuple[float, float] | None:
        table = dict(self.mode_params) if self.mode_params else DEFAULT_MODE_PARAMS
        return table.get(mode)


@dataclass(frozen=True)
class GridSearch:
    """Search-box description: per-mode (gamma, alpha) intervals and grid steps."""

    intervals: tuple[tuple[PriorityMode, tuple], ...] = tuple(
        (m, STABLE_INTERVALS[m]) for m in _MODE_ORDER
    )
    steps: int = 3

    def __post_init__(self):
        if not self.intervals:
            raise ValueError("intervals must be nonempty")
        if self.steps < 2:
            raise ValueError("steps must be >= 2 per axis")


ModeSchedule = Fixed | VariedAtEpoch | Adaptive | GridSearch


def mode_at_epoch(
    schedule: ModeSchedule,
    epoch: int,
    latest_profile: DifficultyProfile | None = None,
) -> WeightScheme:
    """The weighting scheme a schedule prescribes for the given epoch.

    Pure in (schedule, epoch, profile).  Adaptive schedules with no profile
    yet (epoch 1) fall back to the easy-first parameters: early training is
    dominated by high-loss samples, so easy-first is the safe default.
    """
    if epoch < 1:
        raise ValueError("epoch must be >= 1")
    if isinstance(schedule, Fixed):
        return schedule.scheme
    if isinstance(schedule, VariedAtEpoch):
        return schedule.first if epoch < schedule.switch_epoch else schedule.second
    if isinstance(schedule, Adaptive):
        if latest_profile is None:
            return FlexW(*schedule.params_for(PriorityMode.EASY_FIRST))
        mode = tau_curve(schedule.p_opt, latest_profile).inferred_mode
        if mode is None or mode is PriorityMode.FLAT:
            return Uniform()
        if mode is PriorityMode.TWO_ENDS_FIRST and not schedule.include_two_ends:
            return Uniform()
        params = schedule.params_for(mode)
        if params is None:
            return Uniform()
        return FlexW(*params)
    if isinstance(schedule, GridSearch):
        raise TypeError("a grid-search spec does not prescribe a per-epoch scheme")
    raise TypeError(f"unknown schedule: {schedule!r}")


@dataclass(frozen=True)
class SearchRow:
    mode: PriorityMode
    gamma: float
    alpha: float
    accuracy: float


@dataclass(frozen=True)
class SearchResult:
    """Grid table plus the winning cells; ``complete`` is False when the
    evaluation budget ran out before the grid finished."""

    rows: tuple[SearchRow, ...]
    best: SearchRow
    best_per_mode: dict[PriorityMode, SearchRow]
    complete: bool


def _rank_key(row: SearchRow):
    # Highest accuracy wins; ties prefer smaller |gamma|, then smaller alpha.
    return (-row.accuracy, abs(row.gamma), row.alpha, row.gamma)


def _axis_values(lo: float, hi: float, steps: int) -> list[float]:
    if lo > hi:
        raise ValueError(f"interval bounds out of order: [{lo}, {hi}]")
    if lo == hi:
        return [float(lo)]
    step = (hi - lo) / (steps - 1)
    return [float(lo + i * step) for i in range(steps)]


def grid_cells(intervals, steps: int) -> list[tuple[PriorityMode, float, float]]:
    """Deterministic cell enumeration: mode order, then gamma, then alpha."""
    table = dict(intervals)
    cells = []
    for mode in _MODE_ORDER:
        if mode not in table:
            continue
        boxes = table[mode]
        for (g_lo, g_hi), (a_lo, a_hi) in boxes:
            for gamma in _axis_values(g_lo, g_hi, steps):
                for alpha in _axis_values(a_lo, a_hi, steps):
                    cells.append((mode, gamma, alpha))
    return cells


def grid_search(
    intervals,
    steps: int,
    eval_budget: int | None,
    runner,
    workers: int = 1,
) -> SearchResult:
    """Evaluate ``runner(gamma, alpha) -> validation accuracy`` over the grid.

    Cells may run concurrently; the table is assembled by cell index, so the
    result is independent of completion order.
    """
    if steps < 2:
        raise ValueError("steps must be >= 2 per axis")
    cells = grid_cells(intervals, steps)
    complete = True
    if eval_budget is not None and eval_budget < len(cells):
        cells = cells[:eval_budget]
        complete = False
    if not cells:
        raise ValueError("empty search grid")
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            accuracies = list(pool.map(lambda c: runner(c[1], c[2]), cells))
    else:
        accuracies = [runner(gamma, alpha) for _, gamma, alpha in cells]
    rows = tuple(
        SearchRow(mode, gamma, alpha, float(acc))
        for (mode, gamma, alpha), acc in zip(cells, accuracies)
    )
    best = min(rows, key=_rank_key)
    best_per_mode = {}
    for mode in _MODE_ORDER:
        mode_rows = [r for r in rows if r.mode is mode]
        if mode_rows:
            best_per_mode[mode] = min(mode_rows, key=_rank_key)
    return SearchResult(rows=rows, best=best, best_per_mode=best_per_mode, complete=complete)
