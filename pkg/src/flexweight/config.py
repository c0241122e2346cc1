"""Run-configuration parsing with exhaustive validation.

Every ``parse_*`` function walks its section of the JSON config, records
every problem it finds (not just the first), and raises ConfigError with
the full list.  On success the parsed domain objects are returned together
with the resolved configuration dictionary that goes into the run manifest.
"""

from __future__ import annotations

import json
from pathlib import Path

from .biasvar import BiasVarConfig
from .datagen import (
    DifficultySkew,
    FlipNoise,
    LongTail,
    MixtureSpec,
    ScenarioSpec,
    UniformNoise,
)
from .difficulty import TargetDensity
from .errors import ConfigError
from .schedule import STABLE_INTERVALS, Adaptive, Fixed, VariedAtEpoch
from .trainer import TrainConfig
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
)

_SCHEME_FAMILIES = (
    "flexw",
    "flexw_spl",
    "flexw_class_scaled",
    "focal",
    "spl_binary",
    "spl_log",
    "class_balance",
    "uniform",
)


def load_config_file(path) -> dict:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}") from exc
    if not isinstance(cfg, dict):
        raise ConfigError(f"{path}: top level must be a JSON object")
    return cfg


class _Section:
    """Field accessor that accumulates problems instead of failing fast."""

    def __init__(self, data: dict, path: str, problems: list[str]):
        self.data = data if isinstance(data, dict) else {}
        self.path = path
        self.problems = problems
        if not isinstance(data, dict):
            problems.append(f"{path}: expected an object")

    def _key(self, name: str) -> str:
        return f"{self.path}.{name}" if self.path else name

    def error(self, name: str, message: str):
        self.problems.append(f"{self._key(name)}: {message}")

    def unknown_keys(self, known):
        for key in self.data:
            if key not in known:
                self.problems.append(f"{self._key(key)}: unknown field")

    def sub(self, name: str, required: bool = False) -> "_Section | None":
        if name not in self.data:
            if required:
                self.error(name, "missing required section")
            return None
        return _Section(self.data[name], self._key(name), self.problems)

    def value(self, name: str, default=None, required: bool = False):
        if name not in self.data:
            if required:
                self.error(name, "missing required field")
            return default
        return self.data[name]

    def number(self, name, default=None, required=False, minimum=None, maximum=None,
               exclusive_minimum=None, exclusive_maximum=None):
        if name not in self.data:
            if required:
                self.error(name, "missing required field")
            return default
        val = self.data[name]
        if isinstance(val, bool) or not isinstance(val, (int, float)):
            self.error(name, f"expected a number, got {type(val).__name__}")
            return default
        val = float(val)
        if minimum is not None and val < minimum:
            self.error(name, f"must be >= {minimum}, got {val}")
        elif maximum is not None and val > maximum:
            self.error(name, f"must be <= {maximum}, got {val}")
        elif exclusive_minimum is not None and val <= exclusive_minimum:
            self.error(name, f"must be > {exclusive_minimum}, got {val}")
        elif exclusive_maximum is not None and val >= exclusive_maximum:
            self.error(name, f"must be < {exclusive_maximum}, got {val}")
        return val

    def integer(self, name, default=None, required=False, minimum=None, maximum=None):
        if name not in self.data:
            if required:
                self.error(name, "missing required field")
            return default
        val = self.data[name]
        if isinstance(val, bool) or not isinstance(val, int):
            self.error(name, f"expected an integer, got {type(val).__name__}")
            return default
        if minimum is not None and val < minimum:
            self.error(name, f"must be >= {minimum}, got {val}")
        elif maximum is not None and val > maximum:
            self.error(name, f"must be <= {maximum}, got {val}")
        return val

    def string(self, name, default=None, required=False, choices=None):
        if name not in self.data:
            if required:
                self.error(name, "missing required field")
            return default
        val = self.data[name]
        if not isinstance(val, str):
            self.error(name, f"expected a string, got {type(val).__name__}")
            return default
        if choices is not None and val not in choices:
            self.error(name, f"must be one of {sorted(choices)}, got {val!r}")
            return default
        return val

    def boolean(self, name, default=None, required=False):
        if name not in self.data:
            if required:
                self.error(name, "missing required field")
            return default
        val = self.data[name]
        if not isinstance(val, bool):
            self.error(name, f"expected a boolean, got {type(val).__name__}")
            return default
        return val


def _finish(problems: list[str]):
    if problems:
        raise ConfigError(problems)


def parse_scheme(section: _Section):
    """Build a WeightScheme from {"family": ..., params...}."""
    family = section.string("family", required=True, choices=_SCHEME_FAMILIES)
    if family is None:
        return None
    try:
        if family == "flexw":
            return FlexW(
                gamma=section.number("gamma", required=True, default=0.0),
                alpha=section.number("alpha", default=0.0),
            )
        if family == "flexw_spl":
            return FlexWSPL(
                gamma=section.number("gamma", required=True, default=0.0),
                alpha=section.number("alpha", default=0.0),
                lam=section.number("lam", required=True, default=1.0),
            )
        if family == "flexw_class_scaled":
            scales = section.value("class_scales", required=True, default=[])
            if not isinstance(scales, list) or not all(
                isinstance(c, (int, float)) and not isinstance(c, bool) for c in scales
            ):
                section.error("class_scales", "expected a list of numbers")
                return None
            return FlexWClassScaled(
                gamma=section.number("gamma", required=True, default=0.0),
                alpha=section.number("alpha", default=0.0),
                class_scales=tuple(scales),
            )
        if family == "focal":
            return Focal(gamma=section.number("gamma", required=True, default=0.0))
        if family == "spl_binary":
            return SPLBinary(lam=section.number("lam", required=True, default=1.0))
        if family == "spl_log":
            return SPLLog(lam=section.number("lam", required=True, default=0.5))
        if family == "class_balance":
            return ClassBalance(beta=section.number("beta", required=True, default=0.0))
        return Uniform()
    except ValueError as exc:
        section.error("family", f"invalid {family} parameters: {exc}")
        return None


def parse_schedule(section: _Section, epochs: int | None):
    kind = section.string(
        "kind", default="fixed", choices=("fixed", "varied", "adaptive")
    )
    if kind == "fixed":
        scheme_sec = section.sub("scheme", required=True)
        scheme = parse_scheme(scheme_sec) if scheme_sec else None
        return Fixed(scheme) if scheme is not None else None
    if kind == "varied":
        first_sec = section.sub("first", required=True)
        second_sec = section.sub("second", required=True)
        switch = section.integer("switch_epoch", required=True, minimum=1)
        first = parse_scheme(first_sec) if first_sec else None
        second = parse_scheme(second_sec) if second_sec else None
        if switch is not None and epochs is not None and switch >= epochs:
            section.error("switch_epoch", f"must be < epochs ({epochs})")
            return None
        if None in (first, second, switch):
            return None
        return VariedAtEpoch(first, second, switch)
    if kind == "adaptive":
        threshold = section.number(
            "shift_threshold", default=0.2, exclusive_minimum=0.0, maximum=1.0
        )
        include_two_ends = section.boolean("include_two_ends", default=False)
        try:
            return Adaptive(shift_threshold=threshold, include_two_ends=include_two_ends)
        except ValueError as exc:
            section.error("shift_threshold", str(exc))
            return None
    return None


def parse_dataset(section: _Section) -> ScenarioSpec | None:
    base = MixtureSpec(
        classes=section.integer("classes", default=10, minimum=2),
        dims=section.integer("dims", default=16, minimum=1),
        per_class=section.integer("per_class", default=500, minimum=2),
        separation=section.number("separation", default=3.0, minimum=0.0),
        spread=section.number("spread", default=1.0, exclusive_minimum=0.0),
        seed=section.integer("seed", default=0),
    )
    modifier = None
    mod_sec = section.sub("modifier")
    if mod_sec is not None and mod_sec.data:
        kind = mod_sec.string(
            "kind",
            required=True,
            choices=("flip_noise", "uniform_noise", "long_tail", "difficulty_skew"),
        )
        try:
            if kind == "flip_noise":
                modifier = FlipNoise(
                    rate=mod_sec.number("rate", required=True, default=0.0,
                                        minimum=0.0, exclusive_maximum=1.0)
                )
            elif kind == "uniform_noise":
                modifier = UniformNoise(
                    rate=mod_sec.number("rate", required=True, default=0.0,
                                        minimum=0.0, exclusive_maximum=1.0)
                )
            elif kind == "long_tail":
                modifier = LongTail(
                    imbalance_factor=mod_sec.number("imbalance_factor", required=True,
                                                    default=1.0, minimum=1.0)
                )
            elif kind == "difficulty_skew":
                modifier = DifficultySkew(
                    kind=mod_sec.string("skew", required=True, default="e",
                                        choices=("e", "h", "m", "b")),
                    keep_n=mod_sec.integer("keep_n", required=True, default=1, minimum=1),
                    probe_epochs=mod_sec.integer("probe_epochs", default=10, minimum=1),
                )
        except ValueError as exc:
            mod_sec.error("kind", f"invalid modifier parameters: {exc}")
    if section.problems:
        return None
    return ScenarioSpec(base=base, modifier=modifier)


def parse_train(section: _Section) -> TrainConfig | None:
    epochs = section.integer("epochs", default=100, minimum=1)
    drops = section.value("lr_drop_epochs")
    if drops is not None:
        if not isinstance(drops, list) or not all(
            isinstance(e, int) and not isinstance(e, bool) for e in drops
        ):
            section.error("lr_drop_epochs", "expected a list of integers")
            drops = None
        else:
            drops = tuple(drops)
    hidden = None
    if "hidden" in section.data and section.data["hidden"] is not None:
        hidden = section.integer("hidden", minimum=1)
    schedule = None
    scheme = None
    sched_sec = section.sub("schedule")
    if sched_sec is not None:
        schedule = parse_schedule(sched_sec, epochs)
    else:
        scheme_sec = section.sub("scheme")
        if scheme_sec is not None:
            scheme = parse_scheme(scheme_sec)
        else:
            scheme = Uniform()
    kwargs = dict(
        epochs=epochs,
        batch_size=section.integer("batch_size", default=32, minimum=1),
        lr=section.number("learning_rate", default=0.1, exclusive_minimum=0.0),
        momentum=section.number("momentum", default=0.9, minimum=0.0, exclusive_maximum=1.0),
        weight_decay=section.number("weight_decay", default=5e-4, minimum=0.0),
        lr_drop_epochs=drops,
        lr_drop_factor=section.number("lr_drop_factor", default=0.2,
                                      exclusive_minimum=0.0, maximum=1.0),
        seed=section.integer("seed", default=0),
        hidden=hidden if "hidden" in section.data else 64,
        bins=section.integer("bins", default=32, minimum=2),
        track_clean_noisy=section.boolean("track_clean_noisy", default=False),
    )
    if section.problems:
        return None
    try:
        return TrainConfig(scheme=scheme, schedule=schedule, **kwargs)
    except ValueError as exc:
        section.error("epochs", str(exc))
        return None


def parse_search(section: _Section):
    """Grid-search settings: (intervals dict, steps, eval_budget)."""
    mode_names = {m.value: m for m in PriorityMode if m is not PriorityMode.FLAT}
    modes = section.value("modes", default=["easy_first", "hard_first"])
    if not isinstance(modes, list) or not all(isinstance(m, str) for m in modes):
        section.error("modes", "expected a list of priority-mode names")
        modes = []
    selected = []
    for name in modes:
        if name not in mode_names:
            section.error("modes", f"unknown mode {name!r}")
        else:
            selected.append(mode_names[name])
    steps = section.integer("steps", default=3, minimum=2)
    budget = None
    if section.value("eval_budget") is not None:
        budget = section.integer("eval_budget", minimum=1)
    intervals = {}
    override = section.sub("intervals")
    for mode in selected:
        intervals[mode] = STABLE_INTERVALS[mode]
    if override is not None:
        for name, boxes in override.data.items():
            if name not in mode_names:
                override.error(name, "unknown mode")
                continue
            parsed_boxes = []
            ok = isinstance(boxes, list) and boxes
            if ok:
                for box in boxes:
                    if (
                        not isinstance(box, list)
                        or len(box) != 4
                        or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in box)
                    ):
                        ok = False
                        break
                    g_lo, g_hi, a_lo, a_hi = (float(v) for v in box)
                    parsed_boxes.append(((g_lo, g_hi), (a_lo, a_hi)))
            if not ok:
                override.error(name, "expected a list of [gamma_lo, gamma_hi, alpha_lo, alpha_hi] boxes")
            else:
                intervals[mode_names[name]] = tuple(parsed_boxes)
    if section.problems:
        return None
    return intervals, steps, budget


def parse_target_density(section: _Section | None) -> TargetDensity | None:
    if section is None or not section.data:
        return TargetDensity.uniform()
    kind = section.string("kind", default="uniform", choices=("uniform", "binned"))
    if kind == "uniform":
        return TargetDensity.uniform()
    edges = section.value("edges", required=True)
    densities = section.value("densities", required=True)
    for name, seq in (("edges", edges), ("densities", densities)):
        if seq is not None and (
            not isinstance(seq, list)
            or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in seq)
        ):
            section.error(name, "expected a list of numbers")
            return None
    if edges is None or densities is None:
        return None
    try:
        return TargetDensity.binned(edges, densities)
    except (ValueError, TypeError) as exc:
        section.error("densities", str(exc))
        return None


def parse_biasvar(section: _Section) -> BiasVarConfig | None:
    degrees = section.value("degrees")
    if degrees is not None:
        if not isinstance(degrees, list) or not all(
            isinstance(d, int) and not isinstance(d, bool) for d in degrees
        ):
            section.error("degrees", "expected a list of integers")
            degrees = None
        else:
            degrees = tuple(degrees)
    else:
        max_degree = section.integer("max_degree", default=8, minimum=3)
        degrees = tuple(range((max_degree or 8) + 1))
    bounds = section.value("region_bounds", default=[-1.0 / 3.0, 1.0 / 3.0])
    if (
        not isinstance(bounds, list)
        or len(bounds) != 2
        or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in bounds)
    ):
        section.error("region_bounds", "expected [lower, upper]")
        bounds = (-1.0 / 3.0, 1.0 / 3.0)
    coeffs = section.value("poly_coeffs", default=[])
    if not isinstance(coeffs, list) or not all(
        isinstance(v, (int, float)) and not isinstance(v, bool) for v in coeffs
    ):
        section.error("poly_coeffs", "expected a list of numbers")
        coeffs = []
    kwargs = dict(
        target=section.string("target", default="piecewise",
                              choices=("piecewise", "polynomial", "flat")),
        poly_coeffs=tuple(coeffs),
        noise_sigma=section.number("noise_sigma", default=0.25, minimum=0.0),
        region_bounds=tuple(float(b) for b in bounds),
        degrees=degrees,
        num_sets=section.integer("num_sets", default=100, minimum=50),
        set_size=section.integer("set_size", default=64, minimum=2),
        epsilon=section.number("epsilon", default=1.0, minimum=0.0),
        seed=section.integer("seed", default=0),
        eval_points=section.integer("eval_points", default=400, minimum=16),
    )
    if section.problems:
        return None
    try:
        return BiasVarConfig(**kwargs)
    except ValueError as exc:
        section.error("target", str(exc))
        return None


__all__ = [
    "ConfigError",
    "load_config_file",
    "_Section",
    "parse_scheme",
    "parse_schedule",
    "parse_dataset",
    "parse_train",
    "parse_search",
    "parse_target_density",
    "parse_biasvar",
    "_finish",
]
