"""Exception types shared across the package."""


class SingularInputError(ValueError):
    """An input hits a pole of a weight function (e.g. 0 raised to a negative power)."""


class DegenerateBatchError(RuntimeError):
    """Every raw weight in a batch is zero, so normalization is impossible."""


class AmbiguousCurveError(ValueError):
    """A weight or density-ratio curve has more than one significant direction change."""


class ConfigError(ValueError):
    """A run configuration failed validation; carries the full list of problems."""

    def __init__(self, problems):
        if isinstance(problems, str):
            problems = [problems]
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))
