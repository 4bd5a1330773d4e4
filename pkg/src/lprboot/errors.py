"""Exception and warning types raised across the package."""

import numpy as np


class LprbootError(Exception):
    """Base class for all package errors."""


class ZeroVarianceColumn(LprbootError, ValueError):
    def __init__(self, column):
        self.column = int(column)
        super().__init__(f"column {self.column} has (near) zero variance")


class DimensionMismatch(LprbootError, ValueError):
    pass


class SingularSystem(LprbootError, np.linalg.LinAlgError):
    pass


class InvalidFoldCount(LprbootError, ValueError):
    pass


class AllFitsFailed(LprbootError, RuntimeError):
    pass


class EmptySamples(LprbootError, ValueError):
    pass


class NotPositiveDefinite(LprbootError, ValueError):
    pass


class ZeroSignal(LprbootError, ValueError):
    pass


class RankDeficient(LprbootError, np.linalg.LinAlgError):
    pass


class TooFewColumns(LprbootError, ValueError):
    pass


class SingularC11(LprbootError, np.linalg.LinAlgError):
    pass


class EmptyRecords(LprbootError, ValueError):
    pass


class ScenarioError(LprbootError, ValueError):
    """Scenario validation failure; ``problems`` lists one message per bad field."""

    def __init__(self, problems):
        self.problems = list(problems)
        super().__init__("invalid scenario: " + "; ".join(self.problems))


class CsvParseError(LprbootError, ValueError):
    def __init__(self, path, row, column, message):
        self.path, self.row, self.column = str(path), row, column
        super().__init__(f"{path}: row {row}, column {column}: {message}")


# Non-fatal conditions. The affected result is still returned and carries a flag.

class NotConverged(UserWarning):
    pass


class DegenerateResiduals(UserWarning):
    pass


class RankCollapse(UserWarning):
    pass
