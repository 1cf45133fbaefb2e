"""Exception hierarchy. Each family maps onto one CLI exit code."""


class ClosedWalksError(Exception):
    exit_code = 1
    kind = "error"


class ConfigError(ClosedWalksError, ValueError):
    """Contradictory or out-of-range parameters, rejected before any work."""

    exit_code = 2
    kind = "config"


class DataError(ClosedWalksError, ValueError):
    exit_code = 3
    kind = "data"


class EdgeListParseError(DataError):
    def __init__(self, path, line_no, line):
        self.path = str(path)
        self.line_no = line_no
        self.line = line
        super().__init__(f"{path}:{line_no}: expected 'u v' integer pair, got {line!r}")


class EmptyGraphError(DataError):
    pass


class NodeIndexError(DataError, IndexError):
    pass


class EstimationError(ClosedWalksError):
    """No closed walks observed, or every walk length came back undefined."""

    exit_code = 4
    kind = "estimation"


class IndeterminateEstimate(EstimationError):
    """A trace difference that should be positive was not."""


class BudgetExhausted(ClosedWalksError):
    exit_code = 4
    kind = "budget"
