"""Exception hierarchy shared by the library and the command line."""


class RegimeTestError(Exception):
    """Base class for every error raised by regimetest."""


class InputError(RegimeTestError, ValueError):
    """Malformed or out-of-range input (bad prices, bad config, bad file)."""


class SeriesFormatError(InputError):
    """A series file could not be parsed; ``line`` is 1-based when known."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class DegenerateStatisticError(RegimeTestError):
    """The squeeze-duration statistic is undefined for this series."""


class InsufficientDurationsError(DegenerateStatisticError):
    """Too few completed squeezes for the requested number of moments."""


class ZeroVarianceError(DegenerateStatisticError):
    """All squeeze durations are equal, so skewness/kurtosis are undefined."""


class InadmissibleSummaryError(InputError):
    """No admissible regime-switching model matches the series summary."""


class StepSizeError(InputError):
    """Transition probability per step exceeds the configured cap."""


class InferenceError(RegimeTestError):
    """Surrogate ensemble could not be completed for a parameter point."""

    def __init__(self, message, theta_label=None):
        if theta_label is not None:
            message = f"[{theta_label}] {message}"
        super().__init__(message)
        self.theta_label = theta_label


class RedrawBudgetExhausted(InferenceError):
    """Too many degenerate surrogate paths for one parameter point."""
