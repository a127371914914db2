"""Exception hierarchy. Each class maps to a distinct CLI exit code."""


class LocrecError(Exception):
    exit_code = 1


class ConfigError(LocrecError):
    """Invalid configuration or usage."""

    exit_code = 2


class DataError(LocrecError):
    """Input data could not be read or failed validation."""

    exit_code = 3

    def __init__(self, message, rows=()):
        super().__init__(message)
        self.rows = list(rows)


class ScenarioError(LocrecError):
    """A scenario could not be evaluated (e.g. nothing left to train on)."""

    exit_code = 4
