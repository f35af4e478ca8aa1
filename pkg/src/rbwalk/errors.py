"""Exception types raised across the package."""


class GraphParseError(ValueError):
    """Malformed edge-list input."""

    def __init__(self, message, lineno=None):
        self.lineno = lineno
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)


class GraphValidationError(ValueError):
    """Graph fails a structural precondition (connectivity, self loops)."""

    def __init__(self, report):
        self.report = report
        super().__init__("; ".join(report.problems) or "invalid graph")


class ConvergenceError(RuntimeError):
    """Power iteration did not reach the requested residual."""

    def __init__(self, message, residual):
        self.residual = residual
        super().__init__(f"{message} (last residual {residual:.3e})")


class CertificationError(AssertionError):
    """A numerical certification failed.

    ``instance`` carries whatever reproduces the failure (typically a
    generator matrix and the offending value).
    """

    def __init__(self, message, instance=None):
        self.instance = instance
        super().__init__(message)
