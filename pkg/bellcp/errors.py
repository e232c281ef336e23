"""
Exception hierarchy.

Every error carries the CLI exit status it maps to, so the command layer
can turn any library failure into the documented exit code without a
lookup table.
"""

EXIT_USAGE = 2
EXIT_VALIDATION = 3
EXIT_IO = 4
EXIT_STATISTICAL = 5


class BellcpError(Exception):
    exit_code: int = EXIT_VALIDATION


class InvalidDistribution(BellcpError, ValueError):
    """Weights are negative, exceed 1, fail to normalize, or repeat an atom."""


class InvalidDataset(InvalidDistribution):
    """An observational dataset violates its structural invariants."""


class ZeroConditioningEvent(BellcpError, ZeroDivisionError):
    """Conditioning on an event of probability zero."""


class InconsistentMarginals(BellcpError):
    """Single-variable marginals differ across contexts (signaling data)."""

    def __init__(self, max_delta, tol) -> None:
        self.max_delta = max_delta
        self.tol = tol
        super().__init__(
            f"marginals differ across contexts by {float(max_delta):.3g} > tol {float(tol):.3g}; "
            "Fine feasibility is defined for non-signaling data only"
        )


class OutOfRange(BellcpError, ValueError):
    """A shifted probability cell would leave [0, 1]."""


class MalformedDocument(BellcpError, ValueError):
    """A JSON document does not match its schema."""


class MalformedRecord(BellcpError, ValueError):
    """A trial-log line cannot be parsed or violates the zero-value convention."""

    def __init__(self, line: int, reason: str) -> None:
        self.line = line
        self.reason = reason
        super().__init__(f"line {line}: {reason}")


class EmptyContext(BellcpError):
    """A setting pair (i, j) has no trials."""

    exit_code = EXIT_STATISTICAL

    def __init__(self, i: int, j: int) -> None:
        self.i = i
        self.j = j
        super().__init__(f"no trials recorded for context ({i},{j})")
