class FnlseError(Exception):
    """Base class for every error raised by this package."""


class DomainError(FnlseError, ValueError):
    """Argument outside the domain of a transform or estimating equation."""


class OutOfRangeError(FnlseError, IndexError):
    """Failure index with no remaining faults (N - i + 1 <= 0)."""


class CriteriaInputError(FnlseError, ValueError):
    """Mismatched lengths or indices passed to an evaluation criterion."""


class DegenerateVarianceError(FnlseError, ArithmeticError):
    """Braun statistic requested on data with zero spread."""


class DatasetTooShortError(FnlseError, ValueError):
    """Dataset has fewer observations than the operation needs."""


class RootFindingError(FnlseError, RuntimeError):
    """Root finder could not produce an answer."""


class NoSignChangeError(RootFindingError):
    """Newton failed and no sign-change bracket exists in the search interval."""


class DatasetParseError(FnlseError, ValueError):
    def __init__(self, message: str, line: int | None = None, text: str | None = None):
        self.line = line
        self.text = text
        where = f" (line {line})" if line is not None else ""
        super().__init__(f"{message}{where}")


class NonPositiveValueError(DatasetParseError):
    def __init__(self, entry: int, value: float, line: int | None = None):
        self.entry = entry
        self.value = value
        super().__init__(f"non-positive failure time {value!r} at entry {entry}", line=line)
