from typing import Any, Iterable, Optional

__all__ = (
    "TCopulaError",
    "DomainError",
    "ShapeError",
    "ConvergenceError",
    "DataError",
    "SelectionError",
    "ValidationError",
)


class TCopulaError(Exception):
    pass


class DomainError(TCopulaError, ValueError):
    pass


class ShapeError(TCopulaError, ValueError):
    pass


class ConvergenceError(TCopulaError):
    def __init__(
        self, message: str, best: Any = None, abs_error: Any = None
    ) -> None:
        super().__init__(message)
        self.best = best
        self.abs_error = abs_error


class DataError(TCopulaError):
    def __init__(
        self,
        message: str,
        line: Optional[int] = None,
        column: Optional[str] = None,
    ) -> None:
        super().__init__(message)
        self.line = line
        self.column = column


class SelectionError(TCopulaError):
    pass


class ValidationError(TCopulaError):
    def __init__(self, problems: Iterable[str]) -> None:
        self.problems = list(problems)
        super().__init__(
            "Invalid run configuration:\n"
            + "\n".join(f"  - {problem}" for problem in self.problems)
        )
