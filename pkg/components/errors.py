from typing import FrozenSet, Optional


class EulCountError(Exception):
    """Base class for every domain error raised by the library.

    Each error carries a short machine-readable code that the CLI prints
    as ``error: <CODE>: <message>``.
    """

    code = "DOMAIN_ERROR"

    def __init__(self, message: str, code: Optional[str] = None):
        super().__init__(message)
        if code is not None:
            self.code = code

    def one_line(self) -> str:
        return f"{self.code}: {self}"


class GraphParseError(EulCountError):
    """Raised when an edge-list document cannot be parsed."""

    code = "MALFORMED_LINE"

    def __init__(self, message: str, line: int, code: Optional[str] = None):
        super().__init__(f"line {line}: {message}", code)
        self.line = line


class GraphError(EulCountError):
    code = "INVALID_GRAPH"


class PreconditionError(EulCountError):
    code = "BAD_ARGUMENT"


class SizeGuardError(EulCountError):
    code = "SIZE_GUARD"


class ConsistencyError(EulCountError):
    code = "INTERNAL_CONSISTENCY"


class ProbeError(EulCountError):
    code = "LOW_ACCEPTANCE"


class HypothesisError(EulCountError):
    """The graph does not satisfy lambda1 >= sigma * n."""

    code = "OUT_OF_HYPOTHESIS"


class LevelConstructionError(EulCountError):
    """The greedy layering could not place some vertices."""

    code = "LEVEL_STALLED"

    def __init__(self, message: str, stuck: FrozenSet[int]):
        super().__init__(message)
        self.stuck = stuck


class UsageError(EulCountError):
    """A command-line argument that only proves invalid once the input is read."""

    code = "BAD_USAGE"
