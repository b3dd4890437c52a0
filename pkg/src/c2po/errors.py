"""Exception hierarchy shared across the pipeline."""


class C2POError(Exception):
    """Base class for all pipeline errors."""


class ParseError(C2POError):
    """Malformed annotated-fixture markup."""

    def __init__(self, message: str, line: int = 0, column: int = 0):
        self.line = line
        self.column = column
        if line:
            message = f"line {line}, col {column}: {message}"
        super().__init__(message)


class IntegrityError(C2POError):
    """A span or surface string disagrees with the source text."""


class NoCharacterError(C2POError):
    """No coreference cluster available to select from."""


class UnknownCharacterError(C2POError):
    """Requested character name matches no cluster."""


class InsufficientPlotError(C2POError):
    """Fewer than two plot points aligned to the selected character."""


class TableFormatError(C2POError):
    """Knowledge table file violates the TSV schema."""

    def __init__(self, message: str, row: int = 0):
        self.row = row
        if row:
            message = f"row {row}: {message}"
        super().__init__(message)


class ValidationError(C2POError):
    """A domain-type invariant was violated."""


class TransportError(C2POError):
    """Wire backend unreachable, timed out, or answered non-200."""


class ProtocolError(TransportError):
    """Wire backend answered 200 with a body that violates the schema."""


class AssemblyError(C2POError):
    """Bridge endpoints do not line up when forming the story graph."""


class GraphFormatError(C2POError):
    """Serialized graph/outline/path document violates its schema."""


class ContractViolationError(C2POError):
    """A precondition the caller promised does not hold (e.g. unpruned graph)."""


class InternalError(C2POError):
    """An internal invariant broke; indicates a bug, not bad input."""
