"""Exception hierarchy shared across the package."""


class TvcpError(Exception):
    """Base class for all package-specific errors."""


class SchemaError(TvcpError):
    """Unknown token, out-of-range index, or malformed label value."""


class ContractError(TvcpError):
    """A documented precondition was violated by the caller."""


class DataValidationError(TvcpError):
    """Strict-mode dataset validation failed.

    ``errors`` lists one human-readable message per offending record or
    target group.
    """

    def __init__(self, errors: list[str]):
        self.errors = errors
        preview = "; ".join(errors[:5])
        more = f" (+{len(errors) - 5} more)" if len(errors) > 5 else ""
        super().__init__(f"{len(errors)} validation error(s): {preview}{more}")


class RecordParseError(TvcpError):
    """A dataset line could not be parsed; carries the 1-based line number."""

    def __init__(self, line_no: int, message: str):
        self.line_no = line_no
        super().__init__(f"line {line_no}: {message}")


class FilterConfigError(TvcpError):
    """Filter chain configuration references an unknown stage or bad params."""


class EncoderError(TvcpError):
    """Encoder backend unavailable or failed to produce embeddings."""


class DivergenceError(TvcpError):
    """Training produced a non-finite loss."""

    def __init__(self, epoch: int, batch: int, value: float):
        self.epoch = epoch
        self.batch = batch
        super().__init__(f"non-finite loss {value!r} at epoch {epoch}, batch {batch}")


class NotFoundError(TvcpError):
    """Referenced entity (HIT, submission, annotator) does not exist."""


class StateConflictError(TvcpError):
    """Operation conflicts with current entity state (closed HIT, duplicate vote, ...)."""


class RequestValidationError(TvcpError):
    """Annotation payload failed server-side validation; carries per-entry messages."""

    def __init__(self, errors: list[str]):
        self.errors = errors
        super().__init__("; ".join(errors))
