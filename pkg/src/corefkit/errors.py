"""Exception types shared across the toolkit."""


class CorefkitError(Exception):
    """Base class for all toolkit errors."""


class ConlluParseError(CorefkitError):
    """Malformed CoNLL-U input; carries the offending 1-based line number."""

    def __init__(self, message: str, line_no: int | None = None):
        if line_no is not None:
            message = f"line {line_no}: {message}"
        super().__init__(message)
        self.line_no = line_no


class TreeValidationError(CorefkitError):
    """A sentence's head links do not form a single-rooted tree."""

    def __init__(self, message: str, sent_id: str | None = None):
        if sent_id is not None:
            message = f"sent_id {sent_id}: {message}"
        super().__init__(message)
        self.sent_id = sent_id


class PartitionError(CorefkitError):
    """A clustering does not partition the expected mention set."""

    def __init__(self, message: str, missing=(), extra=()):
        super().__init__(message)
        self.missing = sorted(missing)
        self.extra = sorted(extra)


class MentionUniverseError(CorefkitError):
    """Two clusterings (or annotation sets) cover different mentions."""


class AuthorizationError(CorefkitError):
    """Caller is not allowed to perform the operation (unscreened, bad token)."""


class LeaseError(CorefkitError):
    """Submission without a valid lease, or a lease conflict."""


class StoreError(CorefkitError):
    """Persistence failure or missing store content."""
