"""Exception hierarchy shared by all modules."""


class QSSError(Exception):
    """Base class for every error raised by this package."""


class DomainError(QSSError, ValueError):
    """An argument lies outside the domain of an operation."""


class NotFoundError(QSSError, LookupError):
    """A requested object (codeword, readout word, ...) does not exist."""


class CapExceeded(QSSError, MemoryError):
    """A dense computation would exceed the configured size cap."""


class ConstructionError(QSSError):
    """A requested scheme cannot be built as specified."""


class NoCloningError(ConstructionError):
    """The requested access structure would let two disjoint sets copy the secret."""


class CommutationError(ConstructionError):
    """Stabilizer generators fail to commute."""


class UnauthorizedError(QSSError, PermissionError):
    """An operation needing an authorized set was given an unauthorized one."""


class FormatError(QSSError, ValueError):
    """A serialized descriptor is malformed."""


class AuditError(QSSError, AssertionError):
    """A share-size audit found a bound violation (indicates a construction bug)."""
