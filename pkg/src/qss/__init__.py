"""Construction and brute-force certification of perfect quantum secret sharing schemes."""

from .access import AccessStructure, normalize
from .errors import (
    AuditError,
    CapExceeded,
    CommutationError,
    ConstructionError,
    DomainError,
    FormatError,
    NoCloningError,
    NotFoundError,
    QSSError,
    UnauthorizedError,
)
from .hybrid import HybridScheme, build_hybrid
from .schemes import Scheme, build_general, build_threshold

__all__ = [
    "AccessStructure",
    "AuditError",
    "CapExceeded",
    "CommutationError",
    "ConstructionError",
    "DomainError",
    "FormatError",
    "HybridScheme",
    "NoCloningError",
    "NotFoundError",
    "QSSError",
    "Scheme",
    "UnauthorizedError",
    "build_general",
    "build_hybrid",
    "build_threshold",
    "normalize",
]
