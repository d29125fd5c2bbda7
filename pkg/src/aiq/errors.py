"""Exception hierarchy shared across the framework.

Every domain failure carries a stable machine-readable ``code`` so the CLI
and the HTTP API can map it without string matching.
"""

from __future__ import annotations


class DomainError(Exception):
    """Base class for all expected, recoverable failures."""

    code = "domain_error"

    def __init__(self, message: str):
        super().__init__(message)
        self.message = message


class ParseError(DomainError):
    """Input file is syntactically unreadable or internally inconsistent."""

    code = "parse_error"


class SchemaViolation(DomainError):
    """A well-formed file violates the declared schema or an invariant."""

    code = "schema_violation"

    def __init__(self, field: str, reason: str):
        super().__init__(f"{field}: {reason}")
        self.field = field
        self.reason = reason


class ConfigInvalid(DomainError):
    code = "config_invalid"


class UnknownSubject(DomainError):
    code = "unknown_subject"


class SubjectExists(DomainError):
    code = "subject_exists"


class InvalidBattery(DomainError):
    code = "invalid_battery"


class UnknownSession(DomainError):
    code = "unknown_session"


class SessionAborted(DomainError):
    code = "session_aborted"


class SessionIncomplete(DomainError):
    code = "session_incomplete"


class StoreWriteError(DomainError):
    code = "store_write_error"


class ItemResponseMismatch(DomainError):
    code = "item_response_mismatch"


class InvalidWeights(DomainError):
    code = "invalid_weights"


class InvalidAbilityScores(DomainError):
    code = "invalid_ability_scores"


class NotPending(DomainError):
    code = "not_pending"


class OutOfRange(DomainError):
    code = "out_of_range"


class UnknownItem(DomainError):
    code = "unknown_item"


class UnsortedObservations(DomainError):
    code = "unsorted_observations"


class ProfileInvalid(DomainError):
    code = "profile_invalid"


class DuplicateSubject(DomainError):
    code = "duplicate_subject"


class InsufficientData(DomainError):
    code = "insufficient_data"


class UnknownBaseline(DomainError):
    code = "unknown_baseline"
