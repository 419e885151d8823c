"""Exception hierarchy for the access-control engine.

Every rejected operation raises a subclass of :class:`OsrError`; the class
name doubles as the stable error token surfaced by the CLI and the HTTP
service (``error.token``).
"""

from __future__ import annotations


class OsrError(Exception):
    """Base class for all policy/store errors."""

    @property
    def token(self) -> str:
        return type(self).__name__


# --- identity / lookup -------------------------------------------------

class DuplicateId(OsrError):
    pass


class NotFound(OsrError):
    pass


class DanglingReference(OsrError):
    pass


# --- role graph --------------------------------------------------------

class CycleDetected(OsrError):
    pass


class ContainmentViolated(OsrError):
    pass


class ConflictAsymmetry(OsrError):
    pass


class BuiltinRoleImmutable(OsrError):
    pass


class RoleNotUserAssignable(OsrError):
    pass


# --- separation of duty ------------------------------------------------

class StaticConflict(OsrError):
    def __init__(self, message: str, pair: tuple[str, str] | None = None):
        super().__init__(message)
        self.pair = pair


class DynamicConflict(OsrError):
    def __init__(self, message: str, pair: tuple[str, str] | None = None):
        super().__init__(message)
        self.pair = pair


class NotInMaxRoles(OsrError):
    pass


# --- attribute gateway -------------------------------------------------

class UnknownAttribute(OsrError):
    pass


class TypeMismatch(OsrError):
    pass


# --- rights registry / matrix -------------------------------------------

class UnregisteredRight(OsrError):
    pass


class UnknownRequest(OsrError):
    pass


class UnknownTargetKind(OsrError):
    pass


class MissingParams(OsrError):
    pass


class SubjectNotFound(OsrError):
    pass


class TargetNotFound(OsrError):
    pass


# --- persistence -------------------------------------------------------

class ParseError(OsrError):
    """Malformed store/trace/matrix file. Carries file and line."""

    def __init__(self, message: str, path: str = "", line: int = 0):
        where = f"{path}:{line}: " if path else ""
        super().__init__(f"{where}{message}")
        self.path = path
        self.line = line


class InvariantViolation(OsrError):
    pass


class IoFailure(OsrError):
    pass


class StoreNotEmpty(OsrError):
    pass


# --- simulator ---------------------------------------------------------

class UnknownSyscall(OsrError):
    pass


class UnmediatedSyscall(OsrError):
    """Raised by the mapper for declared pass-through syscalls."""


class TraceParseError(ParseError):
    pass


class MissingContext(OsrError):
    pass


class NotExecutable(OsrError):
    pass


# --- admin surface -----------------------------------------------------

class PermissionDenied(OsrError):
    """Admin command refused by its gating decision."""

    def __init__(self, message: str, decision=None):
        super().__init__(message)
        self.decision = decision
