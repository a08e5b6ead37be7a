"""
Error hierarchy shared by the engine, the CLI and the MCP tools.

Every error knows the process exit status the CLI reports for it and the
label printed in front of its message.
"""

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_CHECK_FAILED = 2


class SpicError(Exception):
    exit_status = EXIT_ERROR
    label = None

    @classmethod
    def class_label(cls) -> str:
        return cls.label or cls.__name__


# network documents
class DocumentSyntaxError(SpicError):
    # reported under the name used in the file-format docs
    label = "SyntaxError"


class ShapeError(SpicError):
    pass


class CycleError(SpicError):
    pass


class CovarianceError(SpicError):
    pass


class DanglingRef(SpicError):
    pass


class UnknownNode(SpicError):
    pass


# generalized distributions
class CombinabilityError(SpicError):
    pass


class MemberClash(SpicError):
    pass


class UnknownMember(SpicError):
    pass


class UnknownExternal(SpicError):
    pass


class DegenerateEvidence(SpicError):
    pass


class ExternalsPresent(SpicError):
    pass


# trees and queries
class EmptyComponent(SpicError):
    pass


class QueryError(SpicError):
    pass


class CheckFailure(SpicError):
    exit_status = EXIT_CHECK_FAILED


__all__ = [
    "EXIT_OK",
    "EXIT_ERROR",
    "EXIT_CHECK_FAILED",
    "SpicError",
    "DocumentSyntaxError",
    "ShapeError",
    "CycleError",
    "CovarianceError",
    "DanglingRef",
    "UnknownNode",
    "CombinabilityError",
    "MemberClash",
    "UnknownMember",
    "UnknownExternal",
    "DegenerateEvidence",
    "ExternalsPresent",
    "EmptyComponent",
    "QueryError",
    "CheckFailure",
]
