"""Exception hierarchy. Each class carries the CLI exit code it maps to."""


class EntgroupError(Exception):
    exit_code = 1


class ParseError(EntgroupError):
    exit_code = 2


class ValidationError(EntgroupError, ValueError):
    exit_code = 3


class ScopeError(EntgroupError):
    """Input is outside the combinatorial scope guard (too many parties)."""

    exit_code = 4


class NotAStabilizerError(EntgroupError):
    exit_code = 5


class MetadataMissingError(EntgroupError):
    exit_code = 6


class ParameterRangeError(EntgroupError, ValueError):
    exit_code = 7
