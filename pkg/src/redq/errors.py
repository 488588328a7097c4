"""Exception types raised across the package."""


class RedqError(Exception):
    pass


class InvalidRequestDegree(RedqError, ValueError):
    pass


class ConditioningOnNullEvent(RedqError, ValueError):
    pass


class IntegrationDivergence(RedqError, ArithmeticError):
    pass


class SchedulingInPast(RedqError, ValueError):
    pass


class CompletionOnNonBusyServer(RedqError, RuntimeError):
    pass


class InsufficientReplications(RedqError, ValueError):
    pass


class ConfigError(RedqError, ValueError):
    pass


class ParseError(ConfigError):
    def __init__(self, message, *, key=None, line=None):
        where = []
        if key is not None:
            where.append(f"key {key!r}")
        if line is not None:
            where.append(f"line {line}")
        prefix = f"{', '.join(where)}: " if where else ""
        super().__init__(prefix + message)
        self.key = key
        self.line = line


class ValidationError(ConfigError):
    def __init__(self, message, *, key=None):
        super().__init__(f"{key}: {message}" if key else message)
        self.key = key
