"""Exception hierarchy shared by all chimsim modules."""


class ChimError(Exception):
    pass


class ConstructionUnsupported(ChimError):
    """Raised when no orthogonal family can be built for the requested order."""

    def __init__(self, q, lower=None, upper=None):
        self.q = q
        self.lower = lower
        self.upper = upper
        nearest = ", ".join(str(p) for p in (lower, upper) if p is not None)
        super().__init__(
            f"order {q} is not prime; nearest admissible orders: {nearest}")


class DimensionError(ChimError, ValueError):
    pass


class MalformedRectangle(ChimError, ValueError):
    pass


class DomainError(ChimError, ValueError):
    pass


class ScheduleMismatch(ChimError, ValueError):
    pass


class ConfigError(ChimError):
    """Bad configuration. Carries the offending line number or field name."""

    def __init__(self, message, line=None, field=None):
        self.line = line
        self.field = field
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field '{field}'")
        prefix = f"{', '.join(where)}: " if where else ""
        super().__init__(prefix + message)
