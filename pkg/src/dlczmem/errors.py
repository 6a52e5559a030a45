"""Exception hierarchy shared by all dlczmem modules."""


class DlczError(Exception):
    """Base class for every error raised by dlczmem."""


class DomainError(DlczError, ValueError):
    """A numeric argument lies outside the domain of an operation."""


class GeometryError(DomainError):
    """Beam directions or angles are inconsistent."""


class SequenceError(DlczError):
    """Events or probe times are out of order or malformed."""


class InfeasibleError(DlczError):
    """No Raman beam arrangement can produce the requested kick."""


class FitError(DlczError):
    """Least-squares fit failed to converge or got unusable input."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class ConfigError(DlczError):
    """Configuration file could not be parsed or failed validation."""


class SchemaError(DlczError):
    """A CSV/JSON file does not follow the emitted schema."""
