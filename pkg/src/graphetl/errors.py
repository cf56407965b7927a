"""Exception hierarchy for the conversion engine."""

from __future__ import annotations


class GraphEtlError(Exception):
    """Base class for all errors raised by this package."""


class SchemaSyntaxError(GraphEtlError):
    """Schema text is malformed. Carries a 1-based source position."""

    def __init__(self, message: str, line: int, column: int = 1):
        super().__init__(message)
        self.message = message
        self.line = line
        self.column = column

    def diagnostic(self, filename: str = "<schema>") -> str:
        return f"error: {self.message} at {filename}:{self.line}:{self.column}"

    def __str__(self) -> str:
        return f"{self.message} (line {self.line}, column {self.column})"


class LinkError(GraphEtlError):
    """A schema references a wrapper that is missing or of the wrong kind."""


class SourceError(GraphEtlError):
    """A data source is unreadable or malformed."""


class DuplicateNameError(GraphEtlError):
    """A wrapper name was registered twice."""


class TransformError(GraphEtlError):
    """A user wrapper raised; carries context for diagnostics."""

    def __init__(self, wrapper: str, resource_type: str, ordinal: int, cause: BaseException):
        super().__init__(
            f"wrapper {wrapper!r} failed on resource {resource_type}[{ordinal}]: {cause!r}"
        )
        self.wrapper = wrapper
        self.resource_type = resource_type
        self.ordinal = ordinal
        self.cause = cause


class MissingAttributeError(GraphEtlError):
    """A value expression referenced an attribute the resource does not have."""

    def __init__(self, attr: str, resource_type: str, ordinal: int):
        super().__init__(f"resource {resource_type}[{ordinal}] has no attribute {attr!r}")
        self.attr = attr
        self.resource_type = resource_type
        self.ordinal = ordinal


class PrimaryNullError(GraphEtlError):
    """A primary attribute evaluated to null."""


class PrimaryConflictError(GraphEtlError):
    """An update tried to change the primary value of a merged element."""


class UnknownEndpointError(GraphEtlError):
    """A relationship referenced a node id that is not in the graph."""


class ConversionAborted(GraphEtlError):
    """A run under on_error=fail hit an element error."""


class TransportError(GraphEtlError):
    """The HTTP sink could not reach the endpoint or got a bad status."""


class RemoteError(GraphEtlError):
    """The graph endpoint reported an error for a submitted statement."""

    def __init__(self, code: str, message: str):
        super().__init__(f"{code}: {message}")
        self.code = code
        self.remote_message = message


class UnkeyedEndpointWarning(GraphEtlError):
    """Script sink cannot address a node without a primary attribute."""
