"""Exception hierarchy shared across the toolkit."""


class SrtkError(Exception):
    """Base class for all toolkit errors."""


class ConfigurationError(SrtkError):
    """Invalid configuration: unknown knowledge graph, missing endpoint, bad flag value."""


class RecordFormatError(SrtkError):
    """A record line could not be parsed or serialized."""


class TransportError(SrtkError):
    """An endpoint could not be reached, timed out, or kept failing after retries."""


class AuthenticationError(TransportError):
    """The endpoint rejected the request with 401/403."""


class ProtocolError(SrtkError):
    """The endpoint answered, but the body does not match the expected wire format."""
