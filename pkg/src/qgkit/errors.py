"""Exception types shared across the toolkit."""


class QgkitError(Exception):
    """Base class for all toolkit errors."""


class ParseError(QgkitError):
    """Input bytes are not valid UTF-8 JSON. Carries the byte offset."""

    def __init__(self, message, byte_offset=None):
        super().__init__(message)
        self.byte_offset = byte_offset


class SchemaError(QgkitError):
    """JSON parsed but does not match the expected schema. Carries the
    dotted path of the missing or mistyped field."""

    def __init__(self, message, field_path=None):
        super().__init__(message)
        self.field_path = field_path


class ConfigError(QgkitError):
    """Invalid configuration combination or parameter value."""


class SpanNotVerifiedError(QgkitError):
    """An answer span failed verification against its context and an
    operation that requires a verified span was attempted."""


class BackendTransportError(QgkitError):
    """Backend unreachable after the configured retry budget."""

    def __init__(self, message, attempts):
        super().__init__(message)
        self.attempts = attempts


class BackendProtocolError(QgkitError):
    """Backend replied, but the reply does not match the wire contract."""


class ManifestMismatchError(QgkitError):
    """Two artifacts being combined were produced under incompatible
    manifests (differing metric variant or dataset fingerprint)."""
