"""Exception types raised across embedlab."""


class EmbedlabError(Exception):
    """Base class for every error raised by this package."""

    kind = "error"


class InvalidInput(EmbedlabError, ValueError):
    kind = "invalid-input"


class UnsupportedDimension(EmbedlabError, ValueError):
    kind = "unsupported-dimension"


class NotAccessible(EmbedlabError, ValueError):
    kind = "not-accessible"


class NoChannel(EmbedlabError, ValueError):
    kind = "no-channel"


class DegenerateFixedPoint(EmbedlabError, ValueError):
    kind = "degenerate-fixed-point"


class MemoryRequired(EmbedlabError, ValueError):
    """Raised when a requested process cannot be produced without memory."""

    kind = "memory-required"
