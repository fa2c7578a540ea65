"""Memoryless simulation of stochastic processes: classical and quantum embeddability,
space-time costs and accessibility under a fixed point."""

from .errors import (
    DegenerateFixedPoint,
    EmbedlabError,
    InvalidInput,
    MemoryRequired,
    NoChannel,
    NotAccessible,
    UnsupportedDimension,
)

__version__ = "0.1.0"

__all__ = [
    "DegenerateFixedPoint",
    "EmbedlabError",
    "InvalidInput",
    "MemoryRequired",
    "NoChannel",
    "NotAccessible",
    "UnsupportedDimension",
]
