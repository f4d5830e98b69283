"""Context-mixing compression with contexts chosen by autocorrelation."""

from .container import ArchiveHeader, compress, decompress
from .contexts import ContextFamilyConfig, channel_of, general_contexts, hash_combine, planar_contexts
from .discovery import DiscoveryConfig, LagSet, discover, rank_lags
from .errors import (
    AcmixError,
    InvalidArgument,
    MalformedHeader,
    StreamExhausted,
    TrailingData,
    UnsupportedFormat,
)
from .spectrum import Mode, autocorrelation_direct, autocorrelation_wk

__all__ = [
    "AcmixError",
    "ArchiveHeader",
    "ContextFamilyConfig",
    "DiscoveryConfig",
    "InvalidArgument",
    "LagSet",
    "MalformedHeader",
    "Mode",
    "StreamExhausted",
    "TrailingData",
    "UnsupportedFormat",
    "autocorrelation_direct",
    "autocorrelation_wk",
    "channel_of",
    "compress",
    "decompress",
    "discover",
    "general_contexts",
    "hash_combine",
    "planar_contexts",
    "rank_lags",
]
