"""Archive format and whole-stream compress / decompress.

Layout (all integers little-endian)::

    0   4  magic "ACCM"
    4   1  version
    5   1  flags: bit 0 centered, bit 1 planar, bit 2 planar dedup,
               bits 3-7 counter table bits - 16
    6   1  channels
    7   4  nTotal, nPair, nTriple, planarLags (one byte each)
    11  6  original length, unsigned 48-bit
    17  1  lagCount
    18     lagCount x uint32 lags, then the coded payload
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .contexts import ContextFamilyConfig
from .discovery import DiscoveryConfig, LagSet, discover, parse_lags, serialize_lags
from .engine import decode_payload, encode_payload
from .errors import InvalidArgument, MalformedHeader, TrailingData, UnsupportedFormat
from .predictor import DEFAULT_TABLE_BITS, MAX_TABLE_BITS, MIN_TABLE_BITS
from .spectrum import Mode, as_byte_signal

MAGIC = b"ACCM"
VERSION = 1
HEADER_FIXED = 18
MAX_LENGTH = (1 << 48) - 1
FALLBACK_LAGS = (1,)

FLAG_CENTERED = 1
FLAG_PLANAR = 2
FLAG_DEDUP = 4
TABLE_SHIFT = 3

# One payload byte can carry at most ~2840 bytes of input (every bit coded at
# P = 4095/4096); longer declared lengths are rejected before allocating.
_MAX_EXPANSION = 2900

_FIXED = struct.Struct("<4sBBB4B")


@dataclass(frozen=True)
class ArchiveHeader:
    lags: LagSet
    family: ContextFamilyConfig
    original_length: int
    mode: Mode = Mode.CENTERED
    table_bits: int = DEFAULT_TABLE_BITS
    version: int = VERSION

    def __post_init__(self):
        f = self.family
        k = len(self.lags)
        if not (f.n_triple <= f.n_pair <= f.n_total <= k and f.planar_lags <= k):
            raise InvalidArgument("header needs nTriple <= nPair <= nTotal <= lagCount and planarLags <= lagCount")
        if k > 255:
            raise InvalidArgument("at most 255 lags fit in a header")
        if not 0 <= self.original_length <= MAX_LENGTH:
            raise InvalidArgument("original length does not fit in 48 bits")
        if self.original_length and not k:
            raise InvalidArgument("a non-empty archive needs at least one lag")
        if not MIN_TABLE_BITS <= self.table_bits <= MAX_TABLE_BITS:
            raise InvalidArgument(f"table bits must be in {MIN_TABLE_BITS}..{MAX_TABLE_BITS}")

    @property
    def size(self) -> int:
        return HEADER_FIXED + 4 * len(self.lags)

    def flags(self) -> int:
        v = (self.table_bits - MIN_TABLE_BITS) << TABLE_SHIFT
        if Mode(self.mode) is Mode.CENTERED:
            v |= FLAG_CENTERED
        if self.family.planar:
            v |= FLAG_PLANAR
        if self.family.planar_dedup:
            v |= FLAG_DEDUP
        return v

    def pack(self) -> bytes:
        f = self.family
        fixed = _FIXED.pack(MAGIC, self.version, self.flags(), f.channels,
                            f.n_total, f.n_pair, f.n_triple, f.planar_lags)
        length = self.original_length.to_bytes(6, "little")
        return fixed + length + bytes([len(self.lags)]) + serialize_lags(self.lags)

    @classmethod
    def parse(cls, data: bytes) -> "ArchiveHeader":
        """Header at the start of ``data``; trailing bytes are ignored."""
        data = bytes(data)
        if data[:4] != MAGIC:
            raise UnsupportedFormat("not an ACCM archive")
        if len(data) < 5 or data[4] != VERSION:
            raise UnsupportedFormat(f"unsupported archive version {data[4] if len(data) > 4 else None}")
        if len(data) < HEADER_FIXED:
            raise MalformedHeader(f"header truncated at {len(data)} bytes")
        _, version, flags, channels, nt, npr, ntr, npl = _FIXED.unpack_from(data)
        length = int.from_bytes(data[11:17], "little")
        count = data[17]
        planar = bool(flags & FLAG_PLANAR)
        table_bits = MIN_TABLE_BITS + (flags >> TABLE_SHIFT)
        if table_bits > MAX_TABLE_BITS:
            raise MalformedHeader(f"table bits {table_bits} out of range")
        if channels < 1:
            raise MalformedHeader("channels must be >= 1")
        if not (ntr <= npr <= nt <= count and npl <= count):
            raise MalformedHeader("lag counts violate nTriple <= nPair <= nTotal <= lagCount")
        if planar != (npl > 0) or (flags & FLAG_DEDUP and not planar):
            raise MalformedHeader("planar flags disagree with planarLags")
        if length > 0 and count == 0:
            raise MalformedHeader("non-empty archive without lags")
        end = HEADER_FIXED + 4 * count
        if len(data) < end:
            raise MalformedHeader(f"lag block truncated: need {end} bytes, have {len(data)}")
        lags = parse_lags(data[HEADER_FIXED:end], count)
        family = ContextFamilyConfig(nt, npr, ntr, channels, planar, npl, bool(flags & FLAG_DEDUP))
        mode = Mode.CENTERED if flags & FLAG_CENTERED else Mode.RAW
        return cls(lags, family, length, mode, table_bits, version)


def _resolve_lags(x: np.ndarray, discovery: DiscoveryConfig, lags) -> LagSet:
    if lags is not None:
        return lags if isinstance(lags, LagSet) else LagSet(tuple(lags))
    found = discover(x, discovery)
    return found if len(found) else LagSet(FALLBACK_LAGS)


def compress(
    data,
    discovery: DiscoveryConfig = DiscoveryConfig(),
    family: ContextFamilyConfig = ContextFamilyConfig(),
    table_bits: int = DEFAULT_TABLE_BITS,
    lags=None,
) -> bytes:
    """Archive of ``data``. ``lags`` overrides discovery (used for the
    adjacent-lag baseline)."""
    x = as_byte_signal(data)
    budget = discovery.n if lags is None else len(tuple(lags))
    if family.n_total > budget or (family.planar and family.planar_lags > budget):
        raise InvalidArgument(f"context families need more lags than the {budget} requested")
    if x.size == 0:
        empty = ContextFamilyConfig(0, 0, 0, family.channels)
        return ArchiveHeader(LagSet(()), empty, 0, discovery.mode, table_bits).pack()

    lag_set = _resolve_lags(x, discovery, lags)
    # short or flat inputs can yield fewer lags than asked for
    fam = family.clamped(len(lag_set))
    header = ArchiveHeader(lag_set, fam, int(x.size), discovery.mode, table_bits)
    return header.pack() + encode_payload(x, lag_set.lags, fam, table_bits)


def decompress(archive) -> bytes:
    archive = bytes(archive)
    header = ArchiveHeader.parse(archive)
    payload = archive[header.size :]
    if header.original_length == 0:
        if payload:
            raise TrailingData(f"{len(payload)} bytes follow an empty archive")
        return b""
    if header.original_length > _MAX_EXPANSION * (len(payload) + 5):
        raise MalformedHeader(f"declared length {header.original_length} is impossible for a {len(payload)}-byte payload")
    return decode_payload(payload, header.original_length, header.lags.lags, header.family, header.table_bits)
