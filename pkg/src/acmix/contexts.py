"""Context identifiers derived from a lag set and the coded history.

Every identifier is a 32-bit FNV-1a style hash whose first part is a family
tag, so different families never share a slot structurally. The functions
prefixed with ``_`` are numba kernels shared with the coding loop; the public
functions are thin wrappers for inspection and testing.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb

import numpy as np
from numba import njit

from .errors import InvalidArgument

FNV_BASIS = 2166136261
FNV_PRIME = 16777619
M32 = 0xFFFFFFFF

# family tags, format-frozen
TAG_LAG = 0xAC01
TAG_DIFF = 0xAC02
TAG_SUM = 0xAC03
TAG_JOINT = 0xAC04
TAG_PAIR = 0xAC05
TAG_TRIPLE = 0xAC06
TAG_PLANAR = 0xAC10  # + template number 0..7
TAG_ORDER0 = 0xAC20

PLANAR_TEMPLATES = 8
# offsets the planar templates read unconditionally; a lag equal to one of
# these only duplicates an existing context
PLANAR_FIXED_NEIGHBOURS = (1, 2, 3)


def hash_combine(parts) -> int:
    """FNV-1a over 32-bit parts: h = (h ^ x) * 16777619 mod 2**32."""
    parts = list(parts)
    if not 1 <= len(parts) <= 8:
        raise InvalidArgument("hash_combine takes 1..8 parts")
    h = FNV_BASIS
    for x in parts:
        h = ((h ^ (int(x) & M32)) * FNV_PRIME) & M32
    return h


def channel_of(position: int, channels: int) -> int:
    if channels < 1:
        raise InvalidArgument("channels must be >= 1")
    return position % channels


@njit(cache=True, inline="always")
def _fnv(h, x):
    return ((h ^ x) * FNV_PRIME) & M32


@njit(cache=True, inline="always")
def _finish(h, channels, ch):
    # the channel component is omitted entirely for single-channel data
    if channels > 1:
        h = _fnv(h, ch)
    return h


@njit(cache=True, inline="always")
def _back(buf, p, d):
    """buf[p - d]; 0 before the stream start or for d < 1 (not yet coded)."""
    if d < 1 or d > p:
        return 0
    return np.int64(buf[p - d])


@dataclass(frozen=True)
class ContextFamilyConfig:
    n_total: int = 10
    n_pair: int = 7
    n_triple: int = 5
    channels: int = 1
    planar: bool = False
    planar_lags: int = 0
    # skip planar lags equal to a fixed template neighbour instead of emitting
    # duplicates
    planar_dedup: bool = False

    def __post_init__(self):
        if not 0 <= self.n_triple <= self.n_pair <= self.n_total <= 255:
            raise InvalidArgument("need 0 <= n_triple <= n_pair <= n_total <= 255")
        if not 1 <= self.channels <= 255:
            raise InvalidArgument("channels must be in 1..255")
        if not 0 <= self.planar_lags <= 255:
            raise InvalidArgument("planar_lags must be in 0..255")
        if self.planar and self.planar_lags < 1:
            raise InvalidArgument("planar family needs planar_lags >= 1")

    def check_lags(self, lag_count: int) -> None:
        if self.n_total > lag_count or (self.planar and self.planar_lags > lag_count):
            raise InvalidArgument(f"configuration uses more lags than the {lag_count} available")

    def clamped(self, lag_count: int) -> "ContextFamilyConfig":
        """Same configuration with every lag count capped at ``lag_count``."""
        t = min(self.n_total, lag_count)
        pr = min(self.n_pair, t)
        tr = min(self.n_triple, pr)
        pl = min(self.planar_lags, lag_count) if self.planar else 0
        return ContextFamilyConfig(t, pr, tr, self.channels, self.planar and pl > 0, pl, self.planar_dedup)


def family_counts(config: ContextFamilyConfig) -> dict[str, int]:
    n = config.n_total
    return {
        "lag": n,
        "diff": n,
        "sum": n,
        "joint": n,
        "pair": comb(config.n_pair, 2),
        "triple": comb(config.n_triple, 3),
    }


def planar_lag_indices(lags, config: ContextFamilyConfig) -> np.ndarray:
    """Indices into ``lags`` that feed the planar family."""
    if not config.planar:
        return np.zeros(0, dtype=np.int64)
    idx = [
        k
        for k in range(config.planar_lags)
        if not (config.planar_dedup and lags[k] in PLANAR_FIXED_NEIGHBOURS)
    ]
    return np.asarray(idx, dtype=np.int64)


@njit(cache=True)
def _lag_value_ids(buf, p, lags, n_total, channels, out, pos):
    """Type 1: the byte at each lag. Returns the next free position."""
    ch = p % channels
    for k in range(n_total):
        h = _fnv(_fnv(FNV_BASIS, TAG_LAG), k)
        h = _fnv(h, _back(buf, p, lags[k]))
        out[pos] = _finish(h, channels, ch)
        pos += 1
    return pos


@njit(cache=True)
def _pair_ids(buf, p, lags, n_pair, channels, out, pos):
    ch = p % channels
    for k1 in range(n_pair):
        b1 = _back(buf, p, lags[k1])
        for k2 in range(k1 + 1, n_pair):
            h = _fnv(_fnv(_fnv(FNV_BASIS, TAG_PAIR), k1), k2)
            h = _fnv(_fnv(h, b1), _back(buf, p, lags[k2]))
            out[pos] = _finish(h, channels, ch)
            pos += 1
    return pos


@njit(cache=True)
def _triple_ids(buf, p, lags, n_triple, channels, out, pos):
    ch = p % channels
    for k1 in range(n_triple):
        b1 = _back(buf, p, lags[k1])
        for k2 in range(k1 + 1, n_triple):
            b2 = _back(buf, p, lags[k2])
            for k3 in range(k2 + 1, n_triple):
                h = _fnv(_fnv(_fnv(_fnv(FNV_BASIS, TAG_TRIPLE), k1), k2), k3)
                h = _fnv(_fnv(_fnv(h, b1), b2), _back(buf, p, lags[k3]))
                out[pos] = _finish(h, channels, ch)
                pos += 1
    return pos


@njit(cache=True)
def _partial_ids(buf, p, lags, n_total, channels, c0, out, pos):
    """Families that involve the byte being coded (types 2, 3, 4); ``c0`` is
    its partial value: coded high bits behind a leading 1."""
    ch = p % channels
    for k in range(n_total):
        b = _back(buf, p, lags[k])
        h = _fnv(_fnv(_fnv(FNV_BASIS, TAG_DIFF), k), (c0 - b) & 255)
        out[pos + k] = _finish(h, channels, ch)
        h = _fnv(_fnv(_fnv(FNV_BASIS, TAG_SUM), k), (c0 + b) & 255)
        out[pos + n_total + k] = _finish(h, channels, ch)
        h = _fnv(_fnv(_fnv(_fnv(FNV_BASIS, TAG_JOINT), k), c0), b)
        out[pos + 2 * n_total + k] = _finish(h, channels, ch)
    return pos + 3 * n_total


@njit(cache=True)
def _planar_ids(buf, p, lags, planar_idx, channels, out, pos):
    ch = p % channels
    b1 = _back(buf, p, 1)
    b2 = _back(buf, p, 2)
    b3 = _back(buf, p, 3)
    for k in planar_idx:
        L = lags[k]
        a = _back(buf, p, L)
        above_left = _back(buf, p, L + 1)
        h = _fnv(_fnv(_fnv(FNV_BASIS, TAG_PLANAR + 0), k), a)
        out[pos] = _finish(h, channels, ch)
        h = _fnv(_fnv(_fnv(_fnv(FNV_BASIS, TAG_PLANAR + 1), k), a), b1)
        out[pos + 1] = _finish(h, channels, ch)
        h = _fnv(_fnv(_fnv(_fnv(_fnv(FNV_BASIS, TAG_PLANAR + 2), k), a), b1), b2)
        out[pos + 2] = _finish(h, channels, ch)
        h = _fnv(_fnv(FNV_BASIS, TAG_PLANAR + 3), k)
        h = _fnv(_fnv(_fnv(h, ((b3 + a) & 255) >> 3), b1 >> 4), b2 >> 4)
        out[pos + 3] = _finish(h, channels, ch)
        h = _fnv(_fnv(_fnv(_fnv(FNV_BASIS, TAG_PLANAR + 4), k), a), (b1 - above_left) & 255)
        out[pos + 4] = _finish(h, channels, ch)
        h = _fnv(_fnv(_fnv(FNV_BASIS, TAG_PLANAR + 5), k), (a + b1 - above_left) & 255)
        out[pos + 5] = _finish(h, channels, ch)
        h = _fnv(_fnv(FNV_BASIS, TAG_PLANAR + 6), k)
        h = _fnv(_fnv(h, _back(buf, p, 3 * L - 3)), _back(buf, p, 3 * L - 6))
        out[pos + 6] = _finish(h, channels, ch)
        h = _fnv(_fnv(FNV_BASIS, TAG_PLANAR + 7), k)
        h = _fnv(_fnv(h, _back(buf, p, 3 * L + 3)), _back(buf, p, 3 * L + 6))
        out[pos + 7] = _finish(h, channels, ch)
        pos += PLANAR_TEMPLATES
    return pos


@njit(cache=True)
def _order0_id(p, channels):
    return _finish(_fnv(FNV_BASIS, TAG_ORDER0), channels, p % channels)


class HistoryBuffer:
    """Ring of the most recent ``capacity`` bytes with an absolute position.

    ``back(d)`` returns the byte ``d`` positions before the current one, or 0
    when that lies before the start of the stream.
    """

    def __init__(self, capacity: int):
        if capacity < 1:
            raise InvalidArgument("capacity must be >= 1")
        self.capacity = int(capacity)
        self._ring = np.zeros(self.capacity, dtype=np.uint8)
        self.position = 0

    @classmethod
    def from_bytes(cls, data, capacity: int | None = None) -> "HistoryBuffer":
        data = bytes(data)
        hb = cls(capacity or max(len(data), 1))
        for b in data:
            hb.push(b)
        return hb

    def push(self, byte: int) -> None:
        self._ring[self.position % self.capacity] = byte
        self.position += 1

    def back(self, d: int) -> int:
        if d < 1 or d > self.position:
            return 0
        if d > self.capacity:
            raise IndexError(f"offset {d} exceeds history capacity {self.capacity}")
        return int(self._ring[(self.position - d) % self.capacity])

    def window(self, align: int = 1) -> tuple[np.ndarray, int]:
        """Linearized retained bytes and the index of the current position in
        them. The view is zero-padded at the front so that the index agrees
        with the absolute position modulo ``align``."""
        kept = min(self.position, self.capacity)
        start = self.position - kept
        idx = (np.arange(start, self.position) % self.capacity).astype(np.int64)
        pad = start % align
        return np.concatenate([np.zeros(pad, dtype=np.uint8), self._ring[idx]]), kept + pad


def _lag_array(lags) -> np.ndarray:
    return np.asarray(getattr(lags, "lags", lags), dtype=np.int64)


def _view(history: HistoryBuffer, reach: int, channels: int) -> tuple[np.ndarray, int]:
    if history.position > history.capacity and reach > history.capacity:
        raise IndexError(f"offset {reach} exceeds history capacity {history.capacity}")
    return history.window(channels)


def general_contexts(
    history: HistoryBuffer, lags, config: ContextFamilyConfig, partial: int = 1
) -> list[int]:
    """Ids of families 1-6 for the current position, in family order.

    ``partial`` is the current byte's coded prefix behind a leading 1 bit
    (1 when no bit of the byte has been coded yet).
    """
    lag_arr = _lag_array(lags)
    if lag_arr.size == 0:
        raise InvalidArgument("lag set is empty")
    config.check_lags(lag_arr.size)
    if not 1 <= partial <= 255:
        raise InvalidArgument("partial byte must be in 1..255")
    buf, p = _view(history, int(lag_arr[: config.n_total].max(initial=0)), config.channels)
    counts = family_counts(config)
    out = np.zeros(sum(counts.values()), dtype=np.int64)
    pos = _lag_value_ids(buf, p, lag_arr, config.n_total, config.channels, out, 0)
    pos = _partial_ids(buf, p, lag_arr, config.n_total, config.channels, partial, out, pos)
    pos = _pair_ids(buf, p, lag_arr, config.n_pair, config.channels, out, pos)
    pos = _triple_ids(buf, p, lag_arr, config.n_triple, config.channels, out, pos)
    return [int(v) for v in out[:pos]]


def planar_contexts(history: HistoryBuffer, lags, config: ContextFamilyConfig) -> list[int]:
    """Eight template ids per planar lag, the lag standing in for a row width."""
    if not config.planar:
        raise InvalidArgument("planar family is disabled")
    lag_arr = _lag_array(lags)
    config.check_lags(lag_arr.size)
    idx = planar_lag_indices(lag_arr, config)
    reach = 3 * int(lag_arr[idx].max(initial=0)) + 6
    buf, p = _view(history, reach, config.channels)
    out = np.zeros(PLANAR_TEMPLATES * idx.size, dtype=np.int64)
    _planar_ids(buf, p, lag_arr, idx, config.channels, out, 0)
    return [int(v) for v in out]
