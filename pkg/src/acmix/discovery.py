"""Selection of the most autocorrelated lags and their header encoding."""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidArgument, MalformedHeader
from .spectrum import AutocorrelationProfile, Mode, as_byte_signal, autocorrelation_wk

MAX_LAG_DEFAULT = 1 << 24
WINDOW_CAP_DEFAULT = 1 << 22

# Scores are compared on a grid of 2**-36 of the largest |R|, so rounding
# noise in the transform path cannot reorder lags that are tied exactly.
_SCORE_GRID_BITS = 36


@dataclass(frozen=True)
class DiscoveryConfig:
    n: int = 10
    min_lag: int = 1
    max_lag: int | None = None
    window_cap: int = WINDOW_CAP_DEFAULT
    mode: Mode = Mode.CENTERED
    # Lags never returned. With replace_excluded the next-best lags take
    # their place; otherwise the set simply shrinks.
    exclude: frozenset[int] = frozenset()
    replace_excluded: bool = True

    def __post_init__(self):
        object.__setattr__(self, "mode", Mode(self.mode))
        object.__setattr__(self, "exclude", frozenset(int(v) for v in self.exclude))
        if not 1 <= self.n <= 255:
            raise InvalidArgument(f"n must be in 1..255, got {self.n}")
        if self.min_lag < 1:
            raise InvalidArgument("min_lag must be >= 1")
        if self.max_lag is not None and self.max_lag < self.min_lag:
            raise InvalidArgument("max_lag must be >= min_lag")
        if self.window_cap < 1:
            raise InvalidArgument("window_cap must be >= 1")

    def effective_max_lag(self, profile_len: int) -> int:
        cap = MAX_LAG_DEFAULT if self.max_lag is None else self.max_lag
        return min(cap, profile_len - 1, (1 << 32) - 1)


@dataclass(frozen=True)
class LagSet:
    """Lags ordered by descending autocorrelation. Scores are diagnostic
    and take no part in equality or serialization."""

    lags: tuple[int, ...]
    scores: tuple[float, ...] | None = field(default=None, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "lags", tuple(int(v) for v in self.lags))
        if len(set(self.lags)) != len(self.lags):
            raise InvalidArgument("lags must be distinct")
        if any(not 1 <= v < (1 << 32) for v in self.lags):
            raise InvalidArgument("lags must lie in [1, 2**32)")

    def __len__(self) -> int:
        return len(self.lags)

    def __iter__(self):
        return iter(self.lags)

    def __getitem__(self, i):
        return self.lags[i]


def _quantized(values: np.ndarray) -> np.ndarray:
    scale = float(np.max(np.abs(values))) if values.size else 0.0
    if scale == 0.0 or not np.isfinite(scale):
        return np.zeros(values.shape, dtype=np.int64)
    return np.rint(values / scale * float(1 << _SCORE_GRID_BITS)).astype(np.int64)


def rank_lags(profile: AutocorrelationProfile | np.ndarray, config: DiscoveryConfig) -> LagSet:
    """Top-n lags in [min_lag, max_lag] by profile value, ties toward the
    smaller lag."""
    values = np.asarray(getattr(profile, "values", profile), dtype=np.float64)
    if values.size == 0:
        raise InvalidArgument("empty autocorrelation profile")
    lo = config.min_lag
    hi = config.effective_max_lag(values.size)
    if hi < lo:
        return LagSet((), ())

    q = _quantized(values)[lo : hi + 1]
    lags = np.arange(lo, hi + 1, dtype=np.int64)
    if config.exclude:
        keep = ~np.isin(lags, np.fromiter(config.exclude, dtype=np.int64))
        if config.replace_excluded:
            q, lags = q[keep], lags[keep]
        else:
            excluded_pos = ~keep
    want = min(config.n, q.size)
    if want == 0:
        return LagSet((), ())

    # prune with a partition before the full (score desc, lag asc) sort
    if q.size > 4 * want:
        kth = np.partition(q, q.size - want)[q.size - want]
        cand = np.nonzero(q >= kth)[0]
    else:
        cand = np.arange(q.size)
    order = cand[np.lexsort((lags[cand], -q[cand]))][:want]

    if config.exclude and not config.replace_excluded:
        order = order[~excluded_pos[order]]
    chosen = lags[order]
    scores = values[chosen]
    return LagSet(tuple(int(v) for v in chosen), tuple(float(s) for s in scores))


def discover(signal, config: DiscoveryConfig = DiscoveryConfig()) -> LagSet:
    """Rank lags of the leading window of ``signal`` via the fast
    autocorrelation."""
    x = as_byte_signal(signal)
    if x.size == 0:
        raise InvalidArgument("cannot discover lags of an empty signal")
    profile = autocorrelation_wk(x[: config.window_cap], config.mode)
    return rank_lags(profile, config)


def serialize_lags(lag_set: LagSet) -> bytes:
    """Each lag as an unsigned 32-bit little-endian integer, in set order."""
    return b"".join(struct.pack("<I", v) for v in lag_set.lags)


def parse_lags(data: bytes, count: int) -> LagSet:
    if count < 0 or len(data) != 4 * count:
        raise MalformedHeader(f"lag block holds {len(data)} bytes, expected {4 * count}")
    lags = struct.unpack(f"<{count}I", bytes(data))
    if len(set(lags)) != count:
        raise MalformedHeader("duplicate lag in header")
    if 0 in lags:
        raise MalformedHeader("lag 0 in header")
    return LagSet(lags)
