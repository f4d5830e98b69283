"""The per-bit modeling loop shared by compression and decompression.

Both directions run the same kernel; only the source of each bit differs, so
the decoder rebuilds exactly the encoder's contexts, counters and weights.
"""

from __future__ import annotations

from math import comb

import numpy as np
from numba import njit

from . import coder
from .contexts import (
    ContextFamilyConfig,
    _lag_value_ids,
    _order0_id,
    _pair_ids,
    _partial_ids,
    _planar_ids,
    _triple_ids,
    planar_lag_indices,
)
from .errors import StreamExhausted
from .predictor import (
    COUNTER_INIT,
    RECIPROCALS,
    SQUASH_TABLE,
    STRETCH_TABLE,
    WEIGHT_INIT,
    LOGIT_FRAC,
    _mix_dot,
    _mix_train,
    _slot_p12,
    _squash12,
    _table_lookup,
    _table_update,
)

M32 = 0xFFFFFFFF
BIAS_STRETCH = 1 << LOGIT_FRAC


@njit(cache=True, inline="always")
def _mul32(a, b):
    # a * b mod 2**32 without overflowing int64
    return (a * (b & 0xFFFF) + (((a * (b >> 16)) & 0xFFFF) << 16)) & M32


@njit(cache=True, inline="always")
def _bucket(ident, prefix):
    h = (ident + prefix * 0x9E3779B1) & M32
    h ^= h >> 16
    h = _mul32(h, 0x85EBCA6B)
    h ^= h >> 13
    h = _mul32(h, 0xC2B2AE35)
    h ^= h >> 16
    return h & 0xFFFFFFF0


@njit(cache=True, inline="always")
def _nibble_split(c0, bitpos):
    # (bucket prefix, index within the bucket) of a partial byte
    if bitpos < 4:
        return 0, c0
    s = bitpos - 4
    return c0 >> s, (c0 & ((1 << s) - 1)) | (1 << s)


@njit(cache=True)
def _slot_id(ident, c0, bitpos):
    """Per-bit table id of a context: the context id mixed with the partial
    byte. Ids of one nibble share a 16-slot bucket, indexed by the bits of
    the nibble coded so far."""
    prefix, nib = _nibble_split(c0, bitpos)
    return _bucket(ident, prefix) | nib


def slot_id(ident: int, partial: int) -> int:
    if not 1 <= partial <= 255:
        raise ValueError("partial byte must be in 1..255")
    return int(_slot_id(np.int64(ident), np.int64(partial), partial.bit_length() - 1))


def input_count(config: ContextFamilyConfig, n_planar: int) -> int:
    """Counter-backed mixer inputs (the bias input comes on top)."""
    return 4 * config.n_total + comb(config.n_pair, 2) + comb(config.n_triple, 3) + 8 * n_planar + 1


@njit(cache=True)
def _run(src, n, decode, lags, n_total, n_pair, n_triple, channels, planar_idx,
         n_ctx, table_bits, sq, stt, rec):
    mask = (1 << table_bits) - 1
    slots = np.full(1 << table_bits, COUNTER_INIT, dtype=np.uint32)
    n_in = n_ctx + 1
    weights = np.full((8, n_in), WEIGHT_INIT, dtype=np.int64)
    ids = np.zeros(n_ctx, dtype=np.int64)
    stv = np.zeros(n_in, dtype=np.int64)
    stv[n_ctx] = BIAS_STRETCH
    sidx = np.zeros(n_ctx, dtype=np.int64)
    buckets = np.zeros(n_ctx, dtype=np.int64)

    est = np.zeros(5, dtype=np.int64)
    est[coder.E_RANGE] = M32
    est[coder.E_CACHE] = -1
    dst = np.zeros(4, dtype=np.int64)
    if decode:
        buf = np.zeros(n, dtype=np.uint8)
        out = np.zeros(0, dtype=np.uint8)
        coder._decoder_init(src, dst)
    else:
        buf = src
        out = np.empty(n // 2 + 64, dtype=np.uint8)

    for p in range(n):
        pos = _lag_value_ids(buf, p, lags, n_total, channels, ids, 0)
        pos += 3 * n_total
        pos = _pair_ids(buf, p, lags, n_pair, channels, ids, pos)
        pos = _triple_ids(buf, p, lags, n_triple, channels, ids, pos)
        pos = _planar_ids(buf, p, lags, planar_idx, channels, ids, pos)
        ids[pos] = _order0_id(p, channels)

        c0 = 1
        for j in range(8):
            prefix, nib = _nibble_split(c0, j)
            if j == 0 or j == 4:
                for i in range(n_ctx):
                    buckets[i] = _bucket(ids[i], prefix)
            _partial_ids(buf, p, lags, n_total, channels, c0, ids, n_total)
            for i in range(n_total, 4 * n_total):
                buckets[i] = _bucket(ids[i], prefix)
            for i in range(n_ctx):
                idx = _table_lookup(slots, buckets[i] | nib, mask)
                sidx[i] = idx
                stv[i] = stt[_slot_p12(slots[idx])]
            w = weights[j]
            p1 = _squash12(_mix_dot(w, stv, n_in), sq)

            if decode:
                bit = coder._decode_bit(src, dst, p1)
                if dst[coder.D_ERROR]:
                    return buf[:p], out, dst
            else:
                bit = (np.int64(buf[p]) >> (7 - j)) & 1
                out = coder._encode_bit(out, est, p1, bit)

            _mix_train(w, stv, n_in, (bit << 12) - p1)
            for i in range(n_ctx):
                _table_update(slots, sidx[i], bit, rec)
            c0 = (c0 << 1) | bit
        if decode:
            buf[p] = c0 & 255

    if not decode:
        out = coder._flush(out, est)
        out = out[: est[coder.E_POS]]
    return buf, out, dst


def _prepare(lags, config: ContextFamilyConfig):
    lag_arr = np.asarray(list(lags), dtype=np.int64)
    config.check_lags(lag_arr.size)
    planar_idx = planar_lag_indices(lag_arr, config)
    return lag_arr, planar_idx, input_count(config, planar_idx.size)


def encode_payload(data: np.ndarray, lags, config: ContextFamilyConfig, table_bits: int) -> bytes:
    lag_arr, planar_idx, n_ctx = _prepare(lags, config)
    src = np.array(data, dtype=np.uint8, copy=True)
    _, out, _ = _run(src, src.size, False, lag_arr, config.n_total, config.n_pair,
                     config.n_triple, config.channels, planar_idx, n_ctx, table_bits,
                     SQUASH_TABLE, STRETCH_TABLE, RECIPROCALS)
    return out.tobytes()


def decode_payload(payload: bytes, length: int, lags, config: ContextFamilyConfig, table_bits: int) -> bytes:
    lag_arr, planar_idx, n_ctx = _prepare(lags, config)
    src = np.frombuffer(bytes(payload), dtype=np.uint8).copy()
    buf, _, dst = _run(src, int(length), True, lag_arr, config.n_total, config.n_pair,
                       config.n_triple, config.channels, planar_idx, n_ctx, table_bits,
                       SQUASH_TABLE, STRETCH_TABLE, RECIPROCALS)
    if dst[coder.D_ERROR]:
        raise StreamExhausted(f"payload exhausted after {buf.size} of {length} bytes")
    coder.check_decoder_end(src, dst)
    return buf.tobytes()
