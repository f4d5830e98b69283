"""Binary range coder with carry propagation.

State is a 33-bit ``low`` (bit 32 is a pending carry) and a 32-bit
``range`` kept at or above 2**24 by byte-wise renormalization. A byte that
might still receive a carry waits in ``cache``; a run of 0xFF bytes behind
it is only counted until the carry question is settled.

The flush writes all four bytes of ``low``, so the decoder consumes exactly
the bytes the encoder produced: four to prime its code register and one per
renormalization. Reading past the end therefore means the payload was
truncated, and bytes left over mean it was padded. A shorter flush would
save up to three bytes but lets a truncated stream decode as a different
valid message.
"""

from __future__ import annotations

import numpy as np
from numba import njit

from .errors import AcmixError, StreamExhausted, TrailingData

M32 = 0xFFFFFFFF
TOP = 1 << 24
PROB_BITS = 12

# encoder state slots
E_LOW, E_RANGE, E_CACHE, E_PENDING, E_POS = range(5)
# decoder state slots
D_RANGE, D_CODE, D_POS, D_ERROR = range(4)
FLUSH_BYTES = 4


def new_encoder_state() -> np.ndarray:
    st = np.zeros(5, dtype=np.int64)
    st[E_RANGE] = M32
    st[E_CACHE] = -1
    return st


@njit(cache=True)
def _put(out, st, byte):
    pos = st[E_POS]
    if pos >= out.shape[0]:
        grown = np.empty(max(2 * out.shape[0], 64), dtype=np.uint8)
        grown[:pos] = out[:pos]
        out = grown
    out[pos] = byte
    st[E_POS] = pos + 1
    return out


@njit(cache=True)
def _shift_low(out, st):
    low = st[E_LOW]
    if low < 0xFF000000 or low > M32:
        carry = low >> 32
        if st[E_CACHE] >= 0:
            out = _put(out, st, (st[E_CACHE] + carry) & 0xFF)
        for _ in range(st[E_PENDING]):
            out = _put(out, st, (0xFF + carry) & 0xFF)
        st[E_PENDING] = 0
        st[E_CACHE] = (low >> 24) & 0xFF
    else:
        st[E_PENDING] += 1
    st[E_LOW] = (low << 8) & M32
    return out


@njit(cache=True)
def _encode_bit(out, st, p1, bit):
    """Code ``bit`` with P(bit = 1) = p1 / 4096; 1 <= p1 <= 4095."""
    r = st[E_RANGE]
    bound = (r * p1) >> PROB_BITS
    if bit:
        st[E_RANGE] = bound
    else:
        st[E_LOW] += bound
        st[E_RANGE] = r - bound
    while st[E_RANGE] < TOP:
        out = _shift_low(out, st)
        st[E_RANGE] <<= 8
    return out


@njit(cache=True)
def _flush(out, st):
    for _ in range(FLUSH_BYTES + 1):
        out = _shift_low(out, st)
    return out


@njit(cache=True)
def _next_byte(data, st):
    pos = st[D_POS]
    st[D_POS] = pos + 1
    if pos < data.shape[0]:
        return np.int64(data[pos])
    st[D_ERROR] = 1
    return np.int64(0)


@njit(cache=True)
def _decoder_init(data, st):
    st[D_RANGE] = M32
    st[D_CODE] = 0
    st[D_POS] = 0
    st[D_ERROR] = 0
    for _ in range(4):
        st[D_CODE] = (st[D_CODE] << 8) | _next_byte(data, st)


@njit(cache=True)
def _decode_bit(data, st, p1):
    r = st[D_RANGE]
    bound = (r * p1) >> PROB_BITS
    if st[D_CODE] < bound:
        bit = 1
        st[D_RANGE] = bound
    else:
        bit = 0
        st[D_CODE] -= bound
        st[D_RANGE] = r - bound
    while st[D_RANGE] < TOP:
        st[D_CODE] = ((st[D_CODE] << 8) | _next_byte(data, st)) & M32
        st[D_RANGE] <<= 8
    return bit


def check_decoder_end(data, st) -> None:
    """Raise unless the decoder consumed the payload exactly."""
    if st[D_ERROR]:
        raise StreamExhausted("coded stream ended early")
    if st[D_POS] < len(data):
        raise TrailingData(f"payload has {len(data)} bytes, only {st[D_POS]} were coded")


class Encoder:
    """Incremental interface: ``encode(bit, p1)`` then ``finish()``."""

    def __init__(self):
        self._st = new_encoder_state()
        self._out = np.empty(256, dtype=np.uint8)
        self._done = False

    def encode(self, bit: int, p1: int) -> None:
        if self._done:
            raise AcmixError("encoder already finished")
        if not 1 <= p1 <= 4095:
            raise ValueError("p1 must be in 1..4095")
        self._out = _encode_bit(self._out, self._st, int(p1), int(bit))

    def finish(self) -> bytes:
        if not self._done:
            self._out = _flush(self._out, self._st)
            self._done = True
        return self._out[: self._st[E_POS]].tobytes()


class Decoder:
    """Incremental interface: ``decode(p1)`` per bit, then ``finish()`` to
    validate the payload length."""

    def __init__(self, data: bytes):
        self._data = np.frombuffer(bytes(data), dtype=np.uint8)
        self._st = np.zeros(4, dtype=np.int64)
        _decoder_init(self._data, self._st)

    def decode(self, p1: int) -> int:
        if not 1 <= p1 <= 4095:
            raise ValueError("p1 must be in 1..4095")
        bit = int(_decode_bit(self._data, self._st, int(p1)))
        if self._st[D_ERROR]:
            raise StreamExhausted("coded stream ended early")
        return bit

    def finish(self) -> None:
        check_decoder_end(self._data, self._st)


@njit(cache=True)
def _encode_many(probs, bits):
    st = np.zeros(5, dtype=np.int64)
    st[E_RANGE] = M32
    st[E_CACHE] = -1
    out = np.empty(max(64, bits.shape[0] // 4), dtype=np.uint8)
    for i in range(bits.shape[0]):
        out = _encode_bit(out, st, probs[i], bits[i])
    out = _flush(out, st)
    return out[: st[E_POS]]


@njit(cache=True)
def _decode_many(data, probs, bits, st):
    _decoder_init(data, st)
    for i in range(probs.shape[0]):
        bits[i] = _decode_bit(data, st, probs[i])
        if st[D_ERROR]:
            return


def encode_bits(probs, bits) -> bytes:
    """Code a whole sequence of bits with their 12-bit P(bit=1)."""
    probs = np.asarray(probs, dtype=np.int64)
    bits = np.asarray(bits, dtype=np.int64)
    if probs.shape != bits.shape:
        raise ValueError("probs and bits differ in length")
    if probs.size and (probs.min() < 1 or probs.max() > 4095):
        raise ValueError("probabilities must be in 1..4095")
    return _encode_many(probs, bits).tobytes()


def decode_bits(data: bytes, probs) -> np.ndarray:
    probs = np.asarray(probs, dtype=np.int64)
    buf = np.frombuffer(bytes(data), dtype=np.uint8)
    bits = np.zeros(probs.shape[0], dtype=np.int64)
    st = np.zeros(4, dtype=np.int64)
    _decode_many(buf, probs, bits, st)
    check_decoder_end(buf, st)
    return bits
